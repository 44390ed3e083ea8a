//! Lattice generators and the line-oriented network text format.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{LinkId, NetworkError, NodeId, QuantumNetwork};
use crate::schmidt::SchmidtValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    Square,
    DiagonalSquare,
    Honeycomb,
    FullyConnectedHoneycomb,
}

impl TopologyKind {
    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::Square => "square",
            TopologyKind::DiagonalSquare => "diagonal-square",
            TopologyKind::Honeycomb => "honeycomb",
            TopologyKind::FullyConnectedHoneycomb => "fully-connected-honeycomb",
        }
    }
}

impl std::str::FromStr for TopologyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            TopologyKind::Square,
            TopologyKind::DiagonalSquare,
            TopologyKind::Honeycomb,
            TopologyKind::FullyConnectedHoneycomb,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| format!("unknown topology '{s}'"))
    }
}

impl std::fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Lattice kind and size. For the square lattices `rows x cols` counts
/// nodes; for the honeycombs it counts hexagons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub kind: TopologyKind,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("topology needs at least one row and one column, got {rows}x{cols}")]
    Empty { rows: usize, cols: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Generates the lattice with every link at lambda = 1/2. Node ids are
/// row-major, links are sorted by `(min endpoint, max endpoint)`.
pub fn build_topology(spec: &TopologySpec) -> Result<QuantumNetwork, TopologyError> {
    if spec.rows == 0 || spec.cols == 0 {
        return Err(TopologyError::Empty { rows: spec.rows, cols: spec.cols });
    }
    let (nodes, edges) = match spec.kind {
        TopologyKind::Square => square(spec.rows, spec.cols, false),
        TopologyKind::DiagonalSquare => square(spec.rows, spec.cols, true),
        TopologyKind::Honeycomb => honeycomb(spec.rows, spec.cols, false),
        TopologyKind::FullyConnectedHoneycomb => honeycomb(spec.rows, spec.cols, true),
    };
    let links: Vec<_> = edges.into_iter().map(|(u, v)| (u, v, SchmidtValue::MAXIMAL)).collect();
    Ok(QuantumNetwork::new(nodes, &links)?)
}

fn square(rows: usize, cols: usize, diagonals: bool) -> (usize, BTreeSet<(NodeId, NodeId)>) {
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = BTreeSet::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.insert((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.insert((id(r, c), id(r + 1, c)));
            }
            if diagonals && r + 1 < rows && c + 1 < cols {
                edges.insert((id(r, c), id(r + 1, c + 1)));
                edges.insert((id(r, c + 1), id(r + 1, c)));
            }
        }
    }
    (rows * cols, edges)
}

/// Brick-wall honeycomb with `rows x cols` hexagons.
///
/// Lattice points are `(i, j)` with column `i in 0..=cols` and height
/// `j in 0..=2*rows+1`. Vertical edges join `(i, j)-(i, j+1)`; horizontal
/// edges join `(i, j)-(i+1, j)` when `i` and `j` have equal parity. The two
/// corner points left with a single edge are dropped.
fn honeycomb(rows: usize, cols: usize, complete_cells: bool) -> (usize, BTreeSet<(NodeId, NodeId)>) {
    let height = 2 * rows + 2;
    let removed = [(0, height - 1), (cols, (height - 1) * (cols % 2))];
    let mut index = HashMap::new();
    for j in 0..height {
        for i in 0..=cols {
            if !removed.contains(&(i, j)) {
                let next = index.len();
                index.insert((i, j), next);
            }
        }
    }
    let mut edges = BTreeSet::new();
    let mut add = |a: (usize, usize), b: (usize, usize)| {
        if let (Some(&u), Some(&v)) = (index.get(&a), index.get(&b)) {
            edges.insert((u.min(v), u.max(v)));
        }
    };
    for i in 0..=cols {
        for j in 0..height - 1 {
            add((i, j), (i, j + 1));
        }
    }
    for j in 0..height {
        for i in 0..cols {
            if i % 2 == j % 2 {
                add((i, j), (i + 1, j));
            }
        }
    }
    if complete_cells {
        for cell in hexagons(rows, cols) {
            for (k, &a) in cell.iter().enumerate() {
                for &b in &cell[k + 1..] {
                    add(a, b);
                }
            }
        }
    }
    (index.len(), edges)
}

/// Lattice points of every hexagon, row by row and left to right.
fn hexagons(rows: usize, cols: usize) -> Vec<[(usize, usize); 6]> {
    let mut out = Vec::with_capacity(rows * cols);
    for a in 0..rows {
        for b in 0..cols {
            let j0 = 2 * a + b % 2;
            out.push([(b, j0), (b, j0 + 1), (b, j0 + 2), (b + 1, j0), (b + 1, j0 + 1), (b + 1, j0 + 2)]);
        }
    }
    out
}

/// Serialises alive links as `nodes N` followed by `id u v lambda` lines.
pub fn write_network(net: &QuantumNetwork) -> String {
    let mut out = format!("nodes {}\n", net.node_count());
    for l in net.alive_links() {
        let _ = writeln!(out, "{} {} {} {}", l.id, l.endpoints.0, l.endpoints.1, l.lambda);
    }
    out
}

/// Parses the format written by [`write_network`]. Blank lines and text after
/// `#` are ignored; link ids must be `0, 1, 2, ...` in order.
pub fn read_network(text: &str) -> Result<QuantumNetwork, TopologyError> {
    let mut nodes = None;
    let mut links = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let err = |message: String| TopologyError::Parse { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if nodes.is_none() {
            match fields.as_slice() {
                ["nodes", count] => {
                    nodes = Some(count.parse::<usize>().map_err(|e| err(format!("bad node count: {e}")))?);
                }
                _ => return Err(err("expected header 'nodes N'".into())),
            }
            continue;
        }
        let [id, u, v, lambda] = fields.as_slice() else {
            return Err(err(format!("expected 'id u v lambda', got '{content}'")));
        };
        let id: LinkId = id.parse().map_err(|e| err(format!("bad link id: {e}")))?;
        if id != links.len() {
            return Err(err(format!("link ids must be consecutive from 0, expected {}", links.len())));
        }
        let u: NodeId = u.parse().map_err(|e| err(format!("bad node: {e}")))?;
        let v: NodeId = v.parse().map_err(|e| err(format!("bad node: {e}")))?;
        let lambda: f64 = lambda.parse().map_err(|e| err(format!("bad lambda: {e}")))?;
        let lambda = SchmidtValue::new(lambda).map_err(|e| err(e.to_string()))?;
        links.push((u, v, lambda));
    }
    let nodes = nodes.ok_or(TopologyError::Parse { line: 0, message: "missing 'nodes N' header".into() })?;
    Ok(QuantumNetwork::new(nodes, &links)?)
}
