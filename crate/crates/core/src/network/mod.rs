//! Mutable multigraph of link states with provenance tracking.
//!
//! Links are stored in an append-only table: an operation marks its inputs
//! dead and pushes a new link whose `origin` is the union of the inputs'
//! origins. Ids below `original_count` are the links the network was built
//! with.

mod topology;

use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schmidt::{distill_many, swap, SchmidtValue};

pub use topology::{build_topology, read_network, write_network, TopologyError, TopologyKind, TopologySpec};

pub type NodeId = usize;
pub type LinkId = usize;

static NEXT_SERIAL: AtomicU64 = AtomicU64::new(1);

fn fresh_serial() -> u64 {
    NEXT_SERIAL.fetch_add(1, Ordering::Relaxed)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("link {0} does not exist")]
    UnknownLink(LinkId),
    #[error("link {0} is no longer alive")]
    DeadLink(LinkId),
    #[error("link {0} is used twice")]
    DuplicateLink(LinkId),
    #[error("links {0} and {1} do not share exactly one endpoint")]
    NotAdjacent(LinkId, LinkId),
    #[error("distillation needs links on one node pair")]
    MismatchedEndpoints,
    #[error("distillation needs at least two links, got {0}")]
    TooFewLinks(usize),
    #[error("link endpoints must be distinct nodes, got {0}")]
    SelfLoop(NodeId),
    #[error("snapshot belongs to a different network state")]
    ForeignSnapshot,
    #[error("cannot set lambda on derived link {0}")]
    NotOriginal(LinkId),
    #[error("nodes {0} and {1} are not within two hops")]
    NotLocal(NodeId, NodeId),
}

/// One link (an entangled pair) between two distinct nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkState {
    pub id: LinkId,
    /// Stored with the smaller node first.
    pub endpoints: (NodeId, NodeId),
    pub lambda: SchmidtValue,
    /// Original links consumed to produce this one, sorted ascending.
    pub origin: Vec<LinkId>,
    pub alive: bool,
    serial: u64,
}

impl LinkState {
    pub fn other(&self, node: NodeId) -> NodeId {
        if self.endpoints.0 == node {
            self.endpoints.1
        } else {
            self.endpoints.0
        }
    }

    pub fn touches(&self, node: NodeId) -> bool {
        self.endpoints.0 == node || self.endpoints.1 == node
    }
}

/// An operation recorded in a solution log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Operation {
    Swap { inputs: [LinkId; 2], output: LinkId },
    Distill { inputs: Vec<LinkId>, output: LinkId },
}

impl Operation {
    pub fn output(&self) -> LinkId {
        match self {
            Operation::Swap { output, .. } | Operation::Distill { output, .. } => *output,
        }
    }

    pub fn inputs(&self) -> &[LinkId] {
        match self {
            Operation::Swap { inputs, .. } => inputs,
            Operation::Distill { inputs, .. } => inputs,
        }
    }
}

/// Restorable copy of a network's mutable state.
#[derive(Debug, Clone)]
pub struct Snapshot {
    uid: u64,
    len: usize,
    last_serial: u64,
    alive: Vec<bool>,
    lambdas: Vec<SchmidtValue>,
}

#[derive(Debug, Clone)]
pub struct QuantumNetwork {
    uid: u64,
    nodes: usize,
    original_count: usize,
    links: Vec<LinkState>,
    adjacency: Vec<Vec<LinkId>>,
}

impl PartialEq for QuantumNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
            && self.original_count == other.original_count
            && self.links.len() == other.links.len()
            && self.links.iter().zip(&other.links).all(|(a, b)| {
                a.endpoints == b.endpoints && a.lambda == b.lambda && a.alive == b.alive && a.origin == b.origin
            })
    }
}

impl QuantumNetwork {
    /// Builds a network of original links, each given as `(u, v, lambda)`.
    pub fn new(nodes: usize, links: &[(NodeId, NodeId, SchmidtValue)]) -> Result<Self, NetworkError> {
        let mut net = QuantumNetwork {
            uid: fresh_serial(),
            nodes,
            original_count: links.len(),
            links: Vec::with_capacity(links.len() * 2),
            adjacency: vec![Vec::new(); nodes],
        };
        for (id, &(u, v, lambda)) in links.iter().enumerate() {
            for n in [u, v] {
                if n >= nodes {
                    return Err(NetworkError::UnknownNode(n));
                }
            }
            if u == v {
                return Err(NetworkError::SelfLoop(u));
            }
            net.push_link((u, v), lambda, vec![id]);
        }
        Ok(net)
    }

    fn push_link(&mut self, (u, v): (NodeId, NodeId), lambda: SchmidtValue, origin: Vec<LinkId>) -> LinkId {
        let id = self.links.len();
        let endpoints = if u < v { (u, v) } else { (v, u) };
        self.links.push(LinkState { id, endpoints, lambda, origin, alive: true, serial: fresh_serial() });
        self.adjacency[u].push(id);
        self.adjacency[v].push(id);
        id
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn original_count(&self) -> usize {
        self.original_count
    }

    /// Every link ever created, alive or dead, indexed by id.
    pub fn links(&self) -> &[LinkState] {
        &self.links
    }

    pub fn alive_links(&self) -> impl Iterator<Item = &LinkState> {
        self.links.iter().filter(|l| l.alive)
    }

    pub fn link(&self, id: LinkId) -> Result<&LinkState, NetworkError> {
        self.links.get(id).ok_or(NetworkError::UnknownLink(id))
    }

    /// Alive links at `node`.
    pub fn links_at(&self, node: NodeId) -> &[LinkId] {
        &self.adjacency[node]
    }

    pub fn lambda(&self, id: LinkId) -> SchmidtValue {
        self.links[id].lambda
    }

    /// Overwrites the Schmidt value of an original link.
    pub fn set_lambda(&mut self, id: LinkId, lambda: SchmidtValue) -> Result<(), NetworkError> {
        if id >= self.original_count {
            return Err(if id < self.links.len() {
                NetworkError::NotOriginal(id)
            } else {
                NetworkError::UnknownLink(id)
            });
        }
        self.links[id].lambda = lambda;
        Ok(())
    }

    fn check_node(&self, n: NodeId) -> Result<(), NetworkError> {
        if n < self.nodes {
            Ok(())
        } else {
            Err(NetworkError::UnknownNode(n))
        }
    }

    fn check_alive(&self, id: LinkId) -> Result<&LinkState, NetworkError> {
        let l = self.link(id)?;
        if l.alive {
            Ok(l)
        } else {
            Err(NetworkError::DeadLink(id))
        }
    }

    /// Breadth-first hop count over alive links; `None` when disconnected.
    pub fn hop_distance(&self, a: NodeId, b: NodeId) -> Result<Option<usize>, NetworkError> {
        self.check_node(a)?;
        self.check_node(b)?;
        Ok(self.distances_from(a)[b])
    }

    /// Hop distances from `a` to every node over alive links.
    pub fn distances_from(&self, a: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.nodes];
        let mut queue = VecDeque::new();
        dist[a] = Some(0);
        queue.push_back(a);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &l in &self.adjacency[u] {
                let w = self.links[l].other(u);
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// All-pairs hop distances over alive links.
    pub fn distance_matrix(&self) -> Vec<Vec<Option<usize>>> {
        (0..self.nodes).map(|a| self.distances_from(a)).collect()
    }

    fn kill(&mut self, id: LinkId) {
        self.links[id].alive = false;
        let (u, v) = self.links[id].endpoints;
        for n in [u, v] {
            let adj = &mut self.adjacency[n];
            if let Some(pos) = adj.iter().position(|&x| x == id) {
                adj.swap_remove(pos);
            }
        }
    }

    /// Entanglement swapping at the node shared by `l1` and `l2`.
    pub fn apply_swap(&mut self, l1: LinkId, l2: LinkId) -> Result<LinkId, NetworkError> {
        if l1 == l2 {
            return Err(NetworkError::DuplicateLink(l1));
        }
        let a = self.check_alive(l1)?;
        let b = self.check_alive(l2)?;
        let (a0, a1) = a.endpoints;
        let shared = match (b.touches(a0), b.touches(a1)) {
            (true, false) => a0,
            (false, true) => a1,
            _ => return Err(NetworkError::NotAdjacent(l1, l2)),
        };
        let ends = (a.other(shared), b.other(shared));
        let lambda = swap(a.lambda, b.lambda);
        let origin = merge_sorted(&a.origin, &b.origin);
        self.kill(l1);
        self.kill(l2);
        Ok(self.push_link(ends, lambda, origin))
    }

    /// Distills parallel links between one node pair into a single link.
    pub fn apply_distill(&mut self, ids: &[LinkId]) -> Result<LinkId, NetworkError> {
        if ids.len() < 2 {
            return Err(NetworkError::TooFewLinks(ids.len()));
        }
        let mut values = Vec::with_capacity(ids.len());
        let mut origin: Vec<LinkId> = Vec::new();
        let ends = self.check_alive(ids[0])?.endpoints;
        for (i, &id) in ids.iter().enumerate() {
            if ids[..i].contains(&id) {
                return Err(NetworkError::DuplicateLink(id));
            }
            let l = self.check_alive(id)?;
            if l.endpoints != ends {
                return Err(NetworkError::MismatchedEndpoints);
            }
            values.push(l.lambda);
            origin = merge_sorted(&origin, &l.origin);
        }
        let lambda = distill_many(&values).expect("non-empty");
        for &id in ids {
            self.kill(id);
        }
        Ok(self.push_link(ends, lambda, origin))
    }

    /// Number of original links consumed to produce `id`.
    pub fn destroyed_count(&self, id: LinkId) -> Result<usize, NetworkError> {
        Ok(self.link(id)?.origin.len())
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            uid: self.uid,
            len: self.links.len(),
            last_serial: self.links.last().map_or(0, |l| l.serial),
            alive: self.links.iter().map(|l| l.alive).collect(),
            lambdas: self.links.iter().map(|l| l.lambda).collect(),
        }
    }

    /// Rolls back to `snap`. Only snapshots whose link table is a prefix of
    /// this network's history are accepted.
    pub fn restore(&mut self, snap: &Snapshot) -> Result<(), NetworkError> {
        let same_history = snap.uid == self.uid
            && snap.len <= self.links.len()
            && (snap.len == 0 || self.links[snap.len - 1].serial == snap.last_serial);
        if !same_history {
            return Err(NetworkError::ForeignSnapshot);
        }
        self.links.truncate(snap.len);
        for adj in &mut self.adjacency {
            adj.clear();
        }
        for (i, link) in self.links.iter_mut().enumerate() {
            link.alive = snap.alive[i];
            link.lambda = snap.lambdas[i];
            if link.alive {
                self.adjacency[link.endpoints.0].push(i);
                self.adjacency[link.endpoints.1].push(i);
            }
        }
        Ok(())
    }

    /// Applies a recorded operation sequence, translating the log's link ids
    /// into this network's. Ids below `original_count` map to themselves.
    pub fn replay(&mut self, log: &[Operation]) -> Result<Replay, NetworkError> {
        let mut replay = Replay { original_count: self.original_count, map: HashMap::new(), log: Vec::new() };
        for op in log {
            let inputs = op
                .inputs()
                .iter()
                .map(|&i| replay.translate(i))
                .collect::<Result<Vec<_>, _>>()?;
            let (out, recorded) = match op {
                Operation::Swap { .. } => {
                    let out = self.apply_swap(inputs[0], inputs[1])?;
                    (out, Operation::Swap { inputs: [inputs[0], inputs[1]], output: out })
                }
                Operation::Distill { .. } => {
                    let out = self.apply_distill(&inputs)?;
                    (out, Operation::Distill { inputs, output: out })
                }
            };
            replay.map.insert(op.output(), out);
            replay.log.push(recorded);
        }
        Ok(replay)
    }
}

/// Result of [`QuantumNetwork::replay`].
#[derive(Debug, Clone)]
pub struct Replay {
    original_count: usize,
    map: HashMap<LinkId, LinkId>,
    /// The operations as applied, in the replaying network's ids.
    pub log: Vec<Operation>,
}

impl Replay {
    /// Id in the replaying network of a link named `id` in the source log.
    pub fn translate(&self, id: LinkId) -> Result<LinkId, NetworkError> {
        if id < self.original_count {
            Ok(id)
        } else {
            self.map.get(&id).copied().ok_or(NetworkError::UnknownLink(id))
        }
    }
}

pub(crate) fn merge_sorted(a: &[LinkId], b: &[LinkId]) -> Vec<LinkId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}
