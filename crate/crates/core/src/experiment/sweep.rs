use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ConfigError, ExperimentConfig, PairSelection, SweepKind};
use super::ExperimentError;
use crate::disorder::{assign, derive_seed, DisorderMode, DisorderSpec};
use crate::engine::{sample_and_select_with, DistanceTable, EngineError};
use crate::metrics::aggregate_values;
use crate::network::{build_topology, NodeId, QuantumNetwork};

// Seed stream labels.
const PAIR_STREAM: u64 = 0x7061_6972;
const DISORDER_STREAM: u64 = 0x6469_736f;

/// One source-target run at one grid point and network sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub topology: &'static str,
    pub rows: usize,
    pub cols: usize,
    pub mode: &'static str,
    pub lambda_mean: f64,
    pub sigma: f64,
    pub network_sample: usize,
    pub source: NodeId,
    pub target: NodeId,
    pub distance: usize,
    pub final_lambda: f64,
    pub entanglement: f64,
    pub destroyed: usize,
    pub integrity: f64,
    pub connectivity: f64,
    pub failed: bool,
    pub seed: u64,
}

/// Means over pairs and network samples at one grid point and distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub lambda_mean: f64,
    pub sigma: f64,
    pub distance: usize,
    pub mean_entanglement: f64,
    pub mean_integrity: f64,
    pub mean_connectivity: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    /// Sorted by `(lambda_mean, network_sample, distance, source, target)`.
    pub records: Vec<SweepRecord>,
    /// Sorted by `(lambda_mean, distance)`.
    pub aggregates: Vec<AggregateRow>,
}

/// Pairs `(source, target, distance)` with `source < target`, sorted.
pub fn select_pairs(cfg: &ExperimentConfig, dist: &DistanceTable, nodes: usize) -> Result<Vec<(NodeId, NodeId, usize)>, ConfigError> {
    let mut pairs = Vec::new();
    match &cfg.pairs {
        PairSelection::Explicit { list } => {
            for &[a, b] in list {
                let bad = |m: String| ConfigError::Invalid { key: "pairs.list", message: m };
                if a >= nodes || b >= nodes {
                    return Err(bad(format!("pair [{a}, {b}] names a node outside 0..{nodes}")));
                }
                if a == b {
                    return Err(bad(format!("pair [{a}, {b}] has equal endpoints")));
                }
                let d = dist.get(a, b).ok_or_else(|| bad(format!("pair [{a}, {b}] is disconnected")))?;
                pairs.push((a.min(b), a.max(b), d));
            }
            pairs.sort_unstable();
            pairs.dedup();
        }
        PairSelection::AllPairs | PairSelection::PerDistanceCap { .. } => {
            for a in 0..nodes {
                for b in a + 1..nodes {
                    if let Some(d) = dist.get(a, b) {
                        pairs.push((a, b, d));
                    }
                }
            }
            if let PairSelection::PerDistanceCap { cap } = cfg.pairs {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, &[PAIR_STREAM]));
                let max_d = pairs.iter().map(|p| p.2).max().unwrap_or(0);
                let mut kept = Vec::new();
                for d in 1..=max_d {
                    let mut class: Vec<_> = pairs.iter().copied().filter(|p| p.2 == d).collect();
                    class.shuffle(&mut rng);
                    class.truncate(cap);
                    kept.extend(class);
                }
                kept.sort_unstable();
                pairs = kept;
            }
        }
    }
    if pairs.is_empty() {
        return Err(ConfigError::Invalid { key: "pairs", message: "pair selection is empty".into() });
    }
    Ok(pairs)
}

/// Uniform sweep: every link at the grid value, one network per point.
pub fn run_uniform_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput, ExperimentError> {
    if cfg.kind() != SweepKind::Uniform {
        return Err(ConfigError::Invalid { key: "sweep.lambda_grid", message: "uniform sweep needs lambda_grid".into() }.into());
    }
    run(cfg, DisorderMode::Uniform, 0.0, 1)
}

/// Disorder sweep: `network_samples` draws per mean.
pub fn run_disorder_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput, ExperimentError> {
    if cfg.kind() != SweepKind::Disorder {
        return Err(ConfigError::Invalid { key: "sweep.mean_grid", message: "disorder sweep needs mean_grid".into() }.into());
    }
    run(cfg, cfg.disorder.mode, cfg.disorder.sigma, cfg.sweep.network_samples)
}

/// Runs whichever sweep `cfg` describes.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput, ExperimentError> {
    match cfg.kind() {
        SweepKind::Uniform => run_uniform_sweep(cfg),
        SweepKind::Disorder => run_disorder_sweep(cfg),
    }
}

fn run(cfg: &ExperimentConfig, mode: DisorderMode, sigma: f64, network_samples: usize) -> Result<SweepOutput, ExperimentError> {
    cfg.validate()?;
    let params = cfg.heuristics.params().expect("validated");
    let base = build_topology(&cfg.topology)?;
    let dist = DistanceTable::new(&base);
    let pairs = select_pairs(cfg, &dist, base.node_count())?;
    let grid = cfg.grid();

    let mut nets: Vec<(f64, usize, QuantumNetwork)> = Vec::with_capacity(grid.len() * network_samples);
    for &mean in &grid {
        for k in 0..network_samples {
            let spec = DisorderSpec { mode, lambda_mean: mean, sigma, seed: derive_seed(cfg.master_seed, &[DISORDER_STREAM, k as u64]) };
            let mut net = base.clone();
            assign(&mut net, &spec).map_err(|source| ExperimentError::Disorder { mean, network_sample: k, source })?;
            nets.push((mean, k, net));
        }
    }

    let items: Vec<(usize, usize)> = (0..nets.len()).flat_map(|n| (0..pairs.len()).map(move |p| (n, p))).collect();
    let mut records = items
        .par_iter()
        .map(|&(n, p)| {
            let (mean, k, net) = &nets[n];
            let (source, target, distance) = pairs[p];
            let seed = derive_seed(cfg.master_seed, &[*k as u64, source as u64, target as u64]);
            let (final_lambda, entanglement, destroyed, failed) =
                match sample_and_select_with(net, &dist, source, target, &params, seed) {
                    Ok(r) => (r.selected.final_lambda.lambda(), r.selected.entanglement(), r.selected.destroyed, false),
                    Err(EngineError::AllSamplesFailed { min_destroyed }) => (1.0, 0.0, min_destroyed.max(distance), true),
                    Err(e) => return Err(ExperimentError::Engine { from: source, to: target, source: e }),
                };
            let integrity = distance as f64 / destroyed as f64;
            Ok(SweepRecord {
                topology: cfg.topology.kind.name(),
                rows: cfg.topology.rows,
                cols: cfg.topology.cols,
                mode: mode.name(),
                lambda_mean: *mean,
                sigma,
                network_sample: *k,
                source,
                target,
                distance,
                final_lambda,
                entanglement,
                destroyed,
                integrity,
                connectivity: entanglement * integrity,
                failed,
                seed,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    records.sort_by(|a, b| {
        a.lambda_mean
            .total_cmp(&b.lambda_mean)
            .then(a.network_sample.cmp(&b.network_sample))
            .then(a.distance.cmp(&b.distance))
            .then(a.source.cmp(&b.source))
            .then(a.target.cmp(&b.target))
    });

    let mut aggregates = Vec::new();
    for &mean in &grid {
        let rows: Vec<_> = records
            .iter()
            .filter(|r| r.lambda_mean == mean)
            .map(|r| (r.distance, r.entanglement, r.integrity, r.connectivity))
            .collect();
        for (distance, a) in aggregate_values(&rows).expect("pairs are non-empty") {
            aggregates.push(AggregateRow {
                lambda_mean: mean,
                sigma,
                distance,
                mean_entanglement: a.mean_entanglement,
                mean_integrity: a.mean_integrity,
                mean_connectivity: a.mean_connectivity,
                count: a.count,
            });
        }
    }
    Ok(SweepOutput { records, aggregates })
}
