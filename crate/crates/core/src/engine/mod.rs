//! Heuristic percolation between a source and a target node.
//!
//! Each sample routes hop by hop with locally optimal strategies, improves
//! imperfect hops with alternative paths, and is scored by final Schmidt
//! value and number of destroyed links. Pairs of imperfect samples that use
//! disjoint links are also scored as if distilled together.

mod local;
mod params;
mod route;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::disorder::derive_seed;
use crate::network::{LinkId, NetworkError, NodeId, Operation, QuantumNetwork};
use crate::schmidt::{distill_pair, SchmidtValue};
use crate::tolerance::TOLERANCES;

pub use local::{
    apply_local, best_local_strategy, enumerate_local_resources, Blocked, LocalResource, LocalSolution,
    ResourceKind, EXACT_SEARCH_LIMIT,
};
pub use params::{
    DistanceMode, DistancePhase, HeuristicParams, ParamsError, SlackPhase, COST_RELAXED, UNRESTRICTED,
};
pub use route::{improve_path, route};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("source and target must differ, both are {0}")]
    SameEndpoints(NodeId),
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("every sample failed; the cheapest attempt destroyed {min_destroyed} links")]
    AllSamplesFailed { min_destroyed: usize },
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// All-pairs hop distances of a network, frozen before any mutation.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    n: usize,
    d: Vec<Option<u32>>,
}

impl DistanceTable {
    pub fn new(net: &QuantumNetwork) -> Self {
        let n = net.node_count();
        let mut d = Vec::with_capacity(n * n);
        for a in 0..n {
            d.extend(net.distances_from(a).into_iter().map(|x| x.map(|v| v as u32)));
        }
        DistanceTable { n, d }
    }

    pub fn get(&self, a: NodeId, b: NodeId) -> Option<usize> {
        self.d[a * self.n + b].map(|v| v as usize)
    }
}

/// Where a solution came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Sample(usize),
    /// Distillation of the outputs of two samples.
    Combined(usize, usize),
}

/// Outcome of one percolation attempt.
#[derive(Debug, Clone)]
pub struct PathSolution {
    /// Final source-target link; `None` when the attempt got stuck.
    pub final_link: Option<LinkId>,
    /// Schmidt value of the final link, 1 on failure.
    pub final_lambda: SchmidtValue,
    pub destroyed: usize,
    /// Original links consumed, sorted.
    pub origin: Vec<LinkId>,
    /// Operations in the order applied, in the ids of the network they were
    /// applied to.
    pub log: Vec<Operation>,
    /// Nodes visited by the main route, source first.
    pub path: Vec<NodeId>,
    pub provenance: Provenance,
    pub(crate) assembly: Option<route::Assembly>,
}

impl PathSolution {
    pub fn failed(&self) -> bool {
        self.final_link.is_none()
    }

    pub fn entanglement(&self) -> f64 {
        if self.failed() {
            0.0
        } else {
            self.final_lambda.entanglement()
        }
    }

    /// Strictly preferable to `other`: success first, then smaller Schmidt
    /// value, then fewer destroyed links.
    fn beats(&self, other: &PathSolution) -> bool {
        better(
            (self.failed(), self.final_lambda.lambda(), self.destroyed),
            (other.failed(), other.final_lambda.lambda(), other.destroyed),
        )
    }
}

fn better(a: (bool, f64, usize), b: (bool, f64, usize)) -> bool {
    let tol = TOLERANCES.comparison;
    if a.0 != b.0 {
        return !a.0;
    }
    if a.1 < b.1 - tol {
        return true;
    }
    if a.1 > b.1 + tol {
        return false;
    }
    a.2 < b.2
}

/// Every recorded sample and the selected solution.
#[derive(Debug, Clone)]
pub struct SelectionReport {
    pub selected: PathSolution,
    pub samples: Vec<PathSolution>,
    /// Number of sample pairs with disjoint links that were scored together.
    pub combined_candidates: usize,
}

/// Runs one sample on `net` (expected pristine) with its own random stream.
pub fn run_sample(
    net: &mut QuantumNetwork,
    dist: &DistanceTable,
    source: NodeId,
    target: NodeId,
    params: &HeuristicParams,
    sample_index: usize,
    pair_seed: u64,
) -> Result<PathSolution, NetworkError> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(pair_seed, &[sample_index as u64]));
    let sol = route(net, dist, source, target, params, sample_index, &mut rng)?;
    improve_path(net, dist, sol, params, &mut rng)
}

/// Samples `params.samples` percolation attempts and returns the best one,
/// including distillations of two independent imperfect attempts.
pub fn sample_and_select(
    net: &QuantumNetwork,
    source: NodeId,
    target: NodeId,
    params: &HeuristicParams,
    pair_seed: u64,
) -> Result<SelectionReport, EngineError> {
    let dist = DistanceTable::new(net);
    sample_and_select_with(net, &dist, source, target, params, pair_seed)
}

/// [`sample_and_select`] with precomputed distances of `net`.
pub fn sample_and_select_with(
    net: &QuantumNetwork,
    dist: &DistanceTable,
    source: NodeId,
    target: NodeId,
    params: &HeuristicParams,
    pair_seed: u64,
) -> Result<SelectionReport, EngineError> {
    params.validate()?;
    for n in [source, target] {
        if n >= net.node_count() {
            return Err(EngineError::UnknownNode(n));
        }
    }
    if source == target {
        return Err(EngineError::SameEndpoints(source));
    }

    let mut work = net.clone();
    let pristine = work.snapshot();
    let mut samples = Vec::with_capacity(params.samples);
    for i in 0..params.samples {
        work.restore(&pristine)?;
        samples.push(run_sample(&mut work, dist, source, target, params, i, pair_seed)?);
    }

    let mut best = 0;
    for (i, s) in samples.iter().enumerate() {
        if s.beats(&samples[best]) {
            best = i;
        }
    }
    if samples[best].failed() {
        let min_destroyed = samples.iter().map(|s| s.destroyed).min().unwrap_or(0);
        return Err(EngineError::AllSamplesFailed { min_destroyed });
    }

    let (pair, combined_candidates) = best_combination(net.original_count(), &samples);
    let selected = match pair {
        Some((i, j, key))
            if better(key, (false, samples[best].final_lambda.lambda(), samples[best].destroyed)) =>
        {
            work.restore(&pristine)?;
            combine(&mut work, &samples[i], &samples[j], i, j)?
        }
        _ => samples[best].clone(),
    };
    Ok(SelectionReport { selected, samples, combined_candidates })
}

/// Best distillation of two imperfect samples with disjoint origins, as
/// `(i, j, (failed, lambda, destroyed))`, and the number of such pairs.
fn best_combination(original_count: usize, samples: &[PathSolution]) -> (Option<(usize, usize, (bool, f64, usize))>, usize) {
    let words = original_count.div_ceil(64).max(1);
    let half = 0.5 + TOLERANCES.comparison;
    let mut seen: Vec<&[LinkId]> = Vec::new();
    let mut pool: Vec<(usize, Vec<u64>)> = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        if s.failed() || s.final_lambda.lambda() <= half || seen.contains(&s.origin.as_slice()) {
            continue;
        }
        seen.push(&s.origin);
        let mut bits = vec![0u64; words];
        for &l in &s.origin {
            bits[l / 64] |= 1 << (l % 64);
        }
        pool.push((i, bits));
    }
    let mut best: Option<(usize, usize, (bool, f64, usize))> = None;
    let mut count = 0;
    for (a, (i, bi)) in pool.iter().enumerate() {
        for (j, bj) in &pool[a + 1..] {
            if bi.iter().zip(bj).any(|(x, y)| x & y != 0) {
                continue;
            }
            count += 1;
            let (si, sj) = (&samples[*i], &samples[*j]);
            let key = (false, distill_pair(si.final_lambda, sj.final_lambda).lambda(), si.destroyed + sj.destroyed);
            if best.is_none_or(|(_, _, b)| better(key, b)) {
                best = Some((*i, *j, key));
            }
        }
    }
    (best, count)
}

/// Replays both samples on `net` and distills their final links.
fn combine(
    net: &mut QuantumNetwork,
    a: &PathSolution,
    b: &PathSolution,
    i: usize,
    j: usize,
) -> Result<PathSolution, NetworkError> {
    let ra = net.replay(&a.log)?;
    let rb = net.replay(&b.log)?;
    let la = ra.translate(a.final_link.expect("successful sample"))?;
    let lb = rb.translate(b.final_link.expect("successful sample"))?;
    let mut log = ra.log;
    log.extend(rb.log);
    let out = net.apply_distill(&[la, lb])?;
    log.push(Operation::Distill { inputs: vec![la, lb], output: out });
    let link = net.link(out)?;
    Ok(PathSolution {
        final_link: Some(out),
        final_lambda: link.lambda,
        destroyed: link.origin.len(),
        origin: link.origin.clone(),
        log,
        path: a.path.clone(),
        provenance: Provenance::Combined(i, j),
        assembly: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64) -> SchmidtValue {
        SchmidtValue::new(x).unwrap()
    }

    #[test]
    fn twin_paths_are_combined() {
        // two disjoint three-link chains 0-1-2-3 and 0-4-5-3, each worth 0.7
        let net = QuantumNetwork::new(
            6,
            &[(0, 1, s(0.5)), (1, 2, s(0.5)), (2, 3, s(0.7)), (0, 4, s(0.5)), (4, 5, s(0.5)), (5, 3, s(0.7))],
        )
        .unwrap();
        let report = sample_and_select(&net, 0, 3, &HeuristicParams::with_samples(12), 1).unwrap();
        assert!(report.samples.iter().all(|x| x.final_lambda.lambda() > 0.5));
        assert_eq!(report.selected.final_lambda.lambda(), 0.5);
        assert!(matches!(report.selected.provenance, Provenance::Combined(..)));
        assert_eq!(report.selected.destroyed, 6);
        assert!(report.combined_candidates >= 1);
        let mut fresh = net.clone();
        let replay = fresh.replay(&report.selected.log).unwrap();
        let out = replay.translate(report.selected.final_link.unwrap()).unwrap();
        assert_eq!(fresh.lambda(out), report.selected.final_lambda);
    }

    #[test]
    fn errors() {
        let net = QuantumNetwork::new(3, &[(0, 1, s(0.6))]).unwrap();
        let params = HeuristicParams::with_samples(3);
        assert_eq!(sample_and_select(&net, 0, 0, &params, 0).unwrap_err(), EngineError::SameEndpoints(0));
        assert_eq!(sample_and_select(&net, 0, 7, &params, 0).unwrap_err(), EngineError::UnknownNode(7));
        assert_eq!(
            sample_and_select(&net, 0, 2, &params, 0).unwrap_err(),
            EngineError::AllSamplesFailed { min_destroyed: 0 }
        );
    }
}
