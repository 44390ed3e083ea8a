//! Hopping from the source towards the target with local strategies, and the
//! alternative-path improvement of imperfect hops.

use rand::Rng;

use super::local::{apply_local, choose_subset, resources_around, Blocked, LocalSolution};
use super::params::{DistanceMode, HeuristicParams, UNRESTRICTED};
use super::{DistanceTable, PathSolution, Provenance};
use crate::network::{LinkId, NetworkError, NodeId, Operation, QuantumNetwork, Snapshot};
use crate::schmidt::SchmidtValue;
use crate::tolerance::TOLERANCES;

/// How one walk picks its hops.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WalkRules {
    pub mode: DistanceMode,
    /// Slack between hop candidates.
    pub delta: f64,
    /// Slack inside each local strategy.
    pub local_slack: f64,
}

/// Rules for alternative paths: single cheapest resource per hop, best
/// Schmidt value between candidates. Strictly closer nodes are tried first.
const ALTERNATIVES: [WalkRules; 2] = [
    WalkRules { mode: DistanceMode::Strict, delta: 0.0, local_slack: UNRESTRICTED },
    WalkRules { mode: DistanceMode::AllowEqual, delta: 0.0, local_slack: UNRESTRICTED },
];

/// Hops applied so far; the walk failed when `reached` is false.
pub(crate) struct Walk {
    pub hops: Vec<LinkId>,
    pub path: Vec<NodeId>,
    pub reached: bool,
}

/// Greedy hop selection among candidates within two hops. Every chosen local
/// strategy is applied immediately and its output link is blocked from later
/// use. Nodes are visited at most once.
pub(crate) fn walk<R: Rng>(
    net: &mut QuantumNetwork,
    dist: &DistanceTable,
    source: NodeId,
    target: NodeId,
    rules: WalkRules,
    blocked: &mut Blocked,
    log: &mut Vec<Operation>,
    rng: &mut R,
) -> Result<Walk, NetworkError> {
    let mut visited = vec![false; net.node_count()];
    visited[source] = true;
    let mut walk = Walk { hops: Vec::new(), path: vec![source], reached: false };
    let mut cur = source;
    let tol = TOLERANCES.comparison;
    while cur != target {
        let here = dist.get(cur, target);
        let mut options: Vec<LocalSolution> = Vec::new();
        for (node, resources) in resources_around(net, cur, blocked) {
            if visited[node] {
                continue;
            }
            let allowed = node == target
                || matches!((dist.get(node, target), here), (Some(c), Some(h)) if rules.mode.allows(c, h));
            if !allowed {
                continue;
            }
            if let Some(sol) = choose_subset(node, &resources, rules.local_slack) {
                options.push(sol);
            }
        }
        if options.is_empty() {
            return Ok(walk);
        }
        let best_lambda = options.iter().map(|o| o.final_lambda.lambda()).fold(f64::INFINITY, f64::min);
        let best_cost = options
            .iter()
            .filter(|o| o.final_lambda.lambda() <= best_lambda + tol)
            .map(|o| o.destroyed)
            .min()
            .expect("non-empty");
        let viable: Vec<&LocalSolution> = options
            .iter()
            .filter(|o| {
                let l = o.final_lambda.lambda();
                if rules.delta > 0.0 {
                    l <= best_lambda + rules.delta + tol
                } else {
                    l <= best_lambda + tol && o.destroyed == best_cost
                }
            })
            .collect();
        let choice = viable[rng.random_range(0..viable.len())];
        let hop = apply_local(net, choice, log)?;
        blocked.insert(hop);
        walk.hops.push(hop);
        walk.path.push(choice.target);
        visited[choice.target] = true;
        cur = choice.target;
    }
    walk.reached = true;
    Ok(walk)
}

/// Swaps consecutive hop links into one link.
fn chain(net: &mut QuantumNetwork, hops: &[LinkId], log: &mut Vec<Operation>) -> Result<LinkId, NetworkError> {
    let mut acc = hops[0];
    for &h in &hops[1..] {
        let out = net.apply_swap(acc, h)?;
        log.push(Operation::Swap { inputs: [acc, h], output: out });
        acc = out;
    }
    Ok(acc)
}

/// State right before the hop links are swapped together.
#[derive(Debug, Clone)]
pub(crate) struct Assembly {
    snapshot: Snapshot,
    log_len: usize,
    hops: Vec<LinkId>,
}

fn consumed(net: &QuantumNetwork, log: &[Operation]) -> Vec<LinkId> {
    let mut set: Vec<LinkId> = log
        .iter()
        .flat_map(|op| op.inputs().iter().copied())
        .filter(|&l| l < net.original_count())
        .collect();
    set.sort_unstable();
    set.dedup();
    set
}

fn assemble(
    net: &mut QuantumNetwork,
    mut log: Vec<Operation>,
    hops: Vec<LinkId>,
    path: Vec<NodeId>,
    provenance: Provenance,
) -> Result<PathSolution, NetworkError> {
    let assembly = Assembly { snapshot: net.snapshot(), log_len: log.len(), hops: hops.clone() };
    let last = chain(net, &hops, &mut log)?;
    let link = net.link(last)?;
    Ok(PathSolution {
        final_link: Some(last),
        final_lambda: link.lambda,
        destroyed: link.origin.len(),
        origin: link.origin.clone(),
        log,
        path,
        provenance,
        assembly: Some(assembly),
    })
}

/// One percolation attempt from `source` to `target` using the slack and
/// distance rule of `sample_index`.
pub fn route<R: Rng>(
    net: &mut QuantumNetwork,
    dist: &DistanceTable,
    source: NodeId,
    target: NodeId,
    params: &HeuristicParams,
    sample_index: usize,
    rng: &mut R,
) -> Result<PathSolution, NetworkError> {
    let (delta, mode) = params.phase(sample_index);
    let rules = WalkRules { mode, delta, local_slack: 0.0 };
    let mut log = Vec::new();
    let mut blocked = Blocked::default();
    let w = walk(net, dist, source, target, rules, &mut blocked, &mut log, rng)?;
    let provenance = Provenance::Sample(sample_index);
    if !w.reached {
        let origin = consumed(net, &log);
        return Ok(PathSolution {
            final_link: None,
            final_lambda: SchmidtValue::PRODUCT,
            destroyed: origin.len(),
            origin,
            log,
            path: w.path,
            provenance,
            assembly: None,
        });
    }
    assemble(net, log, w.hops, w.path, provenance)
}

/// Distills alternative paths into every imperfect hop of `solution`, up to
/// `max_improve_iterations` attempts per hop, then re-assembles the chain.
/// `net` must be the network `solution` was routed on, unchanged since.
pub fn improve_path<R: Rng>(
    net: &mut QuantumNetwork,
    dist: &DistanceTable,
    solution: PathSolution,
    params: &HeuristicParams,
    rng: &mut R,
) -> Result<PathSolution, NetworkError> {
    let Some(assembly) = &solution.assembly else {
        return Ok(solution);
    };
    let half = 0.5 + TOLERANCES.comparison;
    if solution.final_lambda.lambda() <= half
        || assembly.hops.iter().all(|&h| net.links().get(h).is_some_and(|l| l.lambda.lambda() <= half))
    {
        return Ok(solution);
    }
    net.restore(&assembly.snapshot)?;
    let mut log = solution.log[..assembly.log_len].to_vec();
    let mut hops = assembly.hops.clone();
    let mut blocked = Blocked::default();
    for &h in &hops {
        blocked.insert(h);
    }

    for i in 0..hops.len() {
        let mut attempts = 0;
        while net.lambda(hops[i]).lambda() > half && attempts < params.max_improve_iterations {
            attempts += 1;
            let before = net.snapshot();
            let log_len = log.len();
            let (u, v) = net.link(hops[i])?.endpoints;
            let mut found = None;
            for rules in ALTERNATIVES {
                let mut alt_blocked = blocked.clone();
                let alt = walk(net, dist, u, v, rules, &mut alt_blocked, &mut log, rng)?;
                if alt.reached {
                    found = Some(alt);
                    break;
                }
                net.restore(&before)?;
                log.truncate(log_len);
            }
            let Some(alt) = found else { continue };
            let alt_link = chain(net, &alt.hops, &mut log)?;
            let inputs = vec![hops[i], alt_link];
            let merged = net.apply_distill(&inputs)?;
            log.push(Operation::Distill { inputs, output: merged });
            blocked.insert(merged);
            hops[i] = merged;
        }
    }
    assemble(net, log, hops, solution.path, solution.provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::{assign, DisorderSpec};
    use crate::network::{build_topology, TopologyKind, TopologySpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s(x: f64) -> SchmidtValue {
        SchmidtValue::new(x).unwrap()
    }

    #[test]
    fn adjacent_perfect_link_needs_no_operations() {
        let net0 = QuantumNetwork::new(2, &[(0, 1, s(0.5))]).unwrap();
        let dist = DistanceTable::new(&net0);
        let mut net = net0.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sol = route(&mut net, &dist, 0, 1, &HeuristicParams::with_samples(1), 0, &mut rng).unwrap();
        assert!(sol.log.is_empty());
        assert_eq!(sol.final_link, Some(0));
        assert_eq!((sol.final_lambda.lambda(), sol.destroyed), (0.5, 1));
    }

    #[test]
    fn bare_path_cannot_be_improved() {
        let links: Vec<_> = (0..4).map(|i| (i, i + 1, s(0.7))).collect();
        let net0 = QuantumNetwork::new(5, &links).unwrap();
        let dist = DistanceTable::new(&net0);
        let mut net = net0.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = HeuristicParams::with_samples(1);
        let sol = route(&mut net, &dist, 0, 4, &params, 0, &mut rng).unwrap();
        assert!(sol.final_lambda.lambda() > 0.5);
        let improved = improve_path(&mut net, &dist, sol.clone(), &params, &mut rng).unwrap();
        assert_eq!(improved.final_lambda, sol.final_lambda);
        assert_eq!(improved.destroyed, 4);
        assert_eq!(improved.log.len(), sol.log.len());
    }

    #[test]
    fn dead_end_is_a_failure() {
        let net0 = QuantumNetwork::new(4, &[(0, 1, s(0.6)), (2, 3, s(0.6))]).unwrap();
        let dist = DistanceTable::new(&net0);
        let mut net = net0.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sol = route(&mut net, &dist, 0, 3, &HeuristicParams::with_samples(1), 0, &mut rng).unwrap();
        assert!(sol.final_link.is_none());
        assert_eq!(sol.final_lambda, SchmidtValue::PRODUCT);
    }

    #[test]
    fn uniform_half_gives_pure_swap_chain() {
        let spec = TopologySpec { kind: TopologyKind::DiagonalSquare, rows: 4, cols: 4 };
        let mut net0 = build_topology(&spec).unwrap();
        assign(&mut net0, &DisorderSpec::uniform(0.5)).unwrap();
        let dist = DistanceTable::new(&net0);
        let params = HeuristicParams::with_samples(1);
        for target in 1..16 {
            let mut net = net0.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(target as u64);
            let sol = route(&mut net, &dist, 0, target, &params, 0, &mut rng).unwrap();
            assert_eq!(sol.final_lambda.lambda(), 0.5);
            assert_eq!(Some(sol.destroyed), dist.get(0, target));
        }
    }
}
