//! Local percolation strategies between nodes at most two hops apart.

use std::collections::BTreeMap;

use crate::network::{LinkId, NetworkError, NodeId, Operation, QuantumNetwork};
use crate::schmidt::{swap, SchmidtValue};
use crate::tolerance::TOLERANCES;

/// Resource count up to which conflicting resources are searched exactly.
pub const EXACT_SEARCH_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResourceKind {
    Direct(LinkId),
    SwapPath { first: LinkId, second: LinkId, via: NodeId },
}

/// One way of producing a link between two nodes: an existing link, or the
/// swap of a two-link path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalResource {
    pub kind: ResourceKind,
    pub resulting_lambda: SchmidtValue,
    /// Original links consumed.
    pub cost: usize,
}

impl LocalResource {
    fn links(&self) -> ([LinkId; 2], usize) {
        match self.kind {
            ResourceKind::Direct(l) => ([l, l], 1),
            ResourceKind::SwapPath { first, second, .. } => ([first, second], 2),
        }
    }
}

/// A set of edge-disjoint resources distilled into one link.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSolution {
    pub target: NodeId,
    pub chosen: Vec<LocalResource>,
    pub final_lambda: SchmidtValue,
    pub destroyed: usize,
}

/// Links excluded from resource enumeration.
#[derive(Debug, Clone, Default)]
pub struct Blocked(Vec<bool>);

impl Blocked {
    pub fn insert(&mut self, id: LinkId) {
        if id >= self.0.len() {
            self.0.resize(id + 1, false);
        }
        self.0[id] = true;
    }

    pub fn contains(&self, id: LinkId) -> bool {
        self.0.get(id).copied().unwrap_or(false)
    }
}

/// Resources towards every node within two alive, unblocked hops of `u`,
/// keyed by node.
pub(crate) fn resources_around(
    net: &QuantumNetwork,
    u: NodeId,
    blocked: &Blocked,
) -> BTreeMap<NodeId, Vec<LocalResource>> {
    let links = net.links();
    let mut out: BTreeMap<NodeId, Vec<LocalResource>> = BTreeMap::new();
    let mut first_links: Vec<LinkId> = net.links_at(u).iter().copied().filter(|&l| !blocked.contains(l)).collect();
    first_links.sort_unstable();
    for &l1 in &first_links {
        let w = links[l1].other(u);
        out.entry(w).or_default().push(LocalResource {
            kind: ResourceKind::Direct(l1),
            resulting_lambda: links[l1].lambda,
            cost: links[l1].origin.len(),
        });
        let mut second: Vec<LinkId> =
            net.links_at(w).iter().copied().filter(|&l| l != l1 && !blocked.contains(l)).collect();
        second.sort_unstable();
        for l2 in second {
            let x = links[l2].other(w);
            if x == u {
                continue;
            }
            out.entry(x).or_default().push(LocalResource {
                kind: ResourceKind::SwapPath { first: l1, second: l2, via: w },
                resulting_lambda: swap(links[l1].lambda, links[l2].lambda),
                cost: links[l1].origin.len() + links[l2].origin.len(),
            });
        }
    }
    for list in out.values_mut() {
        list.sort_by_key(|r| match r.kind {
            ResourceKind::Direct(l) => (0, l, 0),
            ResourceKind::SwapPath { first, second, .. } => (1, first, second),
        });
    }
    out
}

/// Direct links and two-hop swap paths between `u` and `v`.
pub fn enumerate_local_resources(
    net: &QuantumNetwork,
    u: NodeId,
    v: NodeId,
) -> Result<Vec<LocalResource>, NetworkError> {
    match net.hop_distance(u, v)? {
        Some(1) | Some(2) => {}
        _ => return Err(NetworkError::NotLocal(u, v)),
    }
    Ok(resources_around(net, u, &Blocked::default()).remove(&v).unwrap_or_default())
}

/// Cheapest edge-disjoint subset of resources whose distilled value is within
/// `slack` of the best value reachable. Ties in cost go to the smaller value.
pub fn best_local_strategy(net: &QuantumNetwork, u: NodeId, v: NodeId, slack: f64) -> Option<LocalSolution> {
    let resources = enumerate_local_resources(net, u, v).ok()?;
    choose_subset(v, &resources, slack)
}

struct Pick {
    members: Vec<usize>,
    clipped: f64,
    raw: f64,
    cost: usize,
}

impl Pick {
    fn better_than(&self, other: &Pick) -> bool {
        (self.cost, self.clipped, self.raw) < (other.cost, other.clipped, other.raw)
    }
}

pub(crate) fn choose_subset(target: NodeId, resources: &[LocalResource], slack: f64) -> Option<LocalSolution> {
    if resources.is_empty() {
        return None;
    }
    let pick = if !has_conflicts(resources) {
        disjoint_search(resources, slack)
    } else if resources.len() <= EXACT_SEARCH_LIMIT {
        exact_search(resources, slack)
    } else {
        greedy_search(resources, slack)
    };
    let chosen: Vec<LocalResource> = pick.members.iter().map(|&i| resources[i]).collect();
    Some(LocalSolution {
        target,
        final_lambda: SchmidtValue::from_formula(pick.clipped),
        destroyed: pick.cost,
        chosen,
    })
}

fn has_conflicts(resources: &[LocalResource]) -> bool {
    let mut seen: Vec<LinkId> = Vec::with_capacity(resources.len() * 2);
    for r in resources {
        let (ls, n) = r.links();
        for &l in &ls[..n] {
            if seen.contains(&l) {
                return true;
            }
            seen.push(l);
        }
    }
    false
}

fn sorted_indices(resources: &[LocalResource], filter: impl Fn(&LocalResource) -> bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..resources.len()).filter(|&i| filter(&resources[i])).collect();
    idx.sort_by(|&a, &b| {
        let (ra, rb) = (&resources[a], &resources[b]);
        ra.resulting_lambda
            .lambda()
            .total_cmp(&rb.resulting_lambda.lambda())
            .then(ra.cost.cmp(&rb.cost))
            .then(a.cmp(&b))
    });
    idx
}

/// Without shared links, an optimal subset takes the best few directs and
/// the best few swap paths, so only prefix combinations are tried.
fn disjoint_search(resources: &[LocalResource], slack: f64) -> Pick {
    let directs = sorted_indices(resources, |r| matches!(r.kind, ResourceKind::Direct(_)));
    let swaps = sorted_indices(resources, |r| matches!(r.kind, ResourceKind::SwapPath { .. }));
    let prefix = |idx: &[usize]| {
        let mut products = vec![(1.0, 0usize)];
        for &i in idx {
            let (p, c) = *products.last().unwrap();
            products.push((p * resources[i].resulting_lambda.lambda(), c + resources[i].cost));
        }
        products
    };
    let (pd, ps) = (prefix(&directs), prefix(&swaps));
    let optimum = (pd[directs.len()].0 * ps[swaps.len()].0).max(0.5);
    let limit = optimum + slack + TOLERANCES.comparison;

    let mut best: Option<Pick> = None;
    for (k1, &(p1, c1)) in pd.iter().enumerate() {
        for (k2, &(p2, c2)) in ps.iter().enumerate() {
            if k1 + k2 == 0 {
                continue;
            }
            let raw = p1 * p2;
            let clipped = raw.max(0.5);
            if clipped > limit {
                continue;
            }
            let cand = Pick { members: Vec::new(), clipped, raw, cost: c1 + c2 };
            if best.as_ref().is_none_or(|b| cand.better_than(b)) {
                let mut members = directs[..k1].to_vec();
                members.extend_from_slice(&swaps[..k2]);
                best = Some(Pick { members, ..cand });
            }
        }
    }
    best.expect("the full set is always within the limit")
}

fn conflict_masks(resources: &[LocalResource]) -> Vec<u32> {
    resources
        .iter()
        .map(|a| {
            let (la, na) = a.links();
            resources.iter().enumerate().fold(0u32, |mask, (j, b)| {
                let (lb, nb) = b.links();
                if la[..na].iter().any(|l| lb[..nb].contains(l)) {
                    mask | (1 << j)
                } else {
                    mask
                }
            })
        })
        .collect()
}

fn exact_search(resources: &[LocalResource], slack: f64) -> Pick {
    let n = resources.len();
    let masks = conflict_masks(resources);
    let mut feasible: Vec<(u32, f64, usize)> = Vec::new();
    for set in 1u32..(1 << n) {
        let ok = (0..n).filter(|&i| set & (1 << i) != 0).all(|i| masks[i] & set == 1 << i);
        if !ok {
            continue;
        }
        let (raw, cost) = (0..n)
            .filter(|&i| set & (1 << i) != 0)
            .fold((1.0, 0), |(p, c), i| (p * resources[i].resulting_lambda.lambda(), c + resources[i].cost));
        feasible.push((set, raw, cost));
    }
    let optimum = feasible.iter().map(|f| f.1.max(0.5)).fold(f64::INFINITY, f64::min);
    let limit = optimum + slack + TOLERANCES.comparison;
    let mut best: Option<Pick> = None;
    for (set, raw, cost) in feasible {
        let clipped = raw.max(0.5);
        if clipped > limit {
            continue;
        }
        let cand = Pick { members: Vec::new(), clipped, raw, cost };
        if best.as_ref().is_none_or(|b| cand.better_than(b)) {
            best = Some(Pick { members: (0..n).filter(|&i| set & (1 << i) != 0).collect(), ..cand });
        }
    }
    best.expect("singletons are always feasible")
}

fn greedy_search(resources: &[LocalResource], slack: f64) -> Pick {
    let order = sorted_indices(resources, |_| true);
    let mut used: Vec<LinkId> = Vec::new();
    let mut members = Vec::new();
    for i in order {
        let (ls, n) = resources[i].links();
        if ls[..n].iter().any(|l| used.contains(l)) {
            continue;
        }
        used.extend_from_slice(&ls[..n]);
        members.push(i);
    }
    let optimum = members.iter().map(|&i| resources[i].resulting_lambda.lambda()).product::<f64>().max(0.5);
    let limit = optimum + slack + TOLERANCES.comparison;
    let (mut raw, mut cost) = (1.0, 0);
    for k in 0..members.len() {
        raw *= resources[members[k]].resulting_lambda.lambda();
        cost += resources[members[k]].cost;
        if raw.max(0.5) <= limit {
            members.truncate(k + 1);
            break;
        }
    }
    Pick { members, clipped: raw.max(0.5), raw, cost }
}

/// Applies a local solution: swaps each path, then distills everything into
/// one link, which is returned.
pub fn apply_local(
    net: &mut QuantumNetwork,
    solution: &LocalSolution,
    log: &mut Vec<Operation>,
) -> Result<LinkId, NetworkError> {
    let mut parts = Vec::with_capacity(solution.chosen.len());
    for r in &solution.chosen {
        match r.kind {
            ResourceKind::Direct(l) => parts.push(l),
            ResourceKind::SwapPath { first, second, .. } => {
                let out = net.apply_swap(first, second)?;
                log.push(Operation::Swap { inputs: [first, second], output: out });
                parts.push(out);
            }
        }
    }
    if parts.len() == 1 {
        return Ok(parts[0]);
    }
    let out = net.apply_distill(&parts)?;
    log.push(Operation::Distill { inputs: parts, output: out });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_topology, TopologyKind, TopologySpec};

    fn s(x: f64) -> SchmidtValue {
        SchmidtValue::new(x).unwrap()
    }

    fn direct(id: LinkId, l: f64) -> LocalResource {
        LocalResource { kind: ResourceKind::Direct(id), resulting_lambda: s(l), cost: 1 }
    }

    fn path(first: LinkId, second: LinkId, l: f64) -> LocalResource {
        LocalResource { kind: ResourceKind::SwapPath { first, second, via: 0 }, resulting_lambda: s(l), cost: 2 }
    }

    #[test]
    fn grid_distance_two_paths() {
        let net = build_topology(&TopologySpec { kind: TopologyKind::Square, rows: 3, cols: 3 }).unwrap();
        // corner to centre: two paths, no direct link
        let r = enumerate_local_resources(&net, 0, 4).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|x| x.cost == 2));
        // straight two-hop: one path
        assert_eq!(enumerate_local_resources(&net, 0, 2).unwrap().len(), 1);
        assert_eq!(enumerate_local_resources(&net, 0, 1).unwrap().len(), 1);
        assert!(enumerate_local_resources(&net, 0, 8).is_err());
    }

    #[test]
    fn perfect_direct_link() {
        let net = build_topology(&TopologySpec { kind: TopologyKind::Square, rows: 1, cols: 2 }).unwrap();
        let sol = best_local_strategy(&net, 0, 1, 0.0).unwrap();
        assert_eq!(sol.final_lambda.lambda(), 0.5);
        assert_eq!(sol.destroyed, 1);
    }

    #[test]
    fn cheapest_subset_reaching_half() {
        // one direct and three paths; direct + one path already reaches 1/2
        let res = [direct(0, 0.6), path(1, 2, 0.64), path(3, 4, 0.64), path(5, 6, 0.64)];
        let sol = choose_subset(9, &res, 0.0).unwrap();
        assert_eq!(sol.final_lambda.lambda(), 0.5);
        assert_eq!(sol.destroyed, 3);
        // any value allowed: the single cheapest resource
        let sol = choose_subset(9, &res, 1.0).unwrap();
        assert_eq!((sol.destroyed, sol.chosen.len()), (1, 1));
        // nothing reaches 1/2: all resources
        let res = [direct(0, 0.95), path(1, 2, 0.97)];
        let sol = choose_subset(9, &res, 0.0).unwrap();
        assert_eq!(sol.destroyed, 3);
        assert!((sol.final_lambda.lambda() - 0.95 * 0.97).abs() < 1e-15);
        assert!(choose_subset(9, &[], 0.0).is_none());
    }

    #[test]
    fn conflicting_paths_are_exclusive() {
        // two paths share link 1
        let res = [path(1, 2, 0.6), path(1, 3, 0.6), path(4, 5, 0.9)];
        let sol = choose_subset(9, &res, 0.0).unwrap();
        assert_eq!(sol.chosen.len(), 2);
        assert!((sol.final_lambda.lambda() - 0.54).abs() < 1e-15);
        assert_eq!(sol.destroyed, 4);
    }

    #[test]
    fn greedy_fallback_respects_conflicts() {
        let mut res: Vec<_> = (0..13).map(|i| path(100, i + 1, 0.99)).collect();
        res.push(direct(200, 0.98));
        let sol = choose_subset(9, &res, 0.0).unwrap();
        assert_eq!(sol.chosen.len(), 2);
        assert!((sol.final_lambda.lambda() - 0.98 * 0.99).abs() < 1e-15);
    }

    #[test]
    fn exact_matches_prefix_search_without_conflicts() {
        let res = [direct(0, 0.7), direct(1, 0.9), path(2, 3, 0.75), path(4, 5, 0.8), path(6, 7, 0.85)];
        for slack in [0.0, 0.05, 0.2, 1.0] {
            let a = disjoint_search(&res, slack);
            let b = exact_search(&res, slack);
            assert_eq!((a.cost, a.clipped), (b.cost, b.clipped), "slack {slack}");
        }
    }
}
