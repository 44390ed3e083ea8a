use proptest::prelude::*;

use entperc::majorization::{distill_success_probability, product_vector, vidal_success_probability, SchmidtVector};
use entperc::network::{build_topology, LinkId, QuantumNetwork, TopologyKind, TopologySpec};
use entperc::schmidt::{distill_many, distill_pair, swap, swap_epsilon, SchmidtValue};
use entperc::strategy::{local_strategy, StrategyExpr, Uniform};

fn s(x: f64) -> SchmidtValue {
    SchmidtValue::new(x).unwrap()
}

fn lambda() -> impl Strategy<Value = f64> {
    0.5..=1.0f64
}

fn many() -> ProptestConfig {
    ProptestConfig::with_cases(10_000)
}

proptest! {
    #[test]
    fn swap_is_symmetric_and_never_improves(a in lambda(), b in lambda()) {
        let ab = swap(s(a), s(b)).lambda();
        prop_assert_eq!(ab, swap(s(b), s(a)).lambda());
        prop_assert!(ab + 1e-12 >= a.max(b));
    }

    #[test]
    fn swap_is_monotone(a in lambda(), b in lambda(), c in lambda()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(swap(s(lo), s(c)).lambda() <= swap(s(hi), s(c)).lambda() + 1e-12);
    }

    #[test]
    fn distill_clip_bound(a in lambda(), b in lambda()) {
        let d = distill_pair(s(a), s(b)).lambda();
        prop_assert_eq!(d, (a * b).max(0.5));
        prop_assert!(d <= a.min(b));
    }

    #[test]
    fn epsilon_identity(e1 in 0.0..=0.5f64, e2 in 0.0..=0.5f64) {
        let direct = swap(s(0.5 + e1), s(0.5 + e2)).lambda() - 0.5;
        prop_assert!((direct - swap_epsilon(e1, e2)).abs() <= 1e-12);
    }

    #[test]
    fn product_bound_by_mean(values in prop::collection::vec(lambda(), 1..8)) {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let product: f64 = values.iter().product();
        prop_assert!(product <= mean.powi(values.len() as i32) * (1.0 + 1e-12));
        let same = vec![values[0]; values.len()];
        let p: f64 = same.iter().product();
        prop_assert!((p - values[0].powi(values.len() as i32)).abs() <= 1e-12);
    }

    #[test]
    fn distill_is_order_free(values in prop::collection::vec(lambda(), 1..6), rot in 0usize..6) {
        let mut rotated = values.clone();
        rotated.rotate_left(rot % values.len());
        let a: Vec<_> = values.iter().map(|&x| s(x)).collect();
        let b: Vec<_> = rotated.iter().map(|&x| s(x)).collect();
        prop_assert!((distill_many(&a).unwrap().lambda() - distill_many(&b).unwrap().lambda()).abs() <= 1e-12);
    }

    #[test]
    fn strategy_value_ignores_child_order(
        swaps in 0usize..4, directs in 0usize..3, rot in 0usize..6, l in lambda(),
    ) {
        prop_assume!(swaps + directs > 0);
        let expr = local_strategy(swaps, directs);
        let StrategyExpr::Distill(mut children) = expr.clone() else { unreachable!() };
        let n = children.len();
        children.rotate_left(rot % n);
        let rotated = StrategyExpr::distill(children);
        let u = Uniform(s(l));
        prop_assert!((expr.evaluate(&u).unwrap().lambda() - rotated.evaluate(&u).unwrap().lambda()).abs() <= 1e-12);
    }

    #[test]
    fn strategy_value_is_monotone(swaps in 0usize..5, directs in 0usize..3, a in lambda(), b in lambda()) {
        prop_assume!(swaps + directs > 0);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let expr = local_strategy(swaps, directs);
        let f = |x: f64| expr.evaluate(&Uniform(s(x))).unwrap().lambda();
        prop_assert!(f(lo) <= f(hi) + 1e-12);
    }

    #[test]
    fn distill_success_at_reachable_targets(a in lambda(), b in lambda()) {
        let ab = a * b;
        prop_assert_eq!(distill_success_probability(s(a), s(b), s(ab.max(0.5))), 1.0);
        let want = (2.0 * (1.0 - ab)).min(1.0);
        prop_assert!((distill_success_probability(s(a), s(b), SchmidtValue::MAXIMAL) - want).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(many())]

    #[test]
    fn deviation_worsens_swaps(em in 0.0..=0.5f64, t in 0.0..=1.0f64, u in 0.0..=1.0f64) {
        let cap = em.min(0.5 - em);
        let (d1, d2) = if t <= u { (t * cap, u * cap) } else { (u * cap, t * cap) };
        let at = |d: f64| swap_epsilon(em + d, em - d);
        prop_assert!(at(d1) <= at(d2) + 1e-12);
    }

    #[test]
    fn deviation_helps_distillation(em in 0.0..=0.5f64, t in 0.0..=1.0f64, u in 0.0..=1.0f64) {
        let cap = em.min(0.5 - em);
        let (d1, d2) = if t <= u { (t * cap, u * cap) } else { (u * cap, t * cap) };
        let at = |d: f64| distill_pair(s(0.5 + em + d), s(0.5 + em - d)).lambda();
        prop_assert!(at(d2) <= at(d1) + 1e-12);
    }

    #[test]
    fn majorization_iff_certain_conversion(
        x in prop::array::uniform4(0.001..1.0f64),
        y in prop::array::uniform4(0.001..1.0f64),
        mix in 0.0..=1.0f64,
        concentrate in any::<bool>(),
    ) {
        let norm = |v: [f64; 4]| {
            let t: f64 = v.iter().sum();
            v.map(|e| e / t)
        };
        let src = SchmidtVector::from_unsorted(norm(x)).unwrap();
        let tgt = if concentrate {
            // moving weight onto the largest entry yields a majorizing target
            let mut e = *src.entries();
            let moved: f64 = e[1..].iter().map(|v| v * mix).sum();
            for v in &mut e[1..] {
                *v *= 1.0 - mix;
            }
            e[0] += moved;
            SchmidtVector::from_unsorted(e).unwrap()
        } else {
            SchmidtVector::from_unsorted(norm(y)).unwrap()
        };
        let p = vidal_success_probability(&src, &tgt);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert_eq!(src.is_majorized_by(&tgt), p == 1.0);
    }
}

proptest! {
    #[test]
    fn product_vector_majorized_by_distilled_target(a in lambda(), b in lambda()) {
        let d = distill_pair(s(a), s(b));
        let target = product_vector(d, SchmidtValue::PRODUCT);
        let source = product_vector(s(a), s(b));
        prop_assert_eq!(source.is_majorized_by(&target), true);
    }
}

#[derive(Debug, Clone)]
enum Step {
    Swap(usize, usize),
    Distill(usize, usize),
    Snapshot,
}

fn steps() -> impl Strategy<Value = Vec<Step>> {
    let step = prop_oneof![
        (any::<usize>(), any::<usize>()).prop_map(|(a, b)| Step::Swap(a, b)),
        (any::<usize>(), any::<usize>()).prop_map(|(a, b)| Step::Distill(a, b)),
        Just(Step::Snapshot),
    ];
    prop::collection::vec(step, 1..40)
}

fn lattice() -> QuantumNetwork {
    let mut net = build_topology(&TopologySpec { kind: TopologyKind::DiagonalSquare, rows: 3, cols: 3 }).unwrap();
    for id in 0..net.original_count() {
        net.set_lambda(id, s(0.55 + 0.01 * (id % 7) as f64)).unwrap();
    }
    net
}

/// Applies one random operation if some pair of alive links allows it.
fn apply(net: &mut QuantumNetwork, step: &Step) {
    let alive: Vec<LinkId> = net.alive_links().map(|l| l.id).collect();
    let pick = |k: usize| alive[k % alive.len()];
    match *step {
        Step::Swap(a, b) => {
            let first = pick(a);
            let (u, v) = net.link(first).unwrap().endpoints;
            let partners: Vec<LinkId> = alive
                .iter()
                .copied()
                .filter(|&l| l != first && net.link(l).is_ok_and(|x| (x.touches(u) || x.touches(v)) && x.endpoints != (u, v)))
                .collect();
            if !partners.is_empty() {
                net.apply_swap(first, partners[b % partners.len()]).unwrap();
            }
        }
        Step::Distill(a, b) => {
            let first = pick(a);
            let ends = net.link(first).unwrap().endpoints;
            let twins: Vec<LinkId> =
                alive.iter().copied().filter(|&l| l != first && net.link(l).is_ok_and(|x| x.endpoints == ends)).collect();
            if !twins.is_empty() {
                net.apply_distill(&[first, twins[b % twins.len()]]).unwrap();
            }
        }
        Step::Snapshot => {}
    }
}

proptest! {
    #[test]
    fn interleaved_snapshots_restore_exactly(plan in steps(), order in any::<u64>()) {
        let mut net = lattice();
        let mut saved = vec![(net.snapshot(), net.clone())];
        for step in &plan {
            if matches!(step, Step::Snapshot) {
                saved.push((net.snapshot(), net.clone()));
            } else {
                apply(&mut net, step);
            }
        }
        // restore newest first, then jump back to an arbitrary earlier one
        for (snap, copy) in saved.iter().rev() {
            net.restore(snap).unwrap();
            prop_assert!(net == *copy);
        }
        // a later snapshot whose links are gone can no longer be restored
        let k = (order % saved.len() as u64) as usize;
        let grew = saved[k].1.links().len() > saved[0].1.links().len();
        prop_assert_eq!(net.restore(&saved[k].0).is_err(), grew);
        if !grew {
            prop_assert!(net == saved[k].1);
        }
    }
}
