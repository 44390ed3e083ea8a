//! Percolation strategies as swap/distill expression trees and the threshold
//! solver for uniform networks.

use std::fmt;

use thiserror::Error;

use crate::schmidt::{swap, SchmidtValue};
use crate::tolerance::TOLERANCES;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error("slot {0} is not bound")]
    UnboundSlot(usize),
    #[error("distill node without children")]
    EmptyDistill,
    #[error("strategy cannot reach maximal entanglement: f(1/2) = {0}")]
    Unreachable(f64),
    #[error("strategy value is not monotone in lambda near {0}")]
    NotMonotone(f64),
}

/// Composition of swaps and distillations over numbered link slots.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategyExpr {
    Leaf(usize),
    Swap(Box<StrategyExpr>, Box<StrategyExpr>),
    Distill(Vec<StrategyExpr>),
}

/// Slot assignment used by [`StrategyExpr::evaluate`].
pub trait Binding {
    fn get(&self, slot: usize) -> Option<SchmidtValue>;
}

/// Every slot bound to the same value.
#[derive(Debug, Clone, Copy)]
pub struct Uniform(pub SchmidtValue);

impl Binding for Uniform {
    fn get(&self, _slot: usize) -> Option<SchmidtValue> {
        Some(self.0)
    }
}

impl Binding for [SchmidtValue] {
    fn get(&self, slot: usize) -> Option<SchmidtValue> {
        <[SchmidtValue]>::get(self, slot).copied()
    }
}

impl<const N: usize> Binding for [SchmidtValue; N] {
    fn get(&self, slot: usize) -> Option<SchmidtValue> {
        self.as_slice().get(slot).copied()
    }
}

impl StrategyExpr {
    pub fn leaf(slot: usize) -> Self {
        StrategyExpr::Leaf(slot)
    }

    pub fn swap(a: StrategyExpr, b: StrategyExpr) -> Self {
        StrategyExpr::Swap(Box::new(a), Box::new(b))
    }

    pub fn distill(children: Vec<StrategyExpr>) -> Self {
        StrategyExpr::Distill(children)
    }

    /// Schmidt value produced by the strategy. Every distill node is clipped
    /// at 1/2.
    pub fn evaluate<B: Binding + ?Sized>(&self, binding: &B) -> Result<SchmidtValue, StrategyError> {
        match self {
            StrategyExpr::Leaf(slot) => binding.get(*slot).ok_or(StrategyError::UnboundSlot(*slot)),
            StrategyExpr::Swap(a, b) => Ok(swap(a.evaluate(binding)?, b.evaluate(binding)?)),
            StrategyExpr::Distill(_) => {
                let product = self.product_of_children(binding)?;
                Ok(SchmidtValue::from_formula(product.max(0.5)))
            }
        }
    }

    /// Like [`evaluate`](Self::evaluate) but the root distill node returns the
    /// bare product, which may drop below 1/2.
    pub fn evaluate_unclipped<B: Binding + ?Sized>(&self, binding: &B) -> Result<f64, StrategyError> {
        match self {
            StrategyExpr::Distill(_) => self.product_of_children(binding),
            other => other.evaluate(binding).map(SchmidtValue::lambda),
        }
    }

    fn product_of_children<B: Binding + ?Sized>(&self, binding: &B) -> Result<f64, StrategyError> {
        let StrategyExpr::Distill(children) = self else {
            unreachable!("only called on distill nodes")
        };
        if children.is_empty() {
            return Err(StrategyError::EmptyDistill);
        }
        children
            .iter()
            .try_fold(1.0, |acc, c| Ok(acc * c.evaluate(binding)?.lambda()))
    }

    /// Number of leaves, i.e. original links the strategy consumes.
    pub fn leaf_count(&self) -> usize {
        match self {
            StrategyExpr::Leaf(_) => 1,
            StrategyExpr::Swap(a, b) => a.leaf_count() + b.leaf_count(),
            StrategyExpr::Distill(c) => c.iter().map(StrategyExpr::leaf_count).sum(),
        }
    }

    /// Largest uniform lambda at which the strategy still yields a maximally
    /// entangled link.
    pub fn solve_threshold(&self) -> Result<f64, StrategyError> {
        let tol = &TOLERANCES;
        let f = |l: f64| self.evaluate_unclipped(&Uniform(SchmidtValue::from_formula(l)));

        let at_half = f(0.5)?;
        if at_half > 0.5 + tol.comparison {
            return Err(StrategyError::Unreachable(at_half));
        }
        if f(1.0)? <= 0.5 {
            return Ok(1.0);
        }

        let n = tol.monotonicity_grid;
        let mut prev = at_half;
        for i in 1..n {
            let l = 0.5 + 0.5 * i as f64 / (n - 1) as f64;
            let v = f(l)?;
            if v < prev - tol.comparison {
                return Err(StrategyError::NotMonotone(l));
            }
            prev = v;
        }

        let (mut lo, mut hi) = (0.5, 1.0);
        for _ in 0..tol.bisection_max_iterations {
            if hi - lo <= tol.bisection_width {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if f(mid)? <= 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }
}

impl fmt::Display for StrategyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyExpr::Leaf(s) => write!(f, "l{s}"),
            StrategyExpr::Swap(a, b) => write!(f, "S({a}, {b})"),
            StrategyExpr::Distill(c) => {
                write!(f, "D[")?;
                for (i, e) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// A named strategy with its reference threshold, if one is known.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyCatalogEntry {
    pub name: &'static str,
    pub expr: StrategyExpr,
    pub published_threshold: Option<f64>,
}

/// Builds `D[swaps..., directs...]` with `swaps` two-hop paths and `directs`
/// direct links, numbering slots left to right.
pub fn local_strategy(swaps: usize, directs: usize) -> StrategyExpr {
    let mut slot = 0;
    let mut next = || {
        slot += 1;
        StrategyExpr::leaf(slot - 1)
    };
    let mut children = Vec::with_capacity(swaps + directs);
    for _ in 0..swaps {
        let (a, b) = (next(), next());
        children.push(StrategyExpr::swap(a, b));
    }
    for _ in 0..directs {
        children.push(next());
    }
    StrategyExpr::distill(children)
}

/// Three-link chain `S(l, S(l, l))` starting at slot `first`.
fn double_swap(first: usize) -> StrategyExpr {
    StrategyExpr::swap(
        StrategyExpr::leaf(first),
        StrategyExpr::swap(StrategyExpr::leaf(first + 1), StrategyExpr::leaf(first + 2)),
    )
}

/// The connection-phase strategies in ascending threshold order, followed by
/// a recursive two-chain strategy without a reference value.
pub fn standard_catalog() -> Vec<StrategyCatalogEntry> {
    let entry = |name, expr, t| StrategyCatalogEntry { name, expr, published_threshold: t };
    let mut two_plus_one = local_strategy(2, 0);
    if let StrategyExpr::Distill(c) = &mut two_plus_one {
        c.push(double_swap(4));
    }
    vec![
        entry("2S2D", local_strategy(2, 0), Some(0.6498)),
        entry("1S2D", local_strategy(1, 1), Some(0.675)),
        entry("2S+1SS,3D", two_plus_one, Some(0.705)),
        entry("3S3D", local_strategy(3, 0), Some(0.718)),
        entry("2S3D", local_strategy(2, 1), Some(0.742)),
        entry("4S4D", local_strategy(4, 0), Some(0.759)),
        entry("3S4D", local_strategy(3, 1), Some(0.779)),
        entry(
            "2SS2D",
            StrategyExpr::distill(vec![double_swap(0), double_swap(3)]),
            None,
        ),
    ]
}
