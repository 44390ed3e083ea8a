//! Two-qubit pure states reduced to their largest Schmidt coefficient, and the
//! swapping/distillation algebra on them.
//!
//! A state `sqrt(l)|00> + sqrt(1-l)|11>` is fully described by `l` in
//! `[1/2, 1]`: `l = 1/2` is a Bell pair, `l = 1` a product state.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tolerance::{snap_into, TOLERANCES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchmidtError {
    #[error("Schmidt value {0} outside [1/2, 1]")]
    OutOfRange(f64),
    #[error("cannot distill an empty set of states")]
    EmptyDistillation,
}

/// Largest Schmidt coefficient of a two-qubit pure state.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SchmidtValue(f64);

impl SchmidtValue {
    /// The maximally entangled state.
    pub const MAXIMAL: SchmidtValue = SchmidtValue(0.5);
    /// A product state.
    pub const PRODUCT: SchmidtValue = SchmidtValue(1.0);

    pub fn new(lambda: f64) -> Result<Self, SchmidtError> {
        let snapped = snap_into(lambda, 0.5, 1.0);
        if (0.5..=1.0).contains(&snapped) {
            Ok(SchmidtValue(snapped))
        } else {
            Err(SchmidtError::OutOfRange(lambda))
        }
    }

    /// Builds from a formula result that is analytically in range; only
    /// round-off is clamped away.
    pub(crate) fn from_formula(lambda: f64) -> Self {
        debug_assert!(
            lambda >= 0.5 - 1e-9 && lambda <= 1.0 + 1e-9,
            "formula produced {lambda}"
        );
        SchmidtValue(lambda.clamp(0.5, 1.0))
    }

    pub fn lambda(self) -> f64 {
        self.0
    }

    /// Imperfection `lambda - 1/2`, in `[0, 1/2]`.
    pub fn epsilon(self) -> f64 {
        self.0 - 0.5
    }

    pub fn entanglement(self) -> f64 {
        entanglement(self)
    }

    pub fn is_maximal(self) -> bool {
        self.0 - 0.5 <= TOLERANCES.comparison
    }
}

impl fmt::Display for SchmidtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl TryFrom<f64> for SchmidtValue {
    type Error = SchmidtError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        SchmidtValue::new(value)
    }
}

impl From<SchmidtValue> for f64 {
    fn from(value: SchmidtValue) -> Self {
        value.0
    }
}

/// Twice the smaller Schmidt coefficient: 1 for a Bell pair, 0 for a product
/// state.
pub fn entanglement(s: SchmidtValue) -> f64 {
    2.0 * (1.0 - s.0)
}

/// Worst-case outcome of an XZ Bell measurement joining two links in series.
pub fn swap(a: SchmidtValue, b: SchmidtValue) -> SchmidtValue {
    // fixed operand order keeps the result exactly symmetric
    let (a, b) = (a.0.min(b.0), a.0.max(b.0));
    let radicand = 1.0 - 16.0 * a * (1.0 - a) * b * (1.0 - b);
    let radicand = snap_into(radicand, 0.0, 1.0).max(0.0);
    SchmidtValue::from_formula((1.0 + radicand.sqrt()) / 2.0)
}

/// Swapping in the imperfection parameterisation: `swap(1/2 + e1, 1/2 + e2)
/// = 1/2 + swap_epsilon(e1, e2)`.
pub fn swap_epsilon(e1: f64, e2: f64) -> f64 {
    let (s1, s2) = (e1 * e1, e2 * e2);
    (s1 + s2 - 4.0 * s1 * s2).max(0.0).sqrt()
}

/// Most entangled state obtainable deterministically from two parallel links.
pub fn distill_pair(a: SchmidtValue, b: SchmidtValue) -> SchmidtValue {
    SchmidtValue::from_formula((a.0 * b.0).max(0.5))
}

/// Distillation of any number of parallel links. The clip to 1/2 is applied
/// once, to the full product.
pub fn distill_many(values: &[SchmidtValue]) -> Result<SchmidtValue, SchmidtError> {
    if values.is_empty() {
        return Err(SchmidtError::EmptyDistillation);
    }
    let product: f64 = values.iter().map(|v| v.0).product();
    Ok(SchmidtValue::from_formula(product.max(0.5)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64) -> SchmidtValue {
        SchmidtValue::new(x).unwrap()
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(SchmidtValue::new(0.49).is_err());
        assert!(SchmidtValue::new(1.01).is_err());
        assert!(SchmidtValue::new(f64::NAN).is_err());
        // round-off just outside the interval is snapped back
        assert_eq!(SchmidtValue::new(0.5 - 1e-14).unwrap().lambda(), 0.5);
        assert_eq!(SchmidtValue::new(1.0 + 1e-14).unwrap().lambda(), 1.0);
    }

    #[test]
    fn entanglement_values() {
        assert_eq!(entanglement(s(0.5)), 1.0);
        assert_eq!(entanglement(s(1.0)), 0.0);
        assert_eq!(entanglement(s(0.75)), 0.5);
        assert_eq!(s(0.75).epsilon(), 0.25);
    }

    #[test]
    fn swap_through_bell_pair_is_lossless() {
        for beta in [0.5, 0.6, 0.73, 0.9, 1.0] {
            assert!((swap(s(0.5), s(beta)).lambda() - beta).abs() < 1e-12);
        }
        for beta in [0.5, 0.6, 0.9] {
            assert_eq!(swap(s(1.0), s(beta)).lambda(), 1.0);
        }
    }

    #[test]
    fn swap_reference_values() {
        // 0.663 / 0.75 from the showcase network, and the frozen exact value.
        let v = swap(s(0.8), s(0.8)).lambda();
        assert!((v - 0.663 / 0.75).abs() < 5e-4);
        assert!((v - 0.884_187_454_245_971).abs() < 1e-12);
        let w = swap(s(0.75), s(0.7)).lambda();
        assert!((w - 0.804_138_126_514_911).abs() < 1e-12);
        assert!((w * 0.8 - 0.6432).abs() < 5e-4);
        assert_eq!(swap(s(0.6), s(0.6)).lambda(), 0.64);
    }

    #[test]
    fn swap_epsilon_values() {
        assert_eq!(swap_epsilon(0.0, 0.0), 0.0);
        for e in [0.0, 0.1, 0.25, 0.5] {
            assert!((swap_epsilon(0.5, e) - 0.5).abs() < 1e-15);
        }
        assert!((swap_epsilon(0.3, 0.3) - 0.384_187_454_245_971).abs() < 1e-12);
    }

    #[test]
    fn distill_values() {
        assert!((distill_pair(s(0.8), s(0.8)).lambda() - 0.64).abs() < 1e-15);
        assert_eq!(distill_pair(s(0.7), s(0.7)).lambda(), 0.5);
        assert_eq!(distill_pair(s(0.58), s(0.84)).lambda(), 0.5);
    }

    #[test]
    fn distill_many_values() {
        assert_eq!(distill_many(&[s(0.9)]).unwrap().lambda(), 0.9);
        let fig = [s(0.8), s(0.86056), s(0.71301)];
        assert_eq!(distill_many(&fig).unwrap().lambda(), 0.5);
        assert!((distill_many(&[s(0.9); 3]).unwrap().lambda() - 0.729).abs() < 1e-12);
        assert_eq!(distill_many(&[]), Err(SchmidtError::EmptyDistillation));
    }

    #[test]
    fn pairwise_fold_matches_single_clip() {
        // once a partial product is clipped the rest can only stay at 1/2
        for vals in [
            vec![s(0.7), s(0.7), s(1.0)],
            vec![s(0.9), s(0.8), s(0.75)],
            vec![s(0.99), s(0.6), s(0.95), s(0.9)],
        ] {
            let folded = vals[1..].iter().fold(vals[0], |acc, &v| distill_pair(acc, v));
            let once = distill_many(&vals).unwrap();
            assert!((folded.lambda() - once.lambda()).abs() < 1e-15);
        }
    }

    #[test]
    fn serde_rejects_invalid() {
        let ok: SchmidtValue = serde_json::from_str("0.7").unwrap();
        assert_eq!(ok.lambda(), 0.7);
        assert!(serde_json::from_str::<SchmidtValue>("0.2").is_err());
    }
}
