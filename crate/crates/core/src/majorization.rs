//! Majorization on Schmidt vectors of two-link products, and the LOCC
//! conversion probabilities built on it.
//!
//! For pure bipartite states, `psi -> phi` is possible deterministically iff
//! the Schmidt vector of `psi` is majorized by the one of `phi`; otherwise the
//! optimal success probability is the minimum ratio of tail sums.

use thiserror::Error;

use crate::schmidt::SchmidtValue;
use crate::tolerance::{snap_into, TOLERANCES};

/// Length of a Schmidt vector of two qubit pairs.
pub const DIM: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VectorError {
    #[error("Schmidt vector entry {0} is negative or not finite")]
    InvalidEntry(f64),
    #[error("Schmidt vector entries sum to {0}, expected 1")]
    NotNormalised(f64),
    #[error("Schmidt vector is not sorted in descending order")]
    NotSorted,
}

/// Four non-negative coefficients, descending, summing to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchmidtVector([f64; DIM]);

impl SchmidtVector {
    /// Validates an already sorted vector.
    pub fn new(entries: [f64; DIM]) -> Result<Self, VectorError> {
        for &e in &entries {
            if !e.is_finite() || e < -TOLERANCES.comparison {
                return Err(VectorError::InvalidEntry(e));
            }
        }
        if entries.windows(2).any(|w| w[0] < w[1] - TOLERANCES.comparison) {
            return Err(VectorError::NotSorted);
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > TOLERANCES.comparison {
            return Err(VectorError::NotNormalised(sum));
        }
        Ok(SchmidtVector(entries.map(|e| e.max(0.0))))
    }

    /// Sorts the entries in descending order, then validates.
    pub fn from_unsorted(mut entries: [f64; DIM]) -> Result<Self, VectorError> {
        entries.sort_by(|a, b| b.total_cmp(a));
        Self::new(entries)
    }

    pub fn entries(&self) -> &[f64; DIM] {
        &self.0
    }

    /// `self` is majorized by `other`: every prefix sum of `self` is at most
    /// the matching prefix sum of `other`.
    pub fn is_majorized_by(&self, other: &SchmidtVector) -> bool {
        let (mut a, mut b) = (0.0, 0.0);
        self.0.iter().zip(&other.0).all(|(x, y)| {
            a += x;
            b += y;
            a <= b + TOLERANCES.comparison
        })
    }

    /// `self` is submajorized by `other`: every suffix sum of `self` is at
    /// least the matching suffix sum of `other`.
    pub fn is_submajorized_by(&self, other: &SchmidtVector) -> bool {
        let (mut a, mut b) = (0.0, 0.0);
        self.0.iter().rev().zip(other.0.iter().rev()).all(|(x, y)| {
            a += x;
            b += y;
            a + TOLERANCES.comparison >= b
        })
    }

    fn suffix_sums(&self) -> [f64; DIM] {
        let mut out = [0.0; DIM];
        let mut acc = 0.0;
        for i in (0..DIM).rev() {
            acc += self.0[i];
            out[i] = acc;
        }
        out
    }
}

/// Schmidt vector of `|a> (x) |b>`.
pub fn product_vector(a: SchmidtValue, b: SchmidtValue) -> SchmidtVector {
    let (a, b) = (a.lambda(), b.lambda());
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    // already descending since hi >= lo >= 1/2
    let entries = [hi * lo, hi * (1.0 - lo), lo * (1.0 - hi), (1.0 - hi) * (1.0 - lo)];
    SchmidtVector::new(entries).expect("product of valid Schmidt values is a valid vector")
}

/// Optimal probability of converting `source` into `target` by LOCC.
///
/// Tail sums where both vectors vanish are skipped; a vanishing target tail
/// under a non-vanishing source tail contributes no constraint.
pub fn vidal_success_probability(source: &SchmidtVector, target: &SchmidtVector) -> f64 {
    let tol = TOLERANCES.comparison;
    let src = source.suffix_sums();
    let tgt = target.suffix_sums();
    let mut p: f64 = 1.0;
    for (s, t) in src.iter().zip(&tgt) {
        if *t <= tol {
            continue;
        }
        p = p.min(s / t);
    }
    // ratios within rounding of 1 mean certain conversion
    if p >= 1.0 - tol {
        return 1.0;
    }
    snap_into(p, 0.0, 1.0).clamp(0.0, 1.0)
}

/// Probability of distilling `|a> (x) |b>` into a single link with Schmidt
/// value `target`, in the limit where the second output pair is a product
/// state: `min(1, (1 - ab) / (1 - target))`.
pub fn distill_success_probability(a: SchmidtValue, b: SchmidtValue, target: SchmidtValue) -> f64 {
    let ab = a.lambda() * b.lambda();
    let denom = 1.0 - target.lambda();
    if denom <= TOLERANCES.comparison {
        // producing a product state never fails
        return 1.0;
    }
    let p = (1.0 - ab) / denom;
    snap_into(p, 0.0, 1.0).clamp(0.0, 1.0)
}
