//! Integrity and connectivity of percolation outcomes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::NodeId;
use crate::schmidt::SchmidtValue;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("destroyed count must be positive")]
    ZeroDestroyed,
    #[error("no outcomes to aggregate")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOutcome {
    pub source: NodeId,
    pub target: NodeId,
    pub distance: usize,
    pub final_lambda: SchmidtValue,
    pub destroyed: usize,
}

/// Distance over the number of original links destroyed.
pub fn integrity(o: &PairOutcome) -> Result<f64, MetricsError> {
    if o.destroyed == 0 {
        return Err(MetricsError::ZeroDestroyed);
    }
    Ok(o.distance as f64 / o.destroyed as f64)
}

/// Entanglement of the final link times integrity.
pub fn connectivity(o: &PairOutcome) -> Result<f64, MetricsError> {
    Ok(o.final_lambda.entanglement() * integrity(o)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceAggregate {
    pub mean_entanglement: f64,
    pub mean_integrity: f64,
    pub mean_connectivity: f64,
    pub count: usize,
}

/// Means per distance class, ordered by distance.
pub fn aggregate_by_distance(outcomes: &[PairOutcome]) -> Result<BTreeMap<usize, DistanceAggregate>, MetricsError> {
    let rows = outcomes
        .iter()
        .map(|o| Ok((o.distance, o.final_lambda.entanglement(), integrity(o)?, connectivity(o)?)))
        .collect::<Result<Vec<_>, MetricsError>>()?;
    aggregate_values(&rows)
}

/// Groups `(distance, entanglement, integrity, connectivity)` rows.
pub fn aggregate_values(rows: &[(usize, f64, f64, f64)]) -> Result<BTreeMap<usize, DistanceAggregate>, MetricsError> {
    if rows.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut sums: BTreeMap<usize, (f64, f64, f64, usize)> = BTreeMap::new();
    for &(d, e, i, k) in rows {
        let s = sums.entry(d).or_default();
        s.0 += e;
        s.1 += i;
        s.2 += k;
        s.3 += 1;
    }
    Ok(sums
        .into_iter()
        .map(|(d, (e, i, k, n))| {
            let n_f = n as f64;
            (
                d,
                DistanceAggregate {
                    mean_entanglement: e / n_f,
                    mean_integrity: i / n_f,
                    mean_connectivity: k / n_f,
                    count: n,
                },
            )
        })
        .collect())
}
