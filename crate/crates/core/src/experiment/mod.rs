//! Sweep drivers: configuration, parallel execution, and deterministic output.

mod config;
mod emit;
mod sweep;

use std::path::PathBuf;

use thiserror::Error;

use crate::disorder::DisorderError;
use crate::engine::EngineError;
use crate::network::{NodeId, TopologyError};
use crate::strategy::{standard_catalog, StrategyError};

pub use config::{
    ConfigError, DisorderConfig, ExperimentConfig, Grid, HeuristicsConfig, PairSelection, SweepConfig, SweepKind,
};
pub use emit::{aggregate_path, emit, fmt_sig9, render, OutputFormat, AGGREGATE_HEADER, RECORD_HEADER};
pub use sweep::{run_disorder_sweep, run_sweep, run_uniform_sweep, select_pairs, AggregateRow, SweepOutput, SweepRecord};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("mean {mean}, network sample {network_sample}: {source}")]
    Disorder { mean: f64, network_sample: usize, source: DisorderError },
    #[error("pair ({from}, {to}): {source}")]
    Engine { from: NodeId, to: NodeId, source: EngineError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Largest accepted gap between a solved and a published threshold.
pub const THRESHOLD_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub name: &'static str,
    pub solved: Result<f64, StrategyError>,
    pub published: Option<f64>,
}

impl ThresholdRow {
    pub fn delta(&self) -> Option<f64> {
        match (&self.solved, self.published) {
            (Ok(s), Some(p)) => Some((s - p).abs()),
            _ => None,
        }
    }

    /// Solved, and within tolerance of the published value if there is one.
    pub fn ok(&self) -> bool {
        self.solved.is_ok() && self.delta().is_none_or(|d| d < THRESHOLD_TOLERANCE)
    }
}

/// Solves every strategy of the standard catalog.
pub fn run_thresholds() -> Vec<ThresholdRow> {
    standard_catalog()
        .into_iter()
        .map(|e| ThresholdRow { name: e.name, solved: e.expr.solve_threshold(), published: e.published_threshold })
        .collect()
}

/// Plain-text table of `rows`.
pub fn format_thresholds(rows: &[ThresholdRow]) -> String {
    let mut out = format!("{:<12} {:>14} {:>10} {:>10}\n", "strategy", "threshold", "published", "|delta|");
    for r in rows {
        let solved = match &r.solved {
            Ok(t) => format!("{t:.12}"),
            Err(e) => format!("error: {e}"),
        };
        let published = r.published.map_or("-".into(), |p| format!("{p}"));
        let delta = r.delta().map_or("-".into(), |d| format!("{d:.2e}"));
        out.push_str(&format!("{:<12} {:>14} {:>10} {:>10}\n", r.name, solved, published, delta));
    }
    out
}
