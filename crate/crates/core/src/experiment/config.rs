//! Experiment configuration, read from TOML.
//!
//! ```toml
//! master_seed = 7
//! output = "runs/diag.csv"
//!
//! [topology]
//! kind = "diagonal-square"
//! rows = 6
//! cols = 6
//!
//! [disorder]
//! mode = "truncated-normal"
//! sigma = 0.07
//!
//! [sweep]
//! mean_grid = { start = 0.6, stop = 0.76, step = 0.0025 }
//! network_samples = 5
//!
//! [pairs]
//! selection = "per-distance-cap"
//! cap = 8
//!
//! [heuristics]
//! samples = 150
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disorder::DisorderMode;
use crate::engine::{DistancePhase, HeuristicParams, ParamsError, SlackPhase};
use crate::network::{NodeId, TopologySpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("{key}: {message}")]
    Invalid { key: &'static str, message: String },
}

fn invalid(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key, message: message.into() }
}

/// A list of points, or an inclusive arithmetic range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, expecting = "a list of numbers or a table { start, stop, step }")]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    /// The grid points. Range points are rounded to 12 decimals so that
    /// `0.6 + 2 * 0.0025` prints as `0.605`.
    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, step } => {
                if !(*step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
                    return Vec::new();
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderConfig {
    pub mode: DisorderMode,
    #[serde(default)]
    pub sigma: f64,
}

impl Default for DisorderConfig {
    fn default() -> Self {
        DisorderConfig { mode: DisorderMode::Uniform, sigma: 0.0 }
    }
}

fn default_network_samples() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_grid: Option<Grid>,
    /// Disorder draws per mean; ignored by uniform sweeps.
    #[serde(default = "default_network_samples")]
    pub network_samples: usize,
}

/// Which source-target pairs a sweep runs. Pairs are unordered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "selection", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PairSelection {
    AllPairs,
    /// At most `cap` pairs per distance class, drawn with the master seed.
    PerDistanceCap { cap: usize },
    Explicit { list: Vec<[NodeId; 2]> },
}

fn default_samples() -> usize {
    600
}

fn default_improve() -> usize {
    10
}

/// Heuristic settings. Schedules default to the standard one for `samples`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeuristicsConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_improve")]
    pub max_improve_iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack_schedule: Option<Vec<SlackPhase>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_relax_schedule: Option<Vec<DistancePhase>>,
}

impl Default for HeuristicsConfig {
    fn default() -> Self {
        HeuristicsConfig {
            samples: default_samples(),
            max_improve_iterations: default_improve(),
            slack_schedule: None,
            distance_relax_schedule: None,
        }
    }
}

impl HeuristicsConfig {
    pub fn params(&self) -> Result<HeuristicParams, ParamsError> {
        let mut p = HeuristicParams::with_samples(self.samples);
        p.max_improve_iterations = self.max_improve_iterations;
        if let Some(s) = &self.slack_schedule {
            p.slack_schedule = s.clone();
        }
        if let Some(d) = &self.distance_relax_schedule {
            p.distance_relax_schedule = d.clone();
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub topology: TopologySpec,
    #[serde(default)]
    pub disorder: DisorderConfig,
    pub sweep: SweepConfig,
    pub pairs: PairSelection,
    #[serde(default)]
    pub heuristics: HeuristicsConfig,
}

/// The kind of sweep a config describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Uniform,
    Disorder,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    /// Canonical TOML form.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn kind(&self) -> SweepKind {
        if self.sweep.mean_grid.is_some() {
            SweepKind::Disorder
        } else {
            SweepKind::Uniform
        }
    }

    /// The grid of the configured sweep.
    pub fn grid(&self) -> Vec<f64> {
        self.sweep.lambda_grid.as_ref().or(self.sweep.mean_grid.as_ref()).map(Grid::points).unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.sweep;
        let (key, grid) = match (&s.lambda_grid, &s.mean_grid) {
            (Some(g), None) => ("sweep.lambda_grid", g),
            (None, Some(g)) => ("sweep.mean_grid", g),
            _ => return Err(invalid("sweep", "set exactly one of lambda_grid and mean_grid")),
        };
        let points = grid.points();
        if points.is_empty() {
            return Err(invalid(key, "grid is empty"));
        }
        if let Some(x) = points.iter().find(|x| !(0.5..=1.0).contains(*x)) {
            return Err(invalid(key, format!("{x} outside [0.5, 1]")));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid(key, "grid must be strictly increasing"));
        }
        if self.kind() == SweepKind::Disorder && s.network_samples == 0 {
            return Err(invalid("sweep.network_samples", "must be positive"));
        }
        if self.kind() == SweepKind::Uniform && self.disorder.mode != DisorderMode::Uniform {
            return Err(invalid("disorder.mode", "lambda_grid sweeps need uniform disorder; use mean_grid"));
        }
        if !self.disorder.sigma.is_finite() || self.disorder.sigma < 0.0 {
            return Err(invalid("disorder.sigma", "must be finite and non-negative"));
        }
        if self.topology.rows == 0 || self.topology.cols == 0 {
            return Err(invalid("topology", "rows and cols must be positive"));
        }
        match &self.pairs {
            PairSelection::PerDistanceCap { cap: 0 } => return Err(invalid("pairs.cap", "must be positive")),
            PairSelection::Explicit { list } if list.is_empty() => {
                return Err(invalid("pairs.list", "pair selection is empty"))
            }
            _ => {}
        }
        self.heuristics.params().map_err(|e| invalid("heuristics", e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
master_seed = 7

[topology]
kind = "diagonal-square"
rows = 6
cols = 6

[sweep]
lambda_grid = { start = 0.6, stop = 0.76, step = 0.0025 }

[pairs]
selection = "per-distance-cap"
cap = 8

[heuristics]
samples = 150
"#;

    #[test]
    fn parses_and_expands_range() {
        let cfg = ExperimentConfig::from_toml(EXAMPLE).unwrap();
        let g = cfg.grid();
        assert_eq!(g.len(), 65);
        assert_eq!((g[0], g[2], g[64]), (0.6, 0.605, 0.76));
        assert_eq!(cfg.kind(), SweepKind::Uniform);
        assert_eq!(cfg.pairs, PairSelection::PerDistanceCap { cap: 8 });
        assert_eq!(cfg.heuristics.params().unwrap(), HeuristicParams::with_samples(150));
        assert_eq!(cfg.sweep.network_samples, 10);
    }

    #[test]
    fn canonical_form_round_trips() {
        let cfg = ExperimentConfig::from_toml(EXAMPLE).unwrap();
        let text = cfg.to_toml();
        let again = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_toml(), text);

        let explicit = EXAMPLE.replace("selection = \"per-distance-cap\"\ncap = 8", "selection = \"explicit\"\nlist = [[0, 35], [1, 2]]");
        let cfg = ExperimentConfig::from_toml(&explicit).unwrap();
        assert_eq!(cfg.pairs, PairSelection::Explicit { list: vec![[0, 35], [1, 2]] });
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    fn key_of(text: &str) -> &'static str {
        match ExperimentConfig::from_toml(text) {
            Err(ConfigError::Invalid { key, .. }) => key,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn validation_names_the_key() {
        let grid = |g: &str| EXAMPLE.replace("{ start = 0.6, stop = 0.76, step = 0.0025 }", g);
        assert_eq!(key_of(&grid("[]")), "sweep.lambda_grid");
        assert_eq!(key_of(&grid("[0.6, 0.6]")), "sweep.lambda_grid");
        assert_eq!(key_of(&grid("[0.4, 0.6]")), "sweep.lambda_grid");
        assert_eq!(key_of(&grid("{ start = 0.7, stop = 0.6, step = 0.01 }")), "sweep.lambda_grid");
        assert_eq!(key_of(&EXAMPLE.replace("cap = 8", "cap = 0")), "pairs.cap");
        let empty = EXAMPLE.replace("selection = \"per-distance-cap\"\ncap = 8", "selection = \"explicit\"\nlist = []");
        assert_eq!(key_of(&empty), "pairs.list");
        assert_eq!(key_of(&EXAMPLE.replace("samples = 150", "samples = 0")), "heuristics");
        let both = EXAMPLE.replace("[pairs]", "mean_grid = [0.6]\n\n[pairs]");
        assert_eq!(key_of(&both), "sweep");
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = ExperimentConfig::from_toml(&EXAMPLE.replace("rows = 6", "rows = six")).unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
        assert!(err.to_string().contains("line"), "{err}");
        let err = ExperimentConfig::from_toml(&EXAMPLE.replace("rows = 6", "rows = 6\nrowz = 6")).unwrap_err();
        assert!(err.to_string().contains("rowz"), "{err}");
    }
}
