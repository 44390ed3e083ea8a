use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which intermediate nodes a hop may move to, judged by hop distance to the
/// target on the original topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    /// Strictly closer to the target.
    Strict,
    /// Closer or at the same distance.
    AllowEqual,
    /// At most one step further away.
    AllowPlusOne,
}

impl DistanceMode {
    pub fn allows(self, candidate: usize, current: usize) -> bool {
        match self {
            DistanceMode::Strict => candidate < current,
            DistanceMode::AllowEqual => candidate <= current,
            DistanceMode::AllowPlusOne => candidate <= current + 1,
        }
    }
}

/// Slack `delta` applied to samples `start..end`.
///
/// A hop candidate is viable when its Schmidt value is within `delta` of the
/// best candidate's. With `delta = 0` it must also match the best candidate's
/// cost, so only exact ties remain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlackPhase {
    pub start: usize,
    pub end: usize,
    pub delta: f64,
}

/// Distance rule applied to samples `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistancePhase {
    pub start: usize,
    pub end: usize,
    pub mode: DistanceMode,
}

/// Slack that admits every candidate reaching the best Schmidt value,
/// whatever its cost.
pub const COST_RELAXED: f64 = 1e-9;
/// Slack that admits every candidate.
pub const UNRESTRICTED: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeuristicParams {
    pub samples: usize,
    pub max_improve_iterations: usize,
    pub slack_schedule: Vec<SlackPhase>,
    pub distance_relax_schedule: Vec<DistancePhase>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("samples must be positive")]
    NoSamples,
    #[error("{schedule} schedule must cover samples 0..{samples} contiguously; problem at sample {at}")]
    Coverage { schedule: &'static str, samples: usize, at: usize },
    #[error("slack must be finite and non-negative, got {0}")]
    BadSlack(f64),
}

impl Default for HeuristicParams {
    fn default() -> Self {
        HeuristicParams::with_samples(600)
    }
}

impl HeuristicParams {
    /// The default schedule scaled to `samples` samples:
    ///
    /// | share | distance | slack |
    /// |---|---|---|
    /// | first 1/6 | strict | 0 |
    /// | next 1/6 | strict | cost-relaxed |
    /// | next 1/3 | strict | unrestricted |
    /// | next 1/6 | allow-equal | cost-relaxed |
    /// | last 1/6 | allow-plus-one | cost-relaxed |
    pub fn with_samples(samples: usize) -> Self {
        // the greedy phase always gets at least one sample
        let cut = |num: usize, den: usize| (samples * num / den).max(1).min(samples);
        let bounds = [0, cut(1, 6), cut(2, 6), cut(4, 6), cut(5, 6), samples];
        let phases = [
            (DistanceMode::Strict, 0.0),
            (DistanceMode::Strict, COST_RELAXED),
            (DistanceMode::Strict, UNRESTRICTED),
            (DistanceMode::AllowEqual, COST_RELAXED),
            (DistanceMode::AllowPlusOne, COST_RELAXED),
        ];
        let mut slack_schedule = Vec::new();
        let mut distance_relax_schedule = Vec::new();
        for (k, (mode, delta)) in phases.into_iter().enumerate() {
            let (start, end) = (bounds[k], bounds[k + 1]);
            if start < end {
                slack_schedule.push(SlackPhase { start, end, delta });
                distance_relax_schedule.push(DistancePhase { start, end, mode });
            }
        }
        HeuristicParams { samples, max_improve_iterations: 10, slack_schedule, distance_relax_schedule }
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        if self.samples == 0 {
            return Err(ParamsError::NoSamples);
        }
        let slack: Vec<_> = self.slack_schedule.iter().map(|p| (p.start, p.end)).collect();
        check_coverage("slack", &slack, self.samples)?;
        let dist: Vec<_> = self.distance_relax_schedule.iter().map(|p| (p.start, p.end)).collect();
        check_coverage("distance", &dist, self.samples)?;
        for p in &self.slack_schedule {
            if !p.delta.is_finite() || p.delta < 0.0 {
                return Err(ParamsError::BadSlack(p.delta));
            }
        }
        Ok(())
    }

    /// Slack and distance rule for one sample.
    pub fn phase(&self, sample: usize) -> (f64, DistanceMode) {
        let delta = self
            .slack_schedule
            .iter()
            .find(|p| (p.start..p.end).contains(&sample))
            .map_or(0.0, |p| p.delta);
        let mode = self
            .distance_relax_schedule
            .iter()
            .find(|p| (p.start..p.end).contains(&sample))
            .map_or(DistanceMode::Strict, |p| p.mode);
        (delta, mode)
    }
}

fn check_coverage(schedule: &'static str, ranges: &[(usize, usize)], samples: usize) -> Result<(), ParamsError> {
    let mut sorted = ranges.to_vec();
    sorted.sort_unstable();
    let mut next = 0;
    for (start, end) in sorted {
        if start != next || end <= start {
            return Err(ParamsError::Coverage { schedule, samples, at: next });
        }
        next = end;
    }
    if next != samples {
        return Err(ParamsError::Coverage { schedule, samples, at: next });
    }
    Ok(())
}
