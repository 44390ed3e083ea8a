//! Initial Schmidt values: uniform, or truncated normal with an enforced mean.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::QuantumNetwork;
use crate::schmidt::SchmidtValue;
use crate::tolerance::TOLERANCES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisorderMode {
    Uniform,
    TruncatedNormal,
}

impl DisorderMode {
    pub fn name(self) -> &'static str {
        match self {
            DisorderMode::Uniform => "uniform",
            DisorderMode::TruncatedNormal => "truncated-normal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub mode: DisorderMode,
    pub lambda_mean: f64,
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DisorderError {
    #[error("lambda_mean {0} outside [1/2, 1]")]
    MeanOutOfRange(f64),
    #[error("sigma must be finite and non-negative, got {0}")]
    BadSigma(f64),
    #[error("could not enforce mean {target}: sample mean {reached} after {iterations} iterations")]
    MeanUnreachable { target: f64, reached: f64, iterations: usize },
}

impl DisorderSpec {
    pub fn uniform(lambda_mean: f64) -> Self {
        DisorderSpec { mode: DisorderMode::Uniform, lambda_mean, sigma: 0.0, seed: 0 }
    }
}

/// Draws the Schmidt values of `count` links. Uniform mode and `sigma = 0`
/// return `count` copies of the mean.
pub fn sample_values(spec: &DisorderSpec, count: usize) -> Result<Vec<f64>, DisorderError> {
    let mean = spec.lambda_mean;
    if !(0.5..=1.0).contains(&mean) {
        return Err(DisorderError::MeanOutOfRange(mean));
    }
    if !spec.sigma.is_finite() || spec.sigma < 0.0 {
        return Err(DisorderError::BadSigma(spec.sigma));
    }
    if spec.mode == DisorderMode::Uniform || spec.sigma == 0.0 || count == 0 {
        return Ok(vec![mean; count]);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(mean, spec.sigma).map_err(|_| DisorderError::BadSigma(spec.sigma))?;
    let mut values: Vec<f64> = (0..count)
        .map(|_| loop {
            let x = normal.sample(&mut rng);
            if (0.5..=1.0).contains(&x) {
                break x;
            }
        })
        .collect();

    let tol = TOLERANCES.mean_enforcement;
    let average = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mut reached = average(&values);
    let mut iterations = 0;
    while (reached - mean).abs() > tol {
        if iterations == TOLERANCES.mean_enforcement_iterations {
            return Err(DisorderError::MeanUnreachable { target: mean, reached, iterations });
        }
        let shift = mean - reached;
        for v in &mut values {
            *v = (*v + shift).clamp(0.5, 1.0);
        }
        reached = average(&values);
        iterations += 1;
    }
    Ok(values)
}

/// Overwrites the Schmidt value of every original link, in id order.
pub fn assign(net: &mut QuantumNetwork, spec: &DisorderSpec) -> Result<(), DisorderError> {
    let values = sample_values(spec, net.original_count())?;
    for (id, v) in values.into_iter().enumerate() {
        let lambda = SchmidtValue::new(v).expect("sampled values lie in [1/2, 1]");
        net.set_lambda(id, lambda).expect("original link");
    }
    Ok(())
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the random stream named by `labels` under `master`.
///
/// The state starts at `splitmix64(master)`; each label is folded in as
/// `state = splitmix64(state ^ splitmix64(label))`, and the label count is
/// folded in last. Every step is a bijection of the state, so the result
/// depends on the order and the number of labels.
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    let mut state = splitmix64(master);
    for &label in labels {
        state = splitmix64(state ^ splitmix64(label));
    }
    splitmix64(state ^ labels.len() as u64)
}
