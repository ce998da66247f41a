//! Error functions of the distance bounds and Monte Carlo estimates of the
//! stochastic bound functions.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::CompensatedSum;
use crate::rng::{stream, DOMAIN_BOUND_SAMPLES};

/// Below this `|gamma t|` the series branch of [`varphi`] is used.
pub const SERIES_THRESHOLD: f64 = 1e-8;
/// Minimum sample count accepted by the estimator.
pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("need at least {MIN_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// `int_0^t e^{gamma (t - s)} ds`, i.e. `(e^{gamma t} - 1) / gamma`.
pub fn varphi(gamma: f64, t: f64) -> f64 {
    let x = gamma * t;
    if x.abs() < SERIES_THRESHOLD {
        t * (1.0 + x / 2.0 + x * x / 6.0)
    } else {
        x.exp_m1() / gamma
    }
}

/// Constants of a distance bound.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundParams {
    /// Growth exponent used in the error functions.
    pub gamma: f64,
    /// Additive inflation of the slack.
    pub delta: f64,
    /// Nagumo slack.
    pub epsilon: f64,
    /// Semigroup exponent, `||S_t|| <= e^{beta t}`.
    pub beta: f64,
    /// Lipschitz constant of the drift.
    pub lipschitz: f64,
}

impl BoundParams {
    /// Bound constants for a model with exponent `beta` and drift constant `lipschitz`.
    pub fn for_model(beta: f64, lipschitz: f64, epsilon: f64) -> Self {
        Self { gamma: beta + lipschitz, delta: 0.0, epsilon, beta, lipschitz }
    }
}

/// `e^{gamma t} d + varphi_gamma(t) (e + delta)`.
pub fn big_phi(params: &BoundParams, d: f64, e: f64, t: f64) -> f64 {
    (params.gamma * t).exp() * d + varphi(params.gamma, t) * (e + params.delta)
}

/// Inputs of [`estimate_stochastic_bounds`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StochasticBoundConfig {
    /// Number of noise modes.
    pub modes: usize,
    /// Number of interpolation cells on `[0, horizon]`.
    pub partitions: usize,
    pub gamma: f64,
    pub lipschitz: f64,
    pub horizon: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl StochasticBoundConfig {
    fn validate(&self) -> Result<(), BoundsError> {
        if self.n_samples < MIN_SAMPLES {
            return Err(BoundsError::TooFewSamples(self.n_samples));
        }
        if self.modes == 0 || self.partitions == 0 {
            return Err(BoundsError::InvalidParameter("modes and partitions must be at least 1".into()));
        }
        if !(self.horizon > 0.0) || !(self.lipschitz >= 0.0) || !self.gamma.is_finite() {
            return Err(BoundsError::InvalidParameter(
                "need horizon > 0, lipschitz >= 0 and a finite gamma".into(),
            ));
        }
        Ok(())
    }
}

/// One sample of the slope maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeSample {
    /// `L * sum_j Y^j`.
    pub z: f64,
    /// Per-mode maximum `|increment| / cell width`.
    pub max_slopes: Vec<f64>,
    /// Per-mode sum `sum_k |increment| / cell width`.
    pub slope_sums: Vec<f64>,
}

/// Draws the slope maxima of every sample (stream `i` for sample `i`).
pub fn sample_slopes(config: &StochasticBoundConfig) -> Result<Vec<SlopeSample>, BoundsError> {
    config.validate()?;
    let cell = config.horizon / config.partitions as f64;
    let sd = cell.sqrt();
    Ok((0..config.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(config.seed, DOMAIN_BOUND_SAMPLES, i as u64);
            let mut max_slopes = Vec::with_capacity(config.modes);
            let mut slope_sums = Vec::with_capacity(config.modes);
            for _ in 0..config.modes {
                let (mut mx, mut sum) = (0.0_f64, 0.0);
                for _ in 0..config.partitions {
                    let z: f64 = rng.sample(StandardNormal);
                    let eta = (sd * z / cell).abs();
                    mx = mx.max(eta);
                    sum += eta;
                }
                max_slopes.push(mx);
                slope_sums.push(sum);
            }
            let z = config.lipschitz * max_slopes.iter().sum::<f64>();
            SlopeSample { z, max_slopes, slope_sums }
        })
        .collect())
}

/// Monte Carlo table of the two bound functions.
#[derive(Debug, Clone, Serialize)]
pub struct StochasticBoundTable {
    pub times: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_se: Vec<f64>,
    pub psi: Vec<f64>,
    pub psi_se: Vec<f64>,
    pub samples: usize,
    pub config: StochasticBoundConfig,
    /// Samples on which some mode had `max > sum` of its slopes.
    pub slope_sum_violations: usize,
    pub warnings: Vec<String>,
}

impl StochasticBoundTable {
    /// Columns `t, phi, phi_se, psi, psi_se`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), BoundsError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "phi", "phi_se", "psi", "psi_se"])?;
        for i in 0..self.times.len() {
            w.write_record(
                [self.times[i], self.phi[i], self.phi_se[i], self.psi[i], self.psi_se[i]].map(|v| format!("{v:.16e}")),
            )?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Index of `t` in the time grid (within `1e-12`).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
    }
}

/// Estimates `phi(t) = E[e^{2 (gamma + Z) t}]^{1/2}` and
/// `psi(t) = E[varphi_{gamma + Z}(t)^2]^{1/2}` with delta-method standard errors.
pub fn estimate_stochastic_bounds(config: &StochasticBoundConfig, times: &[f64]) -> Result<StochasticBoundTable, BoundsError> {
    if times.iter().any(|t| !(*t >= 0.0 && *t <= config.horizon * (1.0 + 1e-12))) {
        return Err(BoundsError::InvalidParameter("times must lie in [0, horizon]".into()));
    }
    let samples = sample_slopes(config)?;
    let n = samples.len() as f64;
    let slope_sum_violations = samples
        .iter()
        .filter(|s| s.max_slopes.iter().zip(&s.slope_sums).any(|(m, sum)| m > sum))
        .count();
    let mut table = StochasticBoundTable {
        times: times.to_vec(),
        phi: Vec::with_capacity(times.len()),
        phi_se: Vec::with_capacity(times.len()),
        psi: Vec::with_capacity(times.len()),
        psi_se: Vec::with_capacity(times.len()),
        samples: samples.len(),
        config: *config,
        slope_sum_violations,
        warnings: Vec::new(),
    };
    for &t in times {
        let (mean_a, se_a) = mean_and_se(samples.iter().map(|s| (2.0 * (config.gamma + s.z) * t).exp()), n);
        let (mean_b, se_b) = mean_and_se(samples.iter().map(|s| varphi(config.gamma + s.z, t).powi(2)), n);
        let phi = mean_a.sqrt();
        let psi = mean_b.sqrt();
        let phi_se = if phi > 0.0 { se_a / (2.0 * phi) } else { se_a.sqrt() };
        let psi_se = if psi > 0.0 { se_b / (2.0 * psi) } else { se_b.sqrt() };
        for (name, value, se) in [("phi", phi, phi_se), ("psi", psi, psi_se)] {
            if value > 0.0 && se / value > 0.1 {
                let msg = format!("relative standard error of {name}({t}) is {:.1}%", 100.0 * se / value);
                log::warn!("{msg}");
                table.warnings.push(msg);
            }
        }
        table.phi.push(phi);
        table.phi_se.push(phi_se);
        table.psi.push(psi);
        table.psi_se.push(psi_se);
    }
    Ok(table)
}

/// Sample mean and its standard error, summed in iteration order.
fn mean_and_se(values: impl Iterator<Item = f64> + Clone, n: f64) -> (f64, f64) {
    let mean = values.clone().collect::<CompensatedSum>().total() / n;
    let ss = values.map(|v| (v - mean).powi(2)).collect::<CompensatedSum>().total();
    let var = if n > 1.0 { ss / (n - 1.0) } else { 0.0 };
    (mean, (var / n).sqrt())
}
