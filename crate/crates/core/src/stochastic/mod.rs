//! Stochastic evolution equations driven by finitely many Brownian modes:
//! exponential Euler-Maruyama, the Wong-Zakai approximation and Monte Carlo
//! estimates of expected distances.

mod panel;

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use panel::BrownianPanel;

use crate::bounds::{varphi, BoundsError, StochasticBoundTable};
use crate::evolution::{
    solve_mild_inhomogeneous, uniform_times, CurveMap, EvolutionError, EvolutionModel, PiecewiseDrift, Scheme,
    Trajectory,
};
use crate::numeric::CompensatedSum;
use crate::sets::{ClosedSet, SetError};
use crate::spaces::{Curve, Space, SpaceError};

/// Largest share of failed distance evaluations a Monte Carlo run tolerates.
pub const MAX_FAILURE_RATE: f64 = 1e-3;
/// Minimum number of paths for [`mc_distance`].
pub const MIN_PATHS: usize = 100;
/// Minimum deterministic substeps per interpolation cell.
pub const MIN_SUBSTEPS: usize = 4;

#[derive(Debug, Error)]
pub enum StochError {
    #[error("{steps} steps do not divide a fine grid of {fine} steps")]
    Misaligned { steps: usize, fine: usize },
    #[error("steps ({steps}) must be a multiple of the cell count ({partitions})")]
    StepsNotMultipleOfCells { steps: usize, partitions: usize },
    #[error("{failures} of {evaluations} distance evaluations failed")]
    TooManyFailures { failures: usize, evaluations: usize },
    #[error("time {0} is not on the bound table grid")]
    IncompatibleGrids(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Covariance eigenvalues and volatility fields `sigma^j`
/// (already scaled by the square roots of the eigenvalues).
#[derive(Clone)]
pub struct NoiseSpec {
    pub eigenvalues: Vec<f64>,
    /// Truncation: only the first `modes` fields drive the equation.
    pub modes: usize,
    pub volatility: Vec<CurveMap>,
}

impl fmt::Debug for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NoiseSpec")
            .field("eigenvalues", &self.eigenvalues)
            .field("modes", &self.modes)
            .field("stored_fields", &self.volatility.len())
            .finish()
    }
}

impl NoiseSpec {
    pub fn new(eigenvalues: Vec<f64>, modes: usize, volatility: Vec<CurveMap>) -> Result<Self, StochError> {
        if eigenvalues.len() != volatility.len() || modes == 0 || modes > volatility.len() {
            return Err(StochError::InvalidParameter(
                "need one eigenvalue per field and 1 <= modes <= stored fields".into(),
            ));
        }
        if eigenvalues.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(StochError::InvalidParameter("eigenvalues must be positive and finite".into()));
        }
        Ok(Self { eigenvalues, modes, volatility })
    }

    /// A single field with unit eigenvalue.
    pub fn single(field: CurveMap) -> Self {
        Self { eigenvalues: vec![1.0], modes: 1, volatility: vec![field] }
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// `sum_{j >= modes} ||sigma^j(h)||^2` over the stored fields beyond the
    /// truncation.
    pub fn discarded_tail(&self, space: &Space, h: &Curve) -> Result<f64, SpaceError> {
        self.volatility[self.modes..]
            .iter()
            .map(|s| space.norm(&s(h)).map(|n| n * n))
            .sum()
    }
}

/// How the Ito-Stratonovich drift correction is obtained.
#[derive(Clone)]
pub enum Correction {
    Zero,
    /// `1/2 sum_j D sigma^j(h) sigma^j(h)` by central differences.
    Derived,
    Explicit(CurveMap),
}

impl fmt::Debug for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Correction::Zero => "Zero",
            Correction::Derived => "Derived",
            Correction::Explicit(_) => "Explicit",
        })
    }
}

/// Deterministic part plus noise.
#[derive(Debug, Clone)]
pub struct StochModel {
    pub base: EvolutionModel,
    pub noise: NoiseSpec,
    pub correction: Correction,
}

/// Relative size of the directional difference step used for the derived
/// correction.
pub const CORRECTION_STEP: f64 = 1e-5;

/// The drift correction at `h`, truncated at the model's noise modes.
pub fn stratonovich_correction(model: &StochModel, h: &Curve) -> Curve {
    match &model.correction {
        Correction::Zero => h.zeros_like(),
        Correction::Explicit(f) => f(h),
        Correction::Derived => {
            let mut out = h.zeros_like();
            let h_scale = h.values().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            for sigma in &model.noise.volatility[..model.noise.modes] {
                let v = sigma(h);
                let v_scale = v.values().iter().fold(0.0_f64, |m, x| m.max(x.abs()));
                if v_scale == 0.0 {
                    continue;
                }
                let eps = CORRECTION_STEP * h_scale / v_scale;
                let mut plus = h.clone();
                plus.axpy(eps, &v);
                let mut minus = h.clone();
                minus.axpy(-eps, &v);
                let mut d = sigma(&plus);
                d.axpy(-1.0, &sigma(&minus));
                out.axpy(0.5 / (2.0 * eps), &d);
            }
            out
        }
    }
}

/// Exponential Euler-Maruyama on the panel's horizon:
/// `X_{k+1} = S_dt (X_k + dt drift(X_k) + sum_j sigma^j(X_k) dB^j_k)`.
pub fn solve_spde(model: &StochModel, x: &Curve, steps: usize, panel: &BrownianPanel) -> Result<Trajectory, StochError> {
    if steps == 0 || steps % panel.partitions() != 0 {
        return Err(StochError::StepsNotMultipleOfCells { steps, partitions: panel.partitions() });
    }
    let r = model.noise.modes;
    if panel.modes() < r {
        return Err(StochError::InvalidParameter(format!("panel has {} modes, model needs {r}", panel.modes())));
    }
    model.base.space.check(x)?;
    let dw: Vec<Vec<f64>> = (0..r).map(|j| panel.increments(j, steps)).collect::<Result<_, _>>()?;
    let horizon = panel.horizon();
    let times = uniform_times(0.0, horizon, steps);
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x.clone());
    for k in 0..steps {
        let dt = times[k + 1] - times[k];
        let cur = &states[k];
        let mut arg = cur.clone();
        arg.axpy(dt, &model.base.drift_at(cur));
        for (j, sigma) in model.noise.volatility[..r].iter().enumerate() {
            arg.axpy(dw[j][k], &sigma(cur));
        }
        let next = model.base.semigroup.apply(dt, &arg);
        if !next.is_finite() {
            return Err(EvolutionError::Divergence { step: k + 1, time: times[k + 1] }.into());
        }
        states.push(next);
    }
    Ok(Trajectory { times, states, scheme: Scheme::ExponentialEulerMaruyama, step: horizon / steps as f64 })
}

/// Wong-Zakai approximation: the random PDE with the drift
/// `drift - correction + sum_j sigma^j * slope_j` on each cell, solved
/// deterministically with `substeps_per_cell` steps per cell.
pub fn solve_wong_zakai(
    model: &StochModel,
    x: &Curve,
    panel: &BrownianPanel,
    substeps_per_cell: usize,
) -> Result<Trajectory, StochError> {
    if substeps_per_cell < MIN_SUBSTEPS {
        return Err(StochError::InvalidParameter(format!(
            "need at least {MIN_SUBSTEPS} substeps per cell, got {substeps_per_cell}"
        )));
    }
    let r = model.noise.modes;
    let m = panel.partitions();
    let slopes: Vec<Vec<f64>> = (0..r).map(|j| panel.cell_slopes(j)).collect();
    let shared = Arc::new(model.clone());
    let width = panel.cell_width();
    let breakpoints: Vec<f64> = (0..m).map(|k| k as f64 * width).collect();
    let pieces: Vec<CurveMap> = (0..m)
        .map(|k| {
            let model = shared.clone();
            let eta: Vec<f64> = slopes.iter().map(|s| s[k]).collect();
            Arc::new(move |h: &Curve| {
                let mut a = model.base.drift_at(h);
                a.axpy(-1.0, &stratonovich_correction(&model, h));
                for (j, sigma) in model.noise.volatility[..eta.len()].iter().enumerate() {
                    a.axpy(eta[j], &sigma(h));
                }
                a
            }) as CurveMap
        })
        .collect();
    let max_slopes: f64 = (0..r).map(|j| panel.max_slope(j)).sum();
    let drift = PiecewiseDrift::new(breakpoints, pieces, model.base.lipschitz * (1.0 + max_slopes))?;
    let mut tr = solve_mild_inhomogeneous(&model.base, &drift, 0.0, x, panel.horizon(), m * substeps_per_cell)?;
    tr.scheme = Scheme::WongZakai;
    Ok(tr)
}

/// Per-path comparison of the Wong-Zakai solution with
/// `e^{(gamma+Z) t} d_K(x) + varphi_{gamma+Z}(t) eps`, `Z = L sum_j max slope_j`.
#[derive(Debug, Clone, Serialize)]
pub struct WzBoundReport {
    pub z: f64,
    pub times: Vec<f64>,
    pub distance: Vec<f64>,
    pub bound: Vec<f64>,
    pub max_violation: f64,
}

impl WzBoundReport {
    pub fn violations_above(&self, tol: f64) -> usize {
        self.distance.iter().zip(&self.bound).filter(|(d, b)| *d - *b > tol).count()
    }
}

pub fn pathwise_wz_bound_check(
    trajectory: &Trajectory,
    set: &ClosedSet,
    panel: &BrownianPanel,
    gamma: f64,
    lipschitz: f64,
    epsilon: f64,
) -> Result<WzBoundReport, StochError> {
    let modes = panel.modes();
    let z = lipschitz * (0..modes).map(|j| panel.max_slope(j)).sum::<f64>();
    let rate = gamma + z;
    let d0 = set.distance(&trajectory.states[0])?;
    let mut distance = Vec::with_capacity(trajectory.times.len());
    let mut bound = Vec::with_capacity(trajectory.times.len());
    let mut worst = f64::NEG_INFINITY;
    for (t, h) in trajectory.times.iter().zip(&trajectory.states) {
        let d = set.distance(h)?;
        let b = (rate * t).exp() * d0 + varphi(rate, *t) * epsilon;
        worst = worst.max(d - b);
        distance.push(d);
        bound.push(b);
    }
    Ok(WzBoundReport { z, times: trajectory.times.clone(), distance, bound, max_violation: worst })
}

/// Settings of a Monte Carlo distance run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub horizon: f64,
    pub steps: usize,
    /// Report times; each must be on the step grid.
    pub times: Vec<f64>,
    pub n_paths: usize,
    pub seed: u64,
    /// Fine Brownian steps per solver step.
    #[serde(default = "one")]
    pub fine_per_step: usize,
}

fn one() -> usize {
    1
}

/// Moments of `d_K(X(t))` over a path ensemble.
#[derive(Debug, Clone, Serialize)]
pub struct McEstimate {
    pub times: Vec<f64>,
    /// `E[d^2]^{1/2}`.
    pub rms: Vec<f64>,
    /// Jackknife standard error of `rms`.
    pub rms_se: Vec<f64>,
    /// `E[d]`.
    pub mean: Vec<f64>,
    pub mean_se: Vec<f64>,
    /// Largest distance seen at each time.
    pub max: Vec<f64>,
    pub n_paths: usize,
    pub seed: u64,
    pub failures: usize,
    pub evaluations: usize,
}

impl McEstimate {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "rms", "rms_se", "mean", "mean_se", "max"])?;
        for i in 0..self.times.len() {
            w.write_record(
                [self.times[i], self.rms[i], self.rms_se[i], self.mean[i], self.mean_se[i], self.max[i]]
                    .map(|v| format!("{v:.16e}")),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    /// Summarizes per-path distances (`None` marks a failed evaluation).
    pub fn from_paths(times: &[f64], per_path: &[Vec<Option<f64>>], seed: u64) -> Result<Self, StochError> {
        let n_paths = per_path.len();
        let evaluations = n_paths * times.len();
        let failures = per_path.iter().flatten().filter(|d| d.is_none()).count();
        if failures as f64 > MAX_FAILURE_RATE * evaluations as f64 {
            return Err(StochError::TooManyFailures { failures, evaluations });
        }
        let mut est = McEstimate {
            times: times.to_vec(),
            rms: Vec::new(),
            rms_se: Vec::new(),
            mean: Vec::new(),
            mean_se: Vec::new(),
            max: Vec::new(),
            n_paths,
            seed,
            failures,
            evaluations,
        };
        for i in 0..times.len() {
            let d: Vec<f64> = per_path.iter().filter_map(|p| p[i]).collect();
            let n = d.len() as f64;
            let sum_sq = d.iter().map(|v| v * v).collect::<CompensatedSum>().total();
            let sum = d.iter().copied().collect::<CompensatedSum>().total();
            let mean = sum / n;
            let rms = (sum_sq / n).sqrt();
            let var = d.iter().map(|v| (v - mean).powi(2)).collect::<CompensatedSum>().total() / (n - 1.0).max(1.0);
            // Leave-one-out root mean squares.
            let loo: Vec<f64> = d.iter().map(|v| ((sum_sq - v * v).max(0.0) / (n - 1.0)).sqrt()).collect();
            let loo_mean = loo.iter().copied().collect::<CompensatedSum>().total() / n;
            let jack = loo.iter().map(|v| (v - loo_mean).powi(2)).collect::<CompensatedSum>().total();
            est.rms.push(rms);
            est.rms_se.push(((n - 1.0) / n * jack).sqrt());
            est.mean.push(mean);
            est.mean_se.push((var / n).sqrt());
            est.max.push(d.iter().copied().fold(0.0, f64::max));
        }
        Ok(est)
    }
}

/// Step indices of the report times.
fn time_indices(config: &McConfig) -> Result<Vec<usize>, StochError> {
    let dt = config.horizon / config.steps as f64;
    config
        .times
        .iter()
        .map(|&t| {
            let k = (t / dt).round();
            if t < 0.0 || t > config.horizon * (1.0 + 1e-12) || (k * dt - t).abs() > 1e-9 * config.horizon {
                Err(StochError::InvalidParameter(format!("time {t} is not on the step grid")))
            } else {
                Ok(k as usize)
            }
        })
        .collect()
}

/// `d_K(X(t))` at the report times for paths `0..n_paths`, computed in
/// parallel and returned in path order (`None` where the distance solver
/// failed).
pub fn path_distances(
    model: &StochModel,
    set: &ClosedSet,
    x: &Curve,
    config: &McConfig,
) -> Result<Vec<Vec<Option<f64>>>, StochError> {
    if config.steps == 0 || config.fine_per_step == 0 {
        return Err(StochError::InvalidParameter("steps and fine_per_step must be positive".into()));
    }
    let indices = time_indices(config)?;
    (0..config.n_paths)
        .into_par_iter()
        .map(|p| -> Result<Vec<Option<f64>>, StochError> {
            let panel = BrownianPanel::sample(
                model.noise.modes,
                config.horizon,
                config.steps,
                config.fine_per_step,
                config.seed,
                p as u64,
            )?;
            let tr = solve_spde(model, x, config.steps, &panel)?;
            Ok(indices.iter().map(|&k| set.distance(&tr.states[k]).ok()).collect())
        })
        .collect()
}

/// Runs `n_paths` exponential Euler-Maruyama paths in parallel and reduces
/// `d_K(X(t))` in path order, so the result does not depend on the number
/// of worker threads.
pub fn mc_distance(model: &StochModel, set: &ClosedSet, x: &Curve, config: &McConfig) -> Result<McEstimate, StochError> {
    if config.n_paths < MIN_PATHS {
        return Err(StochError::InvalidParameter(format!(
            "need at least {MIN_PATHS} paths, got {}",
            config.n_paths
        )));
    }
    let per_path = path_distances(model, set, x, config)?;
    McEstimate::from_paths(&config.times, &per_path, config.seed)
}

/// Which distance moment a bound check uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Moment {
    First,
    #[default]
    Second,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpdeBoundRow {
    pub t: f64,
    pub estimate: f64,
    pub bound: f64,
    pub combined_se: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpdeBoundReport {
    pub moment: Moment,
    pub delta: f64,
    pub rows: Vec<SpdeBoundRow>,
    pub all_pass: bool,
}

/// Checks `estimate(t) <= delta + phi(t) d0 + psi(t) eps + 3 SE` with
/// `SE^2 = se_mc^2 + (d0 se_phi)^2 + (eps se_psi)^2`.
pub fn verify_spde_bound(
    mc: &McEstimate,
    table: &StochasticBoundTable,
    d0: f64,
    epsilon: f64,
    delta: f64,
    moment: Moment,
) -> Result<SpdeBoundReport, StochError> {
    let mut rows = Vec::with_capacity(mc.times.len());
    for (i, &t) in mc.times.iter().enumerate() {
        let j = table.index_of(t).ok_or(StochError::IncompatibleGrids(t))?;
        let (estimate, se_mc) = match moment {
            Moment::First => (mc.mean[i], mc.mean_se[i]),
            Moment::Second => (mc.rms[i], mc.rms_se[i]),
        };
        let bound = delta + table.phi[j] * d0 + table.psi[j] * epsilon;
        let combined_se = (se_mc.powi(2) + (d0 * table.phi_se[j]).powi(2) + (epsilon * table.psi_se[j]).powi(2)).sqrt();
        rows.push(SpdeBoundRow { t, estimate, bound, combined_se, pass: estimate <= bound + 3.0 * combined_se });
    }
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(SpdeBoundReport { moment, delta, rows, all_pass })
}
