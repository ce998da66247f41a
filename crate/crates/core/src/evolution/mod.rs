//! Mild solutions of deterministic evolution equations and checks of the
//! distance bounds along them.
//!
//! All solvers use the exponential Euler recursion
//! `x_{k+1} = S_dt (x_k + dt * drift(x_k))`, so the linear part is applied
//! exactly through the semigroup.

mod semigroup;

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use semigroup::{
    monotone_slopes, IdentitySemigroup, ScalarExponential, Semigroup, SpectralSemigroup, TranslationSemigroup,
};

use crate::bounds::{big_phi, varphi, BoundParams};
use crate::sets::{ClosedSet, SetError};
use crate::spaces::{Curve, LinearOperator, Space, SpaceError};

pub type CurveMap = Arc<dyn Fn(&Curve) -> Curve + Send + Sync>;

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("solution diverged at step {step} (t = {time})")]
    Divergence { step: usize, time: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Set(#[from] SetError),
}

/// Drift that ignores the state.
pub fn constant_map(value: Curve) -> CurveMap {
    Arc::new(move |_h: &Curve| value.clone())
}

/// `h -> rate * h`.
pub fn linear_map(rate: f64) -> CurveMap {
    Arc::new(move |h: &Curve| h.scaled(rate))
}

/// `h -> 0`.
pub fn zero_map() -> CurveMap {
    Arc::new(|h: &Curve| h.zeros_like())
}

/// Linear part, drift and the constants entering the bounds.
#[derive(Clone)]
pub struct EvolutionModel {
    pub space: Space,
    pub semigroup: Arc<dyn Semigroup>,
    pub generator: Arc<dyn LinearOperator>,
    pub drift: CurveMap,
    /// Lipschitz constant of the drift.
    pub lipschitz: f64,
    /// Uniform bound on the drift norm, if known.
    pub drift_bound: Option<f64>,
    /// Exponent with `||S_t|| <= e^{beta t}`.
    pub beta: f64,
}

impl fmt::Debug for EvolutionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvolutionModel")
            .field("space", &self.space)
            .field("semigroup", &self.semigroup.name())
            .field("generator", &self.generator.name())
            .field("lipschitz", &self.lipschitz)
            .field("drift_bound", &self.drift_bound)
            .field("beta", &self.beta)
            .finish()
    }
}

impl EvolutionModel {
    pub fn drift_at(&self, h: &Curve) -> Curve {
        (self.drift)(h)
    }

    /// Largest `||S_t h|| / (e^{beta t} ||h||)` over the samples; at most
    /// `1 + tol` for a consistent `beta`.
    pub fn growth_ratio(&self, samples: &[Curve], times: &[f64]) -> Result<f64, SpaceError> {
        let mut worst = 0.0_f64;
        for h in samples {
            let n = self.space.norm(h)?;
            if n == 0.0 {
                continue;
            }
            for &t in times {
                let st = self.semigroup.apply(t, h);
                worst = worst.max(self.space.norm(&st)? / ((self.beta * t).exp() * n));
            }
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ExponentialEuler,
    ExponentialEulerMaruyama,
    WongZakai,
}

/// Solution values on a time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Curve>,
    pub scheme: Scheme,
    /// Nominal step (the largest step for refined grids).
    pub step: f64,
}

impl Trajectory {
    pub fn last(&self) -> &Curve {
        self.states.last().expect("trajectories are never empty")
    }

    /// Index of the grid time closest to `t`.
    pub fn index_near(&self, t: f64) -> usize {
        self.times
            .iter()
            .enumerate()
            .fold(0, |best, (i, s)| if (s - t).abs() < (self.times[best] - t).abs() { i } else { best })
    }

    /// State at grid time `t`, if `t` is on the grid (within `1e-9`).
    pub fn state_at(&self, t: f64) -> Option<&Curve> {
        let i = self.index_near(t);
        ((self.times[i] - t).abs() <= 1e-9 * t.abs().max(1.0)).then(|| &self.states[i])
    }

    /// Columns `t`, one per grid point and `inf` when present.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        let first = &self.states[0];
        let mut header = vec!["t".to_string()];
        header.extend(first.grid().points().iter().map(|x| format!("{x:.16e}")));
        if first.at_infinity().is_some() {
            header.push("inf".into());
        }
        w.write_record(&header)?;
        for (t, h) in self.times.iter().zip(&self.states) {
            let mut row = vec![format!("{t:.16e}")];
            row.extend(h.values().iter().map(|v| format!("{v:.16e}")));
            if let Some(v) = h.at_infinity() {
                row.push(format!("{v:.16e}"));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Drift that is constant in time on each `[breakpoints[n], breakpoints[n+1])`.
#[derive(Clone)]
pub struct PiecewiseDrift {
    breakpoints: Vec<f64>,
    pieces: Vec<CurveMap>,
    /// Common Lipschitz constant of the pieces.
    pub lipschitz: f64,
}

impl fmt::Debug for PiecewiseDrift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PiecewiseDrift")
            .field("breakpoints", &self.breakpoints)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

impl PiecewiseDrift {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<CurveMap>, lipschitz: f64) -> Result<Self, EvolutionError> {
        if breakpoints.is_empty() || breakpoints.len() != pieces.len() {
            return Err(EvolutionError::InvalidParameter(
                "need one drift piece per breakpoint and at least one piece".into(),
            ));
        }
        if breakpoints[0] != 0.0 || breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(EvolutionError::InvalidParameter(
                "breakpoints must start at 0 and increase strictly".into(),
            ));
        }
        Ok(Self { breakpoints, pieces, lipschitz })
    }

    pub fn single(drift: CurveMap, lipschitz: f64) -> Self {
        Self { breakpoints: vec![0.0], pieces: vec![drift], lipschitz }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Index of the piece active at time `t`.
    pub fn piece_index(&self, t: f64) -> usize {
        let tol = 1e-12 * t.abs().max(1.0);
        self.breakpoints.iter().rposition(|b| *b <= t + tol).unwrap_or(0)
    }

    pub fn evaluate(&self, t: f64, h: &Curve) -> Curve {
        (self.pieces[self.piece_index(t)])(h)
    }
}

fn check_finite(h: &Curve, step: usize, time: f64) -> Result<(), EvolutionError> {
    if h.is_finite() {
        Ok(())
    } else {
        Err(EvolutionError::Divergence { step, time })
    }
}

/// Uniform grid `start + (end - start) k / steps`.
pub(crate) fn uniform_times(start: f64, end: f64, steps: usize) -> Vec<f64> {
    let mut t: Vec<f64> = (0..=steps).map(|k| start + (end - start) * k as f64 / steps as f64).collect();
    t[steps] = end;
    t
}

/// Exponential Euler solution on `[0, horizon]` with `steps` equal steps.
pub fn solve_mild(model: &EvolutionModel, x: &Curve, horizon: f64, steps: usize) -> Result<Trajectory, EvolutionError> {
    if steps == 0 || !(horizon > 0.0) {
        return Err(EvolutionError::InvalidParameter("need steps >= 1 and a positive horizon".into()));
    }
    model.space.check(x)?;
    let times = uniform_times(0.0, horizon, steps);
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x.clone());
    for k in 0..steps {
        let dt = times[k + 1] - times[k];
        let cur = &states[k];
        let mut arg = cur.clone();
        arg.axpy(dt, &model.drift_at(cur));
        let next = model.semigroup.apply(dt, &arg);
        check_finite(&next, k + 1, times[k + 1])?;
        states.push(next);
    }
    Ok(Trajectory { times, states, scheme: Scheme::ExponentialEuler, step: horizon / steps as f64 })
}

/// Merges a uniform grid on `[start, end]` with the breakpoints inside it.
pub(crate) fn refined_times(start: f64, end: f64, steps: usize, breakpoints: &[f64]) -> Vec<f64> {
    let mut times = uniform_times(start, end, steps);
    times.extend(breakpoints.iter().copied().filter(|b| *b > start && *b < end));
    times.sort_by(f64::total_cmp);
    let tol = 1e-12 * end.abs().max(1.0);
    times.dedup_by(|a, b| (*a - *b).abs() <= tol);
    times
}

/// Exponential Euler solution from time `start` with a time-dependent,
/// piecewise-constant drift. The step grid is refined to contain every
/// breakpoint.
pub fn solve_mild_inhomogeneous(
    model: &EvolutionModel,
    drift: &PiecewiseDrift,
    start: f64,
    x: &Curve,
    horizon: f64,
    steps: usize,
) -> Result<Trajectory, EvolutionError> {
    if steps == 0 || !(start < horizon) {
        return Err(EvolutionError::InvalidParameter("need steps >= 1 and start < horizon".into()));
    }
    model.space.check(x)?;
    let times = refined_times(start, horizon, steps, drift.breakpoints());
    let mut states = Vec::with_capacity(times.len());
    states.push(x.clone());
    for k in 0..times.len() - 1 {
        let dt = times[k + 1] - times[k];
        let cur = &states[k];
        let mut arg = cur.clone();
        arg.axpy(dt, &drift.evaluate(times[k], cur));
        let next = model.semigroup.apply(dt, &arg);
        check_finite(&next, k + 1, times[k + 1])?;
        states.push(next);
    }
    Ok(Trajectory { times, states, scheme: Scheme::ExponentialEuler, step: (horizon - start) / steps as f64 })
}

#[derive(Debug, Clone, Serialize)]
pub struct PdeBoundRow {
    pub t: f64,
    pub distance: f64,
    /// `e^{(beta+L) t} d_0 + varphi_{beta+L}(t) eps`.
    pub lipschitz_bound: f64,
    /// `e^{beta t} d_0 + varphi_beta(t) (eps + 2B)`, when a drift bound is known.
    pub bounded_drift_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PdeBoundReport {
    pub params: BoundParams,
    pub initial_distance: f64,
    pub rows: Vec<PdeBoundRow>,
    /// `max (distance - lipschitz_bound)` over the rows.
    pub max_violation: f64,
    pub max_violation_bounded: Option<f64>,
}

impl PdeBoundReport {
    fn from_trajectory(
        set: &ClosedSet,
        trajectory: &Trajectory,
        start: f64,
        params: BoundParams,
        drift_bound: Option<f64>,
    ) -> Result<Self, EvolutionError> {
        let d0 = set.distance(&trajectory.states[0])?;
        let mut rows = Vec::with_capacity(trajectory.times.len());
        let (mut worst, mut worst_b) = (f64::NEG_INFINITY, drift_bound.map(|_| f64::NEG_INFINITY));
        for (t, h) in trajectory.times.iter().zip(&trajectory.states) {
            let elapsed = t - start;
            let distance = set.distance(h)?;
            let lipschitz_bound = big_phi(&params, d0, params.epsilon, elapsed);
            let bounded_drift_bound =
                drift_bound.map(|b| (params.beta * elapsed).exp() * d0 + varphi(params.beta, elapsed) * (params.epsilon + 2.0 * b));
            worst = worst.max(distance - lipschitz_bound);
            if let (Some(w), Some(r)) = (worst_b.as_mut(), bounded_drift_bound) {
                *w = w.max(distance - r);
            }
            rows.push(PdeBoundRow { t: *t, distance, lipschitz_bound, bounded_drift_bound });
        }
        Ok(Self { params, initial_distance: d0, rows, max_violation: worst, max_violation_bounded: worst_b })
    }
}

/// Solves the model and compares `d_K(x(t))` with the distance bounds.
pub fn verify_pde_bound(
    model: &EvolutionModel,
    set: &ClosedSet,
    x: &Curve,
    epsilon: f64,
    horizon: f64,
    steps: usize,
) -> Result<PdeBoundReport, EvolutionError> {
    let trajectory = solve_mild(model, x, horizon, steps)?;
    let params = BoundParams::for_model(model.beta, model.lipschitz, epsilon);
    PdeBoundReport::from_trajectory(set, &trajectory, 0.0, params, model.drift_bound)
}

/// Bound check for a piecewise drift started at time `start`; the bound
/// uses the elapsed time `t - start`.
pub fn verify_piecewise_bound(
    model: &EvolutionModel,
    drift: &PiecewiseDrift,
    set: &ClosedSet,
    start: f64,
    x: &Curve,
    epsilon: f64,
    horizon: f64,
    steps: usize,
) -> Result<PdeBoundReport, EvolutionError> {
    let trajectory = solve_mild_inhomogeneous(model, drift, start, x, horizon, steps)?;
    let params = BoundParams::for_model(model.beta, drift.lipschitz, epsilon);
    PdeBoundReport::from_trajectory(set, &trajectory, start, params, None)
}
