//! Small-time estimates of the tangency quotients
//! `d_K(step(t)) / t` as `t -> 0`, for deterministic and stochastic flows.
//!
//! The liminf is approximated by the minimum over the last half of a
//! geometric sequence `t_k = t0 2^{-k}`, floored at `1e-6 t0`.

use rayon::prelude::*;
use serde::Serialize;

use crate::evolution::EvolutionModel;
use crate::sets::{ClosedSet, SetError};
use crate::spaces::{apply_generator, Curve, SpaceError};
use crate::stochastic::{stratonovich_correction, StochModel};

/// Smallest step relative to `t0`.
pub const T_FLOOR_RATIO: f64 = 1e-6;
pub const MIN_LEVELS: usize = 4;

#[derive(Debug, thiserror::Error)]
pub enum NagumoError {
    #[error("need t0 > 0 and at least {MIN_LEVELS} levels")]
    InvalidSequence,
    #[error("noise direction has {actual} coordinates, model has {expected} modes")]
    DirectionLength { expected: usize, actual: usize },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Set(#[from] SetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuotientForm {
    /// `S_t x + t v`
    Semigroup,
    /// `x + t (A x + v)`
    Generator,
}

#[derive(Debug, Clone, Serialize)]
pub struct LiminfEstimate {
    pub form: QuotientForm,
    pub t_sequence: Vec<f64>,
    /// `NaN` where the distance computation did not converge.
    pub quotients: Vec<f64>,
    pub estimate: f64,
    /// Some distance evaluation failed.
    pub flagged: bool,
    pub t_floor: f64,
}

/// `t0 2^{-k}` for `k < levels`, stopping once the floor is reached.
pub fn t_sequence(t0: f64, levels: usize) -> Result<Vec<f64>, NagumoError> {
    if !(t0 > 0.0 && t0.is_finite()) || levels < MIN_LEVELS {
        return Err(NagumoError::InvalidSequence);
    }
    let floor = T_FLOOR_RATIO * t0;
    let mut out = Vec::with_capacity(levels);
    for k in 0..levels {
        let t = (t0 * 0.5_f64.powi(k as i32)).max(floor);
        out.push(t);
        if t == floor {
            break;
        }
    }
    Ok(out)
}

fn summarize(form: QuotientForm, t0: f64, ts: Vec<f64>, quotients: Vec<f64>) -> LiminfEstimate {
    let tail = &quotients[quotients.len() / 2..];
    let flagged = quotients.iter().any(|q| q.is_nan());
    let estimate = tail.iter().copied().filter(|q| !q.is_nan()).fold(f64::INFINITY, f64::min);
    let estimate = if estimate.is_finite() { estimate } else { f64::NAN };
    LiminfEstimate { form, t_sequence: ts, quotients, estimate, flagged, t_floor: T_FLOOR_RATIO * t0 }
}

fn warn_if_outside(set: &ClosedSet, x: &Curve) {
    if let Ok(d) = set.distance(x) {
        if d > set.tolerance().max(1e-8) {
            log::warn!("base point is at distance {d:e} from the set");
        }
    }
}

/// Quotients `d_K(S_t x + t v) / t`.
fn semigroup_quotients(set: &ClosedSet, model: &EvolutionModel, x: &Curve, v: &Curve, ts: &[f64]) -> Vec<f64> {
    ts.iter()
        .map(|&t| {
            let mut p = model.semigroup.apply(t, x);
            p.axpy(t, v);
            set.distance(&p).map_or(f64::NAN, |d| d / t)
        })
        .collect()
}

/// Semigroup-form estimate with velocity `alpha(x)`.
pub fn estimate_snc(
    set: &ClosedSet,
    model: &EvolutionModel,
    x: &Curve,
    t0: f64,
    levels: usize,
) -> Result<LiminfEstimate, NagumoError> {
    let ts = t_sequence(t0, levels)?;
    model.space.check(x)?;
    warn_if_outside(set, x);
    let v = model.drift_at(x);
    let q = semigroup_quotients(set, model, x, &v, &ts);
    Ok(summarize(QuotientForm::Semigroup, t0, ts, q))
}

/// Generator-form estimate plus the defect `max_k ||A x - (S_t x - x)/t||`
/// bounding its gap to the semigroup form.
#[derive(Debug, Clone, Serialize)]
pub struct GeneratorEstimate {
    pub estimate: LiminfEstimate,
    pub defect: f64,
}

pub fn estimate_snc_generator_form(
    set: &ClosedSet,
    model: &EvolutionModel,
    x: &Curve,
    t0: f64,
    levels: usize,
) -> Result<GeneratorEstimate, NagumoError> {
    let ts = t_sequence(t0, levels)?;
    model.space.check(x)?;
    warn_if_outside(set, x);
    let ax = apply_generator(model.generator.as_ref(), x)?;
    let mut velocity = ax.clone();
    velocity.axpy(1.0, &model.drift_at(x));
    let mut quotients = Vec::with_capacity(ts.len());
    let mut defect = 0.0_f64;
    for &t in &ts {
        let mut p = x.clone();
        p.axpy(t, &velocity);
        quotients.push(set.distance(&p).map_or(f64::NAN, |d| d / t));
        let mut diff = model.semigroup.apply(t, x);
        diff.axpy(-1.0, x);
        let mut gap = ax.clone();
        gap.axpy(-1.0 / t, &diff);
        defect = defect.max(model.space.norm(&gap)?);
    }
    Ok(GeneratorEstimate { estimate: summarize(QuotientForm::Generator, t0, ts, quotients), defect })
}

/// Stochastic form: velocity `alpha(h) - rho(h) + sum_j u_j sigma^j(h)`.
pub fn estimate_ssnc(
    set: &ClosedSet,
    model: &StochModel,
    h: &Curve,
    direction: &[f64],
    t0: f64,
    levels: usize,
) -> Result<LiminfEstimate, NagumoError> {
    if direction.len() != model.noise.modes {
        return Err(NagumoError::DirectionLength { expected: model.noise.modes, actual: direction.len() });
    }
    let ts = t_sequence(t0, levels)?;
    model.base.space.check(h)?;
    warn_if_outside(set, h);
    let mut v = model.base.drift_at(h);
    v.axpy(-1.0, &stratonovich_correction(model, h));
    for (u, sigma) in direction.iter().zip(&model.noise.volatility) {
        if *u != 0.0 {
            v.axpy(*u, &sigma(h));
        }
    }
    let q = semigroup_quotients(set, &model.base, h, &v, &ts);
    Ok(summarize(QuotientForm::Semigroup, t0, ts, q))
}

/// Coefficients used per noise coordinate by [`ssnc_sweep`].
pub const SWEEP_COEFFICIENTS: [f64; 4] = [-2.0, -1.0, 1.0, 2.0];

/// All directions with coordinates in [`SWEEP_COEFFICIENTS`], preceded by
/// the zero direction.
pub fn sweep_directions(modes: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; modes]];
    let n = SWEEP_COEFFICIENTS.len();
    for code in 0..n.pow(modes as u32) {
        let mut c = code;
        let mut u = Vec::with_capacity(modes);
        for _ in 0..modes {
            u.push(SWEEP_COEFFICIENTS[c % n]);
            c /= n;
        }
        out.push(u);
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub sample: usize,
    pub direction: Vec<f64>,
    pub estimate: f64,
    pub flagged: bool,
}

/// Result of the sampled stochastic tangency check. Only finitely many
/// base points and directions are tried, so a small maximum is evidence,
/// not a certificate.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub heuristic: bool,
    pub note: String,
    pub entries: Vec<SweepEntry>,
    pub max_estimate: f64,
    pub flagged: usize,
}

/// Runs [`estimate_ssnc`] over every sample and sweep direction.
pub fn ssnc_sweep(
    set: &ClosedSet,
    model: &StochModel,
    samples: &[Curve],
    t0: f64,
    levels: usize,
) -> Result<SweepReport, NagumoError> {
    let dirs = sweep_directions(model.noise.modes);
    let pairs: Vec<(usize, &Vec<f64>)> =
        (0..samples.len()).flat_map(|i| dirs.iter().map(move |u| (i, u))).collect();
    let entries: Vec<SweepEntry> = pairs
        .par_iter()
        .map(|&(i, u)| {
            estimate_ssnc(set, model, &samples[i], u, t0, levels).map(|e| SweepEntry {
                sample: i,
                direction: u.clone(),
                estimate: e.estimate,
                flagged: e.flagged,
            })
        })
        .collect::<Result<_, _>>()?;
    let max_estimate = entries.iter().map(|e| e.estimate).filter(|v| !v.is_nan()).fold(0.0, f64::max);
    let flagged = entries.iter().filter(|e| e.flagged).count();
    Ok(SweepReport {
        heuristic: true,
        note: format!(
            "sampled {} base points and {} noise directions (coordinates in {{-2,-1,1,2}} plus zero); \
             the condition quantifies over all points and directions",
            samples.len(),
            dirs.len()
        ),
        entries,
        max_estimate,
        flagged,
    })
}
