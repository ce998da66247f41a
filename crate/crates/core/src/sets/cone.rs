//! Projection onto the cone of nonnegative curves.
//!
//! The squared distance `1/2 (g - h)^T Q (g - h)` with `g >= 0` is a convex
//! QP whose Hessian `Q` is the tridiagonal matrix of the discretized norm.
//! `Q` is a nonsingular M-matrix, so the primal-dual active-set iteration
//! terminates after at most about `dim` tridiagonal solves; on fine grids
//! the free boundary moves a few cells per solve, so hundreds of iterations
//! are normal. A projected-gradient
//! method with Barzilai-Borwein steps is kept as a fallback.

use serde::{Deserialize, Serialize};

use super::{ProjectionResult, SetError};
use crate::numeric::solve_tridiagonal;
use crate::spaces::{Curve, QuadraticForm, Space};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeMethod {
    /// Primal-dual active set, falling back to projected gradient.
    #[default]
    ActiveSet,
    ProjectedGradient,
}

/// `{h : h(x) >= 0 for all x}` over the forward-curve or `L^2` space.
#[derive(Debug, Clone)]
pub struct NonnegativeCone {
    space: Space,
    form: QuadraticForm,
    pub tol: f64,
    pub max_iter: usize,
    pub method: ConeMethod,
}

impl NonnegativeCone {
    pub fn new(space: Space) -> Result<Self, SetError> {
        let form = space
            .quadratic_form()
            .ok_or(SetError::UnsupportedSpace("the nonnegative cone needs the forward-curve or L2 space"))?;
        let max_iter = form.dim() + 16;
        Ok(Self { space, form, tol: 1e-10, max_iter, method: ConeMethod::ActiveSet })
    }

    pub fn with_tolerance(mut self, tol: f64, max_iter: usize) -> Self {
        self.tol = tol;
        self.max_iter = max_iter;
        self
    }

    pub fn with_method(mut self, method: ConeMethod) -> Self {
        self.method = method;
        self
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn project(&self, h: &Curve) -> Result<ProjectionResult, SetError> {
        self.space.check(h)?;
        let target = self.form.to_vars(h);
        if target.iter().all(|v| *v >= 0.0) {
            return Ok(ProjectionResult {
                point: h.clone(),
                distance: 0.0,
                iterations: 0,
                converged: true,
                residual: 0.0,
            });
        }
        let outcome = match self.method {
            ConeMethod::ActiveSet => {
                let first = active_set(&self.form, &target, self.max_iter);
                if first.converged {
                    first
                } else {
                    log::warn!("active-set cone projection stalled; falling back to projected gradient");
                    let mut second = projected_gradient(&self.form, &target, self.tol, self.max_iter * 20);
                    second.iterations += first.iterations;
                    second
                }
            }
            ConeMethod::ProjectedGradient => projected_gradient(&self.form, &target, self.tol, self.max_iter * 20),
        };
        let mut vars = outcome.vars;
        for v in &mut vars {
            *v = v.max(0.0);
        }
        let residual = kkt_residual(&self.form, &target, &vars);
        let point = self.form.from_vars(h, vars);
        let distance = self.space.distance(h, &point)?;
        Ok(ProjectionResult {
            point,
            distance,
            iterations: outcome.iterations,
            converged: outcome.converged && residual <= self.tol.max(1e-12) * 1e3,
            residual,
        })
    }
}

/// Projection onto the nonnegative cone with explicit solver settings.
pub fn project_nonnegative_cone(space: &Space, h: &Curve, tol: f64, max_iter: usize) -> Result<ProjectionResult, SetError> {
    NonnegativeCone::new(space.clone())?.with_tolerance(tol, max_iter).project(h)
}

struct Outcome {
    vars: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn active_set(q: &QuadraticForm, target: &[f64], max_iter: usize) -> Outcome {
    let n = q.dim();
    let qh = q.apply(target);
    let mut active: Vec<bool> = target.iter().map(|v| *v < 0.0).collect();
    let mut vars = target.to_vec();
    // Degenerate constraints (zero multiplier at zero value) count as active.
    // The slack is the rounding bound of each row product, so a multiplier
    // that is zero up to cancellation does not release its constraint.
    let h_max = target.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let slack: Vec<f64> = (0..n)
        .map(|i| {
            let left = if i > 0 { q.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { q.off[i].abs() } else { 0.0 };
            16.0 * f64::EPSILON * (q.diag[i].abs() + left + right) * h_max
        })
        .collect();
    for iter in 1..=max_iter {
        let mut lower = vec![0.0; n - 1];
        let mut upper = vec![0.0; n - 1];
        let mut diag = vec![1.0; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            if active[i] {
                continue;
            }
            diag[i] = q.diag[i];
            rhs[i] = qh[i];
            if i > 0 {
                lower[i - 1] = q.off[i - 1];
            }
            if i + 1 < n {
                upper[i] = q.off[i];
            }
        }
        let Some(g) = solve_tridiagonal(&lower, &diag, &upper, &rhs) else {
            return Outcome { vars, iterations: iter, converged: false };
        };
        let qg = q.apply(&g);
        let next: Vec<bool> = (0..n).map(|i| (qg[i] - qh[i]) - q.diag[i] * g[i] > -slack[i]).collect();
        vars = g;
        if next == active {
            return Outcome { vars, iterations: iter, converged: true };
        }
        active = next;
    }
    Outcome { vars, iterations: max_iter, converged: false }
}

fn objective(q: &QuadraticForm, target: &[f64], g: &[f64]) -> (f64, Vec<f64>) {
    let d: Vec<f64> = g.iter().zip(target).map(|(a, b)| a - b).collect();
    let grad = q.apply(&d);
    let f = 0.5 * d.iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>();
    (f, grad)
}

fn projected_gradient(q: &QuadraticForm, target: &[f64], tol: f64, max_iter: usize) -> Outcome {
    const MEMORY: usize = 10;
    let scale = q.diag.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
    let mut g: Vec<f64> = target.iter().map(|v| v.max(0.0)).collect();
    let (mut f, mut grad) = objective(q, target, &g);
    let mut history = vec![f];
    let mut step = 1.0 / scale;
    let grad_scale = q.apply(target).iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    for iter in 1..=max_iter {
        let pg = g
            .iter()
            .zip(&grad)
            .fold(0.0_f64, |m, (x, d)| m.max(((x - d).max(0.0) - x).abs()));
        if pg <= tol * grad_scale {
            return Outcome { vars: g, iterations: iter, converged: true };
        }
        let reference = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut t = step;
        let (candidate, cf, cgrad) = loop {
            let c: Vec<f64> = g.iter().zip(&grad).map(|(x, d)| (x - t * d).max(0.0)).collect();
            let (cf, cgrad) = objective(q, target, &c);
            let decrease: f64 = c.iter().zip(&g).zip(&grad).map(|((a, b), d)| d * (a - b)).sum();
            if cf <= reference + 1e-4 * decrease || t < 1e-20 {
                break (c, cf, cgrad);
            }
            // Diminishing step when the Barzilai-Borwein guess overshoots.
            t *= 0.5;
        };
        let s: Vec<f64> = candidate.iter().zip(&g).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = cgrad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|a| a * a).sum();
        step = if sy > 0.0 { (ss / sy).clamp(1e-12 / scale, 1e12) } else { 1.0 / scale };
        g = candidate;
        f = cf;
        grad = cgrad;
        history.push(f);
        if history.len() > MEMORY {
            history.remove(0);
        }
    }
    Outcome { vars: g, iterations: max_iter, converged: false }
}

/// Scaled violation of primal feasibility, dual feasibility and
/// complementarity.
fn kkt_residual(q: &QuadraticForm, target: &[f64], g: &[f64]) -> f64 {
    let d: Vec<f64> = g.iter().zip(target).map(|(a, b)| a - b).collect();
    let lambda = q.apply(&d);
    let hs = target.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let ls = q.apply(target).iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    g.iter().zip(&lambda).fold(0.0_f64, |worst, (gi, li)| {
        worst
            .max((-gi).max(0.0) / hs)
            .max((-li).max(0.0) / ls)
            .max((gi * li).abs() / (hs * ls))
    })
}
