use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::evolution::{constant_map, EvolutionModel, TranslationSemigroup};
use crate::sets::{ClosedSet, NonnegativeCone, Subspace};
use crate::spaces::{derivative, Curve, FilipovicNorm, Grid, Space, TranslationGenerator};
use crate::stochastic::{Correction, NoiseSpec, StochModel};

/// Svensson curve `z1 + (z2 + z3 x) e^{-z6 x} + (z4 + z5 x) e^{-z7 x}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvenssonParams {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    pub z4: f64,
    pub z5: f64,
    pub z6: f64,
    pub z7: f64,
}

impl SvenssonParams {
    pub fn eval(&self, x: f64) -> f64 {
        self.z1 + (self.z2 + self.z3 * x) * (-self.z6 * x).exp() + (self.z4 + self.z5 * x) * (-self.z7 * x).exp()
    }

    /// Sampled on the space grid, with limit `z1`.
    pub fn curve(&self, space: &Space) -> Curve {
        space.sample(Some(self.z1), |x| self.eval(x))
    }

    pub fn check(&self, gamma: f64) -> Result<(), ModelError> {
        if self.z6 > gamma / 2.0 && self.z7 > gamma / 2.0 {
            Ok(())
        } else {
            Err(ModelError::InvalidParameter(format!(
                "decay rates must exceed gamma/2 = {}, got z6 = {}, z7 = {}",
                gamma / 2.0,
                self.z6,
                self.z7
            )))
        }
    }
}

/// `||e^{-a x} - e^{-b x}||` in the forward-curve norm with weight
/// `e^{gamma x}`. Written as `|a - b| sqrt((gamma^2 + pq) / (pq (p + q)))`,
/// `p = 2a - gamma`, `q = 2b - gamma`, which avoids cancellation as `b -> a`.
pub fn exponential_gap_norm(a: f64, b: f64, gamma: f64) -> f64 {
    let p = 2.0 * a - gamma;
    let q = 2.0 * b - gamma;
    (a - b).abs() * ((gamma * gamma + p * q) / (p * q * (p + q))).sqrt()
}

/// `(1/z6) ||e^{-2 z6 x} - e^{-z7 x}||`.
pub fn hjmm_epsilon_closed_form(z6: f64, z7: f64, gamma: f64) -> f64 {
    exponential_gap_norm(2.0 * z6, z7, gamma) / z6
}

/// No-arbitrage drift `sigma(x) int_0^x sigma(u) du` of a deterministic
/// volatility curve. The cumulative integral uses the trapezoid rule with
/// endpoint-slope correction, which is fourth order on smooth curves.
pub fn hjm_drift(sigma: &Curve) -> Result<Curve, ModelError> {
    let slope = derivative(sigma)?;
    let x = sigma.grid().points();
    let v = sigma.values();
    let d = slope.values();
    let mut integral = 0.0;
    let mut out = Vec::with_capacity(v.len());
    // Integral from 0 to the first grid point, assumed at most one cell wide.
    let x0 = x[0];
    integral += x0 * v[0] - 0.5 * x0 * x0 * d[0];
    out.push(v[0] * integral);
    for i in 1..v.len() {
        let h = x[i] - x[i - 1];
        integral += 0.5 * h * (v[i - 1] + v[i]) - h * h / 12.0 * (d[i] - d[i - 1]);
        out.push(v[i] * integral);
    }
    let limit = sigma.at_infinity().map(|_| *out.last().expect("non-empty grid"));
    Ok(sigma.with_values(out, limit))
}

/// Constant-volatility HJMM model `sigma = e^{-z6 x}` with the Svensson
/// subspace.
#[derive(Debug, Clone)]
pub struct Hjmm {
    pub z6: f64,
    pub z7: f64,
    pub gamma: f64,
    pub space: Space,
    pub model: StochModel,
    pub set: ClosedSet,
    pub basis: Vec<Curve>,
    pub alpha: Curve,
    pub sigma: Curve,
    pub epsilon_closed_form: f64,
    /// Same norm evaluated on the grid.
    pub epsilon_quadrature: f64,
}

impl Hjmm {
    /// A Svensson curve with the model's decay rates.
    pub fn svensson(&self, z: [f64; 5]) -> Curve {
        SvenssonParams { z1: z[0], z2: z[1], z3: z[2], z4: z[3], z5: z[4], z6: self.z6, z7: self.z7 }.curve(&self.space)
    }
}

pub fn build_hjmm(z6: f64, z7: f64, gamma: f64, grid: Arc<Grid>) -> Result<Hjmm, ModelError> {
    if !(gamma >= 0.0) {
        return Err(ModelError::InvalidParameter(format!("gamma must be nonnegative, got {gamma}")));
    }
    let svensson = SvenssonParams { z1: 0.0, z2: 0.0, z3: 0.0, z4: 0.0, z5: 0.0, z6, z7 };
    svensson.check(gamma)?;
    let space = Space::filipovic(gamma, grid, FilipovicNorm::Equivalent)?;
    let basis = vec![
        space.sample(Some(1.0), |_| 1.0),
        space.sample(Some(0.0), |x| (-z6 * x).exp()),
        space.sample(Some(0.0), |x| x * (-z6 * x).exp()),
        space.sample(Some(0.0), |x| (-z7 * x).exp()),
        space.sample(Some(0.0), |x| x * (-z7 * x).exp()),
    ];
    let subspace = Subspace::new(space.clone(), basis.clone())?;
    let sigma = basis[1].clone();
    let alpha = space.sample(Some(0.0), |x| ((-z6 * x).exp() - (-2.0 * z6 * x).exp()) / z6);
    let gap = &space.sample(Some(0.0), |x| (-2.0 * z6 * x).exp()) - &basis[3];
    let epsilon_quadrature = space.norm(&gap)? / z6;
    let base = EvolutionModel {
        space: space.clone(),
        semigroup: Arc::new(TranslationSemigroup),
        generator: Arc::new(TranslationGenerator),
        drift: constant_map(alpha.clone()),
        lipschitz: 0.0,
        drift_bound: Some(space.norm(&alpha)?),
        beta: 0.0,
    };
    let model = StochModel {
        base,
        noise: NoiseSpec::single(constant_map(sigma.clone())),
        correction: Correction::Zero,
    };
    Ok(Hjmm {
        z6,
        z7,
        gamma,
        space,
        model,
        set: ClosedSet::Subspace(subspace),
        basis,
        alpha,
        sigma,
        epsilon_closed_form: hjmm_epsilon_closed_form(z6, z7, gamma),
        epsilon_quadrature,
    })
}

/// Distances of a forward curve to the nonnegative curves.
#[derive(Debug, Clone, Serialize)]
pub struct NegativeRateReport {
    /// First maturity where the curve turns nonnegative, when it is negative
    /// on `[0, x0)` and nonnegative afterwards.
    pub sign_change: Option<f64>,
    pub negative_everywhere: bool,
    /// `||h^-||`, an upper bound for the distance.
    pub negative_part_norm: f64,
    pub cone_distance: f64,
    pub cone_iterations: usize,
    pub cone_converged: bool,
    pub within_bound: bool,
}

pub fn negative_rate_diagnostics(space: &Space, h: &Curve) -> Result<NegativeRateReport, ModelError> {
    let x = h.grid().points();
    let v = h.values();
    let limit = h.at_infinity().unwrap_or(v[v.len() - 1]);
    let first_nonneg = v.iter().position(|&y| y >= 0.0);
    let negative_everywhere = first_nonneg.is_none() && limit < 0.0;
    let sign_change = match first_nonneg {
        Some(k) if k > 0 && v[k..].iter().all(|&y| y >= 0.0) && limit >= 0.0 => {
            let (x0, x1, y0, y1) = (x[k - 1], x[k], v[k - 1], v[k]);
            Some(x0 + (x1 - x0) * (-y0) / (y1 - y0))
        }
        _ => None,
    };
    let negative_part_norm = space.norm(&h.negative_part())?;
    let cone = NonnegativeCone::new(space.clone())?;
    let projection = cone.project(h)?;
    let slack = 1e-9 * negative_part_norm + 1e-12;
    Ok(NegativeRateReport {
        sign_change,
        negative_everywhere,
        negative_part_norm,
        cone_distance: projection.distance,
        cone_iterations: projection.iterations,
        cone_converged: projection.converged,
        within_bound: projection.distance <= negative_part_norm + slack,
    })
}
