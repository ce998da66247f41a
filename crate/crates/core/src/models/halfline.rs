use std::sync::Arc;

use super::ModelError;
use crate::evolution::{linear_map, zero_map, EvolutionModel, IdentitySemigroup, ScalarExponential};
use crate::sets::ClosedSet;
use crate::spaces::{ScalarMultiple, Space, ZeroOperator};

/// `x' = beta x` on the line with `K = [a, inf)`.
#[derive(Debug, Clone)]
pub struct HalflineOde {
    pub beta: f64,
    pub a: f64,
    /// Linear part in the semigroup, no drift.
    pub model: EvolutionModel,
    pub set: ClosedSet,
    /// Tangency slack `max(-beta, 0) a`.
    pub epsilon: f64,
}

impl HalflineOde {
    /// `x e^{beta t}`.
    pub fn exact_flow(&self, x: f64, t: f64) -> f64 {
        x * (self.beta * t).exp()
    }

    /// The same equation with zero generator and drift `beta x`.
    pub fn drift_form(&self) -> EvolutionModel {
        EvolutionModel {
            space: Space::scalar(),
            semigroup: Arc::new(IdentitySemigroup),
            generator: Arc::new(ZeroOperator),
            drift: linear_map(self.beta),
            lipschitz: self.beta.abs(),
            drift_bound: None,
            beta: 0.0,
        }
    }
}

pub fn build_halfline_ode(beta: f64, a: f64) -> Result<HalflineOde, ModelError> {
    if !(a > 0.0 && a.is_finite() && beta.is_finite()) {
        return Err(ModelError::InvalidParameter(format!("need a > 0 and finite beta, got a = {a}, beta = {beta}")));
    }
    let model = EvolutionModel {
        space: Space::scalar(),
        semigroup: Arc::new(ScalarExponential(beta)),
        generator: Arc::new(ScalarMultiple(beta)),
        drift: zero_map(),
        lipschitz: 0.0,
        drift_bound: Some(0.0),
        beta,
    };
    Ok(HalflineOde { beta, a, model, set: ClosedSet::HalfLineAbove(a), epsilon: (-beta).max(0.0) * a })
}
