use std::sync::Arc;

use super::ModelError;
use crate::evolution::{linear_map, EvolutionModel, IdentitySemigroup};
use crate::sets::ClosedSet;
use crate::spaces::{Space, ZeroOperator};
use crate::stochastic::{Correction, NoiseSpec, StochModel};

/// Geometric Brownian motion `dX = mu X dt + sigma X dW` with
/// `K = (-inf, 0]`.
#[derive(Debug, Clone)]
pub struct Gbm {
    pub mu: f64,
    pub sigma: f64,
    /// The drift Lipschitz constant stored in the model is
    /// `max(|mu - sigma^2/2|, |sigma|)`, which covers both the corrected
    /// drift and the volatility.
    pub model: StochModel,
    pub set: ClosedSet,
}

impl Gbm {
    /// `x exp((mu - sigma^2/2) t + sigma w)` for `W(t) = w`.
    pub fn exact(&self, x: f64, t: f64, w: f64) -> f64 {
        x * ((self.mu - 0.5 * self.sigma * self.sigma) * t + self.sigma * w).exp()
    }

    /// `E[d_K(X(t; x))] = e^{mu t} max(x, 0)`.
    pub fn expected_distance(&self, x: f64, t: f64) -> f64 {
        (self.mu * t).exp() * x.max(0.0)
    }

    pub fn lipschitz(&self) -> f64 {
        self.model.base.lipschitz
    }
}

pub fn build_gbm(mu: f64, sigma: f64) -> Result<Gbm, ModelError> {
    if !(mu.is_finite() && sigma.is_finite()) {
        return Err(ModelError::InvalidParameter("mu and sigma must be finite".into()));
    }
    let lipschitz = (mu - 0.5 * sigma * sigma).abs().max(sigma.abs());
    let base = EvolutionModel {
        space: Space::scalar(),
        semigroup: Arc::new(IdentitySemigroup),
        generator: Arc::new(ZeroOperator),
        drift: linear_map(mu),
        lipschitz,
        drift_bound: None,
        beta: 0.0,
    };
    let model = StochModel { base, noise: NoiseSpec::single(linear_map(sigma)), correction: Correction::Derived };
    Ok(Gbm { mu, sigma, model, set: ClosedSet::HalfLineBelow(0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Curve;
    use crate::stochastic::stratonovich_correction;

    #[test]
    fn correction_and_laws() {
        let g = build_gbm(0.05, 0.2).unwrap();
        let rho = stratonovich_correction(&g.model, &Curve::scalar(2.0)).value();
        assert!((rho - 0.04).abs() < 1e-10);
        assert_eq!(g.expected_distance(-1.0, 1.0), 0.0);
        assert!((g.expected_distance(1.0, 1.0) - 0.05_f64.exp()).abs() < 1e-15);
        let martingale = build_gbm(0.0, 0.3).unwrap();
        assert_eq!(martingale.expected_distance(1.5, 4.0), 1.5);
        assert_eq!(g.lipschitz(), 0.2);
    }
}
