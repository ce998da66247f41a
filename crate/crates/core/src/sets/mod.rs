//! Closed subsets of the state spaces and their distance functions.

mod cone;
mod manifold;
mod subspace;

use thiserror::Error;

use crate::spaces::{Curve, Space, SpaceError};

pub use cone::{project_nonnegative_cone, ConeMethod, NonnegativeCone};
pub use manifold::{tangent_distance, Chart, ManifoldProjection, ParametrizedManifold, StartOutcome};
pub use subspace::{extended_projection, graph_norm_projection, project_subspace, Subspace, MAX_CONDITION};

#[derive(Debug, Error)]
pub enum SetError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("basis is empty")]
    EmptyBasis,
    #[error("Gram matrix is ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },
    #[error("set is not defined over this space: {0}")]
    UnsupportedSpace(&'static str),
    #[error("projection did not converge after {iterations} iterations (best bound {best_bound:.6e})")]
    NotConverged { iterations: usize, best_bound: f64 },
    #[error("chart Jacobian is rank deficient at the given coordinates")]
    RankDeficientChart,
    #[error("basis element {index} is outside the generator domain: {source}")]
    Domain { index: usize, source: SpaceError },
    #[error("invalid set: {0}")]
    Invalid(String),
}

/// Outcome of a projection: nearest point found and its distance.
#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub point: Curve,
    pub distance: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Optimality residual: KKT violation for the cone, largest inner product
    /// of the residual with a basis element for subspaces.
    pub residual: f64,
}

/// A closed set with a distance function.
#[derive(Debug, Clone)]
pub enum ClosedSet {
    /// `[a, inf)` on the real line.
    HalfLineAbove(f64),
    /// `(-inf, b]` on the real line.
    HalfLineBelow(f64),
    NonnegativeCone(NonnegativeCone),
    Subspace(Subspace),
    Manifold(ParametrizedManifold),
}

impl ClosedSet {
    /// The space the set lives in.
    pub fn space(&self) -> &Space {
        static SCALAR: Space = Space::ScalarLine;
        match self {
            ClosedSet::HalfLineAbove(_) | ClosedSet::HalfLineBelow(_) => &SCALAR,
            ClosedSet::NonnegativeCone(c) => c.space(),
            ClosedSet::Subspace(s) => s.space(),
            ClosedSet::Manifold(m) => m.space(),
        }
    }

    /// Tolerance of the underlying distance solver.
    pub fn tolerance(&self) -> f64 {
        match self {
            ClosedSet::HalfLineAbove(_) | ClosedSet::HalfLineBelow(_) => 0.0,
            ClosedSet::NonnegativeCone(c) => c.tol,
            ClosedSet::Subspace(_) => 1e-10,
            ClosedSet::Manifold(m) => m.tol,
        }
    }

    pub fn project(&self, h: &Curve) -> Result<ProjectionResult, SetError> {
        match self {
            ClosedSet::HalfLineAbove(a) => scalar_projection(h, h.value().max(*a)),
            ClosedSet::HalfLineBelow(b) => scalar_projection(h, h.value().min(*b)),
            ClosedSet::NonnegativeCone(c) => c.project(h),
            ClosedSet::Subspace(s) => s.project(h),
            ClosedSet::Manifold(m) => Ok(m.project(h)?.result),
        }
    }

    /// `d_K(h)`. Fails when the solver did not converge; use
    /// [`ClosedSet::project`] to get the flagged best bound instead.
    pub fn distance(&self, h: &Curve) -> Result<f64, SetError> {
        match self {
            ClosedSet::HalfLineAbove(a) => {
                Space::ScalarLine.check(h)?;
                Ok((a - h.value()).max(0.0))
            }
            ClosedSet::HalfLineBelow(b) => {
                Space::ScalarLine.check(h)?;
                Ok((h.value() - b).max(0.0))
            }
            _ => {
                let p = self.project(h)?;
                if p.converged {
                    Ok(p.distance)
                } else {
                    Err(SetError::NotConverged { iterations: p.iterations, best_bound: p.distance })
                }
            }
        }
    }

    pub fn contains(&self, h: &Curve, tol: f64) -> Result<bool, SetError> {
        Ok(self.distance(h)? <= tol)
    }
}

fn scalar_projection(h: &Curve, point: f64) -> Result<ProjectionResult, SetError> {
    Space::ScalarLine.check(h)?;
    Ok(ProjectionResult {
        point: Curve::scalar(point),
        distance: (h.value() - point).abs(),
        iterations: 0,
        converged: true,
        residual: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_line_distances() {
        let above = ClosedSet::HalfLineAbove(1.0);
        assert!((above.distance(&Curve::scalar(0.3)).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(above.distance(&Curve::scalar(2.0)).unwrap(), 0.0);
        let below = ClosedSet::HalfLineBelow(0.0);
        assert_eq!(below.distance(&Curve::scalar(-1.0)).unwrap(), 0.0);
        assert_eq!(below.distance(&Curve::scalar(1.5)).unwrap(), 1.5);
        let p = below.project(&Curve::scalar(1.5)).unwrap();
        assert_eq!(p.point.value(), 0.0);
        assert_eq!(p.distance, 1.5);
    }
}
