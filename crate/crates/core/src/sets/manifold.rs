//! Finite-dimensional manifolds given by a chart `R^m -> curves`.
//!
//! Distances are upper bounds from a multi-start Levenberg-Marquardt search
//! over chart coordinates. Manifolds with boundary use the half-space
//! `y[0] >= 0` of the chart.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{ProjectionResult, SetError, Subspace};
use crate::spaces::{Curve, Space};

pub type Chart = Arc<dyn Fn(&[f64]) -> Curve + Send + Sync>;

/// Number of deterministic starting points used by default.
pub const DEFAULT_STARTS: usize = 16;

#[derive(Clone)]
pub struct ParametrizedManifold {
    space: Space,
    chart: Chart,
    dim: usize,
    has_boundary: bool,
    starts: Vec<Vec<f64>>,
    /// Relative step of the finite-difference Jacobian.
    pub fd_step: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl fmt::Debug for ParametrizedManifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametrizedManifold")
            .field("dim", &self.dim)
            .field("has_boundary", &self.has_boundary)
            .field("starts", &self.starts.len())
            .finish_non_exhaustive()
    }
}

/// Result of one local search.
#[derive(Debug, Clone)]
pub struct StartOutcome {
    pub start: Vec<f64>,
    pub coordinates: Vec<f64>,
    pub distance: f64,
}

/// Best local minimum plus every start that was tried.
#[derive(Debug, Clone)]
pub struct ManifoldProjection {
    pub result: ProjectionResult,
    pub coordinates: Vec<f64>,
    pub at_boundary: bool,
    pub starts: Vec<StartOutcome>,
}

impl ParametrizedManifold {
    /// `starts` are spread deterministically over the box `center +- radius`.
    pub fn new(space: Space, chart: Chart, center: Vec<f64>, radius: f64, has_boundary: bool) -> Result<Self, SetError> {
        let dim = center.len();
        if dim == 0 {
            return Err(SetError::Invalid("chart dimension must be positive".into()));
        }
        space.check(&chart(&center))?;
        let mut m = Self {
            space,
            chart,
            dim,
            has_boundary,
            starts: Vec::new(),
            fd_step: 1e-6,
            max_iter: 200,
            tol: 1e-10,
        };
        m.starts = halton_starts(&center, radius, DEFAULT_STARTS)
            .into_iter()
            .map(|s| m.feasible(s))
            .collect();
        Ok(m)
    }

    pub fn with_starts(mut self, starts: Vec<Vec<f64>>) -> Result<Self, SetError> {
        if starts.is_empty() || starts.iter().any(|s| s.len() != self.dim) {
            return Err(SetError::Invalid("every start needs the chart dimension".into()));
        }
        self.starts = starts.into_iter().map(|s| self.feasible(s)).collect();
        Ok(self)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_boundary(&self) -> bool {
        self.has_boundary
    }

    pub fn starts(&self) -> &[Vec<f64>] {
        &self.starts
    }

    pub fn point(&self, y: &[f64]) -> Curve {
        (self.chart)(y)
    }

    fn feasible(&self, mut y: Vec<f64>) -> Vec<f64> {
        if self.has_boundary {
            y[0] = y[0].max(0.0);
        }
        y
    }

    /// Central-difference Jacobian columns. On the boundary the first
    /// column uses a one-sided difference into the chart domain.
    pub fn jacobian(&self, y: &[f64]) -> Vec<Curve> {
        (0..self.dim)
            .map(|k| {
                let step = self.fd_step * y[k].abs().max(1.0);
                let mut plus = y.to_vec();
                plus[k] += step;
                if self.has_boundary && k == 0 && y[0] - step < 0.0 {
                    let mut plus2 = y.to_vec();
                    plus2[0] += 2.0 * step;
                    let f0 = self.point(y);
                    let f1 = self.point(&plus);
                    let f2 = self.point(&plus2);
                    let mut col = f1.scaled(4.0);
                    col.axpy(-3.0, &f0);
                    col.axpy(-1.0, &f2);
                    return col.scaled(0.5 / step);
                }
                let mut minus = y.to_vec();
                minus[k] -= step;
                let mut col = self.point(&plus);
                col.axpy(-1.0, &self.point(&minus));
                col.scaled(0.5 / step)
            })
            .collect()
    }

    fn local_search(&self, h: &Curve, start: &[f64]) -> Result<(Vec<f64>, f64, usize), SetError> {
        let mut y = start.to_vec();
        let mut residual = h - &self.point(&y);
        let mut f = self.space.inner_product(&residual, &residual)?;
        let mut mu = 1e-3;
        let mut iterations = 0;
        for _ in 0..self.max_iter {
            iterations += 1;
            let jac = self.jacobian(&y);
            let m = self.dim;
            let mut normal = DMatrix::zeros(m, m);
            let mut grad = DVector::zeros(m);
            for a in 0..m {
                grad[a] = self.space.inner_product(&jac[a], &residual)?;
                for b in 0..=a {
                    let v = self.space.inner_product(&jac[a], &jac[b])?;
                    normal[(a, b)] = v;
                    normal[(b, a)] = v;
                }
            }
            let mut improved = false;
            for _ in 0..30 {
                let mut damped = normal.clone();
                for a in 0..m {
                    damped[(a, a)] += mu * normal[(a, a)].max(1e-300);
                }
                let Some(step) = damped.lu().solve(&grad) else {
                    mu *= 10.0;
                    continue;
                };
                let candidate = self.feasible(y.iter().zip(step.iter()).map(|(a, b)| a + b).collect());
                let r = h - &self.point(&candidate);
                let fc = self.space.inner_product(&r, &r)?;
                if fc.is_finite() && fc <= f {
                    let moved = candidate.iter().zip(&y).fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
                    let gained = f - fc;
                    y = candidate;
                    residual = r;
                    f = fc;
                    mu = (mu / 3.0).max(1e-12);
                    improved = moved > 1e-13 && gained > 1e-15 * f.max(1e-300);
                    break;
                }
                mu *= 4.0;
            }
            if !improved {
                break;
            }
        }
        Ok((y, f.max(0.0).sqrt(), iterations))
    }

    /// Multi-start search for the nearest chart point. The distance is an
    /// upper bound on `d_K(h)`.
    pub fn project(&self, h: &Curve) -> Result<ManifoldProjection, SetError> {
        self.space.check(h)?;
        let mut outcomes = Vec::with_capacity(self.starts.len());
        let mut total_iterations = 0;
        for start in &self.starts {
            let (coordinates, distance, it) = self.local_search(h, start)?;
            total_iterations += it;
            outcomes.push(StartOutcome { start: start.clone(), coordinates, distance });
        }
        // Ties go to the earliest start.
        let best = outcomes
            .iter()
            .enumerate()
            .fold(0, |best, (i, o)| if o.distance < outcomes[best].distance { i } else { best });
        let coordinates = outcomes[best].coordinates.clone();
        let point = self.point(&coordinates);
        Ok(ManifoldProjection {
            at_boundary: self.has_boundary && coordinates[0] == 0.0,
            result: ProjectionResult {
                distance: outcomes[best].distance,
                point,
                iterations: total_iterations,
                converged: true,
                residual: 0.0,
            },
            coordinates,
            starts: outcomes,
        })
    }
}

/// Distance of `v` to the tangent space at chart coordinates `y`, or to the
/// inward half-cone `{J w : w[0] >= 0}` when `at_boundary` is set.
pub fn tangent_distance(manifold: &ParametrizedManifold, y: &[f64], v: &Curve, at_boundary: bool) -> Result<f64, SetError> {
    let space = manifold.space();
    let columns = manifold.jacobian(y);
    let full = Subspace::new(space.clone(), columns.clone()).map_err(rank_error)?;
    let coeffs = full.coefficients(v)?;
    if !at_boundary || coeffs[0] >= 0.0 {
        return Ok(space.distance(v, &full.element(&coeffs))?);
    }
    // The constraint w[0] >= 0 is active.
    if columns.len() == 1 {
        return Ok(space.norm(v)?);
    }
    let rest = Subspace::new(space.clone(), columns[1..].to_vec()).map_err(rank_error)?;
    Ok(rest.project(v)?.distance)
}

fn rank_error(e: SetError) -> SetError {
    match e {
        SetError::IllConditioned { .. } => SetError::RankDeficientChart,
        other => other,
    }
}

fn radical_inverse(mut k: usize, base: usize) -> f64 {
    let inv = 1.0 / base as f64;
    let mut out = 0.0;
    let mut scale = inv;
    while k > 0 {
        out += (k % base) as f64 * scale;
        k /= base;
        scale *= inv;
    }
    out
}

fn halton_starts(center: &[f64], radius: f64, count: usize) -> Vec<Vec<f64>> {
    const PRIMES: [usize; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    let mut starts = vec![center.to_vec()];
    for k in 1..count {
        starts.push(
            center
                .iter()
                .enumerate()
                .map(|(d, c)| c + radius * (2.0 * radical_inverse(k, PRIMES[d % PRIMES.len()]) - 1.0))
                .collect(),
        );
    }
    starts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{FilipovicNorm, Grid};

    fn fwd() -> Space {
        Space::filipovic(0.1, Arc::new(Grid::log_spaced(30.0, 256, 6.0).unwrap()), FilipovicNorm::Equivalent).unwrap()
    }

    fn linear_chart(space: &Space) -> (Chart, Vec<Curve>) {
        let basis = vec![
            space.sample(Some(1.0), |_| 1.0),
            space.sample(Some(0.0), |x| (-x).exp()),
            space.sample(Some(0.0), |x| x * (-x).exp()),
        ];
        let b = basis.clone();
        (Arc::new(move |y: &[f64]| Curve::linear_combination(y, &b)), basis)
    }

    #[test]
    fn halton_starts_are_deterministic_and_distinct() {
        let a = halton_starts(&[0.0, 1.0], 0.5, 16);
        assert_eq!(a, halton_starts(&[0.0, 1.0], 0.5, 16));
        assert_eq!(a[0], vec![0.0, 1.0]);
        assert_eq!(a.len(), 16);
        assert!(a.iter().all(|s| (s[1] - 1.0).abs() <= 0.5));
    }

    #[test]
    fn flat_chart_matches_subspace_distance() {
        let s = fwd();
        let (chart, basis) = linear_chart(&s);
        let m = ParametrizedManifold::new(s.clone(), chart, vec![0.0; 3], 1.0, false).unwrap();
        let h = s.sample(Some(0.3), |x| 0.3 + (-0.4 * x).exp() * (x * 1.3).cos());
        let exact = Subspace::new(s.clone(), basis.clone()).unwrap().project(&h).unwrap().distance;
        let got = m.project(&h).unwrap();
        assert!((got.result.distance - exact).abs() < 1e-8, "{} vs {exact}", got.result.distance);
        assert_eq!(got.starts.len(), DEFAULT_STARTS);
        // Tangent space of a flat chart is the subspace itself.
        let td = tangent_distance(&m, &got.coordinates, &h, false).unwrap();
        assert!((td - exact).abs() < 1e-8);
    }

    #[test]
    fn tangent_vectors_have_zero_distance() {
        let s = fwd();
        // Curved chart: y -> y0 e^{-y1 x}.
        let chart: Chart = {
            let s = s.clone();
            Arc::new(move |y: &[f64]| s.sample(Some(0.0), |x| y[0] * (-y[1] * x).exp()))
        };
        let m = ParametrizedManifold::new(s.clone(), chart, vec![1.0, 1.0], 0.3, true).unwrap();
        let y = [0.7, 1.2];
        let jac = m.jacobian(&y);
        let v = Curve::linear_combination(&[0.4, -1.1], &jac);
        assert!(tangent_distance(&m, &y, &v, false).unwrap() < 1e-8);
    }

    #[test]
    fn boundary_half_cone_distance() {
        let s = fwd();
        let (chart, _) = linear_chart(&s);
        let m = ParametrizedManifold::new(s.clone(), chart, vec![0.0; 3], 1.0, true).unwrap();
        let y = [0.0, 0.5, -0.2];
        let jac = m.jacobian(&y);
        let w0 = -0.8;
        let v = jac[0].scaled(w0);
        // Oracle: |w0| times the first column with its projection onto the
        // others removed.
        let rest = Subspace::new(s.clone(), jac[1..].to_vec()).unwrap();
        let orth = &jac[0] - &rest.project(&jac[0]).unwrap().point;
        let expected = w0.abs() * s.norm(&orth).unwrap();
        let got = tangent_distance(&m, &y, &v, true).unwrap();
        assert!((got - expected).abs() < 1e-8 * expected.max(1.0));
        // Inward directions stay tangent.
        assert!(tangent_distance(&m, &y, &jac[0].scaled(0.8), true).unwrap() < 1e-8);
    }

    #[test]
    fn degenerate_chart_is_reported() {
        let s = fwd();
        let e = s.sample(Some(0.0), |x| (-x).exp());
        let chart: Chart = Arc::new(move |y: &[f64]| e.scaled(y[0] + y[1]));
        let m = ParametrizedManifold::new(s.clone(), chart, vec![1.0, 1.0], 0.5, false).unwrap();
        let v = s.zero();
        assert!(matches!(tangent_distance(&m, &[1.0, 1.0], &v, false), Err(SetError::RankDeficientChart)));
    }
}
