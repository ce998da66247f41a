use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::SpaceError;

/// How the grid points were generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    Uniform,
    LogSpaced,
    Custom,
}

/// Strictly increasing, nonnegative sample points of the x-axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    kind: GridKind,
}

/// Default number of points for forward-curve grids.
pub const DEFAULT_CURVE_POINTS: usize = 2048;
/// Default truncation of the maturity axis.
pub const DEFAULT_X_MAX: f64 = 30.0;
/// Default clustering strength of log-spaced grids.
pub const DEFAULT_STRETCH: f64 = 6.0;
/// Default number of interior points on the unit interval.
pub const DEFAULT_INTERIOR_POINTS: usize = 1024;

impl Grid {
    pub fn new(points: Vec<f64>, kind: GridKind) -> Result<Self, SpaceError> {
        if points.is_empty() {
            return Err(SpaceError::InvalidGrid("grid has no points".into()));
        }
        if points.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(SpaceError::InvalidGrid("grid points must be finite and nonnegative".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SpaceError::InvalidGrid("grid points must be strictly increasing".into()));
        }
        Ok(Self { points, kind })
    }

    /// `n` equally spaced points from `start` to `end` inclusive.
    pub fn uniform(start: f64, end: f64, n: usize) -> Result<Self, SpaceError> {
        if n < 2 || end <= start {
            return Err(SpaceError::InvalidGrid(format!("uniform grid needs n >= 2 and end > start (n = {n})")));
        }
        let step = (end - start) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| start + step * i as f64).collect();
        points[n - 1] = end;
        Self::new(points, GridKind::Uniform)
    }

    /// `n` points on `[0, x_max]`, clustered near zero.
    ///
    /// `x_i = x_max * expm1(stretch * i / (n - 1)) / expm1(stretch)`.
    pub fn log_spaced(x_max: f64, n: usize, stretch: f64) -> Result<Self, SpaceError> {
        if n < 2 || !(x_max > 0.0) || !(stretch > 0.0) {
            return Err(SpaceError::InvalidGrid(format!(
                "log-spaced grid needs n >= 2, x_max > 0 and stretch > 0 (n = {n}, x_max = {x_max}, stretch = {stretch})"
            )));
        }
        let denom = stretch.exp_m1();
        let mut points: Vec<f64> = (0..n)
            .map(|i| x_max * (stretch * i as f64 / (n - 1) as f64).exp_m1() / denom)
            .collect();
        points[0] = 0.0;
        points[n - 1] = x_max;
        Self::new(points, GridKind::LogSpaced)
    }

    /// The `m` interior points `i / (m + 1)` of the unit interval.
    pub fn unit_interior(m: usize) -> Result<Self, SpaceError> {
        if m == 0 {
            return Err(SpaceError::InvalidGrid("interior grid needs at least one point".into()));
        }
        let h = 1.0 / (m + 1) as f64;
        Self::new((1..=m).map(|i| i as f64 * h).collect(), GridKind::Uniform)
    }

    /// Default forward-curve grid: 2048 log-spaced points on `[0, 30]`.
    pub fn forward_curve_default() -> Self {
        Self::log_spaced(DEFAULT_X_MAX, DEFAULT_CURVE_POINTS, DEFAULT_STRETCH).expect("valid default grid")
    }

    /// The one-point grid used by scalar states.
    pub fn scalar() -> Arc<Grid> {
        static SCALAR: OnceLock<Arc<Grid>> = OnceLock::new();
        SCALAR
            .get_or_init(|| Arc::new(Grid { points: vec![0.0], kind: GridKind::Custom }))
            .clone()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Common spacing if the points are equally spaced (relative tolerance 1e-9).
    pub fn uniform_step(&self) -> Option<f64> {
        if self.points.len() < 2 {
            return None;
        }
        let h = (self.last() - self.first()) / (self.points.len() - 1) as f64;
        let uniform = self.points.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
        uniform.then_some(h)
    }

    /// Whether the points are exactly the interior points of a uniform
    /// partition of `[0, 1]`.
    pub fn is_unit_interior(&self) -> bool {
        let m = self.points.len();
        let h = 1.0 / (m + 1) as f64;
        self.points
            .iter()
            .enumerate()
            .all(|(i, x)| (x - (i + 1) as f64 * h).abs() <= 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted_and_negative_points() {
        assert!(Grid::new(vec![0.0, 2.0, 1.0], GridKind::Custom).is_err());
        assert!(Grid::new(vec![-1.0, 0.0], GridKind::Custom).is_err());
        assert!(Grid::new(vec![], GridKind::Custom).is_err());
        assert!(Grid::new(vec![0.0, 0.0], GridKind::Custom).is_err());
    }

    #[test]
    fn log_spaced_hits_endpoints_and_clusters_at_zero() {
        let g = Grid::log_spaced(30.0, 2048, 6.0).unwrap();
        assert_eq!(g.first(), 0.0);
        assert_eq!(g.last(), 30.0);
        let p = g.points();
        assert!(p[1] - p[0] < p[2047] - p[2046]);
        assert_eq!(g.uniform_step(), None);
    }

    #[test]
    fn interior_grid_is_recognised() {
        let g = Grid::unit_interior(7).unwrap();
        assert!(g.is_unit_interior());
        assert!((g.uniform_step().unwrap() - 0.125).abs() < 1e-15);
        assert!(!Grid::uniform(0.0, 1.0, 9).unwrap().is_unit_interior());
    }
}
