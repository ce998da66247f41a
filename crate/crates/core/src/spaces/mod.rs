//! Discretized Hilbert spaces of states.
//!
//! Four state spaces are supported: the real line, `L^2(0, 1)` sampled on
//! interior points, the weighted forward-curve space with weight `e^{gamma x}`
//! and the graph-norm space of a generator over one of the others.
//!
//! The forward-curve inner product is evaluated cell by cell. On each grid
//! cell the derivative is the difference quotient and the weight is integrated
//! exactly, so the discrete form is a sum of nonnegative terms with no
//! checkerboard null space. Beyond the last grid point the curve is joined to
//! its limit at infinity along the minimal-energy profile, which adds
//! `gamma e^{gamma x_max} (h(inf) - h(x_max))^2`.

mod curve;
mod grid;
mod operator;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use curve::Curve;
pub use grid::{
    Grid, GridKind, DEFAULT_CURVE_POINTS, DEFAULT_INTERIOR_POINTS, DEFAULT_STRETCH, DEFAULT_X_MAX,
};
pub use operator::{
    apply_generator, eigenfunction, eigenvalue, DirichletRateOperator, LinearOperator, ScalarMultiple,
    TranslationGenerator, ZeroOperator,
};

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("curve grid does not match the space grid")]
    GridMismatch,
    #[error("curve has {actual} values but its grid has {expected} points")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("curve is missing its value at infinity")]
    IncompleteCurve,
    #[error("curve has a value at infinity but the space has no such slot")]
    UnexpectedLimit,
    #[error("operation needs at least {required} grid points, got {actual}")]
    DegenerateGrid { required: usize, actual: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("extrapolated boundary value {value:.3e} at x = {at} violates the zero boundary condition")]
    BoundaryCondition { at: f64, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("operator `{0}` has no adjoint action")]
    NoAdjoint(&'static str),
    #[error("curve input: {0}")]
    Parse(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Which of the two equivalent forward-curve norms to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilipovicNorm {
    /// `h(inf)^2 + int h'(x)^2 e^{gamma x} dx`.
    #[default]
    Equivalent,
    /// `h(0)^2 + int h'(x)^2 e^{gamma x} dx`.
    Original,
}

/// `L^2(0, 1)` sampled on interior points, trapezoid rule with the zero
/// boundary values implied.
#[derive(Debug, Clone)]
pub struct L2Space {
    grid: Arc<Grid>,
    weights: Arc<[f64]>,
}

/// Forward-curve space with weight `e^{gamma x}`.
#[derive(Debug, Clone)]
pub struct FilipovicSpace {
    gamma: f64,
    grid: Arc<Grid>,
    norm: FilipovicNorm,
    /// `int_cell e^{gamma x} dx / (cell width)^2` per cell.
    cell_weights: Arc<[f64]>,
    tail_weight: f64,
}

#[derive(Debug, Clone)]
pub struct GraphNormSpace {
    base: Box<Space>,
    generator: Arc<dyn LinearOperator>,
}

#[derive(Debug, Clone)]
pub enum Space {
    ScalarLine,
    L2UnitInterval(L2Space),
    Filipovic(FilipovicSpace),
    GraphNorm(GraphNormSpace),
}

impl L2Space {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl FilipovicSpace {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn norm_kind(&self) -> FilipovicNorm {
        self.norm
    }

    pub fn cell_weights(&self) -> &[f64] {
        &self.cell_weights
    }

    pub fn tail_weight(&self) -> f64 {
        self.tail_weight
    }

    fn inner(&self, h: &Curve, g: &Curve) -> f64 {
        let (hv, gv) = (h.values(), g.values());
        let h_inf = h.at_infinity().unwrap_or(0.0);
        let g_inf = g.at_infinity().unwrap_or(0.0);
        let n = hv.len();
        let mut acc = match self.norm {
            FilipovicNorm::Equivalent => h_inf * g_inf,
            FilipovicNorm::Original => hv[0] * gv[0],
        };
        for (i, w) in self.cell_weights.iter().enumerate() {
            acc += w * (hv[i + 1] - hv[i]) * (gv[i + 1] - gv[i]);
        }
        acc + self.tail_weight * (h_inf - hv[n - 1]) * (g_inf - gv[n - 1])
    }
}

impl GraphNormSpace {
    pub fn base(&self) -> &Space {
        &self.base
    }

    pub fn generator(&self) -> &Arc<dyn LinearOperator> {
        &self.generator
    }
}

impl Space {
    pub fn scalar() -> Self {
        Space::ScalarLine
    }

    pub fn l2(grid: Arc<Grid>) -> Result<Self, SpaceError> {
        if grid.first() <= 0.0 || grid.last() >= 1.0 {
            return Err(SpaceError::InvalidGrid("L2(0,1) grid points must lie in (0, 1)".into()));
        }
        let p = grid.points();
        let n = p.len();
        let weights = (0..n)
            .map(|i| {
                let left = if i == 0 { 0.0 } else { p[i - 1] };
                let right = if i + 1 == n { 1.0 } else { p[i + 1] };
                0.5 * (right - left)
            })
            .collect();
        Ok(Space::L2UnitInterval(L2Space { grid, weights }))
    }

    pub fn filipovic(gamma: f64, grid: Arc<Grid>, norm: FilipovicNorm) -> Result<Self, SpaceError> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(SpaceError::InvalidParameter(format!("weight exponent must be positive, got {gamma}")));
        }
        if grid.len() < 2 {
            return Err(SpaceError::DegenerateGrid { required: 2, actual: grid.len() });
        }
        if grid.first() != 0.0 {
            return Err(SpaceError::InvalidGrid("forward-curve grids start at 0".into()));
        }
        let p = grid.points();
        let cell_weights = p
            .windows(2)
            .map(|w| {
                let dx = w[1] - w[0];
                (gamma * w[0]).exp() * (gamma * dx).exp_m1() / gamma / (dx * dx)
            })
            .collect();
        let tail_weight = gamma * (gamma * grid.last()).exp();
        Ok(Space::Filipovic(FilipovicSpace { gamma, grid, norm, cell_weights, tail_weight }))
    }

    pub fn graph_norm(base: Space, generator: Arc<dyn LinearOperator>) -> Result<Self, SpaceError> {
        if matches!(base, Space::GraphNorm(_)) {
            return Err(SpaceError::InvalidParameter("graph norms are built over a plain space".into()));
        }
        Ok(Space::GraphNorm(GraphNormSpace { base: Box::new(base), generator }))
    }

    /// The grid on which curves of this space live.
    pub fn grid(&self) -> Arc<Grid> {
        match self {
            Space::ScalarLine => Grid::scalar(),
            Space::L2UnitInterval(s) => s.grid.clone(),
            Space::Filipovic(s) => s.grid.clone(),
            Space::GraphNorm(s) => s.base.grid(),
        }
    }

    /// Whether curves of this space carry a value at infinity.
    pub fn uses_infinity(&self) -> bool {
        match self {
            Space::Filipovic(_) => true,
            Space::GraphNorm(s) => s.base.uses_infinity(),
            _ => false,
        }
    }

    /// The underlying space for graph norms, `self` otherwise.
    pub fn base(&self) -> &Space {
        match self {
            Space::GraphNorm(s) => s.base.base(),
            other => other,
        }
    }

    pub fn zero(&self) -> Curve {
        Curve::zeros(&self.grid(), self.uses_infinity())
    }

    /// Samples `f` on the space grid. `at_infinity` is ignored when the
    /// space has no limit slot and defaults to `f(x_max)` otherwise.
    pub fn sample(&self, at_infinity: Option<f64>, f: impl Fn(f64) -> f64) -> Curve {
        let grid = self.grid();
        let limit = self.uses_infinity().then(|| at_infinity.unwrap_or_else(|| f(grid.last())));
        Curve::from_fn(&grid, limit, f)
    }

    /// Checks that `h` is a state of this space.
    pub fn check(&self, h: &Curve) -> Result<(), SpaceError> {
        let grid = self.grid();
        if !(Arc::ptr_eq(&grid, h.grid()) || grid.points() == h.grid().points()) {
            return Err(SpaceError::GridMismatch);
        }
        match (self.uses_infinity(), h.at_infinity()) {
            (true, None) => Err(SpaceError::IncompleteCurve),
            (false, Some(_)) => Err(SpaceError::UnexpectedLimit),
            _ => Ok(()),
        }
    }

    pub fn inner_product(&self, h: &Curve, g: &Curve) -> Result<f64, SpaceError> {
        self.check(h)?;
        self.check(g)?;
        Ok(match self {
            Space::ScalarLine => h.value() * g.value(),
            Space::L2UnitInterval(s) => s
                .weights
                .iter()
                .zip(h.values().iter().zip(g.values()))
                .map(|(w, (a, b))| w * a * b)
                .sum(),
            Space::Filipovic(s) => s.inner(h, g),
            Space::GraphNorm(s) => {
                let ah = s.generator.apply(h)?;
                let ag = s.generator.apply(g)?;
                s.base.inner_product(h, g)? + s.base.inner_product(&ah, &ag)?
            }
        })
    }

    pub fn norm(&self, h: &Curve) -> Result<f64, SpaceError> {
        Ok(self.inner_product(h, h)?.max(0.0).sqrt())
    }

    /// `||h - g||`.
    pub fn distance(&self, h: &Curve, g: &Curve) -> Result<f64, SpaceError> {
        self.check(h)?;
        self.check(g)?;
        self.norm(&(h - g))
    }

    /// Tridiagonal matrix of the squared norm in the variables
    /// `(values..., value_at_infinity)`; `None` for scalar and graph norms.
    pub fn quadratic_form(&self) -> Option<QuadraticForm> {
        match self {
            Space::L2UnitInterval(s) => Some(QuadraticForm {
                diag: s.weights.to_vec(),
                off: vec![0.0; s.weights.len() - 1],
                infinity_slot: false,
            }),
            Space::Filipovic(s) => {
                let n = s.grid.len();
                let mut diag = vec![0.0; n + 1];
                let mut off = vec![0.0; n];
                for (i, w) in s.cell_weights.iter().enumerate() {
                    diag[i] += w;
                    diag[i + 1] += w;
                    off[i] = -w;
                }
                diag[n - 1] += s.tail_weight;
                diag[n] += s.tail_weight;
                off[n - 1] = -s.tail_weight;
                match s.norm {
                    FilipovicNorm::Equivalent => diag[n] += 1.0,
                    FilipovicNorm::Original => diag[0] += 1.0,
                }
                Some(QuadraticForm { diag, off, infinity_slot: true })
            }
            _ => None,
        }
    }
}

/// Symmetric tridiagonal Gram matrix of a discretized norm.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    pub diag: Vec<f64>,
    /// `off[i]` couples variables `i` and `i + 1`.
    pub off: Vec<f64>,
    pub infinity_slot: bool,
}

impl QuadraticForm {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.off[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    pub fn to_vars(&self, h: &Curve) -> Vec<f64> {
        let mut v = h.values().to_vec();
        if self.infinity_slot {
            v.push(h.at_infinity().unwrap_or(0.0));
        }
        v
    }

    pub fn from_vars(&self, template: &Curve, mut vars: Vec<f64>) -> Curve {
        let limit = if self.infinity_slot { vars.pop() } else { None };
        template.with_values(vars, limit)
    }
}

/// Second-order finite-difference derivative on the curve's grid, one-sided
/// at both ends. The limit slot, if any, becomes zero.
pub fn derivative(h: &Curve) -> Result<Curve, SpaceError> {
    let x = h.grid().points();
    let f = h.values();
    let n = x.len();
    if n < 3 {
        return Err(SpaceError::DegenerateGrid { required: 3, actual: n });
    }
    let mut out = vec![0.0; n];
    {
        let (h1, h2) = (x[1] - x[0], x[2] - x[1]);
        out[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1]
            - h1 / (h2 * (h1 + h2)) * f[2];
    }
    for i in 1..n - 1 {
        let (h1, h2) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        out[i] = -h2 / (h1 * (h1 + h2)) * f[i - 1] + (h2 - h1) / (h1 * h2) * f[i] + h1 / (h2 * (h1 + h2)) * f[i + 1];
    }
    {
        let (h1, h2) = (x[n - 2] - x[n - 3], x[n - 1] - x[n - 2]);
        out[n - 1] = h2 / (h1 * (h1 + h2)) * f[n - 3] - (h1 + h2) / (h1 * h2) * f[n - 2]
            + (2.0 * h2 + h1) / (h2 * (h1 + h2)) * f[n - 1];
    }
    Ok(h.with_values(out, h.at_infinity().map(|_| 0.0)))
}

/// [`derivative`] after checking that `h` belongs to `space`.
pub fn differentiate(space: &Space, h: &Curve) -> Result<Curve, SpaceError> {
    space.check(h)?;
    derivative(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fwd(gamma: f64) -> Space {
        Space::filipovic(gamma, Arc::new(Grid::forward_curve_default()), FilipovicNorm::Equivalent).unwrap()
    }

    fn exp_curve(space: &Space, z: f64) -> Curve {
        space.sample(Some(0.0), |x| (-z * x).exp())
    }

    #[test]
    fn constant_curve_has_unit_norm() {
        let s = fwd(0.1);
        let one = s.sample(Some(1.0), |_| 1.0);
        assert_eq!(s.inner_product(&one, &one).unwrap(), 1.0);
    }

    #[test]
    fn exponential_inner_products_match_closed_form() {
        let gamma = 0.1;
        let s = fwd(gamma);
        for (y, z) in [(1.0, 2.0), (0.6, 1.0), (2.0, 2.5), (0.3, 0.3)] {
            let exact = y * z / (y + z - gamma);
            let ip = s.inner_product(&exp_curve(&s, y), &exp_curve(&s, z)).unwrap();
            assert!((ip - exact).abs() < 1e-6 * exact, "{y} {z}: {ip} vs {exact}");
        }
    }

    #[test]
    fn original_norm_uses_the_left_endpoint() {
        let grid = Arc::new(Grid::forward_curve_default());
        let s = Space::filipovic(0.1, grid, FilipovicNorm::Original).unwrap();
        let h = exp_curve(&s, 1.0);
        // h(0)^2 + int z^2 e^{-(2z - gamma) x} dx with z = 1.
        let exact = 1.0 + 1.0 / 1.9;
        assert!((s.norm(&h).unwrap().powi(2) - exact).abs() < 1e-6);
    }

    #[test]
    fn mismatched_and_incomplete_curves_are_rejected() {
        let s = fwd(0.1);
        let other = Arc::new(Grid::uniform(0.0, 30.0, 100).unwrap());
        let h = Curve::zeros(&other, true);
        assert!(matches!(s.norm(&h), Err(SpaceError::GridMismatch)));
        let mut g = s.zero();
        g.set_at_infinity(None);
        assert!(matches!(s.norm(&g), Err(SpaceError::IncompleteCurve)));
    }

    #[test]
    fn l2_norm_matches_fine_trapezoid_oracle() {
        let kappa = 0.5;
        let m = 1023;
        let s = Space::l2(Arc::new(Grid::unit_interior(m).unwrap())).unwrap();
        for n in [1, 2, 5] {
            let u = s.sample(None, |x| eigenfunction(kappa, n, x));
            let value = s.inner_product(&u, &u).unwrap();
            // Trapezoid at ten times the resolution.
            let fine = 10 * (m + 1);
            let hx = 1.0 / fine as f64;
            let oracle: f64 = (1..fine).map(|i| eigenfunction(kappa, n, i as f64 * hx).powi(2) * hx).sum();
            assert!((value - oracle).abs() < 1e-8 * oracle.max(1.0), "n = {n}");
            assert!(value > 0.0);
        }
    }

    #[test]
    fn graph_norm_of_eigenfunction() {
        let kappa = 0.5;
        let grid = Arc::new(Grid::unit_interior(1023).unwrap());
        let base = Space::l2(grid).unwrap();
        let op = Arc::new(DirichletRateOperator::new(kappa).unwrap());
        let graph = Space::graph_norm(base.clone(), op).unwrap();
        for n in [1, 2, 4] {
            let u = base.sample(None, |x| eigenfunction(kappa, n, x));
            let lam = eigenvalue(kappa, n);
            let expected = (1.0 + lam * lam).sqrt() * base.norm(&u).unwrap();
            let got = graph.norm(&u).unwrap();
            assert!((got - expected).abs() < 1e-3 * expected, "n = {n}: {got} vs {expected}");
            assert!(got >= base.norm(&u).unwrap());
        }
    }

    #[test]
    fn derivative_of_linear_and_constant_curves() {
        let grid = Arc::new(Grid::uniform(0.0, 1.0, 11).unwrap());
        let lin = Curve::from_fn(&grid, None, |x| 2.0 * x + 1.0);
        for v in derivative(&lin).unwrap().values() {
            assert!((v - 2.0).abs() < 1e-12);
        }
        let c = Curve::from_fn(&grid, None, |_| 3.0);
        assert!(derivative(&c).unwrap().values().iter().all(|v| v.abs() < 1e-12));
        let two = Arc::new(Grid::uniform(0.0, 1.0, 2).unwrap());
        assert!(matches!(
            derivative(&Curve::zeros(&two, false)),
            Err(SpaceError::DegenerateGrid { required: 3, actual: 2 })
        ));
    }

    #[test]
    fn derivative_converges_at_second_order() {
        let err = |n: usize| {
            let grid = Arc::new(Grid::uniform(0.0, 2.0, n).unwrap());
            let h = Curve::from_fn(&grid, None, |x| (-x).exp());
            let d = derivative(&h).unwrap();
            d.values()
                .iter()
                .zip(grid.points())
                .fold(0.0_f64, |m, (v, x)| m.max((v + (-x).exp()).abs()))
        };
        let ratio = err(101) / err(201);
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn translation_generator_on_exponentials() {
        let s = fwd(0.1);
        let h = exp_curve(&s, 1.5);
        let d = TranslationGenerator.apply(&h).unwrap();
        let expected = s.sample(Some(0.0), |x| -1.5 * (-1.5 * x).exp());
        let err = s.norm(&(&d - &expected)).unwrap();
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn quadratic_form_reproduces_inner_product() {
        let s = fwd(0.2);
        let h = s.sample(Some(0.3), |x| (x * 0.7).sin() * (-0.4 * x).exp() + 0.3);
        let g = exp_curve(&s, 0.8);
        let q = s.quadratic_form().unwrap();
        let qh = q.apply(&q.to_vars(&h));
        let via_form: f64 = qh.iter().zip(q.to_vars(&g)).map(|(a, b)| a * b).sum();
        let direct = s.inner_product(&h, &g).unwrap();
        assert!((via_form - direct).abs() < 1e-9 * direct.abs().max(1.0));
    }
}
