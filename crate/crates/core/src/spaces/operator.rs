use std::fmt;

use super::{derivative, Curve, SpaceError};

/// Linear (generator) action on sampled curves.
pub trait LinearOperator: Send + Sync + fmt::Debug {
    fn apply(&self, h: &Curve) -> Result<Curve, SpaceError>;

    /// Action of the adjoint, when available.
    fn apply_adjoint(&self, h: &Curve) -> Result<Curve, SpaceError> {
        let _ = h;
        Err(SpaceError::NoAdjoint(self.name()))
    }

    fn name(&self) -> &'static str;
}

/// Applies a generator to a curve.
pub fn apply_generator(op: &dyn LinearOperator, h: &Curve) -> Result<Curve, SpaceError> {
    op.apply(h)
}

/// The zero operator (ODEs written with the whole right-hand side as drift).
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroOperator;

impl LinearOperator for ZeroOperator {
    fn apply(&self, h: &Curve) -> Result<Curve, SpaceError> {
        Ok(h.zeros_like())
    }

    fn apply_adjoint(&self, h: &Curve) -> Result<Curve, SpaceError> {
        Ok(h.zeros_like())
    }

    fn name(&self) -> &'static str {
        "zero"
    }
}

/// `h -> rate * h`.
#[derive(Debug, Clone, Copy)]
pub struct ScalarMultiple(pub f64);

impl LinearOperator for ScalarMultiple {
    fn apply(&self, h: &Curve) -> Result<Curve, SpaceError> {
        Ok(h.scaled(self.0))
    }

    fn apply_adjoint(&self, h: &Curve) -> Result<Curve, SpaceError> {
        Ok(h.scaled(self.0))
    }

    fn name(&self) -> &'static str {
        "scalar-multiple"
    }
}

/// `d/dx` on forward curves (generator of the left shift).
#[derive(Debug, Clone, Copy, Default)]
pub struct TranslationGenerator;

impl LinearOperator for TranslationGenerator {
    fn apply(&self, h: &Curve) -> Result<Curve, SpaceError> {
        derivative(h)
    }

    fn name(&self) -> &'static str {
        "translation"
    }
}

/// `(kappa/2) d^2/dx^2 + d/dx` on `(0, 1)` with zero boundary values.
///
/// Works on the interior points of a uniform partition. The boundary zeros
/// are implicit; the input is checked against them by quadratic
/// extrapolation to both endpoints.
#[derive(Debug, Clone, Copy)]
pub struct DirichletRateOperator {
    pub kappa: f64,
    /// Allowed extrapolated boundary value relative to `max |h|`.
    pub boundary_tolerance: f64,
}

impl DirichletRateOperator {
    pub fn new(kappa: f64) -> Result<Self, SpaceError> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(SpaceError::InvalidParameter(format!("kappa must be positive, got {kappa}")));
        }
        Ok(Self { kappa, boundary_tolerance: 2e-2 })
    }

    /// Eigenvalue `-(1 + n^2 pi^2 kappa^2) / (2 kappa)` of mode `n >= 1`.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        eigenvalue(self.kappa, n)
    }

    /// Eigenfunction `exp(-x/kappa) sin(n pi x)`.
    pub fn eigenfunction(&self, n: usize, x: f64) -> f64 {
        eigenfunction(self.kappa, n, x)
    }

    fn step(&self, h: &Curve) -> Result<f64, SpaceError> {
        let grid = h.grid();
        if grid.len() < 3 {
            return Err(SpaceError::DegenerateGrid { required: 3, actual: grid.len() });
        }
        if !grid.is_unit_interior() {
            return Err(SpaceError::InvalidGrid(
                "the rate operator needs the interior points of a uniform partition of [0, 1]".into(),
            ));
        }
        Ok(1.0 / (grid.len() + 1) as f64)
    }

    fn check_boundary(&self, h: &Curve) -> Result<(), SpaceError> {
        let v = h.values();
        let n = v.len();
        let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if scale == 0.0 {
            return Ok(());
        }
        let left = 3.0 * v[0] - 3.0 * v[1] + v[2];
        let right = 3.0 * v[n - 1] - 3.0 * v[n - 2] + v[n - 3];
        for (at, value) in [(0.0, left), (1.0, right)] {
            if value.abs() > self.boundary_tolerance * scale {
                return Err(SpaceError::BoundaryCondition { at, value });
            }
        }
        Ok(())
    }

    fn stencil(&self, h: &Curve, drift_sign: f64) -> Result<Curve, SpaceError> {
        let dx = self.step(h)?;
        self.check_boundary(h)?;
        let v = h.values();
        let n = v.len();
        let diffusion = 0.5 * self.kappa / (dx * dx);
        let advection = drift_sign / (2.0 * dx);
        let out = (0..n)
            .map(|i| {
                let left = if i == 0 { 0.0 } else { v[i - 1] };
                let right = if i + 1 == n { 0.0 } else { v[i + 1] };
                diffusion * (left - 2.0 * v[i] + right) + advection * (right - left)
            })
            .collect();
        Ok(h.with_values(out, None))
    }
}

impl LinearOperator for DirichletRateOperator {
    fn apply(&self, h: &Curve) -> Result<Curve, SpaceError> {
        self.stencil(h, 1.0)
    }

    /// `(kappa/2) d^2/dx^2 - d/dx`; on the grid this is exactly the transpose
    /// of the forward stencil.
    fn apply_adjoint(&self, h: &Curve) -> Result<Curve, SpaceError> {
        self.stencil(h, -1.0)
    }

    fn name(&self) -> &'static str {
        "dirichlet-rate"
    }
}

pub fn eigenvalue(kappa: f64, n: usize) -> f64 {
    let npk = n as f64 * std::f64::consts::PI * kappa;
    -(1.0 + npk * npk) / (2.0 * kappa)
}

pub fn eigenfunction(kappa: f64, n: usize, x: f64) -> f64 {
    (-x / kappa).exp() * (n as f64 * std::f64::consts::PI * x).sin()
}
