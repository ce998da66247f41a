use std::fmt;
use std::sync::Arc;

use crate::spaces::{eigenfunction, eigenvalue, Curve, Grid, SpaceError};

/// Linear evolution operators `S_t`.
pub trait Semigroup: Send + Sync + fmt::Debug {
    fn apply(&self, t: f64, h: &Curve) -> Curve;

    fn name(&self) -> &'static str;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentitySemigroup;

impl Semigroup for IdentitySemigroup {
    fn apply(&self, _t: f64, h: &Curve) -> Curve {
        h.clone()
    }

    fn name(&self) -> &'static str {
        "identity"
    }
}

/// `S_t = e^{rate t}`.
#[derive(Debug, Clone, Copy)]
pub struct ScalarExponential(pub f64);

impl Semigroup for ScalarExponential {
    fn apply(&self, t: f64, h: &Curve) -> Curve {
        h.scaled((self.0 * t).exp())
    }

    fn name(&self) -> &'static str {
        "scalar-exponential"
    }
}

/// Left shift `(S_t h)(x) = h(x + t)` of forward curves.
///
/// Shifted nodes are evaluated by monotone cubic (Fritsch-Carlson)
/// interpolation; beyond the last grid point the curve is continued by its
/// value at infinity.
#[derive(Debug, Clone, Copy, Default)]
pub struct TranslationSemigroup;

impl Semigroup for TranslationSemigroup {
    fn apply(&self, t: f64, h: &Curve) -> Curve {
        if t == 0.0 {
            return h.clone();
        }
        let x = h.grid().points();
        let y = h.values();
        let n = x.len();
        let tail = h.at_infinity().unwrap_or(y[n - 1]);
        let slopes = monotone_slopes(x, y);
        let mut cell = 0;
        let values = x
            .iter()
            .map(|&xi| {
                let q = xi + t;
                if q >= x[n - 1] {
                    return if q == x[n - 1] { y[n - 1] } else { tail };
                }
                while x[cell + 1] <= q {
                    cell += 1;
                }
                hermite(x[cell], x[cell + 1], y[cell], y[cell + 1], slopes[cell], slopes[cell + 1], q)
            })
            .collect();
        h.with_values(values, h.at_infinity())
    }

    fn name(&self) -> &'static str {
        "translation"
    }
}

/// Fritsch-Carlson derivative estimates (the PCHIP rule).
pub fn monotone_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() || d0 == 0.0 {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, q: f64) -> f64 {
    let h = x1 - x0;
    let s = (q - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Exact semigroup of `(kappa/2) d^2/dx^2 + d/dx` with zero boundary values
/// on the interior points `i / (M + 1)`.
///
/// The weighted sine transform
/// `c_n = 2/(M+1) sum_i e^{x_i/kappa} h_i sin(n pi x_i)` expands a grid
/// function exactly in the eigenfunctions `e^{-x/kappa} sin(n pi x)`; each
/// coefficient is then multiplied by `e^{lambda_n t}`.
#[derive(Debug, Clone)]
pub struct SpectralSemigroup {
    kappa: f64,
    grid: Arc<Grid>,
    modes: usize,
    /// Row `n - 1` holds `sin(n pi x_i)`.
    sines: Vec<f64>,
    weights: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl SpectralSemigroup {
    /// `modes` defaults to the grid size, which makes the expansion exact.
    pub fn new(kappa: f64, grid: Arc<Grid>, modes: Option<usize>) -> Result<Self, SpaceError> {
        if !(kappa > 0.0) {
            return Err(SpaceError::InvalidParameter(format!("kappa must be positive, got {kappa}")));
        }
        if !grid.is_unit_interior() {
            return Err(SpaceError::InvalidGrid("spectral semigroup needs interior points i/(M+1)".into()));
        }
        let m = grid.len();
        let modes = modes.unwrap_or(m).clamp(1, m);
        let x = grid.points();
        let mut sines = Vec::with_capacity(modes * m);
        for n in 1..=modes {
            sines.extend(x.iter().map(|&xi| (n as f64 * std::f64::consts::PI * xi).sin()));
        }
        Ok(Self {
            kappa,
            weights: x.iter().map(|&xi| (xi / kappa).exp()).collect(),
            eigenvalues: (1..=modes).map(|n| eigenvalue(kappa, n)).collect(),
            grid,
            modes,
            sines,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Expansion coefficients of `h` in `e^{-x/kappa} sin(n pi x)`, `n = 1..=modes`.
    pub fn coefficients(&self, h: &Curve) -> Vec<f64> {
        let m = self.grid.len();
        let scale = 2.0 / (m + 1) as f64;
        let weighted: Vec<f64> = h.values().iter().zip(&self.weights).map(|(v, w)| v * w).collect();
        (0..self.modes)
            .map(|k| {
                let row = &self.sines[k * m..(k + 1) * m];
                scale * row.iter().zip(&weighted).map(|(s, v)| s * v).sum::<f64>()
            })
            .collect()
    }

    /// Grid function `sum_n coeffs[n-1] e^{-x/kappa} sin(n pi x)`.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let m = self.grid.len();
        let mut out = vec![0.0; m];
        for (k, c) in coeffs.iter().enumerate().take(self.modes) {
            if *c == 0.0 {
                continue;
            }
            let row = &self.sines[k * m..(k + 1) * m];
            for (o, s) in out.iter_mut().zip(row) {
                *o += c * s;
            }
        }
        out.iter_mut().zip(&self.weights).for_each(|(o, w)| *o /= w);
        out
    }

    /// Squared coefficient mass outside the retained modes, relative to the
    /// total (zero when all grid modes are kept).
    pub fn discarded_fraction(&self, h: &Curve) -> f64 {
        if self.modes == self.grid.len() {
            return 0.0;
        }
        let full = SpectralSemigroup::new(self.kappa, self.grid.clone(), None).expect("validated grid");
        let c = full.coefficients(h);
        let total: f64 = c.iter().map(|v| v * v).sum();
        let kept: f64 = c[..self.modes].iter().map(|v| v * v).sum();
        if total > 0.0 {
            (total - kept) / total
        } else {
            0.0
        }
    }

    pub fn eigenfunction(&self, n: usize, x: f64) -> f64 {
        eigenfunction(self.kappa, n, x)
    }
}

impl Semigroup for SpectralSemigroup {
    fn apply(&self, t: f64, h: &Curve) -> Curve {
        let mut c = self.coefficients(h);
        for (ci, lam) in c.iter_mut().zip(&self.eigenvalues) {
            *ci *= (lam * t).exp();
        }
        h.with_values(self.synthesize(&c), None)
    }

    fn name(&self) -> &'static str {
        "spectral"
    }
}
