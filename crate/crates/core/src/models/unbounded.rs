use std::sync::Arc;

use serde::Serialize;

use super::ModelError;
use crate::spaces::{Curve, FilipovicNorm, Grid, GridKind, Space};

/// Cells resolving the support `[0, 1/n]`.
const SUPPORT_CELLS: usize = 2048;
const TAIL_POINTS: usize = 64;
const X_MAX: f64 = 30.0;

#[derive(Debug, Clone, Serialize)]
pub struct UnboundedRow {
    pub n: u64,
    pub norm: f64,
    pub norm_squared: f64,
    /// `e^gamma / 2`.
    pub norm_squared_bound: f64,
    /// Slope at zero, `sqrt(n)` by construction.
    pub slope_at_zero: f64,
    pub ratio: f64,
}

/// `1, 2, 5, 10, 20, 50, ...` up to `n_max`.
pub fn one_two_five(n_max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut decade = 1u64;
    'outer: loop {
        for m in [1, 2, 5] {
            let n = m * decade;
            if n > n_max {
                break 'outer;
            }
            out.push(n);
        }
        decade *= 10;
    }
    out
}

/// Curves `g_n` with `g_n' = sqrt(n - n^2 x)` on `[0, 1/n]`, zero beyond,
/// showing that `g -> g'(0)` is unbounded in the forward-curve norm:
/// `g_n'(0) = sqrt(n)` while `||g_n||^2 <= e^gamma / 2`.
pub fn unbounded_functional_demo(gamma: f64, n_max: u64) -> Result<Vec<UnboundedRow>, ModelError> {
    if n_max < 4 || !(gamma >= 0.0) {
        return Err(ModelError::InvalidParameter("need n_max >= 4 and gamma >= 0".into()));
    }
    one_two_five(n_max)
        .into_iter()
        .map(|n| {
            let nf = n as f64;
            let end = 1.0 / nf;
            let mut points: Vec<f64> = (0..=SUPPORT_CELLS).map(|i| end * i as f64 / SUPPORT_CELLS as f64).collect();
            points.extend((1..=TAIL_POINTS).map(|i| end + (X_MAX - end) * i as f64 / TAIL_POINTS as f64));
            let grid = Arc::new(Grid::new(points, GridKind::Custom)?);
            let space = Space::filipovic(gamma, grid.clone(), FilipovicNorm::Equivalent)?;
            // int_0^x sqrt(n - n^2 u) du, total 2 / (3 sqrt(n)).
            let total = 2.0 / (3.0 * nf.sqrt());
            let g = Curve::from_fn(&grid, Some(0.0), |x| {
                if x >= end {
                    0.0
                } else {
                    -2.0 / (3.0 * nf * nf) * (nf - nf * nf * x).powf(1.5)
                }
            });
            debug_assert!((g.values()[0] + total).abs() < 1e-12 * total);
            let norm = space.norm(&g)?;
            let slope_at_zero = nf.sqrt();
            Ok(UnboundedRow {
                n,
                norm,
                norm_squared: norm * norm,
                norm_squared_bound: gamma.exp() / 2.0,
                slope_at_zero,
                ratio: slope_at_zero / norm,
            })
        })
        .collect()
}
