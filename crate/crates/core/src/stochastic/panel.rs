use rand::Rng;
use rand_distr::StandardNormal;

use super::StochError;
use crate::rng::{stream, DOMAIN_BROWNIAN};

/// Independent standard Brownian increments for each noise mode on a fine
/// uniform grid of `[0, horizon]`, grouped into `partitions` equal cells.
///
/// Coarser views (other cell counts, solver steps) sum fine increments, so
/// every scheme run on one panel sees the same Brownian path.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPanel {
    horizon: f64,
    partitions: usize,
    fine_steps: usize,
    /// `increments[j][k]`: increment of mode `j` over fine step `k`.
    increments: Vec<Vec<f64>>,
    seed: u64,
    path: u64,
}

impl BrownianPanel {
    /// Draws the panel for path `path` of `seed`. The fine grid has
    /// `partitions * fine_per_cell` steps.
    pub fn sample(
        modes: usize,
        horizon: f64,
        partitions: usize,
        fine_per_cell: usize,
        seed: u64,
        path: u64,
    ) -> Result<Self, StochError> {
        if modes == 0 || partitions == 0 || fine_per_cell == 0 || !(horizon > 0.0) {
            return Err(StochError::InvalidParameter(
                "panel needs modes, partitions and fine_per_cell >= 1 and a positive horizon".into(),
            ));
        }
        let fine_steps = partitions * fine_per_cell;
        let sd = (horizon / fine_steps as f64).sqrt();
        let mut rng = stream(seed, DOMAIN_BROWNIAN, path);
        let increments = (0..modes)
            .map(|_| {
                (0..fine_steps)
                    .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect();
        Ok(Self { horizon, partitions, fine_steps, increments, seed, path })
    }

    /// Panel with prescribed fine increments (for deterministic checks).
    pub fn from_increments(horizon: f64, partitions: usize, increments: Vec<Vec<f64>>) -> Result<Self, StochError> {
        let fine_steps = increments.first().map_or(0, Vec::len);
        if increments.is_empty()
            || partitions == 0
            || fine_steps % partitions != 0
            || increments.iter().any(|v| v.len() != fine_steps)
        {
            return Err(StochError::InvalidParameter(
                "increments must be non-empty, equally long and divisible into the cells".into(),
            ));
        }
        Ok(Self { horizon, partitions, fine_steps, increments, seed: 0, path: 0 })
    }

    /// Same path viewed with `partitions` cells.
    pub fn with_partitions(&self, partitions: usize) -> Result<Self, StochError> {
        if partitions == 0 || self.fine_steps % partitions != 0 {
            return Err(StochError::Misaligned { steps: partitions, fine: self.fine_steps });
        }
        Ok(Self { partitions, ..self.clone() })
    }

    pub fn modes(&self) -> usize {
        self.increments.len()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn partitions(&self) -> usize {
        self.partitions
    }

    pub fn fine_steps(&self) -> usize {
        self.fine_steps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> u64 {
        self.path
    }

    /// Cell width `horizon / partitions`.
    pub fn cell_width(&self) -> f64 {
        self.horizon / self.partitions as f64
    }

    pub fn fine_increments(&self, mode: usize) -> &[f64] {
        &self.increments[mode]
    }

    /// Increments of `mode` over `steps` equal intervals.
    pub fn increments(&self, mode: usize, steps: usize) -> Result<Vec<f64>, StochError> {
        if steps == 0 || self.fine_steps % steps != 0 {
            return Err(StochError::Misaligned { steps, fine: self.fine_steps });
        }
        let q = self.fine_steps / steps;
        Ok(self.increments[mode].chunks(q).map(|c| c.iter().sum()).collect())
    }

    /// Increments over the interpolation cells.
    pub fn cell_increments(&self, mode: usize) -> Vec<f64> {
        self.increments(mode, self.partitions).expect("cells divide the fine grid")
    }

    /// Slopes `increment / cell width` of the piecewise-linear interpolation.
    pub fn cell_slopes(&self, mode: usize) -> Vec<f64> {
        let w = self.cell_width();
        self.cell_increments(mode).into_iter().map(|d| d / w).collect()
    }

    /// Derivative of the interpolated path at `t` (right-continuous; the
    /// last cell at `t = horizon`).
    pub fn derivative(&self, mode: usize, t: f64) -> f64 {
        let k = ((t / self.cell_width()).floor() as usize).min(self.partitions - 1);
        self.cell_slopes(mode)[k]
    }

    /// `max_k |slope_k|`, the supremum of the interpolated derivative.
    pub fn max_slope(&self, mode: usize) -> f64 {
        self.cell_slopes(mode).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `sum_k |slope_k|`.
    pub fn slope_sum(&self, mode: usize) -> f64 {
        self.cell_slopes(mode).iter().map(|v| v.abs()).sum()
    }

    /// Path values at the fine grid points, starting with `B(0) = 0`.
    pub fn path_values(&self, mode: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.fine_steps + 1);
        let mut b = 0.0;
        out.push(b);
        for d in &self.increments[mode] {
            b += d;
            out.push(b);
        }
        out
    }

    /// Fine grid times.
    pub fn fine_times(&self) -> Vec<f64> {
        crate::evolution::uniform_times(0.0, self.horizon, self.fine_steps)
    }
}
