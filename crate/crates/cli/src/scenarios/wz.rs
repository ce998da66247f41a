use distbound::bounds::{estimate_stochastic_bounds, varphi, StochasticBoundConfig};
use distbound::models::build_gbm;
use distbound::stochastic::{pathwise_wz_bound_check, solve_wong_zakai, BrownianPanel, MIN_SUBSTEPS};
use distbound::Curve;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Outcome, Table};
use crate::config::{ensure, parse_params};
use crate::{row, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WzParams {
    pub mu: f64,
    pub sigma: f64,
    pub x: f64,
    pub horizon: f64,
    /// Cell counts for the convergence study.
    pub cells: Vec<usize>,
    /// Fine Brownian steps per cell of the finest interpolation.
    pub fine_per_cell: usize,
    /// Solver steps per cell in the pathwise check.
    pub substeps: usize,
    pub convergence_paths: usize,
    pub pathwise_cells: Vec<usize>,
    pub pathwise_paths: usize,
    pub pathwise_tolerance: f64,
    pub bound_partitions: Vec<usize>,
    pub bound_samples: usize,
    pub bound_times: Vec<f64>,
}

impl Default for WzParams {
    fn default() -> Self {
        Self {
            mu: 0.05,
            sigma: 0.4,
            x: 1.0,
            horizon: 1.0,
            cells: vec![8, 16, 32, 64],
            fine_per_cell: 16,
            substeps: 8,
            convergence_paths: 64,
            pathwise_cells: vec![8, 32],
            pathwise_paths: 256,
            pathwise_tolerance: 1e-6,
            bound_partitions: vec![8, 32],
            bound_samples: 10_000,
            bound_times: vec![0.0, 0.25, 0.5, 0.75, 1.0],
        }
    }
}

pub(crate) fn run(params: &Value, seed: u64) -> Result<Outcome, CliError> {
    let p: WzParams = parse_params(params)?;
    ensure(p.x > 0.0, "x", "must lie outside (-inf, 0]")?;
    ensure(!p.cells.is_empty() && p.cells.iter().all(|m| *m > 0), "cells", "must be non-empty and positive")?;
    ensure(p.fine_per_cell >= MIN_SUBSTEPS, "fine_per_cell", format!("must be at least {MIN_SUBSTEPS}"))?;
    let finest = *p.cells.iter().max().expect("non-empty");
    ensure(p.cells.iter().all(|m| finest % m == 0), "cells", "must divide the largest entry")?;
    ensure(p.bound_times.first() == Some(&0.0), "bound_times", "must start at 0")?;
    let gbm = build_gbm(p.mu, p.sigma)?;
    let lipschitz = gbm.lipschitz();
    let x = Curve::scalar(p.x);
    let mut out = Outcome::new(&p)?;

    // Wong-Zakai against the Ito solution on the same path.
    let fine = finest * p.fine_per_cell;
    let gaps: Vec<Vec<f64>> = (0..p.convergence_paths as u64)
        .into_par_iter()
        .map(|path| -> Result<Vec<f64>, CliError> {
            let panel = BrownianPanel::sample(1, p.horizon, finest, p.fine_per_cell, seed, path)?;
            let w = panel.path_values(0);
            let times = panel.fine_times();
            p.cells
                .iter()
                .map(|&m| -> Result<f64, CliError> {
                    // One solver step per fine Brownian step, so the comparison sees the
                    // interpolation error inside the cells as well.
                    let view = panel.with_partitions(m)?;
                    let tr = solve_wong_zakai(&gbm.model, &x, &view, fine / m)?;
                    Ok((0..=fine).fold(0.0_f64, |g, k| {
                        let exact = gbm.exact(p.x, times[k], w[k]);
                        g.max((tr.states[k].value() - exact).abs())
                    }))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let mut conv = Table::new("convergence", &["cells", "mean_sup_gap"]);
    let mut means = Vec::new();
    for (i, &m) in p.cells.iter().enumerate() {
        let mean = gaps.iter().map(|g| g[i]).sum::<f64>() / gaps.len().max(1) as f64;
        means.push(mean);
        conv.push(row![m, mean]);
    }
    out.tables.push(conv);
    let mut order: Vec<(usize, f64)> = p.cells.iter().copied().zip(means.iter().copied()).collect();
    order.sort_by_key(|(m, _)| *m);
    out.soft(
        "convergence-monotone",
        order.windows(2).all(|w| w[1].1 < w[0].1),
        format!("mean sup gap by cell count: {order:?}"),
    );

    // Pathwise bound with Z = L * max slope.
    let mut pathwise = Table::new("pathwise", &["cells", "paths", "violations", "max_violation"]);
    let mut path_ok = true;
    for &m in &p.pathwise_cells {
        let results: Vec<(usize, f64)> = (0..p.pathwise_paths as u64)
            .into_par_iter()
            .map(|path| -> Result<(usize, f64), CliError> {
                let panel = BrownianPanel::sample(1, p.horizon, m, 1, seed, path)?;
                let tr = solve_wong_zakai(&gbm.model, &x, &panel, p.substeps)?;
                let r = pathwise_wz_bound_check(&tr, &gbm.set, &panel, lipschitz, lipschitz, 0.0)?;
                Ok((r.violations_above(p.pathwise_tolerance), r.max_violation))
            })
            .collect::<Result<_, _>>()?;
        let violations: usize = results.iter().map(|r| r.0).sum();
        let worst = results.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
        path_ok &= violations == 0;
        pathwise.push(row![m, p.pathwise_paths, violations, worst]);
    }
    out.tables.push(pathwise);
    out.hard("wz-pathwise-bound", path_ok, format!("no violation above {:e}", p.pathwise_tolerance));

    // Stochastic bound functions.
    let mut violations = 0;
    let (mut start_ok, mut closed_gap) = (true, 0.0_f64);
    for &m in &p.bound_partitions {
        let config = StochasticBoundConfig {
            modes: 1,
            partitions: m,
            gamma: lipschitz,
            lipschitz,
            horizon: p.horizon,
            n_samples: p.bound_samples,
            seed,
        };
        let table = estimate_stochastic_bounds(&config, &p.bound_times)?;
        violations += table.slope_sum_violations;
        start_ok &= (table.phi[0] - 1.0).abs() <= 3.0 * table.phi_se[0] + 1e-15
            && table.psi[0].abs() <= 3.0 * table.psi_se[0] + 1e-15;
        let mut t = Table::new(&format!("bound_functions_m{m}"), &["t", "phi", "phi_se", "psi", "psi_se"]);
        for i in 0..table.times.len() {
            t.push(row![table.times[i], table.phi[i], table.phi_se[i], table.psi[i], table.psi_se[i]]);
        }
        out.tables.push(t);

        let flat = StochasticBoundConfig { lipschitz: 0.0, gamma: p.mu, ..config };
        let table = estimate_stochastic_bounds(&flat, &p.bound_times)?;
        for (i, &t) in table.times.iter().enumerate() {
            closed_gap = closed_gap
                .max((table.phi[i] - (p.mu * t).exp()).abs())
                .max((table.psi[i] - varphi(p.mu, t)).abs());
        }
    }
    out.hard("bound-functions-at-zero", start_ok, "phi(0) = 1 and psi(0) = 0 within 3 SE".into());
    out.hard("bound-functions-closed-form", closed_gap <= 1e-12, format!("max gap with L = 0: {closed_gap:e}"));
    out.hard("slope-sum-inequality", violations == 0, format!("{violations} samples with max slope above the slope sum"));
    out.note("lipschitz", lipschitz)?;
    Ok(out)
}
