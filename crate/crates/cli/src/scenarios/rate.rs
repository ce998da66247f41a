use std::sync::Arc;

use distbound::models::{build_rate_model, projected_state_process, RateModel, RateModelParams};
use distbound::nagumo::{estimate_snc, estimate_snc_generator_form};
use distbound::numeric::CompensatedSum;
use distbound::spaces::{eigenfunction, eigenvalue, DirichletRateOperator};
use distbound::stochastic::{pathwise_wz_bound_check, solve_wong_zakai, BrownianPanel};
use distbound::{Curve, Grid, LinearOperator};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Outcome, Table};
use crate::config::{ensure, parse_params};
use crate::{row, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateParams {
    pub model: RateModelParams,
    pub horizon: f64,
    /// Coordinates of the start point in the subspace basis.
    pub start: Vec<f64>,
    /// Multiple of `alpha` added to the start for the pathwise check.
    pub start_offset: f64,
    /// Modes checked in the eigenrelation.
    pub eigen_modes: usize,
    pub euler_steps: Vec<usize>,
    pub euler_paths: usize,
    pub fine_steps: usize,
    pub wz_paths: usize,
    pub wz_cells: Vec<usize>,
    pub wz_substeps: usize,
    pub wz_tolerance: f64,
    pub mc_paths: usize,
    pub mc_steps: usize,
    pub mc_fine_per_step: usize,
    /// Target for `E[||X - Y||^2]^{1/2}`.
    pub delta: f64,
    /// Graph-norm radius of the perturbed starts.
    pub radius: f64,
    pub t0: f64,
    pub levels: usize,
}

impl Default for RateParams {
    fn default() -> Self {
        Self {
            model: RateModelParams::default(),
            horizon: 1.0,
            start: vec![0.5, -0.2],
            start_offset: 0.1,
            eigen_modes: 8,
            euler_steps: vec![64, 128, 256],
            euler_paths: 8,
            fine_steps: 4096,
            wz_paths: 256,
            wz_cells: vec![8, 32],
            wz_substeps: 4,
            wz_tolerance: 1e-6,
            mc_paths: 1000,
            mc_steps: 50,
            mc_fine_per_step: 4,
            delta: 0.01,
            radius: 0.05,
            t0: 0.01,
            levels: 12,
        }
    }
}

/// `max_n max_i |A u_n - lambda_n u_n| / max_i |lambda_n u_n|` on `m` interior points.
fn eigen_error(kappa: f64, m: usize, modes: usize) -> Result<f64, CliError> {
    let grid = Arc::new(Grid::unit_interior(m)?);
    let op = DirichletRateOperator::new(kappa)?;
    let mut worst = 0.0_f64;
    for n in 1..=modes {
        let u = Curve::from_fn(&grid, None, |x| eigenfunction(kappa, n, x));
        let au = op.apply(&u)?;
        let lam = eigenvalue(kappa, n);
        let scale = u.values().iter().fold(0.0_f64, |s, v| s.max((lam * v).abs()));
        let err = au.values().iter().zip(u.values()).fold(0.0_f64, |s, (a, v)| s.max((a - lam * v).abs()));
        worst = worst.max(err / scale);
    }
    Ok(worst)
}

/// Root mean square of `||X - Y||` at the step times over `paths` panels.
fn gap_rms(model: &RateModel, z0: &[f64], p: &RateParams, seed: u64) -> Result<Vec<f64>, CliError> {
    let gaps: Vec<Vec<f64>> = (0..p.mc_paths as u64)
        .into_par_iter()
        .map(|path| -> Result<Vec<f64>, CliError> {
            let panel = BrownianPanel::sample(1, p.horizon, p.mc_steps, p.mc_fine_per_step, seed, path)?;
            Ok(model.projection_gap(z0, &panel, p.mc_steps)?)
        })
        .collect::<Result<_, _>>()?;
    let n = gaps.len() as f64;
    Ok((0..=p.mc_steps)
        .map(|k| (gaps.iter().map(|g| g[k] * g[k]).collect::<CompensatedSum>().total() / n).sqrt())
        .collect())
}

pub(crate) fn run(params: &Value, seed: u64) -> Result<Outcome, CliError> {
    let p: RateParams = parse_params(params)?;
    if let Err(e) = p.model.validate() {
        return Err(CliError::invalid("params.model", e.to_string()));
    }
    ensure(p.start.len() == p.model.index_set.len(), "start", "needs one coordinate per index-set mode")?;
    ensure(p.euler_steps.windows(2).all(|w| w[1] == 2 * w[0]), "euler_steps", "must double from entry to entry")?;
    ensure(
        p.euler_steps.iter().all(|s| *s > 0 && p.fine_steps % s == 0),
        "euler_steps",
        "must divide fine_steps",
    )?;
    ensure(p.wz_cells.iter().all(|m| *m > 0), "wz_cells", "must be positive")?;
    ensure(p.mc_paths > 0 && p.mc_steps > 0 && p.mc_fine_per_step > 0, "mc_paths", "Monte Carlo sizes must be positive")?;
    ensure(p.delta > 0.0 && p.radius >= 0.0, "delta", "needs delta > 0 and radius >= 0")?;
    let model = build_rate_model(p.model.clone())?;
    let mut out = Outcome::new(&p)?;
    out.note("epsilon_graph", model.epsilon_graph)?;
    out.note("epsilon_l2", model.epsilon_l2)?;
    out.note("eigenvalues", &model.eigenvalues)?;
    out.note("b", &model.b)?;
    out.note("c", &model.c)?;

    // Second-order accuracy of the discrete generator.
    let m = p.model.grid_points;
    let coarse = eigen_error(p.model.kappa, m, p.eigen_modes)?;
    let fine = eigen_error(p.model.kappa, 2 * m + 1, p.eigen_modes)?;
    let ratio = coarse / fine;
    let mut eig = Table::new("eigenrelation", &["grid_points", "max_relative_error"]);
    eig.push(row![m, coarse]);
    eig.push(row![2 * m + 1, fine]);
    out.tables.push(eig);
    out.hard("eigenrelation-order", (3.5..=4.5).contains(&ratio), format!("error ratio on halving dx = {ratio:.4}"));

    // Explicit state formula against Euler-Maruyama on common paths.
    let mut euler = Table::new("state_process", &["euler_steps", "mean_sup_gap"]);
    let mut means = Vec::new();
    for &steps in &p.euler_steps {
        let mut total = 0.0;
        for path in 0..p.euler_paths as u64 {
            let panel = BrownianPanel::sample(1, p.horizon, p.fine_steps, 1, seed, path)?;
            total += projected_state_process(&model, &p.start, &panel, steps)?.sup_gap;
        }
        let mean = total / p.euler_paths.max(1) as f64;
        means.push(mean);
        euler.push(row![steps, mean]);
    }
    out.tables.push(euler);
    let ratios: Vec<f64> = means.windows(2).map(|w| w[0] / w[1]).collect();
    out.hard(
        "euler-gap-halves",
        ratios.iter().all(|r| (1.6..=2.5).contains(r)),
        format!("gap ratios on halving the step: {ratios:?}"),
    );

    // Pathwise Wong-Zakai bound.
    let mut x = model.embed(&p.start);
    x.axpy(p.start_offset, &model.alpha);
    let mut wz = Table::new("wz_pathwise", &["cells", "paths", "violations", "max_violation"]);
    let mut wz_ok = true;
    for &cells in &p.wz_cells {
        let reports: Vec<(usize, f64)> = (0..p.wz_paths as u64)
            .into_par_iter()
            .map(|path| -> Result<(usize, f64), CliError> {
                let panel = BrownianPanel::sample(1, p.horizon, cells, 1, seed, path)?;
                let tr = solve_wong_zakai(&model.model, &x, &panel, p.wz_substeps)?;
                let r = pathwise_wz_bound_check(&tr, &model.set, &panel, model.model.base.beta, 0.0, model.epsilon_l2)?;
                Ok((r.violations_above(p.wz_tolerance), r.max_violation))
            })
            .collect::<Result<_, _>>()?;
        let violations: usize = reports.iter().map(|r| r.0).sum();
        let worst = reports.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
        wz_ok &= violations == 0;
        wz.push(row![cells, p.wz_paths, violations, worst]);
    }
    out.tables.push(wz);
    out.hard("wz-pathwise-bound", wz_ok, format!("no violation above {:e} for cells {:?}", p.wz_tolerance, p.wz_cells));

    // Mean-square gap between the full and the projected dynamics.
    let rms0 = gap_rms(&model, &p.start, &p, seed)?;
    let dt = p.horizon / p.mc_steps as f64;
    let reach = rms0.iter().take_while(|g| **g <= 0.5 * p.delta).count();
    let horizon_s = reach.saturating_sub(1) as f64 * dt;
    let mut starts = vec![p.start.clone()];
    for i in 0..p.start.len() {
        let scale = model.graph_space.norm(&model.basis[i])?;
        for sign in [1.0, -1.0] {
            let mut z = p.start.clone();
            z[i] += sign * p.radius / scale;
            starts.push(z);
        }
    }
    let mut header = vec!["t".to_string()];
    header.extend((0..starts.len()).map(|k| format!("rms_start_{k}")));
    let mut gap_table = Table { name: "projection_gap".into(), header, rows: Vec::new() };
    let mut all = vec![rms0];
    for z in &starts[1..] {
        all.push(gap_rms(&model, z, &p, seed)?);
    }
    let mut within = true;
    for k in 0..=p.mc_steps {
        let t = k as f64 * dt;
        let mut r = vec![t.into()];
        for g in &all {
            r.push(g[k].into());
            if t <= horizon_s + 1e-12 {
                within &= g[k] <= p.delta;
            }
        }
        gap_table.rows.push(r);
    }
    out.tables.push(gap_table);
    out.note("delta", p.delta)?;
    out.note("reported_horizon", horizon_s)?;
    out.note("radius", p.radius)?;
    out.hard(
        "projection-gap",
        reach > 0 && within,
        format!("rms ||X - Y|| <= {} up to t = {horizon_s} for {} starts within {} in graph norm", p.delta, starts.len(), p.radius),
    );

    // Tangency quotients in both forms.
    let base_point = model.embed(&p.start);
    let semigroup = estimate_snc(&model.set, &model.model.base, &base_point, p.t0, p.levels)?;
    let generator = estimate_snc_generator_form(&model.set, &model.model.base, &base_point, p.t0, p.levels)?;
    let gap = (semigroup.estimate - generator.estimate.estimate).abs();
    out.note("tangency_semigroup", semigroup.estimate)?;
    out.note("tangency_generator", generator.estimate.estimate)?;
    out.note("generator_defect", generator.defect)?;
    out.hard(
        "tangency-forms",
        gap <= generator.defect + 1e-9,
        format!("|semigroup - generator| = {gap:e}, defect = {:e}", generator.defect),
    );
    Ok(out)
}
