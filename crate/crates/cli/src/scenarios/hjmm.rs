use std::sync::Arc;

use distbound::models::build_hjmm;
use distbound::stochastic::{path_distances, McConfig, McEstimate};
use distbound::Grid;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Outcome, Table};
use crate::config::{ensure, parse_params};
use crate::{row, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HjmmParams {
    pub z6: f64,
    pub z7: f64,
    /// Weight exponent of the forward-curve norm (equivalent form).
    pub gamma: f64,
    pub grid_points: usize,
    pub x_max: f64,
    pub stretch: f64,
    pub horizon: f64,
    pub steps: usize,
    pub n_paths: usize,
    /// Svensson coefficients `z1..z5` of the start curve.
    pub start: [f64; 5],
    /// Grid-limited floor for distances that vanish exactly.
    pub tolerance: f64,
    /// Offsets `z7 - 2 z6` for the slack table.
    pub sweep_offsets: Vec<f64>,
}

impl Default for HjmmParams {
    fn default() -> Self {
        Self {
            z6: 1.0,
            z7: 2.0,
            gamma: 0.1,
            grid_points: 2048,
            x_max: 30.0,
            stretch: 6.0,
            horizon: 1.0,
            steps: 100,
            n_paths: 64,
            start: [0.03, -0.02, 0.01, 0.015, -0.005],
            tolerance: 1e-4,
            sweep_offsets: vec![2.0, 1.0, 0.5, 0.25, 0.1, 0.05, 0.01, 0.0],
        }
    }
}

pub(crate) fn run(params: &Value, seed: u64) -> Result<Outcome, CliError> {
    let p: HjmmParams = parse_params(params)?;
    ensure(p.z6 > p.gamma / 2.0, "z6", "must exceed gamma / 2")?;
    ensure(p.z7 > p.gamma / 2.0, "z7", "must exceed gamma / 2")?;
    ensure(p.n_paths > 0, "n_paths", "must be positive")?;
    ensure(p.steps > 0, "steps", "must be positive")?;
    ensure(p.sweep_offsets.iter().all(|s| *s >= 0.0), "sweep_offsets", "must be nonnegative")?;
    let grid = Arc::new(Grid::log_spaced(p.x_max, p.grid_points, p.stretch)?);
    let mut out = Outcome::new(&p)?;

    let mut sweep = Table::new("epsilon", &["z7", "closed_form", "quadrature", "alpha_distance"]);
    let mut offsets = p.sweep_offsets.clone();
    offsets.sort_by(|a, b| b.total_cmp(a));
    let (mut rel_gap, mut zero_gap, mut monotone, mut dominated) = (0.0_f64, 0.0_f64, true, true);
    let mut previous: Option<(f64, f64)> = None;
    for s in offsets {
        let m = build_hjmm(p.z6, 2.0 * p.z6 + s, p.gamma, grid.clone())?;
        let closed = m.epsilon_closed_form;
        let quad = m.epsilon_quadrature;
        let d_alpha = m.set.distance(&m.alpha)?;
        if closed > 0.0 {
            rel_gap = rel_gap.max((closed - quad).abs() / closed);
        } else {
            zero_gap = zero_gap.max(closed.abs()).max(quad.abs());
        }
        if let Some((c, q)) = previous {
            monotone &= closed <= c && quad <= q;
        }
        dominated &= d_alpha <= closed * (1.0 + 1e-9) + 1e-12;
        previous = Some((closed, quad));
        sweep.push(row![m.z7, closed, quad, d_alpha]);
    }
    out.tables.push(sweep);
    out.hard("epsilon-agreement", rel_gap < 1e-6, format!("max relative gap closed form vs grid = {rel_gap:e}"));
    out.hard("epsilon-zero", zero_gap < 1e-10, format!("|epsilon| at z7 = 2 z6 is {zero_gap:e}"));
    out.hard("epsilon-monotone", monotone, "epsilon decreases as z7 approaches 2 z6 from above".into());
    out.hard("alpha-distance", dominated, "d_K(alpha) <= epsilon along the sweep".into());

    let hjmm = build_hjmm(p.z6, p.z7, p.gamma, grid)?;
    let x = hjmm.svensson(p.start);
    let d0 = hjmm.set.distance(&x)?;
    let dt = p.horizon / p.steps as f64;
    let config = McConfig {
        horizon: p.horizon,
        steps: p.steps,
        times: (1..=p.steps).map(|k| k as f64 * dt).collect(),
        n_paths: p.n_paths,
        seed,
        fine_per_step: 1,
    };
    let per_path = path_distances(&hjmm.model, &hjmm.set, &x, &config)?;
    let est = McEstimate::from_paths(&config.times, &per_path, seed)?;
    let epsilon = hjmm.epsilon_closed_form;
    let mut paths = Table::new("paths", &["t", "rms", "rms_se", "max", "bound"]);
    let mut bound_ok = true;
    for (i, &t) in est.times.iter().enumerate() {
        // Zero growth exponent and Lipschitz constant: the bound is d0 + t eps.
        let bound = p.tolerance + d0 + t * epsilon;
        bound_ok &= est.rms[i] <= bound + 3.0 * est.rms_se[i];
        paths.push(row![t, est.rms[i], est.rms_se[i], est.max[i], bound]);
    }
    out.tables.push(paths);
    let worst = est.max.iter().copied().fold(0.0, f64::max);
    out.note("epsilon", epsilon)?;
    out.note("epsilon_quadrature", hjmm.epsilon_quadrature)?;
    out.note("initial_distance", d0)?;
    out.note("max_distance", worst)?;
    out.note("failures", est.failures)?;
    out.hard("mean-square-bound", bound_ok, format!("rms distance <= tolerance + d_K(x) + t eps + 3 SE over {} paths", p.n_paths));
    if epsilon == 0.0 {
        out.hard(
            "invariance",
            worst <= p.tolerance && est.failures == 0,
            format!("max distance over paths and times = {worst:e} (tolerance {:e})", p.tolerance),
        );
    }
    Ok(out)
}
