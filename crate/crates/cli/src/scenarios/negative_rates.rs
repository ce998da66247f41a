use std::sync::Arc;

use distbound::models::{negative_rate_diagnostics, SvenssonParams};
use distbound::rng::{stream, DOMAIN_SAMPLING};
use distbound::sets::NonnegativeCone;
use distbound::spaces::FilipovicNorm;
use distbound::{Curve, Grid, Space};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Outcome, Table};
use crate::config::{ensure, parse_params};
use crate::{row, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NegativeRatesParams {
    pub gamma: f64,
    pub grid_points: usize,
    pub x_max: f64,
    pub stretch: f64,
    /// Levels of the constant curves `-eta`.
    pub etas: Vec<f64>,
    pub eta_tolerance: f64,
    pub random_curves: usize,
    /// Optional two-column CSV (`x, value`) of an observed forward curve.
    pub curve_csv: Option<String>,
}

impl Default for NegativeRatesParams {
    fn default() -> Self {
        Self {
            gamma: 0.1,
            grid_points: 2048,
            x_max: 30.0,
            stretch: 6.0,
            etas: vec![0.01, 0.1],
            eta_tolerance: 1e-6,
            random_curves: 1000,
            curve_csv: None,
        }
    }
}

/// Svensson parameters drawn for sample `index`; levels around zero so that
/// both signs occur.
fn random_svensson(seed: u64, index: u64, gamma: f64) -> SvenssonParams {
    let mut rng = stream(seed, DOMAIN_SAMPLING, index);
    let low = gamma / 2.0 + 0.05;
    SvenssonParams {
        z1: rng.random_range(-0.02..0.05),
        z2: rng.random_range(-0.05..0.05),
        z3: rng.random_range(-0.05..0.05),
        z4: rng.random_range(-0.05..0.05),
        z5: rng.random_range(-0.05..0.05),
        z6: rng.random_range(low..2.0),
        z7: rng.random_range(low..2.0),
    }
}

pub(crate) fn run(params: &Value, seed: u64) -> Result<Outcome, CliError> {
    let p: NegativeRatesParams = parse_params(params)?;
    ensure(p.gamma > 0.0, "gamma", "must be positive")?;
    ensure(p.etas.iter().all(|e| *e > 0.0), "etas", "must be positive")?;
    let grid = Arc::new(Grid::log_spaced(p.x_max, p.grid_points, p.stretch)?);
    let space = Space::filipovic(p.gamma, grid, FilipovicNorm::Equivalent)?;
    let mut out = Outcome::new(&p)?;

    let cone = NonnegativeCone::new(space.clone())?;
    let mut constants = Table::new("constant_curves", &["eta", "distance"]);
    let mut eta_gap = 0.0_f64;
    for &eta in &p.etas {
        let h = space.sample(Some(-eta), |_| -eta);
        let d = cone.project(&h)?.distance;
        eta_gap = eta_gap.max((d - eta).abs());
        constants.push(row![eta, d]);
    }
    out.tables.push(constants);
    out.hard("constant-curves", eta_gap < p.eta_tolerance, format!("max |d_K(-eta) - eta| = {eta_gap:e}"));

    let reports = (0..p.random_curves as u64)
        .into_par_iter()
        .map(|i| {
            let curve = random_svensson(seed, i, p.gamma).curve(&space);
            negative_rate_diagnostics(&space, &curve)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut random = Table::new(
        "random_curves",
        &["index", "sign_change", "negative_part_norm", "cone_distance", "iterations", "converged"],
    );
    for (i, r) in reports.iter().enumerate() {
        random.push(row![
            i,
            r.sign_change.unwrap_or(f64::NAN),
            r.negative_part_norm,
            r.cone_distance,
            r.cone_iterations,
            if r.cone_converged { 1.0 } else { 0.0 },
        ]);
    }
    out.tables.push(random);
    let exceptions = reports.iter().filter(|r| !r.within_bound).count();
    let unconverged = reports.iter().filter(|r| !r.cone_converged).count();
    out.hard(
        "negative-part-bound",
        exceptions == 0,
        format!("{exceptions} of {} curves with cone distance above ||h^-||", reports.len()),
    );
    out.note("unconverged", unconverged)?;
    out.soft("cone-converged", unconverged == 0, format!("{unconverged} projections hit the iteration cap"));

    if let Some(path) = &p.curve_csv {
        let file = std::fs::File::open(path).map_err(|e| CliError::io(std::path::Path::new(path), e))?;
        let curve = Curve::read_csv(file)?;
        let observed = Space::filipovic(p.gamma, curve.grid().clone(), FilipovicNorm::Equivalent)?;
        let r = negative_rate_diagnostics(&observed, &curve)?;
        out.hard("observed-curve-bound", r.within_bound, format!("cone distance {:e}, ||h^-|| {:e}", r.cone_distance, r.negative_part_norm));
        out.note("observed_curve", &r)?;
    }
    Ok(out)
}
