use distbound::bounds::varphi;
use distbound::evolution::verify_pde_bound;
use distbound::models::build_halfline_ode;
use distbound::nagumo::{estimate_snc, estimate_snc_generator_form};
use distbound::Curve;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Outcome, Table};
use crate::config::{ensure, parse_params};
use crate::{row, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HalflineParams {
    pub beta: f64,
    /// Lower end of the set `[a, inf)`.
    pub a: f64,
    pub x: f64,
    pub horizon: f64,
    pub steps: usize,
    pub t0: f64,
    pub levels: usize,
    pub closed_form_tolerance: f64,
    pub numeric_tolerance: f64,
}

impl Default for HalflineParams {
    fn default() -> Self {
        Self {
            beta: -0.5,
            a: 1.0,
            x: 1.0,
            horizon: 2.0,
            steps: 10_000,
            t0: 0.1,
            levels: 24,
            closed_form_tolerance: 1e-8,
            numeric_tolerance: 1e-5,
        }
    }
}

pub(crate) fn run(params: &Value, _seed: u64) -> Result<Outcome, CliError> {
    let p: HalflineParams = parse_params(params)?;
    ensure(p.a > 0.0, "a", "must be positive")?;
    ensure(p.horizon > 0.0, "horizon", "must be positive")?;
    ensure(p.steps > 0, "steps", "must be positive")?;
    let ode = build_halfline_ode(p.beta, p.a)?;
    let mut out = Outcome::new(&p)?;
    let x = Curve::scalar(p.x);
    let report = verify_pde_bound(&ode.model, &ode.set, &x, ode.epsilon, p.horizon, p.steps)?;

    let mut table = Table::new("bound", &["t", "closed_form", "numeric", "bound", "varphi_eps"]);
    let (mut gap_closed, mut gap_numeric, mut violation) = (0.0_f64, 0.0_f64, f64::NEG_INFINITY);
    for r in &report.rows {
        let exact = (p.a - ode.exact_flow(p.x, r.t)).max(0.0);
        let reference = varphi(p.beta, r.t) * ode.epsilon;
        gap_closed = gap_closed.max((exact - reference).abs());
        gap_numeric = gap_numeric.max((r.distance - reference).abs());
        violation = violation.max(r.distance - r.lipschitz_bound);
        table.push(row![r.t, exact, r.distance, r.lipschitz_bound, reference]);
    }
    out.tables.push(table);
    out.note("epsilon", ode.epsilon)?;
    out.note("max_gap_closed_form", gap_closed)?;
    out.note("max_gap_numeric", gap_numeric)?;

    let scale = p.a.max(p.x.abs());
    out.hard(
        "bound-holds",
        violation <= 1e-12 * scale,
        format!("max distance - bound = {violation:e}"),
    );
    if p.x == p.a {
        out.hard(
            "equality-closed-form",
            gap_closed < p.closed_form_tolerance,
            format!("max |d_K - varphi eps| = {gap_closed:e} (tolerance {:e})", p.closed_form_tolerance),
        );
        out.hard(
            "equality-numeric",
            gap_numeric < p.numeric_tolerance,
            format!("max |d_K - varphi eps| = {gap_numeric:e} at {} steps (tolerance {:e})", p.steps, p.numeric_tolerance),
        );
    }

    if p.x >= p.a {
        let drift_form = ode.drift_form();
        let semigroup = estimate_snc(&ode.set, &drift_form, &x, p.t0, p.levels)?;
        let generator = estimate_snc_generator_form(&ode.set, &drift_form, &x, p.t0, p.levels)?;
        let expected = if p.x == p.a { ode.epsilon } else { 0.0 };
        let mut quotients = Table::new("tangency", &["t", "semigroup_form", "generator_form"]);
        for (k, t) in semigroup.t_sequence.iter().enumerate() {
            quotients.push(row![*t, semigroup.quotients[k], generator.estimate.quotients[k]]);
        }
        out.tables.push(quotients);
        let err = (semigroup.estimate - expected).abs().max((generator.estimate.estimate - expected).abs());
        out.note("tangency_estimate", semigroup.estimate)?;
        out.hard(
            "tangency-estimate",
            err < 1e-8,
            format!("estimate {:e}, expected {expected:e}", semigroup.estimate),
        );
    }
    Ok(out)
}
