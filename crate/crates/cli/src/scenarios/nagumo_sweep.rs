use distbound::models::{build_gbm, build_halfline_ode, build_rate_model, RateModelParams};
use distbound::nagumo::{estimate_snc, ssnc_sweep, SweepReport};
use distbound::Curve;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Outcome, Table};
use crate::config::{ensure, parse_params};
use crate::{row, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalflineCase {
    pub beta: f64,
    pub a: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NagumoSweepParams {
    pub t0: f64,
    pub levels: usize,
    pub halfline: Vec<HalflineCase>,
    pub gbm_mu: f64,
    pub gbm_sigma: f64,
    /// Base points in `(-inf, 0]`.
    pub gbm_samples: Vec<f64>,
    pub rate_model: RateModelParams,
    /// Subspace coordinates of the rate-model base points.
    pub rate_samples: Vec<Vec<f64>>,
}

impl Default for NagumoSweepParams {
    fn default() -> Self {
        Self {
            t0: 0.01,
            levels: 16,
            halfline: vec![
                HalflineCase { beta: -0.5, a: 1.0, x: 1.0 },
                HalflineCase { beta: 0.3, a: 1.0, x: 1.0 },
                HalflineCase { beta: -0.5, a: 1.0, x: 2.0 },
                HalflineCase { beta: -2.0, a: 0.5, x: 0.5 },
            ],
            gbm_mu: 0.05,
            gbm_sigma: 0.2,
            gbm_samples: vec![-2.0, -1.0, -0.5, 0.0],
            rate_model: RateModelParams { grid_points: 127, ..Default::default() },
            rate_samples: vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![-0.3, 2.0]],
        }
    }
}

fn push_sweep(table: &mut Table, model: &str, report: &SweepReport) {
    for e in &report.entries {
        let direction = e.direction.iter().map(|u| format!("{u}")).collect::<Vec<_>>().join(" ");
        table.push(row![model, e.sample, direction, e.estimate]);
    }
}

pub(crate) fn run(params: &Value, _seed: u64) -> Result<Outcome, CliError> {
    let p: NagumoSweepParams = parse_params(params)?;
    ensure(p.t0 > 0.0, "t0", "must be positive")?;
    ensure(p.gbm_samples.iter().all(|x| *x <= 0.0), "gbm_samples", "must lie in (-inf, 0]")?;
    if let Err(e) = p.rate_model.validate() {
        return Err(CliError::invalid("params.rate_model", e.to_string()));
    }
    let dim = p.rate_model.index_set.len();
    ensure(p.rate_samples.iter().all(|z| z.len() == dim), "rate_samples", "need one coordinate per index-set mode")?;
    let mut out = Outcome::new(&p)?;

    let mut halfline = Table::new("halfline", &["beta", "a", "x", "estimate", "expected"]);
    let mut worst = 0.0_f64;
    for (i, c) in p.halfline.iter().enumerate() {
        ensure(c.x >= c.a, &format!("halfline[{i}].x"), "base point must lie in [a, inf)")?;
        let ode = build_halfline_ode(c.beta, c.a)?;
        let est = estimate_snc(&ode.set, &ode.drift_form(), &Curve::scalar(c.x), p.t0, p.levels)?;
        let expected = if c.x == c.a { ode.epsilon } else { 0.0 };
        worst = worst.max((est.estimate - expected).abs());
        halfline.push(row![c.beta, c.a, c.x, est.estimate, expected]);
    }
    out.tables.push(halfline);
    out.hard("halfline-estimates", worst < 1e-8, format!("max |estimate - expected| = {worst:e}"));

    let mut sweep = Table::new("sweep", &["model", "sample", "direction", "estimate"]);
    let gbm = build_gbm(p.gbm_mu, p.gbm_sigma)?;
    let samples: Vec<Curve> = p.gbm_samples.iter().map(|x| Curve::scalar(*x)).collect();
    let gbm_report = ssnc_sweep(&gbm.set, &gbm.model, &samples, p.t0, p.levels)?;
    push_sweep(&mut sweep, "gbm", &gbm_report);
    out.hard(
        "gbm-sweep",
        gbm_report.max_estimate == 0.0 && gbm_report.flagged == 0,
        format!("max estimate {:e} (invariant set)", gbm_report.max_estimate),
    );

    let rate = build_rate_model(p.rate_model.clone())?;
    let samples: Vec<Curve> = p.rate_samples.iter().map(|z| rate.embed(z)).collect();
    let rate_report = ssnc_sweep(&rate.set, &rate.model, &samples, p.t0, p.levels)?;
    push_sweep(&mut sweep, "rate", &rate_report);
    out.tables.push(sweep);
    out.hard(
        "rate-sweep",
        rate_report.max_estimate <= rate.epsilon_l2 + 1e-9 && rate_report.flagged == 0,
        format!("max estimate {:e} against L2 slack {:e}", rate_report.max_estimate, rate.epsilon_l2),
    );
    out.note("heuristic", true)?;
    out.note("gbm_note", &gbm_report.note)?;
    out.note("rate_note", &rate_report.note)?;
    out.note("rate_epsilon_l2", rate.epsilon_l2)?;
    Ok(out)
}
