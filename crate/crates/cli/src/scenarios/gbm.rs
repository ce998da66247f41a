use distbound::bounds::{StochasticBoundConfig, StochasticBoundTable};
use distbound::models::build_gbm;
use distbound::stochastic::{mc_distance, path_distances, verify_spde_bound, McConfig, Moment};
use distbound::Curve;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Outcome, Table};
use crate::config::{ensure, parse_params};
use crate::{row, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbmParams {
    pub mu: f64,
    pub sigma: f64,
    /// Start outside `(-inf, 0]`.
    pub x: f64,
    /// Start inside the set for the invariance check.
    pub invariant_start: f64,
    pub horizon: f64,
    pub steps: usize,
    pub times: Vec<f64>,
    pub n_paths: usize,
    /// Target accuracy for the neighbourhood check.
    pub delta: f64,
}

impl Default for GbmParams {
    fn default() -> Self {
        Self {
            mu: 0.05,
            sigma: 0.2,
            x: 1.0,
            invariant_start: -1.0,
            horizon: 1.0,
            steps: 100,
            times: vec![0.25, 0.5, 1.0],
            n_paths: 100_000,
            delta: 0.1,
        }
    }
}

pub(crate) fn run(params: &Value, seed: u64) -> Result<Outcome, CliError> {
    let p: GbmParams = parse_params(params)?;
    ensure(p.mu.is_finite(), "mu", "must be finite")?;
    ensure(p.sigma > 0.0 && p.sigma.is_finite(), "sigma", "must be positive")?;
    ensure(p.invariant_start <= 0.0, "invariant_start", "must lie in (-inf, 0]")?;
    ensure(p.delta > 0.0, "delta", "must be positive")?;
    ensure(!p.times.is_empty(), "times", "must not be empty")?;
    let gbm = build_gbm(p.mu, p.sigma)?;
    let mut out = Outcome::new(&p)?;
    let config = McConfig {
        horizon: p.horizon,
        steps: p.steps,
        times: p.times.clone(),
        n_paths: p.n_paths,
        seed,
        fine_per_step: 1,
    };

    let est = mc_distance(&gbm.model, &gbm.set, &Curve::scalar(p.x), &config)?;
    let mut table = Table::new("expected_distance", &["t", "mean", "mean_se", "exact", "rms", "rms_se", "max"]);
    let mut worst_z = 0.0_f64;
    for (i, &t) in est.times.iter().enumerate() {
        let exact = gbm.expected_distance(p.x, t);
        worst_z = worst_z.max((est.mean[i] - exact).abs() / est.mean_se[i].max(f64::MIN_POSITIVE));
        table.push(row![t, est.mean[i], est.mean_se[i], exact, est.rms[i], est.rms_se[i], est.max[i]]);
    }
    out.tables.push(table);
    out.hard("expected-distance-law", worst_z <= 3.0, format!("max |mean - e^(mu t) d_K(x)| / SE = {worst_z:.3}"));

    let inside = path_distances(&gbm.model, &gbm.set, &Curve::scalar(p.invariant_start), &config)?;
    let worst_inside = inside.iter().flatten().map(|d| d.unwrap_or(f64::NAN)).fold(0.0, f64::max);
    let failed = inside.iter().flatten().any(Option::is_none);
    out.hard(
        "invariance",
        worst_inside == 0.0 && !failed,
        format!("max path distance from x = {} is {worst_inside:e}", p.invariant_start),
    );

    // Here the first-moment bound function is e^{mu t} and the slack vanishes.
    let table = StochasticBoundTable {
        times: p.times.clone(),
        phi: p.times.iter().map(|t| (p.mu * t).exp()).collect(),
        phi_se: vec![0.0; p.times.len()],
        psi: vec![0.0; p.times.len()],
        psi_se: vec![0.0; p.times.len()],
        samples: 0,
        config: StochasticBoundConfig {
            modes: 1,
            partitions: p.steps,
            gamma: p.mu,
            lipschitz: 0.0,
            horizon: p.horizon,
            n_samples: 0,
            seed,
        },
        slope_sum_violations: 0,
        warnings: Vec::new(),
    };
    let d0 = p.x.max(0.0);
    let bound = verify_spde_bound(&est, &table, d0, 0.0, 0.0, Moment::First)?;
    out.hard("mean-bound", bound.all_pass, format!("E[d_K] <= e^(mu t) d_K(x) + 3 SE at {} times", bound.rows.len()));

    // Starts within eta of the set stay within delta in mean up to the horizon.
    let phi_max = table.phi.iter().copied().fold(1.0, f64::max);
    let eta = p.delta / (2.0 * phi_max);
    let near = mc_distance(&gbm.model, &gbm.set, &Curve::scalar(eta), &config)?;
    let mut nb = Table::new("neighbourhood", &["t", "mean", "mean_se", "delta"]);
    let mut near_ok = true;
    for (i, &t) in near.times.iter().enumerate() {
        near_ok &= near.mean[i] <= p.delta + 3.0 * near.mean_se[i];
        nb.push(row![t, near.mean[i], near.mean_se[i], p.delta]);
    }
    out.tables.push(nb);
    out.note("eta", eta)?;
    out.note("lipschitz", gbm.lipschitz())?;
    out.note("failures", est.failures)?;
    out.hard("neighbourhood", near_ok, format!("starts at distance eta = {eta:e} stay within delta = {}", p.delta));
    Ok(out)
}
