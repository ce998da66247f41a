use distbound::models::unbounded_functional_demo;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Outcome, Table};
use crate::config::{ensure, parse_params};
use crate::{row, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnboundedParams {
    pub gamma: f64,
    pub n_max: u64,
    /// Relative slack on the norm bound `e^gamma / 2`.
    pub relative_slack: f64,
}

impl Default for UnboundedParams {
    fn default() -> Self {
        Self { gamma: 0.1, n_max: 10_000, relative_slack: 1e-3 }
    }
}

pub(crate) fn run(params: &Value, _seed: u64) -> Result<Outcome, CliError> {
    let p: UnboundedParams = parse_params(params)?;
    ensure(p.gamma > 0.0, "gamma", "must be positive")?;
    ensure(p.n_max >= 1, "n_max", "must be at least 1")?;
    let rows = unbounded_functional_demo(p.gamma, p.n_max)?;
    let mut out = Outcome::new(&p)?;
    let mut table = Table::new("functional", &["n", "norm", "norm_squared", "norm_squared_bound", "slope_at_zero"]);
    let (mut slope_ok, mut norm_ok) = (true, true);
    for r in &rows {
        slope_ok &= r.slope_at_zero == (r.n as f64).sqrt();
        norm_ok &= r.norm_squared <= r.norm_squared_bound * (1.0 + p.relative_slack);
        table.push(row![r.n as f64, r.norm, r.norm_squared, r.norm_squared_bound, r.slope_at_zero]);
    }
    out.tables.push(table);
    out.hard("slope-is-sqrt-n", slope_ok, "g_n'(0) = sqrt(n) for every n".into());
    out.hard("norm-bounded", norm_ok, format!("||g_n||^2 <= e^gamma / 2 (1 + {:e})", p.relative_slack));
    Ok(out)
}
