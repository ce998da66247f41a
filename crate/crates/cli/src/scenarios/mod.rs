//! Named experiments. Each scenario parses its own parameter block, runs,
//! and returns tables plus pass/fail assertions.

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

mod gbm;
mod halfline;
mod hjmm;
mod nagumo_sweep;
mod negative_rates;
mod rate;
mod unbounded;
mod wz;

pub use gbm::GbmParams;
pub use halfline::HalflineParams;
pub use hjmm::HjmmParams;
pub use nagumo_sweep::NagumoSweepParams;
pub use negative_rates::NegativeRatesParams;
pub use rate::RateParams;
pub use unbounded::UnboundedParams;
pub use wz::WzParams;

/// A table cell: numbers are written with 17 significant digits.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Num(v as f64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    /// File stem of the artifact.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[i] {
                    Cell::Num(v) => *v,
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }
}

/// Builds a row from heterogeneous cells.
#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::Cell::from($x)),*] };
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    /// Hard failures make the run exit nonzero.
    pub hard: bool,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Outcome {
    /// Parameters after defaults were filled in.
    pub params: Value,
    #[serde(skip)]
    pub tables: Vec<Table>,
    pub assertions: Vec<Assertion>,
    /// Derived constants and diagnostics.
    pub summary: serde_json::Map<String, Value>,
}

impl Outcome {
    pub(crate) fn new(params: &impl Serialize) -> Result<Self, CliError> {
        Ok(Self { params: serde_json::to_value(params)?, ..Default::default() })
    }

    pub(crate) fn hard(&mut self, name: &str, passed: bool, detail: String) {
        self.assertions.push(Assertion { name: name.into(), hard: true, passed, detail });
    }

    pub(crate) fn soft(&mut self, name: &str, passed: bool, detail: String) {
        self.assertions.push(Assertion { name: name.into(), hard: false, passed, detail });
    }

    pub(crate) fn note(&mut self, key: &str, value: impl Serialize) -> Result<(), CliError> {
        self.summary.insert(key.into(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn hard_failures(&self) -> usize {
        self.assertions.iter().filter(|a| a.hard && !a.passed).count()
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }
}

pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub defaults: fn() -> Value,
    pub run: fn(&Value, u64) -> Result<Outcome, CliError>,
}

fn defaults_of<T: Default + Serialize>() -> Value {
    serde_json::to_value(T::default()).expect("defaults serialize")
}

/// Registered scenarios in listing order.
pub static SCENARIOS: &[Scenario] = &[
    Scenario {
        name: "halfline-ode",
        description: "scalar linear ODE and the half-line [a, inf): bound equality and tangency quotients",
        defaults: defaults_of::<HalflineParams>,
        run: halfline::run,
    },
    Scenario {
        name: "gbm",
        description: "geometric Brownian motion and (-inf, 0]: expected-distance law and invariance",
        defaults: defaults_of::<GbmParams>,
        run: gbm::run,
    },
    Scenario {
        name: "hjmm",
        description: "Musiela forward-rate model with a Svensson subspace: slack table and invariance",
        defaults: defaults_of::<HjmmParams>,
        run: hjmm::run,
    },
    Scenario {
        name: "rate-spde",
        description: "second-order rate SPDE on (0, 1): eigenrelation, projected state, pathwise and mean bounds",
        defaults: defaults_of::<RateParams>,
        run: rate::run,
    },
    Scenario {
        name: "nagumo-sweep",
        description: "small-time tangency estimates for the half-line, GBM and rate models",
        defaults: defaults_of::<NagumoSweepParams>,
        run: nagumo_sweep::run,
    },
    Scenario {
        name: "wz-convergence",
        description: "Wong-Zakai approximations of GBM: convergence, pathwise bound, stochastic bound functions",
        defaults: defaults_of::<WzParams>,
        run: wz::run,
    },
    Scenario {
        name: "unbounded-functional",
        description: "curves with bounded norm and slope sqrt(n) at zero: evaluation of h' is unbounded",
        defaults: defaults_of::<UnboundedParams>,
        run: unbounded::run,
    },
    Scenario {
        name: "negative-rates",
        description: "distance of forward curves to the nonnegative cone against the negative-part norm",
        defaults: defaults_of::<NegativeRatesParams>,
        run: negative_rates::run,
    },
];

pub fn find(name: &str) -> Result<&'static Scenario, CliError> {
    SCENARIOS.iter().find(|s| s.name == name).ok_or_else(|| CliError::UnknownScenario(name.into()))
}
