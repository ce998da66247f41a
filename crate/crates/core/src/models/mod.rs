//! Ready-to-run models with closed-form reference quantities.

mod gbm;
mod halfline;
mod hjmm;
mod rate;
mod unbounded;

use thiserror::Error;

use crate::evolution::EvolutionError;
use crate::sets::SetError;
use crate::spaces::SpaceError;
use crate::stochastic::StochError;

pub use gbm::{build_gbm, Gbm};
pub use halfline::{build_halfline_ode, HalflineOde};
pub use hjmm::{
    build_hjmm, exponential_gap_norm, hjm_drift, hjmm_epsilon_closed_form, negative_rate_diagnostics, Hjmm,
    NegativeRateReport, SvenssonParams,
};
pub use rate::{
    build_rate_model, projected_state_process, ProfileSpec, RateModel, RateModelParams, StateProcess,
};
pub use unbounded::{one_two_five, unbounded_functional_demo, UnboundedRow};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Stoch(#[from] StochError),
}
