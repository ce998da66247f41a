//! Distance bounds for mild solutions of deterministic and stochastic
//! evolution equations: state spaces of curves, closed sets with their
//! distance functions, solvers, tangency estimates and worked models.

pub mod bounds;
pub mod evolution;
pub mod models;
pub mod nagumo;
pub mod numeric;
pub mod rng;
pub mod sets;
pub mod spaces;
pub mod stochastic;

pub use bounds::{big_phi, varphi, BoundParams, StochasticBoundConfig, StochasticBoundTable};
pub use evolution::{CurveMap, EvolutionModel, Scheme, Semigroup, Trajectory};
pub use nagumo::LiminfEstimate;
pub use sets::{ClosedSet, ProjectionResult};
pub use spaces::{Curve, Grid, LinearOperator, Space};
pub use stochastic::{BrownianPanel, McEstimate, StochModel};
