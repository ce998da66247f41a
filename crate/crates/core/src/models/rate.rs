use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::bounds::varphi;
use crate::evolution::{constant_map, CurveMap, EvolutionModel, IdentitySemigroup, SpectralSemigroup};
use crate::sets::{extended_projection, graph_norm_projection, ClosedSet, Subspace};
use crate::spaces::{eigenfunction, eigenvalue, Curve, DirichletRateOperator, Grid, Space, ZeroOperator};
use crate::stochastic::{solve_spde, BrownianPanel, Correction, NoiseSpec, StochModel};

/// A curve on `(0, 1)` vanishing at both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileSpec {
    /// `scale * x (1 - x)`.
    Parabola { scale: f64 },
    /// `sum coefficient * e^{-x/kappa} sin(n pi x)` over `(n, coefficient)`.
    Modes { terms: Vec<(usize, f64)> },
}

impl ProfileSpec {
    fn sample(&self, grid: &Arc<Grid>, kappa: f64) -> Curve {
        match self {
            ProfileSpec::Parabola { scale } => Curve::from_fn(grid, None, |x| scale * x * (1.0 - x)),
            ProfileSpec::Modes { terms } => Curve::from_fn(grid, None, |x| {
                terms.iter().map(|&(n, c)| c * eigenfunction(kappa, n, x)).sum()
            }),
        }
    }
}

/// Second-order rate model `dX = ((kappa/2) X'' + X' + alpha) dt + sigma dW`
/// on `L^2(0, 1)` with zero boundary values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateModelParams {
    pub kappa: f64,
    /// Mode numbers spanning the subspace.
    pub index_set: Vec<usize>,
    pub alpha: ProfileSpec,
    /// Must lie in the subspace.
    pub sigma: ProfileSpec,
    /// Interior grid points.
    pub grid_points: usize,
    /// Retained eigenmodes; all grid modes when absent.
    pub modes: Option<usize>,
}

impl Default for RateModelParams {
    fn default() -> Self {
        Self {
            kappa: 0.5,
            index_set: vec![1, 2],
            alpha: ProfileSpec::Parabola { scale: 1.0 },
            sigma: ProfileSpec::Modes { terms: vec![(1, 0.3)] },
            grid_points: 255,
            modes: None,
        }
    }
}

impl RateModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidParameter(msg));
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad(format!("kappa must be positive, got {}", self.kappa));
        }
        if self.index_set.is_empty() || self.index_set.contains(&0) {
            return bad("index_set must be a non-empty set of positive integers".into());
        }
        let mut sorted = self.index_set.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.index_set.len() {
            return bad("index_set has repeated entries".into());
        }
        let top = *sorted.last().expect("non-empty");
        if self.grid_points < 3 || self.grid_points < top + 10 {
            return bad(format!("grid_points must be at least max(index_set) + 10 = {}", top + 10));
        }
        if let Some(m) = self.modes {
            if m < top + 10 || m > self.grid_points {
                return bad(format!("modes must lie in [{}, {}]", top + 10, self.grid_points));
            }
        }
        match &self.sigma {
            ProfileSpec::Modes { terms } if terms.iter().all(|(n, _)| self.index_set.contains(n)) => {}
            _ => return bad("sigma must be a combination of the index-set modes".into()),
        }
        if let ProfileSpec::Modes { terms } = &self.alpha {
            if terms.iter().any(|(n, _)| *n == 0) {
                return bad("mode numbers start at 1".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RateModel {
    pub params: RateModelParams,
    pub space: Space,
    /// `L^2` with the graph norm of the generator.
    pub graph_space: Space,
    pub operator: Arc<DirichletRateOperator>,
    pub semigroup: Arc<SpectralSemigroup>,
    /// `e^{-x/kappa} sin(n pi x)` for `n` in the index set.
    pub basis: Vec<Curve>,
    pub subspace: Subspace,
    /// The subspace as a set in `L^2`.
    pub set: ClosedSet,
    pub eigenvalues: Vec<f64>,
    pub alpha: Curve,
    pub sigma: Curve,
    /// Graph-norm distance of `alpha` to the subspace.
    pub epsilon_graph: f64,
    /// `L^2` distance of `alpha` to the subspace.
    pub epsilon_l2: f64,
    /// Graph-norm projection of `alpha`.
    pub projected_alpha: Curve,
    /// Coordinates of the projected drift and of `sigma` in the basis.
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub model: StochModel,
    /// Dynamics with drift `pi(A h + alpha)`, valid on subspace-valued states.
    pub projected: StochModel,
}

pub fn build_rate_model(params: RateModelParams) -> Result<RateModel, ModelError> {
    params.validate()?;
    let kappa = params.kappa;
    let grid = Arc::new(Grid::unit_interior(params.grid_points)?);
    let space = Space::l2(grid.clone())?;
    let operator = Arc::new(DirichletRateOperator::new(kappa)?);
    let graph_space = Space::graph_norm(space.clone(), operator.clone())?;
    let semigroup = Arc::new(SpectralSemigroup::new(kappa, grid.clone(), params.modes)?);
    let basis: Vec<Curve> = params
        .index_set
        .iter()
        .map(|&n| Curve::from_fn(&grid, None, |x| eigenfunction(kappa, n, x)))
        .collect();
    let eigenvalues: Vec<f64> = params.index_set.iter().map(|&n| eigenvalue(kappa, n)).collect();
    let subspace = Subspace::new(space.clone(), basis.clone())?;
    let alpha = params.alpha.sample(&grid, kappa);
    let sigma = params.sigma.sample(&grid, kappa);
    let graph = graph_norm_projection(&graph_space, &basis, &alpha)?;
    let epsilon_l2 = subspace.project(&alpha)?.distance;
    let b = subspace.coefficients(&graph.point)?;
    let c: Vec<f64> = match &params.sigma {
        ProfileSpec::Modes { terms } => params
            .index_set
            .iter()
            .map(|n| terms.iter().filter(|(m, _)| m == n).fold(0.0, |acc, (_, v)| acc + v))
            .collect(),
        ProfileSpec::Parabola { .. } => unreachable!("validated"),
    };
    let base = EvolutionModel {
        space: space.clone(),
        semigroup: semigroup.clone(),
        generator: operator.clone(),
        drift: constant_map(alpha.clone()),
        lipschitz: 0.0,
        drift_bound: Some(space.norm(&alpha)?),
        beta: 0.0,
    };
    let model = StochModel {
        base,
        noise: NoiseSpec::single(constant_map(sigma.clone())),
        correction: Correction::Zero,
    };
    let projected_drift: CurveMap = {
        let sub = subspace.clone();
        let lam = eigenvalues.clone();
        let pa = graph.point.clone();
        Arc::new(move |h: &Curve| {
            let z = sub.coefficients(h).expect("state on the model grid");
            let scaled: Vec<f64> = z.iter().zip(&lam).map(|(z, l)| z * l).collect();
            let mut out = sub.element(&scaled);
            out.axpy(1.0, &pa);
            out
        })
    };
    let projected = StochModel {
        base: EvolutionModel {
            space: space.clone(),
            semigroup: Arc::new(IdentitySemigroup),
            generator: Arc::new(ZeroOperator),
            drift: projected_drift,
            lipschitz: eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs())),
            drift_bound: None,
            beta: 0.0,
        },
        noise: model.noise.clone(),
        correction: Correction::Zero,
    };
    Ok(RateModel {
        params,
        space,
        graph_space,
        operator,
        semigroup,
        basis,
        subspace: subspace.clone(),
        set: ClosedSet::Subspace(subspace),
        eigenvalues,
        alpha,
        sigma,
        epsilon_graph: graph.distance,
        epsilon_l2,
        projected_alpha: graph.point,
        b,
        c,
        model,
        projected,
    })
}

impl RateModel {
    /// `sum z_i u_{n_i}`.
    pub fn embed(&self, z: &[f64]) -> Curve {
        self.subspace.element(z)
    }

    /// The graph-norm projection applied to a base-space element.
    pub fn project_extended(&self, x: &Curve) -> Result<Curve, ModelError> {
        Ok(extended_projection(&self.graph_space, &self.basis, x)?)
    }

    /// `||X(t) - Y(t)||` at the solver step times, for the full solution `X`
    /// (exponential Euler-Maruyama with `steps` steps) and the projected
    /// solution `Y = sum Z_i u_i` from the explicit state formula, both
    /// driven by mode 0 of `panel` and started at `embed(z0)`.
    pub fn projection_gap(&self, z0: &[f64], panel: &BrownianPanel, steps: usize) -> Result<Vec<f64>, ModelError> {
        let x = solve_spde(&self.model, &self.embed(z0), steps, panel)?;
        let state = explicit_state(self, z0, panel)?;
        let stride = panel.fine_steps() / steps;
        x.states
            .iter()
            .enumerate()
            .map(|(k, xk)| {
                let y = self.embed(&state[k * stride]);
                Ok(self.space.distance(xk, &y)?)
            })
            .collect()
    }
}

/// Explicit state on the fine panel grid:
/// `Z(t) = e^{Bt} z + c W(t) + B^{-1}(e^{Bt} - 1) b + int_0^t e^{B(t-s)} B c W(s) ds`,
/// the last integral by the trapezoid rule.
fn explicit_state(model: &RateModel, z0: &[f64], panel: &BrownianPanel) -> Result<Vec<Vec<f64>>, ModelError> {
    let k = model.eigenvalues.len();
    if z0.len() != k {
        return Err(ModelError::InvalidParameter(format!("state has {} coordinates, expected {k}", z0.len())));
    }
    let w = panel.path_values(0);
    let times = panel.fine_times();
    let dt = panel.horizon() / panel.fine_steps() as f64;
    let mut out = vec![z0.to_vec()];
    let mut integral = vec![0.0; k];
    for step in 1..w.len() {
        let t = times[step];
        let row = (0..k)
            .map(|i| {
                let (lam, b, c) = (model.eigenvalues[i], model.b[i], model.c[i]);
                let decay = (lam * dt).exp();
                integral[i] = decay * integral[i] + 0.5 * dt * lam * c * (decay * w[step - 1] + w[step]);
                (lam * t).exp() * z0[i] + c * w[step] + varphi(lam, t) * b + integral[i]
            })
            .collect();
        out.push(row);
    }
    Ok(out)
}

/// Finite-dimensional state process on a common Brownian path.
#[derive(Debug, Clone, Serialize)]
pub struct StateProcess {
    /// Fine panel times with the explicit state.
    pub times: Vec<f64>,
    pub explicit: Vec<Vec<f64>>,
    pub euler_times: Vec<f64>,
    /// Euler-Maruyama for `dZ = (B Z + b) dt + c dW`.
    pub euler: Vec<Vec<f64>>,
    /// Largest coordinate gap between the two at the Euler times.
    pub sup_gap: f64,
}

pub fn projected_state_process(
    model: &RateModel,
    z0: &[f64],
    panel: &BrownianPanel,
    euler_steps: usize,
) -> Result<StateProcess, ModelError> {
    let explicit = explicit_state(model, z0, panel)?;
    let dw = panel.increments(0, euler_steps)?;
    let dt = panel.horizon() / euler_steps as f64;
    let stride = panel.fine_steps() / euler_steps;
    let mut euler = vec![z0.to_vec()];
    let mut sup_gap = 0.0_f64;
    for (step, dw) in dw.iter().enumerate() {
        let prev = &euler[step];
        let next: Vec<f64> = (0..z0.len())
            .map(|i| prev[i] + dt * (model.eigenvalues[i] * prev[i] + model.b[i]) + model.c[i] * dw)
            .collect();
        let reference = &explicit[(step + 1) * stride];
        sup_gap = next.iter().zip(reference).fold(sup_gap, |m, (a, b)| m.max((a - b).abs()));
        euler.push(next);
    }
    Ok(StateProcess {
        times: panel.fine_times(),
        explicit,
        euler_times: (0..=euler_steps).map(|k| k as f64 * dt).collect(),
        euler,
        sup_gap,
    })
}
