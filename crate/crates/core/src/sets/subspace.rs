use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{ProjectionResult, SetError};
use crate::spaces::{Curve, Space};

/// Bases whose Gram matrix is worse conditioned than this are rejected.
pub const MAX_CONDITION: f64 = 1e12;
const JITTER: f64 = 1e-12;

/// Span of finitely many curves, with the Gram matrix factored once.
#[derive(Debug, Clone)]
pub struct Subspace {
    space: Space,
    basis: Vec<Curve>,
    /// Generator images of the basis when the space carries a graph norm.
    images: Option<Vec<Curve>>,
    gram: DMatrix<f64>,
    factor: Cholesky<f64, Dyn>,
    condition: f64,
    jitter_used: bool,
}

impl Subspace {
    pub fn new(space: Space, basis: Vec<Curve>) -> Result<Self, SetError> {
        if basis.is_empty() {
            return Err(SetError::EmptyBasis);
        }
        for e in &basis {
            space.check(e)?;
        }
        let images = match &space {
            Space::GraphNorm(g) => Some(
                basis
                    .iter()
                    .enumerate()
                    .map(|(index, e)| g.generator().apply(e).map_err(|source| SetError::Domain { index, source }))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            _ => None,
        };
        let k = basis.len();
        let mut gram = DMatrix::zeros(k, k);
        let base = space.base();
        for i in 0..k {
            for j in 0..=i {
                let mut v = base.inner_product(&basis[i], &basis[j])?;
                if let Some(img) = &images {
                    v += base.inner_product(&img[i], &img[j])?;
                }
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let eig = gram.clone().symmetric_eigen();
        let (lo, hi) = eig
            .eigenvalues
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION) {
            return Err(SetError::IllConditioned { condition });
        }
        let (factor, jitter_used) = match Cholesky::new(gram.clone()) {
            Some(f) => (f, false),
            None => {
                let scale = gram.trace() / k as f64;
                let jittered = &gram + DMatrix::identity(k, k) * (JITTER * scale);
                let f = Cholesky::new(jittered).ok_or(SetError::IllConditioned { condition })?;
                (f, true)
            }
        };
        Ok(Self { space, basis, images, gram, factor, condition, jitter_used })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn basis(&self) -> &[Curve] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    pub fn jitter_used(&self) -> bool {
        self.jitter_used
    }

    /// `sum_i coeffs[i] * basis[i]`.
    pub fn element(&self, coeffs: &[f64]) -> Curve {
        Curve::linear_combination(coeffs, &self.basis)
    }

    /// Inner products of `h` with every basis element.
    pub fn moments(&self, h: &Curve) -> Result<Vec<f64>, SetError> {
        self.space.check(h)?;
        let base = self.space.base();
        let image = match (&self.space, &self.images) {
            (Space::GraphNorm(g), Some(_)) => Some(g.generator().apply(h)?),
            _ => None,
        };
        self.basis
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let mut v = base.inner_product(h, e)?;
                if let (Some(ah), Some(images)) = (&image, &self.images) {
                    v += base.inner_product(ah, &images[i])?;
                }
                Ok(v)
            })
            .collect()
    }

    /// Coordinates of the orthogonal projection of `h`, with one step of
    /// iterative refinement.
    pub fn coefficients(&self, h: &Curve) -> Result<Vec<f64>, SetError> {
        let b = DVector::from_vec(self.moments(h)?);
        let mut c = self.factor.solve(&b);
        let residual = h - &self.element(c.as_slice());
        let correction = self.factor.solve(&DVector::from_vec(self.moments(&residual)?));
        c += correction;
        Ok(c.as_slice().to_vec())
    }

    pub fn project(&self, h: &Curve) -> Result<ProjectionResult, SetError> {
        let coeffs = self.coefficients(h)?;
        let point = self.element(&coeffs);
        let diff = h - &point;
        let distance = self.space.norm(&diff)?;
        let residual = self
            .moments(&diff)?
            .iter()
            .zip(0..self.dim())
            .map(|(m, i)| m.abs() / self.gram[(i, i)].sqrt())
            .fold(0.0_f64, f64::max);
        Ok(ProjectionResult { point, distance, iterations: 1, converged: true, residual })
    }
}

/// Orthogonal projection of `h` onto the span of `basis`.
pub fn project_subspace(space: &Space, basis: &[Curve], h: &Curve) -> Result<ProjectionResult, SetError> {
    Subspace::new(space.clone(), basis.to_vec())?.project(h)
}

/// Projection in the graph inner product of the generator.
pub fn graph_norm_projection(space: &Space, basis: &[Curve], h: &Curve) -> Result<ProjectionResult, SetError> {
    if !matches!(space, Space::GraphNorm(_)) {
        return Err(SetError::UnsupportedSpace("graph-norm projection needs a graph-norm space"));
    }
    project_subspace(space, basis, h)
}

/// The graph-norm projection written as an operator on the base space:
/// `x -> sum_i <x, e_i + A* A e_i> e_i` for a graph-orthonormal basis `e_i`.
///
/// Only the adjoint of the generator is applied to `x`'s partner, so the
/// formula makes sense for base-space elements outside the domain too.
pub fn extended_projection(space: &Space, basis: &[Curve], x: &Curve) -> Result<Curve, SetError> {
    let Space::GraphNorm(g) = space else {
        return Err(SetError::UnsupportedSpace("extended projection needs a graph-norm space"));
    };
    let sub = Subspace::new(space.clone(), basis.to_vec())?;
    let base = g.base();
    base.check(x)?;
    // Graph-orthonormal basis: E L^{-T}.
    let l_inv = sub
        .factor
        .l()
        .try_inverse()
        .ok_or(SetError::IllConditioned { condition: sub.condition })?;
    let k = sub.dim();
    let mut out = x.zeros_like();
    for j in 0..k {
        let coeffs: Vec<f64> = (0..k).map(|i| l_inv[(j, i)]).collect();
        let e = sub.element(&coeffs);
        let ae = g.generator().apply(&e).map_err(|source| SetError::Domain { index: j, source })?;
        let partner = &e + &g.generator().apply_adjoint(&ae)?;
        out.axpy(base.inner_product(x, &partner)?, &e);
    }
    Ok(out)
}
