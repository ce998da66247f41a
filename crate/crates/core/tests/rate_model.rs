use std::sync::Arc;

use distbound::models::{build_rate_model, RateModelParams};
use distbound::sets::{extended_projection, graph_norm_projection, Subspace};
use distbound::spaces::{eigenfunction, eigenvalue, Curve, DirichletRateOperator, Grid, LinearOperator, Space};

/// Composite Simpson rule on `[0, 1]`.
fn simpson(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    s * h / 3.0
}

fn setup(m: usize) -> (Space, Vec<Curve>, Arc<Grid>) {
    let grid = Arc::new(Grid::unit_interior(m).unwrap());
    let l2 = Space::l2(grid.clone()).unwrap();
    let op = Arc::new(DirichletRateOperator::new(0.5).unwrap());
    let graph = Space::graph_norm(l2, op).unwrap();
    let basis = [1, 2].iter().map(|&n| Curve::from_fn(&grid, None, |x| eigenfunction(0.5, n, x))).collect();
    (graph, basis, grid)
}

#[test]
fn graph_projection_of_an_outside_mode_matches_a_quadrature_oracle() {
    // The modes are not orthogonal, so the projection of u_3 is not zero.
    // Oracle: Gram system in the graph inner product (1 + l_m l_n) <u_m, u_n>
    // with L^2 products by fine Simpson quadrature.
    let kappa = 0.5;
    let ip = |m: usize, n: usize| simpson(|x| eigenfunction(kappa, m, x) * eigenfunction(kappa, n, x), 20_000);
    let g = |m: usize, n: usize| (1.0 + eigenvalue(kappa, m) * eigenvalue(kappa, n)) * ip(m, n);
    let (a11, a12, a22) = (g(1, 1), g(1, 2), g(2, 2));
    let (b1, b2) = (g(1, 3), g(2, 3));
    let det = a11 * a22 - a12 * a12;
    let oracle = [(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det];
    assert!(oracle[0].abs() > 1e-3, "oracle should be clearly nonzero");

    let (graph, basis, grid) = setup(511);
    let h = Curve::from_fn(&grid, None, |x| eigenfunction(kappa, 3, x));
    let p = graph_norm_projection(&graph, &basis, &h).unwrap();
    let sub = Subspace::new(graph.base().clone(), basis.clone()).unwrap();
    let c = sub.coefficients(&p.point).unwrap();
    for i in 0..2 {
        assert!((c[i] - oracle[i]).abs() < 2e-3 * oracle[i].abs().max(0.05), "{c:?} vs {oracle:?}");
    }
}

#[test]
fn extended_form_agrees_with_gram_form_on_domain_elements() {
    let (graph, basis, grid) = setup(255);
    for h in [
        Curve::from_fn(&grid, None, |x| x * (1.0 - x)),
        Curve::from_fn(&grid, None, |x| (std::f64::consts::PI * x).sin() * (1.0 + x)),
        Curve::from_fn(&grid, None, |x| eigenfunction(0.5, 4, x)),
    ] {
        let gram = graph_norm_projection(&graph, &basis, &h).unwrap().point;
        let ext = extended_projection(&graph, &basis, &h).unwrap();
        let gap = graph.base().distance(&gram, &ext).unwrap();
        assert!(gap < 1e-8 * graph.base().norm(&h).unwrap().max(1.0), "gap {gap}");
    }
}

#[test]
fn adjoint_consistency_and_invariance_of_the_span() {
    let grid = Arc::new(Grid::unit_interior(255).unwrap());
    let l2 = Space::l2(grid.clone()).unwrap();
    let op = DirichletRateOperator::new(0.5).unwrap();
    let modes: Vec<Curve> = (1..=6).map(|n| Curve::from_fn(&grid, None, |x| eigenfunction(0.5, n, x))).collect();
    for um in &modes {
        let aum = op.apply(um).unwrap();
        for un in &modes {
            let lhs = l2.inner_product(&aum, un).unwrap();
            let rhs = l2.inner_product(um, &op.apply_adjoint(un).unwrap()).unwrap();
            assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0));
        }
    }
    let model = build_rate_model(RateModelParams::default()).unwrap();
    for (e, lam) in model.basis.iter().zip(&model.eigenvalues) {
        let ae = op.apply(e).unwrap();
        let d = model.set.distance(&ae).unwrap();
        assert!(d < 1e-3 * lam.abs() * l2.norm(e).unwrap(), "distance {d}");
    }
}
