use std::sync::Arc;

use distbound::bounds::{big_phi, varphi, BoundParams};
use distbound::sets::{ClosedSet, NonnegativeCone, Subspace};
use distbound::spaces::{Curve, FilipovicNorm, Grid, Space};
use distbound::stochastic::BrownianPanel;
use proptest::prelude::*;

fn curve_space() -> Space {
    Space::filipovic(0.1, Arc::new(Grid::log_spaced(30.0, 192, 6.0).unwrap()), FilipovicNorm::Equivalent).unwrap()
}

/// `a + b e^{-c x} + d x e^{-c x}` with limit `a`.
fn exp_curve(space: &Space, p: [f64; 4]) -> Curve {
    let [a, b, c, d] = p;
    let c = 0.2 + c.abs();
    space.sample(Some(a), move |x| a + (b + d * x) * (-c * x).exp())
}

fn coeffs() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-1.0..1.0f64)
}

fn svensson_subspace(space: &Space) -> Subspace {
    let basis = vec![
        space.sample(Some(1.0), |_| 1.0),
        space.sample(Some(0.0), |x| (-0.8 * x).exp()),
        space.sample(Some(0.0), |x| x * (-0.8 * x).exp()),
    ];
    Subspace::new(space.clone(), basis).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn varphi_splits_over_intervals(g in 0.0..1.5f64, a in 0.0..2.0f64, b in 0.0..2.0f64, c in 0.0..2.0f64) {
        let mut v = [a, b, c];
        v.sort_by(f64::total_cmp);
        let [r, s, t] = v;
        let lhs = (g * (t - s)).exp() * varphi(g, s - r) + varphi(g, t - s);
        prop_assert!((lhs - varphi(g, t - r)).abs() < 1e-12);
    }

    #[test]
    fn big_phi_composes(g in 0.0..1.5f64, delta in 0.0..1.0f64, d in -1.0..1.0f64, e in -1.0..1.0f64,
                        s in 0.0..1.0f64, t in 0.0..1.0f64) {
        let p = BoundParams { gamma: g, delta, ..Default::default() };
        prop_assert_eq!(big_phi(&p, d, e, 0.0), d);
        let composed = big_phi(&p, big_phi(&p, d, e, s), e, t);
        prop_assert!((composed - big_phi(&p, d, e, s + t)).abs() < 1e-12);
        prop_assert!(big_phi(&p, d.abs(), e, t) >= big_phi(&p, -d.abs(), e, t));
    }

    #[test]
    fn subspace_distance_axioms(x in coeffs(), y in coeffs(), k in prop::array::uniform3(-2.0..2.0f64)) {
        let space = curve_space();
        let sub = svensson_subspace(&space);
        let set = ClosedSet::Subspace(sub.clone());
        let (hx, hy) = (exp_curve(&space, x), exp_curve(&space, y));
        let dx = set.distance(&hx).unwrap();
        let sum = &hx + &hy;
        prop_assert!(set.distance(&sum).unwrap() <= dx + space.norm(&hy).unwrap() + 1e-10);
        let dy = set.distance(&hy).unwrap();
        prop_assert!((dx - dy).abs() <= space.distance(&hx, &hy).unwrap() + 1e-10);
        let shifted = &hx + &sub.element(&k);
        prop_assert!((set.distance(&shifted).unwrap() - dx).abs() < 1e-10);
        let p = set.project(&hx).unwrap();
        prop_assert!(set.distance(&p.point).unwrap() < 1e-10);
    }

    #[test]
    fn cone_distance_axioms(x in coeffs(), y in coeffs()) {
        let space = curve_space();
        let set = ClosedSet::NonnegativeCone(NonnegativeCone::new(space.clone()).unwrap());
        let (hx, hy) = (exp_curve(&space, x), exp_curve(&space, y));
        let dx = set.distance(&hx).unwrap();
        prop_assert!(dx <= space.norm(&hx.negative_part()).unwrap() + 1e-10);
        let nonneg = hx.values().iter().all(|v| *v >= 0.0) && hx.at_infinity().unwrap() >= 0.0;
        prop_assert_eq!(dx <= 1e-10, nonneg);
        let sum = &hx + &hy;
        prop_assert!(set.distance(&sum).unwrap() <= dx + space.norm(&hy).unwrap() + 1e-10);
        let dy = set.distance(&hy).unwrap();
        prop_assert!((dx - dy).abs() <= space.distance(&hx, &hy).unwrap() + 1e-10);
        let p = set.project(&hx).unwrap();
        prop_assert!(set.distance(&p.point).unwrap() <= 1e-10);
    }

    #[test]
    fn half_line_distance_is_one_lipschitz(a in -2.0..2.0f64, x in -5.0..5.0f64, y in -5.0..5.0f64) {
        for set in [ClosedSet::HalfLineAbove(a), ClosedSet::HalfLineBelow(a)] {
            let (dx, dy) = (set.distance(&Curve::scalar(x)).unwrap(), set.distance(&Curve::scalar(y)).unwrap());
            prop_assert!(dx >= 0.0);
            prop_assert!((dx - dy).abs() <= (x - y).abs() + 1e-12);
            prop_assert!(set.distance(&Curve::scalar(x + y)).unwrap() <= dx + y.abs() + 1e-12);
        }
    }

    #[test]
    fn max_slope_never_exceeds_slope_sum(seed in any::<u64>(), m in 1usize..64, modes in 1usize..4) {
        let panel = BrownianPanel::sample(modes, 1.0, m, 2, seed, 0).unwrap();
        for j in 0..modes {
            prop_assert!(panel.max_slope(j) <= panel.slope_sum(j));
            prop_assert_eq!(panel.path_values(j)[0], 0.0);
        }
    }
}
