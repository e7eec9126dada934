use std::sync::Arc;

use proptest::prelude::*;

use saddlepoint::function::CatalogFunction;
use saddlepoint::saddle::{self, MinimaxProblem};
use saddlepoint::solvers::MinimizerConfig;
use saddlepoint::vector::{self, Bounds};
use saddlepoint::ConvexSet;

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-6.0..6.0f64, n)
}

fn set2() -> impl Strategy<Value = ConvexSet> {
    prop_oneof![
        (point(2), prop::collection::vec(0.1..3.0f64, 2)).prop_map(|(lo, w)| {
            let hi = lo.iter().zip(&w).map(|(l, w)| l + w).collect();
            ConvexSet::new_box(lo, hi).unwrap()
        }),
        (point(2), 0.1..3.0f64).prop_map(|(c, r)| ConvexSet::ball(c, r).unwrap()),
        (point(2), -2.0..2.0f64)
            .prop_filter("nonzero normal", |(a, _)| vector::norm(a) > 1e-3)
            .prop_map(|(a, b)| ConvexSet::halfspace(a, b).unwrap()),
        ((0.1..2.0f64), point(2)).prop_map(|(r, c)| {
            ConvexSet::intersection(vec![
                ConvexSet::ball(c.clone(), r + 0.5).unwrap(),
                ConvexSet::new_box(
                    c.iter().map(|v| v - r).collect(),
                    c.iter().map(|v| v + r).collect(),
                )
                .unwrap(),
            ])
            .unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_firmly_nonexpansive(set in set2(), z in point(2), u in point(2)) {
        let p = set.project(&z).unwrap();
        let q = set.project(&u).unwrap();
        prop_assert!(vector::distance(&set.project(&p).unwrap(), &p) <= 1e-9);
        let lhs = vector::norm_sq(&vector::sub(&p, &q));
        let rhs = vector::dot(&vector::sub(&p, &q), &vector::sub(&z, &u));
        prop_assert!(lhs <= rhs + 1e-8);
        prop_assert!(set.contains(&p));
    }

    #[test]
    fn grid_gap_is_never_negative(set in set2(), a in 0.05..0.8f64, res in 0.05..0.3f64) {
        let p = MinimaxProblem::new(Arc::new(CatalogFunction::trig_coercive(a, 2).unwrap()), None, set, None).unwrap();
        let cfg = MinimizerConfig { starts: 8, ..Default::default() };
        let c = saddle::construct_saddle_thm1(&p, &cfg).unwrap();
        let g = saddle::verify_minimax_equality(&p, &c, res, 1.0).unwrap();
        prop_assert!(g.alpha >= 0.0);
        prop_assert!(g.sup_inf <= g.inf_sup);
    }

    #[test]
    fn overstated_lipschitz_keeps_the_saddle(set in set2(), factor in 1.0..4.0f64) {
        let base = MinimaxProblem::new(Arc::new(CatalogFunction::squared_norm(2)), None, set, None).unwrap();
        let p = base.with_lipschitz(base.lipschitz() * factor).unwrap();
        let c = saddle::construct_saddle_thm1(&p, &MinimizerConfig::default()).unwrap();
        let r = saddle::verify_saddle(&p, &c, &Bounds::centered(&c.xbar, 5.0), 2000, 1).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }
}

#[test]
fn open_box_infimum_matches_closed_box_min_norm_point() {
    // sup over the open box (1, 2) × (−1, 1) of −‖y‖² is approached by interior
    // points and equals the closed-box value at (1, 0).
    let closed = ConvexSet::new_box(vec![1.0, -1.0], vec![2.0, 1.0]).unwrap();
    let m = closed.min_norm_point().unwrap();
    assert!(vector::distance(&m, &[1.0, 0.0]) <= 1e-12);
    let mut best = f64::INFINITY;
    for k in 1..=1000 {
        let t = k as f64 / 1001.0;
        best = best.min(vector::norm_sq(&[1.0 + t * 1e-3, 0.0]));
    }
    assert!((best - vector::norm_sq(&m)).abs() <= 1e-5);
}
