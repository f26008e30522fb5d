use std::sync::Arc;

use proptest::prelude::*;

use superint::implicit::{
    branch_potential, build_interp_oscillator, check_first_integral_case_i, eq19_residual, eq38_residual,
    solve_case_i_branch, solve_case_ii_branch, w_from_p4, y_from_p2, ImplicitRelation, SCAN_STEP,
};
use superint::specfun::{painleve2, painleve4, PainleveIC};
use superint::Potential1D;

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn traced_points_satisfy_the_case_i_relation(a in 0.5f64..2.0, c in -0.5f64..0.5, d in -0.5f64..0.5, pick in 0usize..4) {
        let rel = ImplicitRelation::CaseI { a, c, d };
        let x0 = 1.0;
        let roots = rel.scan_roots(x0, (-20.0, 20.0), SCAN_STEP);
        prop_assume!(!roots.is_empty());
        let v0 = roots[pick % roots.len()];
        let xs = grid(x0, x0 + 0.5, 26);
        if let Ok(trace) = solve_case_i_branch(a, c, d, &xs, (x0, v0)) {
            for (x, v) in trace.xs.iter().zip(&trace.values) {
                prop_assert!(rel.relative_residual(*x, *v) <= 1e-10, "({x}, {v})");
            }
        }
    }

    #[test]
    fn traced_points_satisfy_the_case_ii_relation(b in 0.5f64..2.0, d in 0.05f64..1.0) {
        let rel = ImplicitRelation::CaseII { b, d };
        let roots = rel.scan_roots(0.0, (-20.0, 20.0), SCAN_STEP);
        prop_assume!(!roots.is_empty());
        let xs = grid(0.0, -2.0, 41);
        let trace = solve_case_ii_branch(b, d, &xs, (0.0, roots[roots.len() - 1])).unwrap();
        prop_assert!(trace.max_residual() <= 1e-10);
    }

    #[test]
    fn case_i_roots_at_c_d_zero(a in 0.2f64..3.0, x in 0.3f64..2.0) {
        let roots = ImplicitRelation::CaseI { a, c: 0.0, d: 0.0 }.scan_roots(x, (-50.0, 50.0), SCAN_STEP);
        prop_assert_eq!(roots.len(), 2);
        let want = [a * x * x / 9.0, a * x * x];
        for (r, w) in roots.iter().zip(want) {
            prop_assert!((r - w).abs() <= 4.0 * f64::EPSILON * w, "{r} vs {w}");
        }
    }

    #[test]
    fn interp_family_matches_continuation(a in 0.5f64..2.0, d_tilde in 0.1f64..2.0) {
        let osc = build_interp_oscillator(a, d_tilde, 1.0).unwrap();
        let ImplicitRelation::CaseI { c, d, .. } = osc.relation else { unreachable!() };
        let v = osc.on_relation();
        let xs = grid(0.1, 2.0, 77);
        let trace = solve_case_i_branch(a, c, d, &xs, (xs[0], v.value(xs[0]).unwrap())).unwrap();
        for (x, t) in xs.iter().zip(&trace.values) {
            let want = v.value(*x).unwrap();
            prop_assert!((t - want).abs() <= 1e-8 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn shifting_v1_changes_k_predictably(a in 0.5f64..2.0, hbar in 0.0f64..1.5, x in 0.3f64..2.0) {
        let eps = 1e-3;
        let base = Potential1D::closed_form("x^4 + 0.5x", |x| x.powi(4) + 0.5 * x);
        let shifted = Potential1D::closed_form("x^4 + 0.5x + eps", move |x| x.powi(4) + 0.5 * x + eps);
        let k0 = check_first_integral_case_i(&base, a, hbar, &[x]).unwrap().values[0];
        let k1 = check_first_integral_case_i(&shifted, a, hbar, &[x]).unwrap().values[0];
        let s = base.eval(x).unwrap();
        let predicted = 12.0 * eps * (s.d(0) + a * x * x - x * s.d(1)) + 6.0 * eps * eps;
        prop_assert!((k1 - k0 - predicted).abs() <= 1e-10 * (1.0 + k0.abs()), "{} vs {predicted}", k1 - k0);
    }
}

#[test]
fn case_ii_roots_at_d_zero() {
    for (b, x) in [(1.0, 0.5), (-0.7, 1.5), (2.0, -1.25)] {
        let mut roots = ImplicitRelation::CaseII { b, d: 0.0 }.scan_roots(x, (-20.0, 20.0), SCAN_STEP);
        roots.sort_by(f64::total_cmp);
        let mut want = vec![0.0, b * x];
        want.sort_by(f64::total_cmp);
        assert_eq!(roots, want);
    }
}

#[test]
fn branch_potential_interpolates_onto_the_relation() {
    let (a, c, d) = (1.0, 0.1, 0.05);
    let rel = ImplicitRelation::CaseI { a, c, d };
    let xs = grid(0.5, 1.5, 21);
    let v0 = *rel.scan_roots(0.5, (-20.0, 20.0), SCAN_STEP).last().unwrap();
    let trace = solve_case_i_branch(a, c, d, &xs, (0.5, v0)).unwrap();
    let v = branch_potential(&trace, "traced").unwrap();
    for x in grid(0.52, 1.48, 17) {
        let s = v.eval(x).unwrap();
        assert!(rel.relative_residual(x, s.d(0)) <= 1e-12);
        let h = 1e-5;
        let fd = (v.value(x + h).unwrap() - v.value(x - h).unwrap()) / (2.0 * h);
        assert!((fd - s.d(1)).abs() <= 1e-7 * (1.0 + s.d(1).abs()));
    }
    assert!(v.eval(1.6).is_err());
}

#[test]
fn p4_built_w_solves_its_equation() {
    let (b, hbar, k1) = (-8.0, 1.0, 4.0);
    let p4 = Arc::new(painleve4((-0.05, 2.05), b, k1, 0.5, PainleveIC::new(1.0, -0.4, 0.0)).unwrap());
    for b1 in [8f64.sqrt(), -(8f64.sqrt())] {
        let w = w_from_p4(&p4, b, hbar, b1, k1).unwrap();
        for x in grid(0.0, 2.0, 81) {
            assert!(eq19_residual(&w, b, hbar, x).unwrap() <= 1e-7, "b1 = {b1}, x = {x}");
        }
    }
    assert!(w_from_p4(&p4, -9.0, hbar, 3.0, k1).is_err());
}

#[test]
fn p2_built_y_needs_the_matching_coupling() {
    let zero = Arc::new(painleve2((0.5, 2.5), 0.0, PainleveIC::new(1.0, 0.0, 0.0)).unwrap());
    let matched = y_from_p2(&zero, -0.25).unwrap();
    let mismatched = y_from_p2(&zero, 1.0).unwrap();
    for xi in grid(0.6, 2.4, 19) {
        assert_eq!(eq38_residual(&matched, -0.25, xi).unwrap(), 0.0);
        assert!(eq38_residual(&mismatched, 1.0, xi).unwrap() > 1e-2, "{xi}");
    }
}

#[test]
fn y_vanishing_inside_the_interval_is_refused() {
    let zero = Arc::new(painleve2((-1.0, 1.0), 0.0, PainleveIC::new(0.5, 0.0, 0.0)).unwrap());
    assert!(y_from_p2(&zero, -0.25).is_err());
}
