use proptest::prelude::*;

use superint::catalog;
use superint::detsolve::{
    commutator_oracle, fit_homogeneous_family, fornberg_weights, ode_residual_11, ode_residual_12, residual_determining,
    solve_g_quadrature, Equation, Family, GReconstruction, GaussianTest, GridSpec,
};
use superint::{CoeffTensor, CorrectionFields, Error, ParamSet, Potential1D, SeparablePotential, ThirdOrderIntegral};

fn instance(id: &str) -> catalog::Instance {
    catalog::instantiate(id, &ParamSet::new()).unwrap()
}

fn small_grid(inst: &catalog::Instance) -> GridSpec {
    GridSpec::new(inst.domain.x, inst.domain.y, 9, 9)
}

fn centre(inst: &catalog::Instance) -> (f64, f64) {
    ((inst.domain.x.0 + inst.domain.x.1) / 2.0, (inst.domain.y.0 + inst.domain.y.1) / 2.0)
}

#[test]
fn quadrature_rebuilds_the_correction_fields() {
    for id in ["C.1", "C.2", "C.3", "C.4", "Q.1", "Q.2", "Q.3", "Q.8", "Q.9", "Q.14"] {
        let inst = instance(id);
        let grid = small_grid(&inst);
        for (k, x) in inst.integrals.iter().enumerate() {
            let stored = residual_determining(&inst.potential, x, &grid).unwrap().max_abs();
            match solve_g_quadrature(&inst.potential, &x.coeffs, centre(&inst), &grid).unwrap() {
                GReconstruction::Feasible { fields, report, .. } => {
                    assert!(report.max_abs() <= 1e-8, "{id} X{}: {:.3e}", k + 1, report.max_abs());
                    assert!((report.max_abs() - stored).abs() <= 1e-8);
                    let rebuilt = ThirdOrderIntegral::new(x.coeffs, fields, "rebuilt").unwrap();
                    let r = residual_determining(&inst.potential, &rebuilt, &grid).unwrap();
                    assert!(r.max_abs() <= 1e-8, "{id} X{}", k + 1);
                }
                GReconstruction::Infeasible { equation, report } => {
                    panic!("{id} X{}: infeasible at {equation:?} ({:.3e})", k + 1, report.max_abs())
                }
            }
        }
    }
}

#[test]
fn quadrature_reports_a_mismatched_potential() {
    let q14 = instance("Q.14");
    let broken = SeparablePotential::new(
        Potential1D::closed_form("x^4", |x| x * x * x * x),
        Potential1D::closed_form("y^2", |y| y * y),
        1.0,
    );
    let grid = small_grid(&q14);
    let a = q14.integrals[2].coeffs;
    match solve_g_quadrature(&broken, &a, centre(&q14), &grid).unwrap() {
        GReconstruction::Infeasible { equation, report } => {
            assert!(matches!(equation, Equation::Eq7 | Equation::Eq10));
            assert!(report.max_abs() > 1e-3);
        }
        GReconstruction::Feasible { .. } => panic!("x^4 + y^2 admits no such integral"),
    }
}

#[test]
fn y_component_ode_mirrors_the_x_component_ode() {
    let components = [
        Potential1D::closed_form("x^2 + 1/x^2", |x| x * x + 1.0 / (x * x)).with_poles(&[0.0]),
        Potential1D::closed_form("x^4 - x^2 + 0.3x", |x| x.powi(4) - x * x + 0.3 * x),
        Potential1D::closed_form("(x-1)^-2 + (x+1)^-2", |x| (x - 1.0).powi(-2) + (x + 1.0).powi(-2)).with_poles(&[-1.0, 1.0]),
    ];
    let xs: Vec<f64> = (0..21).map(|i| 1.2 + 0.05 * i as f64).collect();
    for v in &components {
        let (a2, a1, a0, ra, rb) = (0.7, -1.3, 0.4, 2.5, -0.8);
        let ode11 = ode_residual_11(v, a2, a1, a0, ra, rb, &xs).unwrap();
        let ode12 = ode_residual_12(v, a2, -a1, a0, ra, rb, &xs).unwrap();
        assert_eq!(ode11.equations[0].max_abs, ode12.equations[0].max_abs, "{}", v.label());
        assert_eq!(ode11.equations[0].rms, ode12.equations[0].rms, "{}", v.label());
        assert!(ode11.max_abs() > 0.0);
    }
}

#[test]
fn x_component_ode_separates_solutions_from_non_solutions() {
    // with only A012 = 1 the equation reads V1''' = rhs_a x + rhs_b
    let v = Potential1D::closed_form("x^2 + 1/x^2", |x| x * x + 1.0 / (x * x)).with_poles(&[0.0]);
    let xs: Vec<f64> = (1..20).map(|i| 0.25 * i as f64).collect();
    let r = ode_residual_11(&v, 0.0, 0.0, 1.0, 0.0, 0.0, &xs).unwrap();
    assert!(r.max_abs() > 1e-3);
    let quartic = Potential1D::closed_form("x^4", |x| x.powi(4));
    let r = ode_residual_11(&quartic, 0.0, 0.0, 1.0, 24.0, 0.0, &xs).unwrap();
    assert!(r.max_abs() <= 1e-14, "{}", r.max_abs());
}

#[test]
fn families_fit_their_configurations() {
    let xs: Vec<f64> = (0..25).map(|i| 0.4 + 0.07 * i as f64).collect();
    // A1 needs its poles at the roots of the leading quadratic, x = ±3.5
    let c = [0.6, -0.3, 1.1, 0.25];
    let configs = [
        (Family::A1, (1.0, 0.0, -12.25)),
        (Family::A2, (1.0, 0.0, 0.0)),
        (Family::A3, (0.0, 1.0, 0.0)),
        (Family::A4, (0.0, 0.0, 1.0)),
        (Family::A5, (0.0, 1.0, 0.5)),
        (Family::A6, (0.3, 0.2, 1.0)),
        (Family::A7, (0.3, 0.2, 1.0)),
    ];
    for (family, abc) in configs {
        let fit = fit_homogeneous_family(family, c, 3.5, abc, &xs).unwrap();
        assert!(fit.residual <= 1e-10, "{family:?}: {}", fit.residual);
    }
    assert!(matches!(
        fit_homogeneous_family(Family::A3, c, 0.0, (1.0, 0.0, 0.0), &xs),
        Err(Error::ConfigMismatch { .. })
    ));
    assert!(matches!(
        fit_homogeneous_family(Family::A4, c, 0.0, (0.0, 1.0, 1.0), &xs),
        Err(Error::ConfigMismatch { .. })
    ));
}

#[test]
fn fornberg_reproduces_classical_stencils() {
    let w = fornberg_weights(2, &[-1.0, 0.0, 1.0]);
    assert_eq!(w, vec![1.0, -2.0, 1.0]);
    let w = fornberg_weights(1, &[-2.0, -1.0, 0.0, 1.0, 2.0]);
    let want = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
    for (a, b) in w.iter().zip(want) {
        assert!((a - b).abs() <= 1e-15);
    }
}

#[test]
fn oracle_preconditions() {
    let q14 = instance("Q.14");
    let test = GaussianTest { center: (1.3, 1.3), sigma: 0.2 };
    let with_l = ThirdOrderIntegral::new(CoeffTensor::default().with((3, 0, 0), 1.0), CorrectionFields::zero(), "L^3").unwrap();
    assert!(matches!(commutator_oracle(&q14.potential, &with_l, &test, (0.8, 1.8), 0.05, 6), Err(Error::NotLFree)));
    let classical = q14.potential.with_hbar(0.0);
    assert!(matches!(
        commutator_oracle(&classical, &q14.integrals[2], &test, (0.8, 1.8), 0.05, 6),
        Err(Error::ClassicalOracle)
    ));
    assert!(commutator_oracle(&q14.potential, &q14.integrals[2], &test, (0.8, 1.8), 0.05, 5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn residuals_are_grid_independent_for_exact_pairs(nx in 5usize..21, ny in 5usize..21, shrink in 0.0f64..0.3) {
        let inst = instance("C.3");
        let (x, y) = (inst.domain.x, inst.domain.y);
        let dx = (x.1 - x.0) * shrink / 2.0;
        let grid = GridSpec::new((x.0 + dx, x.1 - dx), y, nx, ny);
        for integral in &inst.integrals {
            let r = residual_determining(&inst.potential, integral, &grid).unwrap();
            prop_assert!(r.max_abs() <= 1e-12);
            prop_assert_eq!(r.nodes, nx * ny);
        }
    }
}
