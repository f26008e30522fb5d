use proptest::prelude::*;

use superint::catalog;
use superint::dynamics::integrate;
use superint::{
    eval_integral_classical, poisson_bracket_residual, CoeffTensor, CorrectionFields, Dual2, ParamSet, PhaseState,
    Potential1D, SeparablePotential, ThirdOrderIntegral,
};

fn component(id: &str, second: bool) -> Potential1D {
    let inst = catalog::instantiate(id, &ParamSet::new()).unwrap();
    if second {
        inst.potential.v2
    } else {
        inst.potential.v1
    }
}

fn tower_gap(v: &Potential1D, x: f64) -> f64 {
    let h = 1e-4;
    let (lo, mid, hi) = (v.eval(x - h).unwrap(), v.eval(x).unwrap(), v.eval(x + h).unwrap());
    (1..5)
        .map(|n| {
            let fd = (hi.d(n - 1) - lo.d(n - 1)) / (2.0 * h);
            (fd - mid.d(n)).abs() / mid.d(n).abs().max(1.0)
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_channels_match_finite_differences(
        pick in 0usize..6,
        t in 0.05f64..0.95,
    ) {
        let (id, second) = [("C.1", false), ("Q.3", false), ("Q.5", false), ("Q.8", true), ("C.4", false), ("Q.14", true)][pick];
        let inst = catalog::instantiate(id, &ParamSet::new()).unwrap();
        let (lo, hi) = if second { inst.domain.y } else { inst.domain.x };
        let x = lo + (hi - lo) * t;
        let v = component(id, second);
        prop_assume!(v.distance_to_singularity(x) > 0.05);
        prop_assert!(tower_gap(&v, x) <= 1e-5, "{id} at {x}: {}", tower_gap(&v, x));
    }

    #[test]
    fn scaling_an_integral_scales_its_value(
        n in -4i32..5,
        negative in any::<bool>(),
        x in -2.0f64..2.0, y in -2.0f64..2.0, px in -2.0f64..2.0, py in -2.0f64..2.0,
    ) {
        let k = if negative { -(2f64.powi(n)) } else { 2f64.powi(n) };
        let inst = catalog::instantiate("C.3", &ParamSet::new()).unwrap();
        let s = PhaseState::new(x, y, px, py);
        for integral in &inst.integrals {
            let base = eval_integral_classical(integral, &s).unwrap();
            let scaled = eval_integral_classical(&integral.scaled(k), &s).unwrap();
            prop_assert_eq!(scaled, k * base);
        }
    }

    #[test]
    fn catalog_integrals_commute_with_h(
        pick in 0usize..4,
        tx in 0.1f64..0.9, ty in 0.1f64..0.9,
        px in -1.5f64..1.5, py in -1.5f64..1.5,
    ) {
        let id = ["C.1", "C.2", "C.3", "C.4"][pick];
        let inst = catalog::instantiate(id, &ParamSet::new()).unwrap();
        let (x, y) = (
            inst.domain.x.0 + (inst.domain.x.1 - inst.domain.x.0) * tx,
            inst.domain.y.0 + (inst.domain.y.1 - inst.domain.y.0) * ty,
        );
        prop_assume!(inst.potential.distance_to_singularity(x, y) > 0.05);
        let s = PhaseState::new(x, y, px, py);
        for integral in &inst.integrals {
            let pb = poisson_bracket_residual(integral, &inst.potential, &s).unwrap();
            let size = eval_integral_classical(integral, &s).unwrap().abs().max(1.0);
            prop_assert!(pb.abs() <= 1e-9 * size, "{id} {}: {pb}", integral.label);
        }
    }
}

#[test]
fn bracket_is_the_rate_of_change_along_the_flow() {
    let potential = SeparablePotential::new(
        Potential1D::closed_form("x^4", |x| x * x * x * x),
        Potential1D::closed_form("y^2", |y| y * y),
        0.0,
    );
    // not conserved for this potential, so the derivative is nonzero
    let a = CoeffTensor::default().with((3, 0, 0), 1.0).with((0, 2, 1), 0.5);
    let g = CorrectionFields::closed_form(|x: Dual2, y: Dual2| [x * y, x * x]);
    let integral = ThirdOrderIntegral::new(a, g, "probe").unwrap();
    let reversed = |s: PhaseState| PhaseState::new(s.x, s.y, -s.px, -s.py);
    let dt = 1e-3;
    for s in [PhaseState::new(0.3, -0.4, 0.9, 0.2), PhaseState::new(-1.1, 0.7, -0.3, 1.4)] {
        let ahead = integrate(&potential, s, dt, 1e-14).unwrap().last();
        let behind = reversed(integrate(&potential, reversed(s), dt, 1e-14).unwrap().last());
        let rate = (eval_integral_classical(&integral, &ahead).unwrap() - eval_integral_classical(&integral, &behind).unwrap())
            / (2.0 * dt);
        let pb = poisson_bracket_residual(&integral, &potential, &s).unwrap();
        assert!(pb.abs() > 0.1);
        assert!((rate - pb).abs() <= 1e-5 * (1.0 + pb.abs()), "rate {rate} vs bracket {pb}");
    }
}

#[test]
fn hamiltonian_adds_kinetic_and_potential_parts() {
    let v = SeparablePotential::new(
        Potential1D::closed_form("x^2", |x| x * x),
        Potential1D::closed_form("2y", |y| 2.0 * y),
        0.0,
    );
    let s = PhaseState::new(1.5, -0.5, 2.0, 1.0);
    assert_eq!(v.hamiltonian(&s).unwrap(), 0.5 * 5.0 + 2.25 - 1.0);
    assert_eq!(s.angular_momentum(), 1.5 * 1.0 - (-0.5) * 2.0);
}

#[test]
fn poles_are_reported_as_singular() {
    let v = Potential1D::closed_form("1/x^2", |x| 1.0 / (x * x)).with_poles(&[0.0]);
    assert!(v.eval(0.0).is_err());
    assert_eq!(v.distance_to_singularity(0.25), 0.25);
    let s = v.eval(0.5).unwrap();
    assert_eq!((s.d(0), s.d(1), s.d(2)), (4.0, -16.0, 96.0));
}

#[test]
fn params_round_trip_and_reject_unknown_names() {
    let p = ParamSet::from_pairs(&[("a", 2.0), ("hbar", 0.5)]).unwrap();
    assert_eq!(p.get("a"), Some(2.0));
    assert_eq!(p.len(), 2);
    assert!(ParamSet::from_pairs(&[("nonsense", 1.0)]).is_err());
    assert!(p.require("b").is_err());
}
