use superint::catalog;
use superint::dynamics::{
    conservation_report, integrate, integrate_verlet, random_states, run_ensemble, Event, Method, MIN_INTEGRAL_VALUE,
};
use superint::{CoeffTensor, CorrectionFields, ParamSet, PhaseState, SeparablePotential, ThirdOrderIntegral};

fn instance(id: &str) -> catalog::Instance {
    catalog::instantiate(id, &ParamSet::new()).unwrap()
}

fn reversed(s: PhaseState) -> PhaseState {
    PhaseState::new(s.x, s.y, -s.px, -s.py)
}

#[test]
fn trajectories_retrace_themselves_under_momentum_reversal() {
    for id in ["C.1", "C.2", "C.3", "C.4"] {
        let inst = instance(id);
        let s0 = random_states(&inst.dynamics_box.unwrap(), &inst.potential, &inst.integrals, 1, 11).unwrap()[0];
        let tol = 1e-12;
        let out = integrate(&inst.potential, s0, 10.0, tol).unwrap().last();
        let back = reversed(integrate(&inst.potential, reversed(out), 10.0, tol).unwrap().last());
        let gap = [back.x - s0.x, back.y - s0.y, back.px - s0.px, back.py - s0.py]
            .iter()
            .map(|d| d.abs())
            .fold(0.0, f64::max);
        assert!(gap <= 10.0 * tol, "{id}: {gap:.2e}");
    }
}

#[test]
fn drift_shrinks_as_the_tolerance_tightens() {
    for id in ["C.1", "C.3"] {
        let inst = instance(id);
        let s0 = random_states(&inst.dynamics_box.unwrap(), &inst.potential, &inst.integrals, 1, 5).unwrap()[0];
        let drifts: Vec<f64> = [1e-7, 1e-9, 1e-11]
            .iter()
            .map(|&tol| {
                let traj = integrate(&inst.potential, s0, 50.0, tol).unwrap();
                conservation_report(&traj, &inst.potential, &inst.integrals).unwrap().max_relative_drift()
            })
            .collect();
        for w in drifts.windows(2) {
            assert!(w[1] <= 2.0 * w[0], "{id}: {drifts:?}");
        }
        assert!(drifts[2] < drifts[0], "{id}: {drifts:?}");
    }
}

#[test]
fn classical_entries_conserve_their_integrals() {
    for e in catalog::entries().iter().filter(|e| e.id.starts_with("C.")) {
        let inst = instance(e.id);
        let states = random_states(&inst.dynamics_box.unwrap(), &inst.potential, &inst.integrals, 2, 3).unwrap();
        for (traj, report) in run_ensemble(&inst.potential, &inst.integrals, &states, 20.0, 1e-12).unwrap() {
            assert!(traj.completed, "{}", e.id);
            assert!(report.max_relative_drift() <= inst.drift_tolerance(), "{}: {:?}", e.id, report);
            assert_eq!(report.quantities.len(), inst.integrals.len() + 1);
        }
    }
}

#[test]
fn c7_run_into_the_wall_stops_with_an_event() {
    let inst = instance("C.7");
    let traj = integrate(&inst.potential, PhaseState::new(0.5, 0.0, -2.0, 0.0), 100.0, 1e-12).unwrap();
    assert!(!traj.completed);
    assert!(traj.events.iter().any(|e| matches!(e, Event::SingularityApproach { .. })));
    assert!(*traj.times.last().unwrap() < 100.0);
}

#[test]
fn free_flight_keeps_momentum_integrals_exactly() {
    let v = SeparablePotential::zero(0.0);
    let px3 = ThirdOrderIntegral::new(CoeffTensor::default().with((0, 3, 0), 1.0), CorrectionFields::zero(), "px^3").unwrap();
    let mixed = ThirdOrderIntegral::new(CoeffTensor::default().with((0, 1, 2), 2.0), CorrectionFields::zero(), "2px py^2").unwrap();
    let traj = integrate(&v, PhaseState::new(0.1, -0.3, 1.25, -0.5), 100.0, 1e-12).unwrap();
    let report = conservation_report(&traj, &v, &[px3, mixed]).unwrap();
    for q in &report.quantities {
        assert_eq!(q.max_deviation, 0.0, "{}", q.name);
    }
}

#[test]
fn verlet_agrees_with_the_adaptive_scheme() {
    let inst = instance("C.1");
    let s0 = PhaseState::new(1.0, 0.0, 0.0, 1.0);
    let adaptive = integrate(&inst.potential, s0, 5.0, 1e-12).unwrap().last();
    let verlet = integrate_verlet(&inst.potential, s0, 5.0, 1e-3).unwrap();
    assert_eq!(verlet.method, Method::Verlet);
    let last = verlet.last();
    assert!((last.x - adaptive.x).abs() <= 1e-5 && (last.y - adaptive.y).abs() <= 1e-5);
}

#[test]
fn random_states_are_reproducible_and_admissible() {
    let inst = instance("C.2");
    let bx = inst.dynamics_box.unwrap();
    let a = random_states(&bx, &inst.potential, &inst.integrals, 6, 42).unwrap();
    assert_eq!(a, random_states(&bx, &inst.potential, &inst.integrals, 6, 42).unwrap());
    assert_ne!(a, random_states(&bx, &inst.potential, &inst.integrals, 6, 43).unwrap());
    for s in &a {
        assert!(bx.x.0 <= s.x && s.x <= bx.x.1 && bx.py.0 <= s.py && s.py <= bx.py.1);
        for x in &inst.integrals {
            assert!(superint::eval_integral_classical(x, s).unwrap().abs() >= MIN_INTEGRAL_VALUE);
        }
    }
}
