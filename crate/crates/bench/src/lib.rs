//! Benchmark fixtures.

use superint::catalog::{self, Instance};
use superint::specfun::PainleveIC;
use superint::{ParamSet, PhaseState};

pub fn instance(id: &str) -> Instance {
    catalog::instantiate(id, &ParamSet::new()).unwrap_or_else(|e| panic!("{id}: {e}"))
}

/// One closed-form, one singular and one transcendent-backed entry.
pub const RESIDUAL_ENTRIES: [&str; 3] = ["C.3", "Q.5", "Q.18"];

pub fn start_state(inst: &Instance) -> PhaseState {
    let bx = inst.dynamics_box.expect("classical entry");
    PhaseState::new((bx.x.0 + bx.x.1) / 2.0, (bx.y.0 + bx.y.1) / 2.0, bx.px.1 / 2.0, bx.py.1 / 2.0)
}

pub fn p4_special_ic() -> PainleveIC {
    PainleveIC::new(1.0, -1.0 / 3.0, -1.0 / 3.0)
}
