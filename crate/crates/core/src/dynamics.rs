//! Classical trajectories and conservation of `H` and the third-order integrals.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::PhaseBox;
use crate::error::{Error, Result};
use crate::ode::{Control, Dop853};
use crate::phasecore::{eval_integral_classical, PhaseState, SeparablePotential, ThirdOrderIntegral};

/// Default distance kept from singular points in position space.
pub const SINGULARITY_MARGIN: f64 = 1e-3;
/// Random states whose integral values fall below this are redrawn.
pub const MIN_INTEGRAL_VALUE: f64 = 0.05;
/// Floor of the denominator in relative drifts: quantities that start
/// smaller than this are measured against it instead of their own value.
pub const DRIFT_FLOOR: f64 = MIN_INTEGRAL_VALUE;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    /// The step that would have entered the margin was discarded.
    SingularityApproach { t: f64, x: f64, y: f64, distance: f64 },
    StepRejections { count: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dop853,
    /// Fixed-step velocity Verlet.
    Verlet,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub method: Method,
    /// Local error tolerance, or the step for [`Method::Verlet`].
    pub tol: f64,
    pub events: Vec<Event>,
    /// False when the run stopped early at a singularity.
    pub completed: bool,
}

impl Trajectory {
    pub fn last(&self) -> PhaseState {
        *self.states.last().expect("a trajectory holds its initial state")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn record(&mut self, t: f64, s: PhaseState) {
        self.times.push(t);
        self.states.push(s);
    }
}

fn ensure_classical(potential: &SeparablePotential) -> Result<()> {
    if potential.hbar != 0.0 {
        return Err(Error::InvalidParameter { name: "hbar".into(), reason: "trajectories need a classical potential (hbar = 0)".into() });
    }
    Ok(())
}

fn ensure_regular(potential: &SeparablePotential, s: &PhaseState, margin: f64) -> Result<()> {
    if !s.is_finite() {
        return Err(Error::InvalidInitialCondition("non-finite state".into()));
    }
    if !(potential.distance_to_singularity(s.x, s.y) >= margin) {
        return Err(Error::SingularPoint { x: s.x, y: s.y });
    }
    Ok(())
}

fn force(potential: &SeparablePotential, x: f64, y: f64) -> Result<(f64, f64)> {
    let (v1, v2) = potential.stacks(x, y)?;
    Ok((-v1.d(1), -v2.d(1)))
}

/// Integrates Hamilton's equations with the adaptive eighth-order scheme.
pub fn integrate(potential: &SeparablePotential, state0: PhaseState, t_end: f64, tol: f64) -> Result<Trajectory> {
    integrate_with_margin(potential, state0, t_end, tol, SINGULARITY_MARGIN)
}

pub fn integrate_with_margin(
    potential: &SeparablePotential,
    state0: PhaseState,
    t_end: f64,
    tol: f64,
    margin: f64,
) -> Result<Trajectory> {
    ensure_classical(potential)?;
    ensure_regular(potential, &state0, margin)?;
    if !(tol > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidInterval { lo: 0.0, hi: t_end, reason: format!("need tol > 0 (got {tol})") });
    }
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        method: Method::Dop853,
        tol,
        events: Vec::new(),
        completed: true,
    };
    traj.record(0.0, state0);
    let rhs = |_t: f64, s: &[f64; 4]| -> Result<[f64; 4]> {
        let (fx, fy) = force(potential, s[0], s[1])?;
        Ok([s[2], s[3], fx, fy])
    };
    let mut approach = None;
    let outcome = Dop853::new(tol, tol).integrate(rhs, 0.0, state0.to_array(), t_end, |t, s| {
        let d = potential.distance_to_singularity(s[0], s[1]);
        if d < margin {
            approach = Some(Event::SingularityApproach { t, x: s[0], y: s[1], distance: d });
            return Control::Stop;
        }
        traj.record(t, PhaseState::from_array(*s));
        Control::Continue
    })?;
    if outcome.rejected > 0 {
        traj.events.push(Event::StepRejections { count: outcome.rejected });
    }
    if let Some(e) = approach {
        traj.events.push(e);
        traj.completed = false;
    }
    Ok(traj)
}

/// Fixed-step velocity Verlet; every step is recorded.
pub fn integrate_verlet(potential: &SeparablePotential, state0: PhaseState, t_end: f64, dt: f64) -> Result<Trajectory> {
    ensure_classical(potential)?;
    ensure_regular(potential, &state0, SINGULARITY_MARGIN)?;
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidInterval { lo: 0.0, hi: t_end, reason: format!("need dt > 0 (got {dt})") });
    }
    let steps = (t_end / dt).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        method: Method::Verlet,
        tol: h,
        events: Vec::new(),
        completed: true,
    };
    let mut s = state0;
    traj.record(0.0, s);
    let (mut fx, mut fy) = force(potential, s.x, s.y)?;
    for k in 1..=steps {
        let (px, py) = (s.px + 0.5 * h * fx, s.py + 0.5 * h * fy);
        let (x, y) = (s.x + h * px, s.y + h * py);
        let d = potential.distance_to_singularity(x, y);
        if d < SINGULARITY_MARGIN {
            traj.events.push(Event::SingularityApproach { t: k as f64 * h, x, y, distance: d });
            traj.completed = false;
            break;
        }
        (fx, fy) = force(potential, x, y)?;
        s = PhaseState::new(x, y, px + 0.5 * h * fx, py + 0.5 * h * fy);
        traj.record(k as f64 * h, s);
    }
    Ok(traj)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantityDrift {
    pub name: String,
    pub initial: f64,
    pub max_deviation: f64,
    pub relative_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftReport {
    /// `H` first, then `X1..Xn`.
    pub quantities: Vec<QuantityDrift>,
    pub samples: usize,
}

impl DriftReport {
    pub fn hamiltonian(&self) -> &QuantityDrift {
        &self.quantities[0]
    }

    pub fn integrals(&self) -> &[QuantityDrift] {
        &self.quantities[1..]
    }

    pub fn max_relative_drift(&self) -> f64 {
        self.quantities.iter().map(|q| q.relative_drift).fold(0.0, f64::max)
    }
}

/// `H, X1..Xn` at one state.
pub fn conserved_values(
    potential: &SeparablePotential,
    integrals: &[ThirdOrderIntegral],
    s: &PhaseState,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(integrals.len() + 1);
    out.push(potential.hamiltonian(s)?);
    for x in integrals {
        out.push(eval_integral_classical(x, s)?);
    }
    Ok(out)
}

pub fn conservation_report(
    traj: &Trajectory,
    potential: &SeparablePotential,
    integrals: &[ThirdOrderIntegral],
) -> Result<DriftReport> {
    let values = traj
        .states
        .iter()
        .map(|s| conserved_values(potential, integrals, s))
        .collect::<Result<Vec<_>>>()?;
    let first = values.first().ok_or_else(|| Error::InvalidInitialCondition("empty trajectory".into()))?;
    let quantities = (0..first.len())
        .map(|k| {
            let initial = first[k];
            let max_deviation = values.iter().map(|v| (v[k] - initial).abs()).fold(0.0, f64::max);
            let name = if k == 0 { "H".to_string() } else { format!("X{k}") };
            QuantityDrift { name, initial, max_deviation, relative_drift: max_deviation / initial.abs().max(DRIFT_FLOOR) }
        })
        .collect();
    Ok(DriftReport { quantities, samples: values.len() })
}

/// CSV with columns `t,x,y,px,py,H,X1..Xn`, one row per recorded sample.
pub fn write_csv<W: Write>(
    out: W,
    traj: &Trajectory,
    potential: &SeparablePotential,
    integrals: &[ThirdOrderIntegral],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["t", "x", "y", "px", "py", "H"].iter().map(|s| s.to_string()).collect();
    header.extend((1..=integrals.len()).map(|k| format!("X{k}")));
    w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![*t, s.x, s.y, s.px, s.py];
        row.extend(conserved_values(potential, integrals, s)?);
        w.write_record(row.iter().map(|v| format!("{v:.16e}"))).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reproducible random states in `bx`, redrawn while off the potential's
/// domain or while any integral is smaller than [`MIN_INTEGRAL_VALUE`].
pub fn random_states(
    bx: &PhaseBox,
    potential: &SeparablePotential,
    integrals: &[ThirdOrderIntegral],
    n: usize,
    seed: u64,
) -> Result<Vec<PhaseState>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |r: (f64, f64)| if r.0 == r.1 { r.0 } else { rng.gen_range(r.0..r.1) };
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n {
        attempts += 1;
        if attempts > 10_000 * n.max(1) {
            return Err(Error::InvalidInitialCondition("no admissible random state in the sampling box".into()));
        }
        let s = PhaseState::new(draw(bx.x), draw(bx.y), draw(bx.px), draw(bx.py));
        if potential.distance_to_singularity(s.x, s.y) < SINGULARITY_MARGIN {
            continue;
        }
        let Ok(values) = conserved_values(potential, integrals, &s) else { continue };
        if values[1..].iter().all(|v| v.abs() >= MIN_INTEGRAL_VALUE) {
            out.push(s);
        }
    }
    Ok(out)
}

/// Trajectories and drift reports for a batch of states, run in parallel.
pub fn run_ensemble(
    potential: &SeparablePotential,
    integrals: &[ThirdOrderIntegral],
    states: &[PhaseState],
    t_end: f64,
    tol: f64,
) -> Result<Vec<(Trajectory, DriftReport)>> {
    states
        .par_iter()
        .map(|s| {
            let traj = integrate(potential, *s, t_end, tol)?;
            let report = conservation_report(&traj, potential, integrals)?;
            Ok((traj, report))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasecore::Potential1D;

    #[test]
    fn free_flight() {
        let v = SeparablePotential::zero(0.0);
        let t = integrate(&v, PhaseState::new(0.0, 0.0, 1.0, 2.0), 3.0, 1e-12).unwrap();
        let s = t.last();
        assert!((s.x - 3.0).abs() < 1e-12 && (s.y - 6.0).abs() < 1e-12);
        assert_eq!((s.px, s.py), (1.0, 2.0));
    }

    #[test]
    fn quantum_potential_rejected() {
        let v = SeparablePotential::zero(1.0);
        assert!(integrate(&v, PhaseState::new(0.0, 0.0, 1.0, 0.0), 1.0, 1e-10).is_err());
    }

    #[test]
    fn wall_stops_the_run() {
        let v = SeparablePotential::new(
            Potential1D::closed_form("-1/x", |x| -x.recip()).with_poles(&[0.0]),
            Potential1D::zero(),
            0.0,
        );
        let t = integrate(&v, PhaseState::new(1.0, 0.0, -0.5, 0.0), 10.0, 1e-10).unwrap();
        assert!(!t.completed);
        assert!(matches!(t.events.last(), Some(Event::SingularityApproach { .. })));
        assert!(t.states.iter().all(|s| s.x.abs() >= SINGULARITY_MARGIN));
    }
}
