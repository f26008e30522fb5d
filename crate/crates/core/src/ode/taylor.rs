//! High-order Taylor marching for scalar second-order equations
//! `y'' = F(x, y, y')`, with coefficients generated by jet recursion.

use crate::jet::Jet;

/// Number of Taylor coefficients kept per step.
pub(crate) const ORDER: usize = 26;

const STEP_EPS: f64 = 1e-16;
const H_MAX: f64 = 0.5;
pub(crate) const BLOWUP: f64 = 1e8;
pub(crate) const MIN_STEP: f64 = 1e-12;

/// Right-hand side of a scalar second-order equation, evaluable on jets.
pub(crate) trait SecondOrderRhs {
    fn rhs<const N: usize>(&self, x: Jet<N>, y: Jet<N>, yp: Jet<N>) -> Jet<N>;
}

/// Normalized Taylor coefficients of the solution through `(x0, y0, yp0)`.
pub(crate) fn coefficients<const N: usize, R: SecondOrderRhs>(ode: &R, x0: f64, y0: f64, yp0: f64) -> [f64; N] {
    let mut c = [0.0; N];
    c[0] = y0;
    if N > 1 {
        c[1] = yp0;
    }
    let x = Jet::<N>::variable(x0);
    for k in 0..N.saturating_sub(2) {
        let y = Jet::from_coeffs(c);
        let r = ode.rhs(x, y, y.derivative());
        c[k + 2] = r.coeffs()[k] / ((k + 1) * (k + 2)) as f64;
    }
    c
}

/// One accepted step: the polynomial `Σ c[k] (x − base)^k` valid between
/// `base` and `base + h`.
#[derive(Clone, Debug)]
pub(crate) struct Segment {
    pub base: f64,
    pub h: f64,
    pub c: [f64; ORDER],
}

impl Segment {
    /// Value and first two derivatives at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let t = x - self.base;
        let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for k in (0..ORDER).rev() {
            v = v * t + self.c[k];
            if k >= 1 {
                d1 = d1 * t + k as f64 * self.c[k];
            }
            if k >= 2 {
                d2 = d2 * t + (k * (k - 1)) as f64 * self.c[k];
            }
        }
        (v, d1, d2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Stop {
    Reached,
    /// `|y|` exceeded the blow-up threshold.
    Blowup,
    /// The step size fell below the minimum.
    Collapse,
}

#[derive(Clone, Debug)]
pub(crate) struct March {
    pub segments: Vec<Segment>,
    pub stop: Stop,
    /// Last state reached: `(x, y, y')`.
    pub last: (f64, f64, f64),
}

fn step_size(c: &[f64; ORDER]) -> f64 {
    let scale = c[0].abs().max(1.0);
    let mut h = H_MAX;
    for (k, ck) in c.iter().enumerate().skip(ORDER - 3) {
        if *ck != 0.0 {
            h = h.min((STEP_EPS * scale / ck.abs()).powf(1.0 / k as f64));
        }
    }
    h
}

/// Marches from `x0` towards `target`, recording one segment per step.
pub(crate) fn march<R: SecondOrderRhs>(ode: &R, x0: f64, y0: f64, yp0: f64, target: f64) -> March {
    let dir = if target >= x0 { 1.0 } else { -1.0 };
    let (mut x, mut y, mut yp) = (x0, y0, yp0);
    let mut segments = Vec::new();
    let stop = loop {
        if (target - x) * dir <= 0.0 {
            break Stop::Reached;
        }
        if !(y.abs() <= BLOWUP && yp.is_finite()) {
            break Stop::Blowup;
        }
        let c = coefficients::<ORDER, R>(ode, x, y, yp);
        if !c.iter().all(|v| v.is_finite()) {
            break Stop::Collapse;
        }
        let mut h = step_size(&c);
        let remaining = (target - x).abs();
        if h >= remaining {
            h = remaining;
        } else if h < MIN_STEP {
            break Stop::Collapse;
        }
        let seg = Segment { base: x, h: dir * h, c };
        let next = if h == remaining { target } else { x + dir * h };
        let (v, d1, _) = seg.eval(next);
        segments.push(seg);
        x = next;
        y = v;
        yp = d1;
    };
    March { segments, stop, last: (x, y, yp) }
}
