//! Implicitly defined classical potentials and the Painlevé-built quantum
//! potentials of the two one-dimensional reductions.
//!
//! Case i: `V1` solves the quartic relation
//! `c x^2 - d^2 + 2d(V1 - ax^2)(3V1 + ax^2) = (9V1 - ax^2)(V1 - ax^2)^3`.
//! Case ii: `V1` solves the cubic `V1 (V1 - bx)^2 = d`.
//!
//! Branches are followed by predictor–corrector continuation and turned
//! into [`Potential1D`]s whose derivative towers come from implicit
//! differentiation on jets.

use std::io::Write;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::phasecore::{DerivStack, Potential1D, SeparablePotential};
use crate::specfun::{painleve2, PainleveIC, SpecFunSolution};

/// Largest relative residual accepted for a seed.
pub const SEED_TOL: f64 = 1e-8;
/// Scan resolution used when no seed is given.
pub const SCAN_STEP: f64 = 1e-3;

const MIN_SUBSTEP: f64 = 1e-10;

/// One of the two generating relations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ImplicitRelation {
    CaseI { a: f64, c: f64, d: f64 },
    CaseII { b: f64, d: f64 },
}

trait Field:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Mul<f64, Output = Self>
    + Sub<f64, Output = Self>
{
}
impl Field for f64 {}
impl<const N: usize> Field for Jet<N> {}

impl ImplicitRelation {
    pub fn id(&self) -> &'static str {
        match self {
            ImplicitRelation::CaseI { .. } => "eq24",
            ImplicitRelation::CaseII { .. } => "eq34",
        }
    }

    fn eval<T: Field>(&self, x: T, v: T) -> T {
        match *self {
            ImplicitRelation::CaseI { a, c, d } => {
                let ax2 = x * a * x;
                let w = v - ax2;
                x * x * c + w * (v * 3.0 + ax2) * (2.0 * d) - (v * 9.0 - ax2) * w * w * w - d * d
            }
            ImplicitRelation::CaseII { b, d } => {
                let w = v - x * b;
                v * w * w - d
            }
        }
    }

    /// Value of the relation written as `F(x, V) = 0`.
    pub fn residual(&self, x: f64, v: f64) -> f64 {
        self.eval(x, v)
    }

    /// Sum of the magnitudes of the relation's terms.
    pub fn scale(&self, x: f64, v: f64) -> f64 {
        match *self {
            ImplicitRelation::CaseI { a, c, d } => {
                let (av, ax2) = (v.abs(), (a * x * x).abs());
                c.abs() * x * x
                    + d * d
                    + 2.0 * d.abs() * (av + ax2) * (3.0 * av + ax2)
                    + (9.0 * av + ax2) * (av + ax2).powi(3)
            }
            ImplicitRelation::CaseII { b, d } => {
                let av = v.abs();
                av * (av + (b * x).abs()).powi(2) + d.abs()
            }
        }
    }

    pub fn relative_residual(&self, x: f64, v: f64) -> f64 {
        let s = self.scale(x, v);
        let r = self.residual(x, v).abs();
        if s == 0.0 {
            r
        } else {
            r / s
        }
    }

    /// `(F, F_V, F_VV)` at a point.
    fn v_derivs(&self, x: f64, v: f64) -> (f64, f64, f64) {
        let f = self.eval(Jet::<3>::constant(x), Jet::<3>::variable(v));
        let c = f.coeffs();
        (c[0], c[1], 2.0 * c[2])
    }

    fn dfdx(&self, x: f64, v: f64) -> f64 {
        self.eval(Jet::<2>::variable(x), Jet::<2>::constant(v)).coeffs()[1]
    }

    /// Implicit slope `dV/dx = -F_x / F_V`.
    pub fn slope(&self, x: f64, v: f64) -> f64 {
        -self.dfdx(x, v) / self.v_derivs(x, v).1
    }

    /// Schröder's iteration, which keeps quadratic convergence at the
    /// multiple roots the relations have when `d = 0`.
    fn polish(&self, x: f64, mut v: f64) -> Option<f64> {
        for _ in 0..80 {
            let (f, fv, fvv) = self.v_derivs(x, v);
            if f == 0.0 {
                return Some(v);
            }
            let denom = fv * fv - f * fvv;
            if denom == 0.0 || !denom.is_finite() {
                break;
            }
            let dv = f * fv / denom;
            v -= dv;
            if !v.is_finite() {
                return None;
            }
            if dv.abs() <= 4.0 * f64::EPSILON * (1.0 + v.abs()) {
                break;
            }
        }
        (self.relative_residual(x, v) <= 1e-12).then(|| self.snap(x, v))
    }

    /// The float within a few ulps of `v` with the smallest residual.
    fn snap(&self, x: f64, v: f64) -> f64 {
        let mut best = (self.residual(x, v).abs(), v);
        let (mut lo, mut hi) = (v, v);
        for _ in 0..8 {
            lo = lo.next_down();
            hi = hi.next_up();
            for c in [lo, hi] {
                let r = self.residual(x, c).abs();
                if r < best.0 {
                    best = (r, c);
                }
            }
        }
        best.1
    }

    /// Real roots inside `window`, from a dense scan (sign changes and
    /// local minima of `|F|`) followed by polishing.
    pub fn scan_roots(&self, x: f64, window: (f64, f64), step: f64) -> Vec<f64> {
        let (lo, hi) = window;
        let n = ((hi - lo) / step).ceil().max(2.0) as usize;
        let vs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let fs: Vec<f64> = vs.iter().map(|&v| self.residual(x, v)).collect();
        let mut guesses = Vec::new();
        for i in 0..n {
            if fs[i] == 0.0 || fs[i].signum() != fs[i + 1].signum() {
                guesses.push(vs[i]);
            }
            if i > 0 && fs[i].abs() < fs[i - 1].abs() && fs[i].abs() < fs[i + 1].abs() {
                guesses.push(vs[i]);
            }
        }
        let mut roots: Vec<f64> = guesses.into_iter().filter_map(|g| self.polish(x, g)).collect();
        roots.retain(|r| *r >= lo - step && *r <= hi + step);
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
        roots
    }

    /// Validates and polishes a seed.
    pub fn seed(&self, x0: f64, v0: f64) -> Result<f64> {
        let residual = self.relative_residual(x0, v0);
        if !(residual <= SEED_TOL) {
            return Err(Error::SeedInvalid { x0, v0, residual });
        }
        Ok(self.polish(x0, v0).unwrap_or(v0))
    }

    /// Moves from the root `(x, v)` to `target`, subdividing as needed. The
    /// secant through `prev` (or the tangent) predicts; a corrector that
    /// lands too far from the prediction is treated as a branch jump.
    fn continue_to(&self, x: f64, v: f64, prev: Option<(f64, f64)>, target: f64) -> Result<(f64, Option<(f64, f64)>)> {
        let (mut x, mut v, mut prev) = (x, v, prev);
        let mut h = target - x;
        while x != target {
            if (target - x).abs() < h.abs() {
                h = target - x;
            }
            let xn = if (target - x - h).abs() <= 1e-15 * target.abs().max(1.0) { target } else { x + h };
            let predicted = match prev {
                Some((xp, vp)) if xp != x => v + (v - vp) / (x - xp) * (xn - x),
                _ => {
                    let s = self.slope(x, v);
                    if s.is_finite() {
                        v + s * (xn - x)
                    } else {
                        v
                    }
                }
            };
            let accepted = self.polish(xn, predicted).filter(|&vn| {
                let step = (vn - v).abs().max((predicted - v).abs());
                (vn - predicted).abs() <= 0.25 * step + 1e-9 * (1.0 + vn.abs())
            });
            match accepted {
                Some(vn) => {
                    prev = Some((x, v));
                    x = xn;
                    v = vn;
                    h *= 1.5;
                }
                None => {
                    h *= 0.5;
                    if h.abs() < MIN_SUBSTEP {
                        return Err(Error::BranchTurning { at: x });
                    }
                }
            }
        }
        Ok((v, prev))
    }

    /// Follows the branch through `seed` across every abscissa of `xs`.
    pub fn trace(&self, xs: &[f64], seed: (f64, f64)) -> Result<BranchTrace> {
        let (x0, v0) = seed;
        let v0 = self.seed(x0, v0)?;
        let mut values = vec![f64::NAN; xs.len()];
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
        let split = order.partition_point(|&i| xs[i] < x0);
        let mut walk = |idx: &mut dyn Iterator<Item = &usize>| -> Result<()> {
            let (mut x, mut v, mut prev) = (x0, v0, None);
            for &i in idx {
                let (vn, p) = self.continue_to(x, v, prev, xs[i])?;
                prev = p;
                x = xs[i];
                v = vn;
                values[i] = v;
            }
            Ok(())
        };
        walk(&mut order[split..].iter())?;
        walk(&mut order[..split].iter().rev())?;
        let residuals = xs.iter().zip(&values).map(|(&x, &v)| self.relative_residual(x, v)).collect();
        Ok(BranchTrace { relation: *self, xs: xs.to_vec(), values, residuals, seed: (x0, v0) })
    }
}

/// `V1` along one real root branch of a generating relation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchTrace {
    pub relation: ImplicitRelation,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    /// Relative substitution residual at each node.
    pub residuals: Vec<f64>,
    pub seed: (f64, f64),
}

impl BranchTrace {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Writes `x,V1,residual` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "V1", "residual"])?;
        for ((x, v), r) in self.xs.iter().zip(&self.values).zip(&self.residuals) {
            out.write_record([format!("{x:.16e}"), format!("{v:.16e}"), format!("{r:.16e}")])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Branch of the case-i relation through `seed`.
pub fn solve_case_i_branch(a: f64, c: f64, d: f64, xs: &[f64], seed: (f64, f64)) -> Result<BranchTrace> {
    ImplicitRelation::CaseI { a, c, d }.trace(xs, seed)
}

/// Branch of the case-ii relation through `seed`.
pub fn solve_case_ii_branch(b: f64, d: f64, xs: &[f64], seed: (f64, f64)) -> Result<BranchTrace> {
    ImplicitRelation::CaseII { b, d }.trace(xs, seed)
}

/// Turns a trace into a potential component on `(min xs, max xs)`. Values
/// between nodes are interpolated, re-polished onto the relation and
/// differentiated implicitly on jets.
pub fn branch_potential(trace: &BranchTrace, label: impl Into<String>) -> Result<Potential1D> {
    let mut pts: Vec<(f64, f64)> = trace.xs.iter().copied().zip(trace.values.iter().copied()).collect();
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    pts.dedup_by(|p, q| p.0 == q.0);
    if pts.len() < 2 {
        return Err(Error::InvalidInterval { lo: trace.seed.0, hi: trace.seed.0, reason: "trace needs two nodes".into() });
    }
    let rel = trace.relation;
    let (lo, hi) = (pts[0].0, pts[pts.len() - 1].0);
    let pts = Arc::new(pts);
    Ok(Potential1D::from_evaluator(label, move |x| {
        let i = pts.partition_point(|p| p.0 < x).clamp(1, pts.len() - 1);
        let ((x0, v0), (x1, v1)) = (pts[i - 1], pts[i]);
        let (s0, s1) = (rel.slope(x0, v0), rel.slope(x1, v1));
        let guess = hermite(x0, v0, s0, x1, v1, s1, x);
        let v = rel.polish(x, guess).ok_or(Error::BranchTurning { at: x })?;
        Ok(DerivStack::from_jet(&implicit_jet(&rel, x, v)))
    })
    .with_domain(lo, hi))
}

fn hermite(x0: f64, v0: f64, s0: f64, x1: f64, v1: f64, s1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let (t2, t3) = (t * t, t * t * t);
    let s0 = if s0.is_finite() { s0 } else { (v1 - v0) / h };
    let s1 = if s1.is_finite() { s1 } else { (v1 - v0) / h };
    (2.0 * t3 - 3.0 * t2 + 1.0) * v0 + (t3 - 2.0 * t2 + t) * h * s0 + (-2.0 * t3 + 3.0 * t2) * v1 + (t3 - t2) * h * s1
}

/// Taylor jet of the branch at a root `(x, v)`: chord iteration on jets with
/// the frozen derivative `F_V` gains one order per pass.
fn implicit_jet(rel: &ImplicitRelation, x: f64, v: f64) -> Jet<5> {
    let (_, fv, _) = rel.v_derivs(x, v);
    let xj = Jet::<5>::variable(x);
    let mut vj = Jet::<5>::constant(v);
    for _ in 0..6 {
        let f = rel.eval(xj, vj);
        let mut c = *f.coeffs();
        c[0] = 0.0;
        vj = vj - Jet::from_coeffs(c) * (1.0 / fv);
    }
    vj
}

/// Constancy summary of a first-integral expression along a grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FirstIntegralSample {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub mean: f64,
    pub max_deviation: f64,
}

impl FirstIntegralSample {
    fn from_values(xs: &[f64], values: Vec<f64>) -> Self {
        let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
        let max_deviation = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        Self { xs: xs.to_vec(), values, mean, max_deviation }
    }

    /// `max_deviation / |mean|`, or the absolute deviation when the mean vanishes.
    pub fn relative_deviation(&self) -> f64 {
        if self.mean == 0.0 {
            self.max_deviation
        } else {
            self.max_deviation / self.mean.abs()
        }
    }
}

/// `k = ħ²(xV1''' - V1'') + 4x(ax² - 3V1)V1' + 6V1² + 12ax²V1 - 2a²x⁴` along `xs`.
pub fn check_first_integral_case_i(v1: &Potential1D, a: f64, hbar: f64, xs: &[f64]) -> Result<FirstIntegralSample> {
    let values = xs
        .iter()
        .map(|&x| {
            let s = v1.eval(x)?;
            let (v, d1, d2, d3) = (s.d(0), s.d(1), s.d(2), s.d(3));
            let ax2 = a * x * x;
            Ok(hbar * hbar * (x * d3 - d2) - 2.0 * (9.0 * v - ax2) * (v - ax2) + 4.0 * (ax2 - 3.0 * v) * (x * d1 - 2.0 * v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FirstIntegralSample::from_values(xs, values))
}

/// `k1 = 2bħ²(V1 - bx)V1'' + bħ²(2b - V1')V1' - 8bV1(V1 - bx)²` along `xs`.
pub fn check_first_integral_case_ii(v1: &Potential1D, b: f64, hbar: f64, xs: &[f64]) -> Result<FirstIntegralSample> {
    let h2 = hbar * hbar;
    let values = xs
        .iter()
        .map(|&x| {
            let s = v1.eval(x)?;
            let (v, d1, d2) = (s.d(0), s.d(1), s.d(2));
            let w = v - b * x;
            Ok(2.0 * b * h2 * w * d2 + b * h2 * (2.0 * b - d1) * d1 - 8.0 * b * v * w * w)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FirstIntegralSample::from_values(xs, values))
}

/// The smooth interpolating family `V1 = (a/9)(x ± 2√(d̃ + x²))²`.
#[derive(Clone, Debug)]
pub struct InterpOscillator {
    pub potential: Potential1D,
    /// Amount by which this form exceeds the root of the quartic relation
    /// with `(c, d) = (128a⁴d̃³/729, 4a²d̃²/27)`.
    pub constant_offset: f64,
    pub relation: ImplicitRelation,
}

impl InterpOscillator {
    /// The component shifted onto the quartic relation's root.
    pub fn on_relation(&self) -> Potential1D {
        let off = self.constant_offset;
        let inner = self.potential.clone();
        Potential1D::from_evaluator(format!("{} - {off}", inner.label()), move |x| {
            let mut s = inner.eval(x)?;
            s.0[0] -= off;
            Ok(s)
        })
    }
}

pub fn build_interp_oscillator(a: f64, d_tilde: f64, sign: f64) -> Result<InterpOscillator> {
    if !(d_tilde >= 0.0) {
        return Err(Error::InvalidParameter { name: "d_tilde".into(), reason: "must be non-negative".into() });
    }
    if a == 0.0 || !a.is_finite() {
        return Err(Error::InvalidParameter { name: "a".into(), reason: "must be finite and nonzero".into() });
    }
    if sign.abs() != 1.0 {
        return Err(Error::InvalidParameter { name: "sign".into(), reason: "must be +1 or -1".into() });
    }
    let label = format!("({a}/9)(x {} 2 sqrt({d_tilde} + x^2))^2", if sign > 0.0 { "+" } else { "-" });
    let potential = Potential1D::closed_form(label, move |x| {
        let r = (x * x + d_tilde).sqrt();
        let u = x + r * (2.0 * sign);
        u * u * (a / 9.0)
    });
    let c = 128.0 * a.powi(4) * d_tilde.powi(3) / 729.0;
    let d = 4.0 * a * a * d_tilde * d_tilde / 27.0;
    Ok(InterpOscillator {
        potential,
        constant_offset: 2.0 * a * d_tilde / 9.0,
        relation: ImplicitRelation::CaseI { a, c, d },
    })
}

/// The component `W` built from a fourth-transcendent solution with
/// parameter `b/ħ²`.
pub fn w_from_p4(p4: &Arc<SpecFunSolution>, b: f64, hbar: f64, b1: f64, k1: f64) -> Result<Potential1D> {
    let crate::specfun::DefiningOde::P4 { alpha, .. } = p4.ode() else {
        return Err(Error::InvalidParameter { name: "p4".into(), reason: "not a fourth-transcendent solution".into() });
    };
    if b == 0.0 || hbar <= 0.0 {
        return Err(Error::InvalidParameter { name: "b".into(), reason: "b must be nonzero and hbar positive".into() });
    }
    let expected = b / (hbar * hbar);
    if (alpha - expected).abs() > 1e-12 * expected.abs() {
        return Err(Error::InvalidParameter {
            name: "alpha".into(),
            reason: format!("solution built with alpha = {alpha}, expected b/hbar^2 = {expected}"),
        });
    }
    let (lo, hi) = p4.interval();
    let sol = p4.clone();
    let shift = (hbar * hbar * k1 - hbar * b1) / 6.0;
    Ok(Potential1D::from_evaluator("W[P4]", move |x| {
        let p = sol.tower::<6>(x)?;
        let dp = p.derivative();
        let xj = Jet::<6>::variable(x);
        let w = dp * (0.5 * hbar * b1) - p * p * (0.5 * b) - xj * p * (0.5 * b) - xj * xj * (b / 12.0) - shift;
        Ok(DerivStack::from_jet(&w.truncate::<5>()))
    })
    .with_domain(lo, hi))
}

/// Normalized residual of `ħ²W'''' = 12WW'' + 12W'² + bxW' + 2bW - b²x²/6`.
pub fn eq19_residual(w: &Potential1D, b: f64, hbar: f64, x: f64) -> Result<f64> {
    let s = w.eval(x)?;
    let terms = [
        hbar * hbar * s.d(4),
        -12.0 * s.d(0) * s.d(2),
        -12.0 * s.d(1) * s.d(1),
        -b * x * s.d(1),
        -2.0 * b * s.d(0),
        b * b * x * x / 6.0,
    ];
    let big = terms.iter().map(|t| t.abs()).fold(0.0, f64::max);
    Ok(terms.iter().sum::<f64>().abs() / (1.0 + big))
}

/// `Y(ξ) = (P2' + P2² + ξ/2) / (2β)` on the solution's interval.
pub fn y_from_p2(p2: &Arc<SpecFunSolution>, beta: f64) -> Result<Potential1D> {
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::InvalidParameter { name: "beta".into(), reason: "must be finite and nonzero".into() });
    }
    let (lo, hi) = p2.interval();
    let sol = p2.clone();
    let y = Potential1D::from_evaluator("Y[P2]", move |xi| {
        let p = sol.tower::<6>(xi)?;
        let xj = Jet::<6>::variable(xi);
        let y = (p.derivative() + p * p + xj * 0.5) * (1.0 / (2.0 * beta));
        Ok(DerivStack::from_jet(&y.truncate::<5>()))
    });
    // the equation is singular where Y vanishes
    let n = 400;
    let mut last: Option<f64> = None;
    for i in 0..=n {
        let xi = lo + (hi - lo) * i as f64 / n as f64;
        let v = y.value(xi)?;
        if v == 0.0 || last.is_some_and(|l| l.signum() != v.signum()) {
            return Err(Error::ZeroCrossing { at: xi });
        }
        last = Some(v);
    }
    Ok(y.with_domain(lo, hi))
}

/// Normalized residual of `Y'' = (Y'² - 1)/(2Y) + Y(4βY - ξ)`.
pub fn eq38_residual(y: &Potential1D, beta: f64, xi: f64) -> Result<f64> {
    let s = y.eval(xi)?;
    let (v, d1, d2) = (s.d(0), s.d(1), s.d(2));
    let terms = [d2, -(d1 * d1 - 1.0) / (2.0 * v), -v * (4.0 * beta * v - xi)];
    let big = terms.iter().map(|t| t.abs()).fold(0.0, f64::max);
    Ok(terms.iter().sum::<f64>().abs() / (1.0 + big))
}

/// Which quantum case-ii construction to use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CaseIIRoute {
    /// `V1 = bx + (2ħb)^(2/3) P2²((2b/ħ²)^(1/3) x, 0)`.
    ZeroK2 { ic: PainleveIC },
    /// `V1 = (2ħ²b²)^(1/3) (P2' + P2²)(z, κ)`, `z = -(4b/ħ²)^(1/3) x`.
    Kappa { kappa: f64, ic: PainleveIC },
}

/// Solves for the transcendent on the image of `x_interval` and wraps it
/// as a component in `x`. The solution must cover the whole image.
pub(crate) fn scaled_transcendent<F>(
    label: String,
    sol: Arc<SpecFunSolution>,
    s: f64,
    x_interval: (f64, f64),
    f: F,
) -> Result<Potential1D>
where
    F: Fn(Jet<6>, Jet<6>, Jet<6>) -> Jet<6> + Send + Sync + 'static,
{
    if sol.is_truncated() {
        return Err(Error::PoleCollision { at: sol.poles()[0] / s });
    }
    Ok(Potential1D::from_evaluator(label, move |x| {
        let p = sol.tower::<6>(s * x)?;
        let v = f(Jet::variable(x), p.scale_variable(s), p.derivative().scale_variable(s));
        Ok(DerivStack::from_jet(&v.truncate::<5>()))
    })
    .with_domain(x_interval.0, x_interval.1))
}

/// Image of `(lo, hi)` under `x -> s x`, widened by `pad` on both sides first.
pub fn scaled_interval(lo: f64, hi: f64, s: f64, pad: f64) -> (f64, f64) {
    let (a, b) = (s * (lo - pad), s * (hi + pad));
    (a.min(b), a.max(b))
}

/// Quantum case-ii potential `V = V1(x) + ay` on `x_interval`.
pub fn v_case_ii_quantum(a: f64, b: f64, hbar: f64, route: CaseIIRoute, x_interval: (f64, f64)) -> Result<SeparablePotential> {
    if a == 0.0 || b == 0.0 || !(hbar > 0.0) {
        return Err(Error::InvalidParameter { name: "a/b/hbar".into(), reason: "need a != 0, b != 0, hbar > 0".into() });
    }
    let (lo, hi) = x_interval;
    let pad = 0.05 * (hi - lo).abs().max(1e-3);
    let v1 = match route {
        CaseIIRoute::ZeroK2 { ic } => {
            let s = (2.0 * b / (hbar * hbar)).cbrt();
            let k = (2.0 * hbar * b).cbrt().powi(2);
            let sol = Arc::new(painleve2(scaled_interval(lo, hi, s, pad), 0.0, ic)?);
            scaled_transcendent(format!("{b}x + (2hbar b)^(2/3) P2^2"), sol, s, (lo - pad, hi + pad), move |x, p, _| {
                x * b + p * p * k
            })?
        }
        CaseIIRoute::Kappa { kappa, ic } => {
            let s = -(4.0 * b / (hbar * hbar)).cbrt();
            let k = (2.0 * hbar * hbar * b * b).cbrt();
            let sol = Arc::new(painleve2(scaled_interval(lo, hi, s, pad), kappa, ic)?);
            scaled_transcendent(format!("(2hbar^2 b^2)^(1/3)(P2' + P2^2), kappa = {kappa}"), sol, s, (lo - pad, hi + pad), move |_, p, dp| {
                (dp + p * p) * k
            })?
        }
    };
    let v2 = Potential1D::closed_form(format!("{a}y"), move |y| y * a);
    Ok(SeparablePotential::new(v1, v2, hbar))
}
