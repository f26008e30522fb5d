//! Phase-space types and the classical evaluation of Hamiltonians and
//! third-order integrals
//! `X = Σ A_ijk {L^i, px^j py^k} + {g1, px} + {g2, py}` with `L = x py − y px`.
//!
//! Classically every anticommutator `{f, p}` is read as `2 f p`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dual::Dual2;
use crate::error::{Error, Result};
use crate::jet::Jet;

/// Parameter names accepted by [`ParamSet`].
///
/// The tail of the list (from `ic_x0` on) holds initial data for the
/// Painlevé-built entries, the quadrant signs of C.5 and the branch seed of C.6.
pub const RECOGNIZED_PARAMS: &[&str] = &[
    "a", "b", "c", "d", "d_tilde", "alpha", "hbar", "omega", "omega1", "omega2", "K1", "K2",
    "kappa", "b1", "b2", "beta1", "beta2", "sigma", "lambda", "k", "k1", "k2", "wp_g2", "wp_g3",
    "ic_x0", "ic_y0", "ic_yp0", "sign1", "sign2", "seed_x", "branch",
];

/// Named real parameters of a catalog entry.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, f64>", into = "BTreeMap<String, f64>")]
pub struct ParamSet {
    values: BTreeMap<String, f64>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(&str, f64)]) -> Result<Self> {
        let mut p = Self::new();
        for (name, v) in pairs {
            p.set(name, *v)?;
        }
        Ok(p)
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !RECOGNIZED_PARAMS.contains(&name) {
            return Err(Error::UnknownParameter(name.to_string()));
        }
        if !value.is_finite() {
            return Err(Error::InvalidParameter { name: name.into(), reason: "must be finite".into() });
        }
        if name == "hbar" && value < 0.0 {
            return Err(Error::InvalidParameter { name: name.into(), reason: "must be nonnegative".into() });
        }
        self.values.insert(name.to_string(), value);
        Ok(())
    }

    pub fn with(mut self, name: &str, value: f64) -> Result<Self> {
        self.set(name, value)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<f64> {
        self.get(name)
            .ok_or_else(|| Error::InvalidParameter { name: name.into(), reason: "missing".into() })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl TryFrom<BTreeMap<String, f64>> for ParamSet {
    type Error = Error;
    fn try_from(map: BTreeMap<String, f64>) -> Result<Self> {
        let mut p = ParamSet::new();
        for (k, v) in map {
            p.set(&k, v)?;
        }
        Ok(p)
    }
}

impl From<ParamSet> for BTreeMap<String, f64> {
    fn from(p: ParamSet) -> Self {
        p.values
    }
}

/// A point of the four-dimensional phase space (unit mass).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
}

impl PhaseState {
    pub fn new(x: f64, y: f64, px: f64, py: f64) -> Self {
        Self { x, y, px, py }
    }

    pub fn from_array(s: [f64; 4]) -> Self {
        Self::new(s[0], s[1], s[2], s[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.px, self.py]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn angular_momentum(&self) -> f64 {
        self.x * self.py - self.y * self.px
    }
}

/// Value and first four derivatives of a one-dimensional function at a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivStack(pub [f64; 5]);

impl DerivStack {
    pub const ZERO: DerivStack = DerivStack([0.0; 5]);

    pub fn from_jet(j: &Jet<5>) -> Self {
        let mut d = [0.0; 5];
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = j.derivative_at_base(k);
        }
        Self(d)
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    pub fn d(&self, k: usize) -> f64 {
        self.0[k]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut d = self.0;
        for v in d.iter_mut() {
            *v *= k;
        }
        Self(d)
    }
}

type Evaluator = dyn Fn(f64) -> Result<DerivStack> + Send + Sync;

/// One separated component of a potential, with exact derivatives to order 4.
#[derive(Clone)]
pub struct Potential1D {
    label: String,
    eval: Arc<Evaluator>,
    domain: (f64, f64),
    poles: Vec<f64>,
}

impl fmt::Debug for Potential1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential1D")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("poles", &self.poles)
            .finish()
    }
}

impl Potential1D {
    /// Builds a component from a closed-form expression evaluated on jets.
    pub fn closed_form<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(Jet<5>) -> Jet<5> + Send + Sync + 'static,
    {
        Self::from_evaluator(label, move |x| Ok(DerivStack::from_jet(&f(Jet::variable(x)))))
    }

    pub fn from_evaluator<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> Result<DerivStack> + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            eval: Arc::new(f),
            domain: (f64::NEG_INFINITY, f64::INFINITY),
            poles: Vec::new(),
        }
    }

    pub fn zero() -> Self {
        Self::from_evaluator("0", |_| Ok(DerivStack::ZERO))
    }

    pub fn with_poles(mut self, poles: &[f64]) -> Self {
        self.poles = poles.to_vec();
        self
    }

    /// Restricts the component to the open interval `(lo, hi)`.
    pub fn with_domain(mut self, lo: f64, hi: f64) -> Self {
        self.domain = (lo, hi);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn poles(&self) -> &[f64] {
        &self.poles
    }

    pub fn eval(&self, x: f64) -> Result<DerivStack> {
        let (lo, hi) = self.domain;
        if !(x > lo && x < hi) {
            return Err(Error::OutOfDomain { at: x, lo, hi });
        }
        if self.poles.contains(&x) {
            return Err(Error::SingularPoint { x, y: f64::NAN });
        }
        let s = (self.eval)(x)?;
        if !s.is_finite() {
            return Err(Error::SingularPoint { x, y: f64::NAN });
        }
        Ok(s)
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)?.value())
    }

    /// Distance from `x` to the nearest pole or domain end.
    pub fn distance_to_singularity(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain;
        self.poles
            .iter()
            .map(|p| (x - p).abs())
            .fold((x - lo).min(hi - x), f64::min)
    }

    /// The same component with every channel multiplied by `k`.
    pub fn scaled(&self, k: f64, label: impl Into<String>) -> Self {
        let inner = self.eval.clone();
        Self {
            label: label.into(),
            eval: Arc::new(move |x| Ok(inner(x)?.scaled(k))),
            domain: self.domain,
            poles: self.poles.clone(),
        }
    }
}

/// `V(x, y) = V1(x) + V2(y)` together with the value of ℏ it is used with.
#[derive(Clone, Debug)]
pub struct SeparablePotential {
    pub v1: Potential1D,
    pub v2: Potential1D,
    pub hbar: f64,
}

impl SeparablePotential {
    pub fn new(v1: Potential1D, v2: Potential1D, hbar: f64) -> Self {
        Self { v1, v2, hbar }
    }

    pub fn zero(hbar: f64) -> Self {
        Self::new(Potential1D::zero(), Potential1D::zero(), hbar)
    }

    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.v1.value(x)? + self.v2.value(y)?)
    }

    pub fn stacks(&self, x: f64, y: f64) -> Result<(DerivStack, DerivStack)> {
        Ok((self.v1.eval(x)?, self.v2.eval(y)?))
    }

    pub fn hamiltonian(&self, s: &PhaseState) -> Result<f64> {
        Ok(0.5 * (s.px * s.px + s.py * s.py) + self.value(s.x, s.y)?)
    }

    pub fn distance_to_singularity(&self, x: f64, y: f64) -> f64 {
        self.v1.distance_to_singularity(x).min(self.v2.distance_to_singularity(y))
    }

    pub fn with_hbar(&self, hbar: f64) -> Self {
        Self { hbar, ..self.clone() }
    }
}

/// Exponent triples `(i, j, k)` of `L^i px^j py^k`, in storage order.
pub const MONOMIALS: [(u8, u8, u8); 10] = [
    (3, 0, 0),
    (2, 1, 0),
    (2, 0, 1),
    (1, 2, 0),
    (1, 1, 1),
    (1, 0, 2),
    (0, 3, 0),
    (0, 2, 1),
    (0, 1, 2),
    (0, 0, 3),
];

/// The ten leading coefficients `A_ijk`, `i + j + k = 3`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CoeffTensor {
    pub a300: f64,
    pub a210: f64,
    pub a201: f64,
    pub a120: f64,
    pub a111: f64,
    pub a102: f64,
    pub a030: f64,
    pub a021: f64,
    pub a012: f64,
    pub a003: f64,
}

impl CoeffTensor {
    pub fn from_array(a: [f64; 10]) -> Self {
        Self {
            a300: a[0],
            a210: a[1],
            a201: a[2],
            a120: a[3],
            a111: a[4],
            a102: a[5],
            a030: a[6],
            a021: a[7],
            a012: a[8],
            a003: a[9],
        }
    }

    pub fn to_array(&self) -> [f64; 10] {
        [
            self.a300, self.a210, self.a201, self.a120, self.a111, self.a102, self.a030, self.a021,
            self.a012, self.a003,
        ]
    }

    /// Sets the coefficient of `L^i px^j py^k`.
    pub fn with(self, ijk: (u8, u8, u8), v: f64) -> Self {
        let idx = MONOMIALS.iter().position(|&m| m == ijk).expect("i + j + k must equal 3");
        let mut a = self.to_array();
        a[idx] = v;
        Self::from_array(a)
    }

    pub fn get(&self, ijk: (u8, u8, u8)) -> f64 {
        MONOMIALS.iter().position(|&m| m == ijk).map_or(0.0, |i| self.to_array()[i])
    }

    pub fn nonzero_pattern(&self) -> Vec<(u8, u8, u8)> {
        MONOMIALS.iter().zip(self.to_array()).filter(|(_, v)| *v != 0.0).map(|(m, _)| *m).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.to_array().iter().all(|v| *v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// True when no power of `L` appears.
    pub fn is_l_free(&self) -> bool {
        MONOMIALS.iter().zip(self.to_array()).all(|((i, _, _), v)| *i == 0 || v == 0.0)
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut a = self.to_array();
        for v in a.iter_mut() {
            *v *= k;
        }
        Self::from_array(a)
    }
}

type FieldFn = dyn Fn(f64, f64) -> Result<[Dual2; 2]> + Send + Sync;

/// The correction fields `g1`, `g2` with their first partials.
#[derive(Clone)]
pub struct CorrectionFields {
    eval: Arc<FieldFn>,
    singular_x: Vec<f64>,
    singular_y: Vec<f64>,
    zero: bool,
}

impl fmt::Debug for CorrectionFields {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CorrectionFields")
            .field("singular_x", &self.singular_x)
            .field("singular_y", &self.singular_y)
            .field("zero", &self.zero)
            .finish()
    }
}

impl CorrectionFields {
    pub fn zero() -> Self {
        Self {
            eval: Arc::new(|_, _| Ok([Dual2::ZERO; 2])),
            singular_x: Vec::new(),
            singular_y: Vec::new(),
            zero: true,
        }
    }

    /// Fields given as closed-form expressions of the lifted coordinates.
    pub fn closed_form<F>(f: F) -> Self
    where
        F: Fn(Dual2, Dual2) -> [Dual2; 2] + Send + Sync + 'static,
    {
        Self::from_fn(move |x, y| Ok(f(Dual2::var_x(x), Dual2::var_y(y))))
    }

    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(f64, f64) -> Result<[Dual2; 2]> + Send + Sync + 'static,
    {
        Self { eval: Arc::new(f), singular_x: Vec::new(), singular_y: Vec::new(), zero: false }
    }

    pub fn with_singular_lines(mut self, xs: &[f64], ys: &[f64]) -> Self {
        self.singular_x = xs.to_vec();
        self.singular_y = ys.to_vec();
        self
    }

    pub fn singular_lines(&self) -> (&[f64], &[f64]) {
        (&self.singular_x, &self.singular_y)
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// `[g1, g2]` with their partials at `(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> Result<[Dual2; 2]> {
        if self.singular_x.contains(&x) || self.singular_y.contains(&y) {
            return Err(Error::SingularPoint { x, y });
        }
        let g = (self.eval)(x, y)?;
        let finite = g.iter().all(|d| d.v.is_finite() && d.dx.is_finite() && d.dy.is_finite());
        if !finite {
            return Err(Error::SingularPoint { x, y });
        }
        Ok(g)
    }

    pub fn distance_to_singularity(&self, x: f64, y: f64) -> f64 {
        let dx = self.singular_x.iter().map(|s| (x - s).abs()).fold(f64::INFINITY, f64::min);
        let dy = self.singular_y.iter().map(|s| (y - s).abs()).fold(f64::INFINITY, f64::min);
        dx.min(dy)
    }

    pub fn scaled(&self, k: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            eval: Arc::new(move |x, y| {
                let [g1, g2] = inner(x, y)?;
                Ok([g1.scale(k), g2.scale(k)])
            }),
            singular_x: self.singular_x.clone(),
            singular_y: self.singular_y.clone(),
            zero: self.zero || k == 0.0,
        }
    }
}

/// Leading coefficients plus correction fields, with a Table-1 style label.
#[derive(Clone, Debug)]
pub struct ThirdOrderIntegral {
    pub coeffs: CoeffTensor,
    pub corrections: CorrectionFields,
    pub label: String,
}

impl ThirdOrderIntegral {
    pub fn new(coeffs: CoeffTensor, corrections: CorrectionFields, label: impl Into<String>) -> Result<Self> {
        if !coeffs.is_finite() {
            return Err(Error::InvalidParameter { name: "A".into(), reason: "coefficients must be finite".into() });
        }
        if coeffs.is_zero() && corrections.is_zero() {
            return Err(Error::TrivialIntegral);
        }
        Ok(Self { coeffs, corrections, label: label.into() })
    }

    /// The identically vanishing integral data, useful as a baseline.
    pub fn trivial() -> Self {
        Self { coeffs: CoeffTensor::default(), corrections: CorrectionFields::zero(), label: "0".into() }
    }

    pub fn is_trivial(&self) -> bool {
        self.coeffs.is_zero() && self.corrections.is_zero()
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            coeffs: self.coeffs.scaled(k),
            corrections: self.corrections.scaled(k),
            label: self.label.clone(),
        }
    }
}

/// The polynomials `f1..f4` built from the coefficient tensor.
pub fn eval_f_polynomials(a: &CoeffTensor, x: f64, y: f64) -> (f64, f64, f64, f64) {
    let f1 = -a.a300 * y * y * y + a.a210 * y * y - a.a120 * y + a.a030;
    let f2 = 3.0 * a.a300 * x * y * y - 2.0 * a.a210 * x * y + a.a201 * y * y + a.a120 * x
        - a.a111 * y
        + a.a021;
    let f3 = -3.0 * a.a300 * x * x * y + a.a210 * x * x - 2.0 * a.a201 * x * y + a.a111 * x
        - a.a102 * y
        + a.a012;
    let f4 = a.a300 * x * x * x + a.a201 * x * x + a.a102 * x + a.a003;
    (f1, f2, f3, f4)
}

fn ipow(base: f64, e: i32) -> f64 {
    if e <= 0 {
        1.0
    } else {
        base.powi(e)
    }
}

/// Classical value `2 Σ A L^i px^j py^k + 2 g1 px + 2 g2 py`.
pub fn eval_integral_classical(integral: &ThirdOrderIntegral, s: &PhaseState) -> Result<f64> {
    let l = s.angular_momentum();
    let a = integral.coeffs.to_array();
    let mut poly = 0.0;
    for (&(i, j, k), coef) in MONOMIALS.iter().zip(a) {
        if coef != 0.0 {
            poly += coef * ipow(l, i as i32) * ipow(s.px, j as i32) * ipow(s.py, k as i32);
        }
    }
    let [g1, g2] = integral.corrections.eval(s.x, s.y)?;
    Ok(2.0 * poly + 2.0 * g1.v * s.px + 2.0 * g2.v * s.py)
}

/// The Poisson bracket `{X, H}`, i.e. the rate of change of `X` along the flow.
pub fn poisson_bracket_residual(
    integral: &ThirdOrderIntegral,
    potential: &SeparablePotential,
    s: &PhaseState,
) -> Result<f64> {
    let (v1, v2) = potential.stacks(s.x, s.y)?;
    let [g1, g2] = integral.corrections.eval(s.x, s.y)?;
    let l = s.angular_momentum();
    let (mut px_p, mut py_p, mut dpx, mut dpy) = (0.0, 0.0, 0.0, 0.0);
    for (&(i, j, k), coef) in MONOMIALS.iter().zip(integral.coeffs.to_array()) {
        if coef == 0.0 {
            continue;
        }
        let (i, j, k) = (i as i32, j as i32, k as i32);
        let mono = ipow(s.px, j) * ipow(s.py, k);
        // dP/dL
        let dl = if i > 0 { i as f64 * ipow(l, i - 1) * mono } else { 0.0 };
        let li = ipow(l, i);
        px_p += coef * dl * s.py;
        py_p -= coef * dl * s.px;
        let dj = if j > 0 { j as f64 * ipow(s.px, j - 1) * ipow(s.py, k) } else { 0.0 };
        let dk = if k > 0 { k as f64 * ipow(s.px, j) * ipow(s.py, k - 1) } else { 0.0 };
        dpx += coef * (-s.y * dl + li * dj);
        dpy += coef * (s.x * dl + li * dk);
    }
    let dx_x = 2.0 * px_p + 2.0 * g1.dx * s.px + 2.0 * g2.dx * s.py;
    let dy_x = 2.0 * py_p + 2.0 * g1.dy * s.px + 2.0 * g2.dy * s.py;
    let dpx_x = 2.0 * dpx + 2.0 * g1.v;
    let dpy_x = 2.0 * dpy + 2.0 * g2.v;
    Ok(s.px * dx_x + s.py * dy_x - v1.d(1) * dpx_x - v2.d(1) * dpy_x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_polynomials_printed_examples() {
        let a = CoeffTensor { a300: 1.0, ..Default::default() };
        assert_eq!(eval_f_polynomials(&a, 1.0, 1.0), (-1.0, 3.0, -3.0, 1.0));
        let a = CoeffTensor { a111: 1.0, ..Default::default() };
        assert_eq!(eval_f_polynomials(&a, 2.0, 3.0), (0.0, -3.0, 2.0, 0.0));
        assert_eq!(eval_f_polynomials(&CoeffTensor::default(), 0.7, -2.0), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn param_set_rejects_bad_input() {
        let mut p = ParamSet::new();
        assert!(matches!(p.set("zeta", 1.0), Err(Error::UnknownParameter(_))));
        assert!(p.set("a", f64::NAN).is_err());
        assert!(p.set("hbar", -1.0).is_err());
        assert!(p.set("hbar", 0.0).is_ok());
    }

    #[test]
    fn l_cubed_half_coefficient() {
        let x = ThirdOrderIntegral::new(
            CoeffTensor { a300: 0.5, ..Default::default() },
            CorrectionFields::zero(),
            "L^3",
        )
        .unwrap();
        let v = eval_integral_classical(&x, &PhaseState::new(1.0, 0.0, 0.0, 1.0)).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn correction_only_integral() {
        let x = ThirdOrderIntegral::new(
            CoeffTensor::default(),
            CorrectionFields::closed_form(|_, _| [Dual2::constant(0.5), Dual2::ZERO]),
            "g",
        )
        .unwrap();
        let v = eval_integral_classical(&x, &PhaseState::new(0.3, -0.2, 3.0, 5.0)).unwrap();
        assert_eq!(v, 3.0);
    }

    #[test]
    fn trivial_integral_rejected_by_constructor() {
        let r = ThirdOrderIntegral::new(CoeffTensor::default(), CorrectionFields::zero(), "0");
        assert_eq!(r.unwrap_err(), Error::TrivialIntegral);
    }
}
