//! The complete inventory of separable potentials with third-order
//! integrals: 21 quantum entries (Q.1–Q.21) and 8 classical ones (C.1–C.8),
//! every integral stored in the canonical form
//! `X = Σ A_ijk {L^i, px^j py^k} + {g1, px} + {g2, py}`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::detsolve::GridSpec;
use crate::dual::Dual2;
use crate::error::{Error, Result};
use crate::implicit::{self, scaled_interval, scaled_transcendent, CaseIIRoute, ImplicitRelation};
use crate::jet::Jet;
use crate::phasecore::{CoeffTensor, CorrectionFields, ParamSet, Potential1D, SeparablePotential, ThirdOrderIntegral};
use crate::specfun::{painleve1, painleve4, weierstrass_p, PainleveIC};

/// Extra room solved around a working domain for transcendent-backed components.
const SPECFUN_PAD: f64 = 0.05;
/// Nodes per axis of the default verification grid.
pub const DEFAULT_NODES: usize = 33;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Any,
    NonZero,
    Positive,
    NonNegative,
    /// Exactly +1 or -1.
    Sign,
}

impl Rule {
    fn check(self, name: &str, v: f64) -> Result<()> {
        let ok = match self {
            Rule::Any => true,
            Rule::NonZero => v != 0.0,
            Rule::Positive => v > 0.0,
            Rule::NonNegative => v >= 0.0,
            Rule::Sign => v == 1.0 || v == -1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter { name: name.into(), reason: format!("{v} violates rule {self:?}") })
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    /// `None` marks an optional parameter with no default.
    pub default: Option<f64>,
    pub rule: Rule,
}

const fn req(name: &'static str, default: f64, rule: Rule) -> ParamSpec {
    ParamSpec { name, default: Some(default), rule }
}

const fn opt(name: &'static str, rule: Rule) -> ParamSpec {
    ParamSpec { name, default: None, rule }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Quantum,
    Classical,
}

/// Accuracy class of an entry's numerical ingredients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    ClosedForm,
    SpecialFunction,
}

impl Tier {
    /// Residual tolerance of the determining-equation suite.
    pub fn tolerance(self) -> f64 {
        match self {
            Tier::ClosedForm => 1e-9,
            Tier::SpecialFunction => 1e-6,
        }
    }
}

/// Axis-aligned rectangle in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rect {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Rect {
    pub const fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// Box of phase-space states used to draw initial conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseBox {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub px: (f64, f64),
    pub py: (f64, f64),
}

/// Static description of one catalog entry.
#[derive(Clone, Copy)]
pub struct PotentialEntry {
    pub id: &'static str,
    pub table1_label: Option<&'static str>,
    pub regime: Regime,
    pub tier: Tier,
    pub formula: &'static str,
    pub params: &'static [ParamSpec],
    pub integral_labels: &'static [&'static str],
    pub canonical_ic: Option<&'static str>,
    pub notes: &'static [&'static str],
    build: fn(&ParamSet) -> Result<Built>,
}

impl std::fmt::Debug for PotentialEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PotentialEntry").field("id", &self.id).finish_non_exhaustive()
    }
}

/// One row of [`list_entries`].
#[derive(Clone, Debug, Serialize)]
pub struct EntrySummary {
    pub id: &'static str,
    pub table1_label: Option<&'static str>,
    pub regime: Regime,
    pub params: Vec<ParamSpec>,
    pub integral_count: usize,
    pub integral_labels: Vec<&'static str>,
}

struct Built {
    potential: SeparablePotential,
    integrals: Vec<ThirdOrderIntegral>,
    domain: Rect,
    dynamics_box: Option<PhaseBox>,
    metadata: BTreeMap<String, f64>,
}

impl Built {
    fn new(potential: SeparablePotential, integrals: Vec<ThirdOrderIntegral>, domain: Rect) -> Self {
        Self { potential, integrals, domain, dynamics_box: None, metadata: BTreeMap::new() }
    }

    fn sampling(mut self, b: PhaseBox) -> Self {
        self.dynamics_box = Some(b);
        self
    }
}

/// A fully built entry: potential, integrals and working domains.
#[derive(Clone, Debug)]
pub struct Instance {
    pub id: &'static str,
    pub params: ParamSet,
    pub potential: SeparablePotential,
    pub integrals: Vec<ThirdOrderIntegral>,
    /// Default verification rectangle.
    pub domain: Rect,
    /// Box for random initial states (classical entries).
    pub dynamics_box: Option<PhaseBox>,
    pub tier: Tier,
    /// Branch and construction details worth reporting.
    pub metadata: BTreeMap<String, f64>,
}

impl Instance {
    pub fn default_grid(&self) -> GridSpec {
        GridSpec::new(self.domain.x, self.domain.y, DEFAULT_NODES, DEFAULT_NODES)
    }

    pub fn tolerance(&self) -> f64 {
        self.tier.tolerance()
    }

    /// Bound on relative drift of `H` and the integrals along trajectories.
    pub fn drift_tolerance(&self) -> f64 {
        match self.id {
            "C.5" | "C.6" | "C.7" | "C.8" => 1e-6,
            _ => 1e-8,
        }
    }

    pub fn regime(&self) -> Regime {
        find(self.id).map_or(Regime::Quantum, |e| e.regime)
    }
}

/// Destination of a classical limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitTarget {
    Entry(&'static str),
    /// `V ≡ 0`.
    FreeMotion,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassicalLimit {
    pub target: LimitTarget,
    pub params: ParamSet,
}

// ---------------------------------------------------------------------------
// small builders

fn coeffs(terms: &[((u8, u8, u8), f64)]) -> CoeffTensor {
    terms.iter().fold(CoeffTensor::default(), |a, &(m, v)| a.with(m, v))
}

fn integral<F>(a: CoeffTensor, label: &str, xs: &[f64], ys: &[f64], g: F) -> Result<ThirdOrderIntegral>
where
    F: Fn(Dual2, Dual2) -> [Dual2; 2] + Send + Sync + 'static,
{
    ThirdOrderIntegral::new(a, CorrectionFields::closed_form(g).with_singular_lines(xs, ys), label)
}

fn bare(a: CoeffTensor, label: &str) -> Result<ThirdOrderIntegral> {
    ThirdOrderIntegral::new(a, CorrectionFields::zero(), label)
}

fn zero() -> Dual2 {
    Dual2::ZERO
}

fn cst(v: f64) -> Dual2 {
    Dual2::constant(v)
}

fn closed<F>(label: String, poles: &[f64], f: F) -> Potential1D
where
    F: Fn(Jet<5>) -> Jet<5> + Send + Sync + 'static,
{
    Potential1D::closed_form(label, f).with_poles(poles)
}

fn inv2(x: Jet<5>) -> Jet<5> {
    x.powi(-2)
}

fn p(params: &ParamSet, name: &str) -> f64 {
    params.get(name).expect("resolved parameters carry every default")
}

const SQ: Rect = Rect::new((-1.5, 1.5), (-1.5, 1.5));
const POS: Rect = Rect::new((0.3, 2.3), (0.3, 2.3));

fn shifted(alpha: f64) -> (f64, f64) {
    (alpha.abs() + 0.3, alpha.abs() + 2.3)
}

fn state_box(x: (f64, f64), y: (f64, f64)) -> PhaseBox {
    PhaseBox { x, y, px: (-0.5, 0.5), py: (-0.5, 0.5) }
}

// ---------------------------------------------------------------------------
// shared integral families

/// The four integrals of the isotropic oscillator `a(x² + y²)`.
fn oscillator_integrals(a: f64) -> Result<Vec<ThirdOrderIntegral>> {
    Ok(vec![
        bare(coeffs(&[((3, 0, 0), 0.5)]), "L^3")?,
        integral(coeffs(&[((1, 1, 1), 1.0)]), "{L, px py}", &[], &[], move |x, y| {
            [-2.0 * a * x * y * y, 2.0 * a * x * x * y]
        })?,
        integral(coeffs(&[((1, 0, 2), 1.0)]), "{L, py^2}", &[], &[], move |x, y| {
            [-2.0 * a * y * y * y, 2.0 * a * x * y * y]
        })?,
        integral(coeffs(&[((1, 2, 0), 1.0)]), "{L, px^2}", &[], &[], move |x, y| {
            [-2.0 * a * x * x * y, 2.0 * a * x * x * x]
        })?,
    ])
}

/// `{L, px py} + {xy(-2b/x³ + 2ax), py} - {xy(-2c/y³ + 2ay), px}`.
fn winternitz_integral(a: f64, b: f64, c: f64) -> Result<ThirdOrderIntegral> {
    integral(coeffs(&[((1, 1, 1), 1.0)]), "{L, px py}", &[0.0], &[0.0], move |x, y| {
        [
            -(x * y * (-2.0 * c / y.powi(3) + 2.0 * a * y)),
            x * y * (-2.0 * b / x.powi(3) + 2.0 * a * x),
        ]
    })
}

/// `2L³` integral of the `1/x²`, `1/y²` walls, scaled by `h2`.
fn l_cubed_walls(h2: f64) -> Result<ThirdOrderIntegral> {
    integral(coeffs(&[((3, 0, 0), 1.0)]), "2L^3", &[0.0], &[0.0], move |x, y| {
        [
            -h2 * (3.0 * x * x / y + 2.0 * y + 3.0 * y.powi(3) / (x * x)),
            h2 * (3.0 * y * y / x + 2.0 * x + 3.0 * x.powi(3) / (y * y)),
        ]
    })
}

/// `{L², px}` with `V = ħ²/x² + a/y²`.
fn l2_px(h2: f64, a: f64) -> Result<ThirdOrderIntegral> {
    integral(coeffs(&[((2, 1, 0), 1.0)]), "{L^2, px}", &[0.0], &[0.0], move |x, y| {
        [3.0 * h2 * y * y / (x * x) + 2.0 * a * x * x / (y * y) + 0.5 * h2, -2.0 * h2 * y / x]
    })
}

/// `2 px³ + {3ħ²/x², px}`.
fn px_cubed_wall(h2: f64) -> Result<ThirdOrderIntegral> {
    integral(coeffs(&[((0, 3, 0), 1.0)]), "px^3", &[0.0], &[], move |x, _| [3.0 * h2 / (x * x), zero()])
}

fn py_cubed_wall(h2: f64) -> Result<ThirdOrderIntegral> {
    integral(coeffs(&[((0, 0, 3), 1.0)]), "py^3", &[], &[0.0], move |_, y| [zero(), 3.0 * h2 / (y * y)])
}

/// Integral of the cubic-in-momenta family `2a px³ - 2b px² py + …` built on `V1`.
fn drach_integral(v1: Potential1D, a: f64, b: f64, label: &str) -> Result<ThirdOrderIntegral> {
    let g = CorrectionFields::from_fn(move |x, _| {
        let v = Dual2::of_x(&v1.eval(x)?);
        Ok([a * (3.0 * v - b * Dual2::var_x(x)), -2.0 * b * v])
    });
    ThirdOrderIntegral::new(coeffs(&[((0, 3, 0), a), ((0, 2, 1), -b)]), g, label)
}

/// `{L, px²} + {ax²y - 3yV1, px} - (1/2a){ħ²/4 V1''' + (ax² - 3V1)V1', py}`.
fn l_px2_implicit(v1: Potential1D, a: f64, hbar: f64) -> Result<ThirdOrderIntegral> {
    let q = 0.25 * hbar * hbar;
    let g = CorrectionFields::from_fn(move |x, y| {
        let s = v1.eval(x)?;
        let v = Dual2::of_x(&s);
        let dv = Dual2 { v: s.d(1), dx: s.d(2), dy: 0.0 };
        let d3v = Dual2 { v: s.d(3), dx: s.d(4), dy: 0.0 };
        let (xd, yd) = (Dual2::var_x(x), Dual2::var_y(y));
        let ax2 = a * xd * xd;
        Ok([ax2 * yd - 3.0 * yd * v, -(q * d3v + (ax2 - 3.0 * v) * dv) / (2.0 * a)])
    });
    ThirdOrderIntegral::new(coeffs(&[((1, 2, 0), 1.0)]), g, "{L, px^2}")
}

// ---------------------------------------------------------------------------
// quantum entries

fn q1(ps: &ParamSet) -> Result<Built> {
    let (a, hbar) = (p(ps, "a"), p(ps, "hbar"));
    let v = SeparablePotential::new(
        closed(format!("{a}x^2"), &[], move |x| a * x * x),
        closed(format!("{a}y^2"), &[], move |y| a * y * y),
        hbar,
    );
    Ok(Built::new(v, oscillator_integrals(a)?, SQ))
}

fn q2(ps: &ParamSet) -> Result<Built> {
    let (a, b, c, hbar) = (p(ps, "a"), p(ps, "b"), p(ps, "c"), p(ps, "hbar"));
    let v = SeparablePotential::new(
        closed(format!("{a}x^2 + {b}/x^2"), &[0.0], move |x| a * x * x + b * inv2(x)),
        closed(format!("{a}y^2 + {c}/y^2"), &[0.0], move |y| a * y * y + c * inv2(y)),
        hbar,
    );
    Ok(Built::new(v, vec![winternitz_integral(a, b, c)?], POS))
}

fn q3(ps: &ParamSet) -> Result<Built> {
    let (a, hbar) = (p(ps, "a"), p(ps, "hbar"));
    let h2 = hbar * hbar;
    let v = SeparablePotential::new(
        closed(format!("{a}x^2 + hbar^2/x^2"), &[0.0], move |x| a * x * x + h2 * inv2(x)),
        closed(format!("{a}y^2 + hbar^2/y^2"), &[0.0], move |y| a * y * y + h2 * inv2(y)),
        hbar,
    );
    Ok(Built::new(v, vec![l_cubed_walls(h2)?, winternitz_integral(a, h2, h2)?], POS))
}

fn q4(ps: &ParamSet) -> Result<Built> {
    let (a, hbar) = (p(ps, "a"), p(ps, "hbar"));
    let h2 = hbar * hbar;
    let v = SeparablePotential::new(
        closed(format!("{a}x^2"), &[], move |x| a * x * x),
        closed(format!("{a}y^2 + hbar^2/y^2"), &[0.0], move |y| a * y * y + h2 * inv2(y)),
        hbar,
    );
    let x1 = integral(coeffs(&[((3, 0, 0), 1.0)]), "2L^3", &[], &[0.0], move |x, y| {
        [-h2 * (2.0 * y + 3.0 * x * x / y), h2 * (3.0 * x.powi(3) / (y * y) + 2.0 * x)]
    })?;
    let x2 = integral(coeffs(&[((1, 1, 1), 1.0)]), "{L, px py}", &[], &[0.0], move |x, y| {
        [-2.0 * (a * x * y * y - h2 * x / (y * y)), 2.0 * a * x * x * y]
    })?;
    let x3 = integral(coeffs(&[((1, 0, 2), 1.0)]), "{L, py^2}", &[], &[0.0], move |x, y| {
        [-(2.0 * a * y.powi(3) + h2 / y), 3.0 * h2 * x / (y * y) + 2.0 * a * x * y * y]
    })?;
    Ok(Built::new(v, vec![x1, x2, x3], POS))
}

/// `1/(8α⁴) t² + 1/(t-α)² + 1/(t+α)²`.
fn alpha_well(t: Jet<5>, alpha: f64) -> Jet<5> {
    t * t * (1.0 / (8.0 * alpha.powi(4))) + inv2(t - alpha) + inv2(t + alpha)
}

fn alpha_pair(t: Dual2, alpha: f64) -> Dual2 {
    (t - alpha).powi(2) * (t + alpha).powi(2)
}

fn alpha_entry_potential(hbar: f64, alpha: f64, y_kind: u8) -> SeparablePotential {
    let h2 = hbar * hbar;
    let v1 = closed("hbar^2(x^2/(8alpha^4) + 1/(x-alpha)^2 + 1/(x+alpha)^2)".into(), &[-alpha, alpha], move |x| {
        h2 * alpha_well(x, alpha)
    });
    let q = 1.0 / (8.0 * alpha.powi(4));
    let v2 = match y_kind {
        0 => closed("hbar^2 y^2/(8alpha^4)".into(), &[], move |y| h2 * (y * y * q)),
        1 => closed("hbar^2(y^2/(8alpha^4) + 1/y^2)".into(), &[0.0], move |y| h2 * (y * y * q + inv2(y))),
        _ => closed("hbar^2(y^2/(8alpha^4) + 1/(y-alpha)^2 + 1/(y+alpha)^2)".into(), &[-alpha, alpha], move |y| {
            h2 * alpha_well(y, alpha)
        }),
    };
    SeparablePotential::new(v1, v2, hbar)
}

fn q5_x1(h2: f64, al: f64, printed: bool) -> Result<ThirdOrderIntegral> {
    let a2 = al * al;
    let k = if printed { 24.0 } else { 23.0 };
    integral(coeffs(&[((3, 0, 0), 1.0), ((1, 0, 2), -3.0 * a2)]), "2L^3 - 3alpha^2{L, py^2}", &[-al, al], &[], move |x, y| {
        let pair = alpha_pair(x, al);
        [
            h2 * 0.25 * y * (-8.0 + 3.0 * y * y / a2 - 24.0 * y * y * (x * x + a2) / pair),
            h2 * 0.25 * x * (8.0 - 3.0 * y * y * (x.powi(4) - 10.0 * a2 * x * x - k * a2 * a2) / (a2 * pair)),
        ]
    })
}

fn q5(ps: &ParamSet) -> Result<Built> {
    let (hbar, al) = (p(ps, "hbar"), p(ps, "alpha"));
    let h2 = hbar * hbar;
    let a2 = al * al;
    let x2 = integral(coeffs(&[((1, 2, 0), 1.0)]), "{L, px^2}", &[-al, al], &[], move |x, y| {
        let d = x * x - a2;
        [
            h2 * y * ((4.0 * a2 - x * x) / (4.0 * a2 * a2) - 6.0 * (x * x + a2) / (d * d)),
            h2 * (x * (x * x - 4.0 * a2) / (4.0 * a2 * a2) - 2.0 * x / d + 4.0 * x * (x * x + a2) / alpha_pair(x, al)),
        ]
    })?;
    Ok(Built::new(alpha_entry_potential(hbar, al, 0), vec![q5_x1(h2, al, false)?, x2], Rect::new(shifted(al), (-1.5, 1.5))))
}

fn q6_x1(h2: f64, al: f64, printed: bool) -> Result<ThirdOrderIntegral> {
    let a2 = al * al;
    let s = if printed { 1.0 } else { -1.0 };
    integral(coeffs(&[((3, 0, 0), 1.0), ((1, 0, 2), -3.0 * a2)]), "2L^3 - 3alpha^2{L, py^2}", &[-al, al], &[0.0], move |x, y| {
        let pair = alpha_pair(x, al);
        let y3 = y.powi(3);
        [
            h2 * (3.0 * y3 / (4.0 * a2) + s * 6.0 * y3 * (x * x + a2) / pair - 3.0 * (x * x - a2) / y - 2.0 * y),
            3.0 * h2
                * x
                * ((x * x - 3.0 * a2) / (y * y) - (3.0 * y * y - 8.0 * a2) / (12.0 * a2) - 2.0 * y * y / (x * x - a2)
                    + 4.0 * y * y * (x * x + a2) / pair),
        ]
    })
}

fn q6(ps: &ParamSet) -> Result<Built> {
    let (hbar, al) = (p(ps, "hbar"), p(ps, "alpha"));
    let h2 = hbar * hbar;
    Ok(Built::new(alpha_entry_potential(hbar, al, 1), vec![q6_x1(h2, al, false)?], Rect::new(shifted(al), (0.3, 2.3))))
}

fn q7_x1(h2: f64, al: f64, printed: bool) -> Result<ThirdOrderIntegral> {
    let a2 = al * al;
    let label = "2L^3 - 3alpha^2({L, px^2} + {L, py^2})";
    let a = coeffs(&[((3, 0, 0), 1.0), ((1, 2, 0), -3.0 * a2), ((1, 0, 2), -3.0 * a2)]);
    integral(a, label, &[-al, al], &[-al, al], move |x, y| {
        let (x2, y2) = (x * x, y * y);
        let (px, py) = (alpha_pair(x, al), alpha_pair(y, al));
        let core = 124.0 + 3.0 * (x2 + y2) / a2;
        let last = if printed { 144.0 * x2 } else { 144.0 * y2 };
        [
            h2 * 0.25
                * y
                * (core + 24.0 * (x2 - 5.0 * y2) / (y2 - a2) - 144.0 * x2 / (x2 - a2)
                    + 24.0 * (3.0 * x2 - y2) * (x2 + a2) / px
                    + 48.0 * (y2 - x2) * (y2 + a2) / py),
            -h2 * 0.25
                * x
                * (core - 24.0 * (5.0 * x2 - y2) / (x2 - a2) - last / (y2 - a2) - 24.0 * (x2 - 3.0 * y2) * (y2 + a2) / py
                    + 48.0 * (x2 - y2) * (x2 + a2) / px),
        ]
    })
}

fn q7(ps: &ParamSet) -> Result<Built> {
    let (hbar, al) = (p(ps, "hbar"), p(ps, "alpha"));
    let h2 = hbar * hbar;
    Ok(Built::new(alpha_entry_potential(hbar, al, 2), vec![q7_x1(h2, al, false)?], Rect::new(shifted(al), shifted(al))))
}

fn holt_integral(a: f64, b: f64, c: f64) -> Result<ThirdOrderIntegral> {
    integral(coeffs(&[((0, 1, 2), 1.0)]), "px py^2", &[], &[0.0], move |x, y| {
        [-2.0 * a * y * y + 2.0 * b / (y * y), 8.0 * a * x * y + c * y]
    })
}

fn holt_potential(a: f64, b: f64, c: f64, hbar: f64) -> SeparablePotential {
    SeparablePotential::new(
        closed(format!("{}x^2 + {c}x", 4.0 * a), &[], move |x| 4.0 * a * x * x + c * x),
        closed(format!("{a}y^2 + {b}/y^2"), &[0.0], move |y| a * y * y + b * inv2(y)),
        hbar,
    )
}

fn q8(ps: &ParamSet) -> Result<Built> {
    let (a, b, c) = (p(ps, "a"), p(ps, "b"), p(ps, "c"));
    let v = holt_potential(a, b, c, p(ps, "hbar"));
    Ok(Built::new(v, vec![holt_integral(a, b, c)?], Rect::new((-1.5, 1.5), (0.3, 2.3))))
}

fn ratio3_potential(a: f64, hbar: f64, wall: f64) -> SeparablePotential {
    let v2 = if wall == 0.0 {
        closed(format!("{a}y^2"), &[], move |y| a * y * y)
    } else {
        closed(format!("{a}y^2 + hbar^2/y^2"), &[0.0], move |y| a * y * y + wall * inv2(y))
    };
    SeparablePotential::new(closed(format!("{}x^2", 9.0 * a), &[], move |x| 9.0 * a * x * x), v2, hbar)
}

fn ratio3_integral(a: f64) -> Result<ThirdOrderIntegral> {
    integral(coeffs(&[((1, 0, 2), 1.0)]), "{L, py^2}", &[], &[], move |x, y| {
        [2.0 / 3.0 * a * y.powi(3), -6.0 * a * x * y * y]
    })
}

fn q9(ps: &ParamSet) -> Result<Built> {
    let a = p(ps, "a");
    Ok(Built::new(ratio3_potential(a, p(ps, "hbar"), 0.0), vec![ratio3_integral(a)?], SQ))
}

fn q10(ps: &ParamSet) -> Result<Built> {
    let (a, hbar) = (p(ps, "a"), p(ps, "hbar"));
    let h2 = hbar * hbar;
    let x1 = integral(coeffs(&[((1, 0, 2), 1.0)]), "{L, py^2}", &[], &[0.0], move |x, y| {
        [2.0 * a * y.powi(3) / 3.0 - h2 / y, 3.0 * x * (-2.0 * a * y * y + h2 / (y * y))]
    })?;
    Ok(Built::new(ratio3_potential(a, hbar, h2), vec![x1], Rect::new((-1.5, 1.5), (0.3, 2.3))))
}

fn q11(ps: &ParamSet) -> Result<Built> {
    let (hbar, al) = (p(ps, "hbar"), p(ps, "alpha"));
    let h2 = hbar * hbar;
    let a2 = al * al;
    let q = 9.0 / (8.0 * a2 * a2);
    let v = SeparablePotential::new(
        closed("9 hbar^2 x^2/(8alpha^4)".into(), &[], move |x| h2 * (x * x * q)),
        closed("hbar^2(y^2/(8alpha^4) + 1/(y+alpha)^2 + 1/(y-alpha)^2)".into(), &[-al, al], move |y| h2 * alpha_well(y, al)),
        hbar,
    );
    let x1 = integral(coeffs(&[((1, 0, 2), 1.0)]), "{L, py^2}", &[], &[-al, al], move |x, y| {
        let d = y * y - a2;
        [
            h2 * (y * (y * y / (12.0 * a2 * a2) - 8.0 * a2 / (d * d) - 2.0 / d)),
            h2 * (0.75 * x * (8.0 * (y * y + a2) / (d * d) - y * y / (a2 * a2))),
        ]
    })?;
    Ok(Built::new(v, vec![x1], Rect::new((-1.5, 1.5), shifted(al))))
}

fn q12_x1_printed(h2: f64, a: f64) -> Result<ThirdOrderIntegral> {
    integral(coeffs(&[((2, 1, 0), 1.0)]), "{L^2, px}", &[0.0], &[0.0], move |x, y| {
        [3.0 * h2 * y * y / (x * x) + 2.0 * a * x * x / (y * y) + 0.5 * h2, -2.0 * h2 * y * y / (x * x)]
    })
}

fn q12(ps: &ParamSet) -> Result<Built> {
    let (a, hbar) = (p(ps, "a"), p(ps, "hbar"));
    let h2 = hbar * hbar;
    let v = SeparablePotential::new(
        closed("hbar^2/x^2".into(), &[0.0], move |x| h2 * inv2(x)),
        closed(format!("{a}/y^2"), &[0.0], move |y| a * inv2(y)),
        hbar,
    );
    let x2 = integral(coeffs(&[((1, 1, 1), 1.0)]), "{L, px py}", &[0.0], &[0.0], move |x, y| {
        [2.0 * a * x / (y * y), -2.0 * h2 * y / (x * x)]
    })?;
    Ok(Built::new(v, vec![l2_px(h2, a)?, x2, px_cubed_wall(h2)?], POS))
}

fn q13_x3(h2: f64, printed: bool) -> Result<ThirdOrderIntegral> {
    integral(coeffs(&[((2, 0, 1), 1.0)]), "{L^2, py}", &[0.0], &[0.0], move |x, y| {
        let tail = 3.0 * h2 * x * x / (y * y) + 2.0 * h2 * y * y / (x * x) + 0.5 * h2;
        if printed {
            [-2.0 * h2 * x / y + tail, zero()]
        } else {
            [-2.0 * h2 * x / y, tail]
        }
    })
}

fn q13(ps: &ParamSet) -> Result<Built> {
    let hbar = p(ps, "hbar");
    let h2 = hbar * hbar;
    let v = SeparablePotential::new(
        closed("hbar^2/x^2".into(), &[0.0], move |x| h2 * inv2(x)),
        closed("hbar^2/y^2".into(), &[0.0], move |y| h2 * inv2(y)),
        hbar,
    );
    let x4 = integral(coeffs(&[((1, 1, 1), 1.0)]), "{L, px py}", &[0.0], &[0.0], move |x, y| {
        [2.0 * h2 * x / (y * y), -2.0 * h2 * y / (x * x)]
    })?;
    let ints = vec![l_cubed_walls(h2)?, l2_px(h2, h2)?, q13_x3(h2, false)?, x4, px_cubed_wall(h2)?, py_cubed_wall(h2)?];
    Ok(Built::new(v, ints, POS))
}

fn q14(ps: &ParamSet) -> Result<Built> {
    let (a, hbar) = (p(ps, "a"), p(ps, "hbar"));
    let h2 = hbar * hbar;
    let v = SeparablePotential::new(
        closed(format!("{a}x"), &[], move |x| a * x),
        closed("hbar^2/y^2".into(), &[0.0], move |y| h2 * inv2(y)),
        hbar,
    );
    let x1 = integral(coeffs(&[((1, 0, 2), 1.0)]), "{L, py^2}", &[], &[0.0], move |x, y| {
        [-h2 / y, 3.0 * h2 * x / (y * y) - 0.5 * a * y * y]
    })?;
    let x3 = integral(coeffs(&[((0, 1, 2), 1.0)]), "px py^2", &[], &[0.0], move |_, y| {
        [2.0 * h2 / (y * y), a * y]
    })?;
    Ok(Built::new(v, vec![x1, py_cubed_wall(h2)?, x3], POS))
}

/// `k ℘(t)` on the image of `(lo, hi)`, padded.
fn weierstrass_component(label: &str, k: f64, g2: f64, g3: f64, lo: f64, hi: f64) -> Result<Potential1D> {
    let (a, b) = (lo - SPECFUN_PAD, hi + SPECFUN_PAD);
    let sol = Arc::new(weierstrass_p((a, b), g2, g3)?);
    Ok(Potential1D::from_evaluator(label, move |t| Ok(crate::phasecore::DerivStack::from_jet(&sol.tower::<5>(t)?).scaled(k)))
        .with_poles(&[0.0])
        .with_domain(a, b))
}

/// `2 p³ + {3 V, p}` for a component `V` in the chosen coordinate.
fn cubic_from_component(v: Potential1D, in_x: bool) -> Result<ThirdOrderIntegral> {
    let (m, label) = if in_x { ((0, 3, 0), "px^3") } else { ((0, 0, 3), "py^3") };
    let g = CorrectionFields::from_fn(move |x, y| {
        Ok(if in_x {
            [3.0 * Dual2::of_x(&v.eval(x)?), zero()]
        } else {
            [zero(), 3.0 * Dual2::of_y(&v.eval(y)?)]
        })
    });
    ThirdOrderIntegral::new(coeffs(&[(m, 1.0)]), g, label)
}

/// Caller-supplied `V(x)` paired with `ħ²℘(y)`.
pub fn instantiate_q15_with(params: &ParamSet, v_x: Potential1D) -> Result<Instance> {
    let entry = find("Q.15")?;
    let ps = resolve(entry, params)?;
    let mut built = q15_built(&ps, v_x)?;
    built.metadata.insert("custom_v_x".into(), 1.0);
    Ok(finish(entry, ps, built))
}

fn q15_built(ps: &ParamSet, v_x: Potential1D) -> Result<Built> {
    let hbar = p(ps, "hbar");
    let h2 = hbar * hbar;
    let domain = Rect::new((-1.5, 1.5), (0.3, 2.3));
    let v2 = weierstrass_component("hbar^2 wp(y)", h2, p(ps, "wp_g2"), p(ps, "wp_g3"), domain.y.0, domain.y.1)?;
    let x1 = cubic_from_component(v2.clone(), false)?;
    Ok(Built::new(SeparablePotential::new(v_x, v2, hbar), vec![x1], domain))
}

fn q15(ps: &ParamSet) -> Result<Built> {
    q15_built(ps, closed("x^2".into(), &[], |x| x * x))
}

fn q16(ps: &ParamSet) -> Result<Built> {
    let hbar = p(ps, "hbar");
    let h2 = hbar * hbar;
    let (g2, g3) = (p(ps, "wp_g2"), p(ps, "wp_g3"));
    let v1 = weierstrass_component("hbar^2 wp(x)", h2, g2, g3, 0.3, 2.3)?;
    let v2 = weierstrass_component("hbar^2 wp(y)", h2, g2, g3, 0.3, 2.3)?;
    let ints = vec![cubic_from_component(v1.clone(), true)?, cubic_from_component(v2.clone(), false)?];
    Ok(Built::new(SeparablePotential::new(v1, v2, hbar), ints, POS))
}

fn ic_from(ps: &ParamSet) -> PainleveIC {
    PainleveIC::new(p(ps, "ic_x0"), p(ps, "ic_y0"), p(ps, "ic_yp0"))
}

/// `k ω² P1(ω t)` on `(lo, hi)`.
fn p1_component(label: String, k: f64, omega: f64, ic: PainleveIC, lo: f64, hi: f64) -> Result<Potential1D> {
    let sol = Arc::new(painleve1(scaled_interval(lo, hi, omega, SPECFUN_PAD), ic)?);
    let w2 = omega * omega;
    scaled_transcendent(label, sol, omega, (lo - SPECFUN_PAD, hi + SPECFUN_PAD), move |_, p, _| p * (k * w2))
}

fn q17(ps: &ParamSet) -> Result<Built> {
    let (hbar, w1, w2) = (p(ps, "hbar"), p(ps, "omega1"), p(ps, "omega2"));
    let h2 = hbar * hbar;
    let ic = ic_from(ps);
    let v1 = p1_component("hbar^2 omega1^2 P1(omega1 x)".into(), h2, w1, ic, -1.5, 1.5)?;
    let v2 = p1_component("hbar^2 omega2^2 P1(omega2 y)".into(), h2, w2, ic, -1.5, 1.5)?;
    let (k1, k2) = (w1.powi(5), w2.powi(5));
    let (c1, c2) = (v1.clone(), v2.clone());
    let g = CorrectionFields::from_fn(move |x, y| {
        Ok([3.0 * k2 * Dual2::of_x(&c1.eval(x)?), -3.0 * k1 * Dual2::of_y(&c2.eval(y)?)])
    });
    let x1 = ThirdOrderIntegral::new(coeffs(&[((0, 3, 0), k2), ((0, 0, 3), -k1)]), g, "omega2^5 px^3 - omega1^5 py^3")?;
    Ok(Built::new(SeparablePotential::new(v1, v2, hbar), vec![x1], SQ))
}

fn q18(ps: &ParamSet) -> Result<Built> {
    let (a, hbar, k1, k2) = (p(ps, "a"), p(ps, "hbar"), p(ps, "K1"), p(ps, "K2"));
    if a <= 0.0 {
        return Err(Error::InvalidParameter { name: "a".into(), reason: "b1 = ±sqrt(8a) needs a > 0".into() });
    }
    let b1 = match ps.get("b1") {
        Some(b1) => {
            if (b1 * b1 - 8.0 * a).abs() > 1e-12 * 8.0 * a {
                return Err(Error::InvalidParameter { name: "b1".into(), reason: format!("must be ±sqrt(8a) = ±{}", (8.0 * a).sqrt()) });
            }
            b1
        }
        None => (8.0 * a).sqrt(),
    };
    let h2 = hbar * hbar;
    let alpha = -8.0 * a / h2;
    let domain = Rect::new((0.3, 1.7), (-1.5, 1.5));
    let span = (domain.x.0 - SPECFUN_PAD, domain.x.1 + SPECFUN_PAD);
    let zero_branch = k2 == 0.0 && ps.get("ic_y0").is_none();
    let ic = if zero_branch {
        PainleveIC::new(p(ps, "ic_x0"), 0.0, 0.0)
    } else {
        PainleveIC::new(p(ps, "ic_x0"), ps.get("ic_y0").unwrap_or(-0.4), p(ps, "ic_yp0"))
    };
    let sol = Arc::new(painleve4(span, alpha, k1, k2, ic)?);
    let c0 = (-h2 * k1 + hbar * b1) / 6.0;
    let v1 = scaled_transcendent("a x^2 + (hbar/2) b1 P4' + 4a P4^2 + 4a x P4 + const".into(), sol, 1.0, span, move |x, p, dp| {
        x * x * a + dp * (0.5 * hbar * b1) + p * p * (4.0 * a) + x * p * (4.0 * a) + c0
    })?;
    let v2 = closed(format!("{a}y^2"), &[], move |y| y * y * a);
    let x1 = l_px2_implicit(v1.clone(), a, hbar)?;
    let mut built = Built::new(SeparablePotential::new(v1, v2, hbar), vec![x1], domain);
    built.metadata.insert("b1".into(), b1);
    built.metadata.insert("p4_alpha".into(), alpha);
    built.metadata.insert("constant".into(), c0);
    built.metadata.insert("zero_branch".into(), if zero_branch { 1.0 } else { 0.0 });
    Ok(built)
}

fn q19(ps: &ParamSet) -> Result<Built> {
    let (a, hbar, w) = (p(ps, "a"), p(ps, "hbar"), p(ps, "omega"));
    let h2 = hbar * hbar;
    let v1 = p1_component("hbar^2 omega^2 P1(omega x)".into(), h2, w, ic_from(ps), -1.5, 1.5)?;
    let v2 = closed(format!("{a}y"), &[], move |y| y * a);
    let c = v1.clone();
    let g2 = w.powi(5) * h2 * h2 / (4.0 * a);
    let g = CorrectionFields::from_fn(move |x, _| Ok([3.0 * Dual2::of_x(&c.eval(x)?), cst(g2)]));
    let x1 = ThirdOrderIntegral::new(coeffs(&[((0, 3, 0), 1.0)]), g, "px^3")?;
    Ok(Built::new(SeparablePotential::new(v1, v2, hbar), vec![x1], SQ))
}

fn drach_entry(ps: &ParamSet, route: CaseIIRoute, domain: Rect) -> Result<Built> {
    let (a, b, hbar) = (p(ps, "a"), p(ps, "b"), p(ps, "hbar"));
    let v = implicit::v_case_ii_quantum(a, b, hbar, route, domain.x)?;
    let x1 = drach_integral(v.v1.clone(), a, b, "a px^3 - b px^2 py")?;
    Ok(Built::new(v, vec![x1], domain))
}

fn q20(ps: &ParamSet) -> Result<Built> {
    drach_entry(ps, CaseIIRoute::ZeroK2 { ic: ic_from(ps) }, SQ)
}

fn q21(ps: &ParamSet) -> Result<Built> {
    let route = CaseIIRoute::Kappa { kappa: p(ps, "kappa"), ic: ic_from(ps) };
    drach_entry(ps, route, Rect::new((-1.2, 1.2), (-1.5, 1.5)))
}

// ---------------------------------------------------------------------------
// classical entries

fn c1(ps: &ParamSet) -> Result<Built> {
    let a = p(ps, "a");
    let v = SeparablePotential::new(
        closed(format!("{a}x^2"), &[], move |x| a * x * x),
        closed(format!("{a}y^2"), &[], move |y| a * y * y),
        0.0,
    );
    Ok(Built::new(v, oscillator_integrals(a)?, SQ).sampling(state_box((-1.0, 1.0), (-1.0, 1.0))))
}

fn c2(ps: &ParamSet) -> Result<Built> {
    let mut with_hbar = ps.clone();
    with_hbar.set("hbar", 0.0)?;
    Ok(q2(&with_hbar)?.sampling(state_box((0.5, 1.5), (0.5, 1.5))))
}

fn c3(ps: &ParamSet) -> Result<Built> {
    let (a, b, c) = (p(ps, "a"), p(ps, "b"), p(ps, "c"));
    let v = holt_potential(a, b, c, 0.0);
    Ok(Built::new(v, vec![holt_integral(a, b, c)?], Rect::new((-1.5, 1.5), (0.3, 2.3)))
        .sampling(state_box((-1.0, 1.0), (0.5, 1.5))))
}

fn c4(ps: &ParamSet) -> Result<Built> {
    let a = p(ps, "a");
    Ok(Built::new(ratio3_potential(a, 0.0, 0.0), vec![ratio3_integral(a)?], SQ).sampling(state_box((-1.0, 1.0), (-1.0, 1.0))))
}

fn quadrant(beta: f64) -> (f64, f64) {
    if beta > 0.0 {
        (0.3, 2.3)
    } else {
        (-2.3, -0.3)
    }
}

fn c5(ps: &ParamSet) -> Result<Built> {
    let (b1, b2, s1, s2) = (p(ps, "beta1"), p(ps, "beta2"), p(ps, "sign1"), p(ps, "sign2"));
    let half = |beta: f64| if beta > 0.0 { (0.0, f64::INFINITY) } else { (f64::NEG_INFINITY, 0.0) };
    let v1 = closed(format!("{s1} sqrt({b1} x)"), &[0.0], move |x| s1 * (x * b1).sqrt());
    let v1 = v1.with_domain(half(b1).0, half(b1).1);
    let v2 = closed(format!("{s2} sqrt({b2} y)"), &[0.0], move |y| s2 * (y * b2).sqrt());
    let v2 = v2.with_domain(half(b2).0, half(b2).1);
    let x1 = integral(coeffs(&[((0, 3, 0), b2), ((0, 0, 3), -b1)]), "beta2 px^3 - beta1 py^3", &[0.0], &[0.0], move |x, y| {
        [3.0 * b2 * s1 * (b1 * x).sqrt(), -3.0 * b1 * s2 * (b2 * y).sqrt()]
    })?;
    let (dx, dy) = (quadrant(b1), quadrant(b2));
    let inner = |d: (f64, f64)| if d.0 > 0.0 { (0.5, 1.5) } else { (-1.5, -0.5) };
    // momenta point away from the axes so that the repulsive branches never reach them
    let mom = |beta: f64, s: f64| {
        if s < 0.0 {
            if beta > 0.0 {
                (0.0, 0.5)
            } else {
                (-0.5, 0.0)
            }
        } else {
            (-0.5, 0.5)
        }
    };
    let bx = PhaseBox { x: inner(dx), y: inner(dy), px: mom(b1, s1), py: mom(b2, s2) };
    Ok(Built::new(SeparablePotential::new(v1, v2, 0.0), vec![x1], Rect::new(dx, dy)).sampling(bx))
}

/// Trace window of the case-i branch used by C.6.
pub const C6_TRACE: (f64, f64) = (0.02, 3.0);
const C6_NODES: usize = 600;

fn c6(ps: &ParamSet) -> Result<Built> {
    let (a, c, d) = (p(ps, "a"), p(ps, "c"), p(ps, "d"));
    let rel = ImplicitRelation::CaseI { a, c, d };
    let seed_x = p(ps, "seed_x");
    let branch = p(ps, "branch");
    let roots = rel.scan_roots(seed_x, (-20.0, 20.0), implicit::SCAN_STEP);
    let k = branch as usize;
    if branch < 0.0 || branch.fract() != 0.0 || k >= roots.len() {
        return Err(Error::InvalidParameter {
            name: "branch".into(),
            reason: format!("{} real roots at x = {seed_x}; branch index {branch} is out of range", roots.len()),
        });
    }
    let xs: Vec<f64> = (0..=C6_NODES).map(|i| C6_TRACE.0 + (C6_TRACE.1 - C6_TRACE.0) * i as f64 / C6_NODES as f64).collect();
    let trace = rel.trace(&xs, (seed_x, roots[k]))?;
    let v1 = implicit::branch_potential(&trace, "V1 on the case-i relation")?;
    let v2 = closed(format!("{a}y^2"), &[], move |y| y * y * a);
    let x1 = l_px2_implicit(v1.clone(), a, 0.0)?;
    let mut built = Built::new(SeparablePotential::new(v1, v2, 0.0), vec![x1], Rect::new((0.3, 1.5), (-1.5, 1.5)))
        .sampling(PhaseBox { x: (0.3, 0.5), y: (-0.5, 0.5), px: (-0.1, 0.1), py: (-0.5, 0.5) });
    built.metadata.insert("seed_x".into(), seed_x);
    built.metadata.insert("seed_v1".into(), trace.seed.1);
    built.metadata.insert("branch".into(), branch);
    built.metadata.insert("roots_at_seed".into(), roots.len() as f64);
    built.metadata.insert("trace_max_residual".into(), trace.max_residual());
    Ok(built)
}

fn c7(ps: &ParamSet) -> Result<Built> {
    let (a, b) = (p(ps, "a"), p(ps, "b"));
    let v1 = closed(format!("{b} sqrt(x)"), &[0.0], move |x| b * x.sqrt()).with_domain(0.0, f64::INFINITY);
    let v2 = closed(format!("{a}y"), &[], move |y| y * a);
    let x1 = integral(coeffs(&[((0, 3, 0), 1.0)]), "px^3", &[0.0], &[], move |x, _| {
        [3.0 * b * x.sqrt(), cst(-3.0 * b * b / (2.0 * a))]
    })?;
    Ok(Built::new(SeparablePotential::new(v1, v2, 0.0), vec![x1], Rect::new((0.3, 2.3), (-1.5, 1.5)))
        .sampling(PhaseBox { x: (0.5, 1.5), y: (-0.5, 0.5), px: (0.0, 0.5), py: (-0.5, 0.5) }))
}

/// Trace window of the case-ii branch used by C.8.
pub const C8_TRACE: (f64, f64) = (-400.0, 30.0);
const C8_NODES: usize = 8600;

fn c8(ps: &ParamSet) -> Result<Built> {
    let (a, b, d) = (p(ps, "a"), p(ps, "b"), p(ps, "d"));
    if d <= 0.0 {
        return Err(Error::InvalidParameter { name: "d".into(), reason: "the branch V1 > max(0, bx) needs d > 0".into() });
    }
    let rel = ImplicitRelation::CaseII { b, d };
    // at x = 0 the relation reduces to V1³ = d
    let seed = (0.0, d.cbrt());
    let xs: Vec<f64> = (0..=C8_NODES).map(|i| C8_TRACE.0 + (C8_TRACE.1 - C8_TRACE.0) * i as f64 / C8_NODES as f64).collect();
    let trace = rel.trace(&xs, seed)?;
    let v1 = implicit::branch_potential(&trace, "V1 on the case-ii relation")?;
    let v2 = closed(format!("{a}y"), &[], move |y| y * a);
    let x1 = drach_integral(v1.clone(), a, b, "a px^3 - b px^2 py")?;
    let mut built = Built::new(SeparablePotential::new(v1, v2, 0.0), vec![x1], SQ)
        .sampling(PhaseBox { x: (-1.0, 1.0), y: (-0.5, 0.5), px: (-0.5, 0.5), py: (-0.5, 0.5) });
    built.metadata.insert("trace_max_residual".into(), trace.max_residual());
    Ok(built)
}

// ---------------------------------------------------------------------------
// the table

use Regime::{Classical, Quantum};
use Rule::{Any, NonNegative, NonZero, Positive, Sign};
use Tier::{ClosedForm, SpecialFunction};

const HBAR_OPT: ParamSpec = req("hbar", 1.0, NonNegative);
const HBAR: ParamSpec = req("hbar", 1.0, Positive);
const ALPHA: ParamSpec = req("alpha", 1.0, NonZero);

static ENTRIES: [PotentialEntry; 29] = [
    PotentialEntry {
        id: "Q.1",
        table1_label: Some("Va"),
        regime: Quantum,
        tier: ClosedForm,
        formula: "V = a(x^2 + y^2)",
        params: &[req("a", 1.0, Any), HBAR_OPT],
        integral_labels: &["L^3", "{L, px py}", "{L, py^2}", "{L, px^2}"],
        canonical_ic: None,
        notes: &[],
        build: q1,
    },
    PotentialEntry {
        id: "Q.2",
        table1_label: Some("Vb"),
        regime: Quantum,
        tier: ClosedForm,
        formula: "V = a(x^2 + y^2) + b/x^2 + c/y^2",
        params: &[req("a", 1.0, Any), req("b", 1.0, Any), req("c", 1.0, Any), HBAR_OPT],
        integral_labels: &["{L, px py}"],
        canonical_ic: None,
        notes: &[],
        build: q2,
    },
    PotentialEntry {
        id: "Q.3",
        table1_label: Some("Vc"),
        regime: Quantum,
        tier: ClosedForm,
        formula: "V = a(x^2 + y^2) + hbar^2/x^2 + hbar^2/y^2",
        params: &[req("a", 1.0, Any), HBAR],
        integral_labels: &["2L^3", "{L, px py}"],
        canonical_ic: None,
        notes: &[],
        build: q3,
    },
    PotentialEntry {
        id: "Q.4",
        table1_label: Some("Vd"),
        regime: Quantum,
        tier: ClosedForm,
        formula: "V = a(x^2 + y^2) + hbar^2/y^2",
        params: &[req("a", 1.0, Any), HBAR],
        integral_labels: &["2L^3", "{L, px py}", "{L, py^2}"],
        canonical_ic: None,
        notes: &[],
        build: q4,
    },
    PotentialEntry {
        id: "Q.5",
        table1_label: Some("Ve"),
        regime: Quantum,
        tier: ClosedForm,
        formula: "V = hbar^2((x^2 + y^2)/(8alpha^4) + 1/(x - alpha)^2 + 1/(x + alpha)^2)",
        params: &[HBAR, ALPHA, opt("omega", Positive)],
        integral_labels: &["2L^3 - 3alpha^2{L, py^2}", "{L, px^2}"],
        canonical_ic: None,
        notes: &["X1: the printed g2 carries -24alpha^4 inside x^4 - 10alpha^2 x^2 - 24alpha^4; the determining equations require -23alpha^4. The printed form is kept as a variant."],
        build: q5,
    },
    PotentialEntry {
        id: "Q.6",
        table1_label: Some("Vf"),
        regime: Quantum,
        tier: ClosedForm,
        formula: "V = hbar^2((x^2 + y^2)/(8alpha^4) + 1/y^2 + 1/(x + alpha)^2 + 1/(x - alpha)^2)",
        params: &[HBAR, ALPHA, opt("omega", Positive)],
        integral_labels: &["2L^3 - 3alpha^2{L, py^2}"],
        canonical_ic: None,
        notes: &["X1: the term 6y^3(x^2 + alpha^2)/((x - alpha)^2 (x + alpha)^2) in g1 enters with a minus sign; the printed plus sign is kept as a variant."],
        build: q6,
    },
    PotentialEntry {
        id: "Q.7",
        table1_label: Some("Vg"),
        regime: Quantum,
        tier: ClosedForm,
        formula: "V = hbar^2((x^2 + y^2)/(8alpha^4) + 1/(y - alpha)^2 + 1/(x - alpha)^2 + 1/(y + alpha)^2 + 1/(x + alpha)^2)",
        params: &[HBAR, ALPHA, opt("omega", Positive)],
        integral_labels: &["2L^3 - 3alpha^2({L, px^2} + {L, py^2})"],
        canonical_ic: None,
        notes: &["X1: the printed parentheses are unbalanced; g1 and g2 are read as sums inside y(...) and x(...). In g2 the term 144x^2/(y^2 - alpha^2) must read 144y^2/(y^2 - alpha^2), the mirror of g1. The printed form is kept as a variant."],
        build: q7,
    },
    PotentialEntry {
        id: "Q.8",
        table1_label: Some("Vh"),
        regime: Quantum,
        tier: ClosedForm,
        formula: "V = a(4x^2 + y^2) + b/y^2 + cx",
        params: &[req("a", 1.0, Any), req("b", 1.0, Any), req("c", 1.0, Any), HBAR_OPT],
        integral_labels: &["px py^2"],
        canonical_ic: None,
        notes: &[],
        build: q8,
    },
    PotentialEntry {
        id: "Q.9",
        table1_label: Some("Vi"),
        regime: Quantum,
        tier: ClosedForm,
        formula: "V = a(9x^2 + y^2)",
        params: &[req("a", 1.0, Any), HBAR_OPT],
        integral_labels: &["{L, py^2}"],
        canonical_ic: None,
        notes: &[],
        build: q9,
    },
    PotentialEntry {
        id: "Q.10",
        table1_label: Some("Vj"),
        regime: Quantum,
        tier: ClosedForm,
        formula: "V = a(9x^2 + y^2) + hbar^2/y^2",
        params: &[req("a", 1.0, Any), HBAR],
        integral_labels: &["{L, py^2}"],
        canonical_ic: None,
        notes: &[],
        build: q10,
    },
    PotentialEntry {
        id: "Q.11",
        table1_label: Some("Vk"),
        regime: Quantum,
        tier: ClosedForm,
        formula: "V = hbar^2((9x^2 + y^2)/(8alpha^4) + 1/(y + alpha)^2 + 1/(y - alpha)^2)",
        params: &[HBAR, ALPHA, opt("omega", Positive)],
        integral_labels: &["{L, py^2}"],
        canonical_ic: None,
        notes: &[],
        build: q11,
    },
    PotentialEntry {
        id: "Q.12",
        table1_label: Some("Vl"),
        regime: Quantum,
        tier: ClosedForm,
        formula: "V = hbar^2/x^2 + a/y^2",
        params: &[req("a", 1.0, Any), HBAR],
        integral_labels: &["{L^2, px}", "{L, px py}", "px^3"],
        canonical_ic: None,
        notes: &["X1: the printed term -2hbar^2{y^2/x^2, py} fails the determining equations; the analogous X2 of Q.13 has -2hbar^2{y/x, py}, which is what they require. Both are stored; the printed form is a variant."],
        build: q12,
    },
    PotentialEntry {
        id: "Q.13",
        table1_label: Some("Vm"),
        regime: Quantum,
        tier: ClosedForm,
        formula: "V = hbar^2/x^2 + hbar^2/y^2",
        params: &[HBAR],
        integral_labels: &["2L^3", "{L^2, px}", "{L^2, py}", "{L, px py}", "px^3", "py^3"],
        canonical_ic: None,
        notes: &["X3: the last anticommutator is printed with px; the mirror of X2 (and the determining equations) require py. The printed form is a variant."],
        build: q13,
    },
    PotentialEntry {
        id: "Q.14",
        table1_label: Some("Vn"),
        regime: Quantum,
        tier: ClosedForm,
        formula: "V = ax + hbar^2/y^2",
        params: &[req("a", 1.0, Any), HBAR],
        integral_labels: &["{L, py^2}", "py^3", "px py^2"],
        canonical_ic: None,
        notes: &[],
        build: q14,
    },
    PotentialEntry {
        id: "Q.15",
        table1_label: Some("Vo"),
        regime: Quantum,
        tier: SpecialFunction,
        formula: "V = hbar^2 wp(y; wp_g2, wp_g3) + V(x), default V(x) = x^2",
        params: &[HBAR, req("wp_g2", 0.0, Any), req("wp_g3", 1.0, Any)],
        integral_labels: &["py^3"],
        canonical_ic: Some("Laurent seed of wp about the pole at 0"),
        notes: &["Table 1 prints hbar^2/y^2 + V(x) for this row, the degenerate wp with wp_g2 = wp_g3 = 0."],
        build: q15,
    },
    PotentialEntry {
        id: "Q.16",
        table1_label: None,
        regime: Quantum,
        tier: SpecialFunction,
        formula: "V = hbar^2(wp(x) + wp(y))",
        params: &[HBAR, req("wp_g2", 0.0, Any), req("wp_g3", 1.0, Any)],
        integral_labels: &["px^3", "py^3"],
        canonical_ic: Some("Laurent seed of wp about the pole at 0"),
        notes: &[],
        build: q16,
    },
    PotentialEntry {
        id: "Q.17",
        table1_label: None,
        regime: Quantum,
        tier: SpecialFunction,
        formula: "V = hbar^2 omega1^2 P1(omega1 x) + hbar^2 omega2^2 P1(omega2 y)",
        params: &[
            HBAR,
            req("omega1", 1.0, NonZero),
            req("omega2", 1.2, NonZero),
            req("ic_x0", 0.0, Any),
            req("ic_y0", 0.0, Any),
            req("ic_yp0", 0.0, Any),
        ],
        integral_labels: &["omega2^5 px^3 - omega1^5 py^3"],
        canonical_ic: Some("P1(0) = 0, P1'(0) = 0 for both components"),
        notes: &["The second term is printed as P1(omega2 x); separability requires the argument omega2 y, which is what is implemented."],
        build: q17,
    },
    PotentialEntry {
        id: "Q.18",
        table1_label: None,
        regime: Quantum,
        tier: SpecialFunction,
        formula: "V = a(x^2 + y^2) + (hbar/2) b1 P4' + 4a P4^2 + 4a x P4 + (-hbar^2 K1 + hbar b1)/6, P4 = P4(x, -8a/hbar^2)",
        params: &[
            req("a", 1.0, Positive),
            HBAR,
            opt("b1", Any),
            req("K1", 4.0, Any),
            req("K2", 0.5, Any),
            req("ic_x0", 1.0, Any),
            opt("ic_y0", Any),
            req("ic_yp0", 0.0, Any),
        ],
        integral_labels: &["{L, px^2}"],
        canonical_ic: Some("P4(1) = -0.4, P4'(1) = 0; with K2 = 0 and no ic_y0 the zero branch P4 = 0. b1 defaults to +sqrt(8a)."),
        notes: &[],
        build: q18,
    },
    PotentialEntry {
        id: "Q.19",
        table1_label: None,
        regime: Quantum,
        tier: SpecialFunction,
        formula: "V = ay + hbar^2 omega^2 P1(omega x)",
        params: &[
            req("a", 1.0, NonZero),
            HBAR,
            req("omega", 1.0, NonZero),
            req("ic_x0", 0.0, Any),
            req("ic_y0", 0.0, Any),
            req("ic_yp0", 0.0, Any),
        ],
        integral_labels: &["px^3"],
        canonical_ic: Some("P1(0) = 0, P1'(0) = 0"),
        notes: &["omega is primary; lambda = hbar^4 omega^5 is derived."],
        build: q19,
    },
    PotentialEntry {
        id: "Q.20",
        table1_label: None,
        regime: Quantum,
        tier: SpecialFunction,
        formula: "V = bx + ay + (2 hbar b)^(2/3) P2^2((2b/hbar^2)^(1/3) x, 0)",
        params: &[
            req("a", 1.0, NonZero),
            req("b", 1.0, NonZero),
            HBAR,
            req("ic_x0", 0.0, Any),
            req("ic_y0", 0.3, Any),
            req("ic_yp0", 0.0, Any),
        ],
        integral_labels: &["a px^3 - b px^2 py"],
        canonical_ic: Some("P2(0) = 0.3, P2'(0) = 0 with alpha = 0"),
        notes: &["The px^2 py term maps to A021 = -b."],
        build: q20,
    },
    PotentialEntry {
        id: "Q.21",
        table1_label: None,
        regime: Quantum,
        tier: SpecialFunction,
        formula: "V = ay + (2 hbar^2 b^2)^(1/3)(P2'(z, kappa) + P2^2(z, kappa)), z = -(4b/hbar^2)^(1/3) x",
        params: &[
            req("a", 1.0, NonZero),
            req("b", 1.0, NonZero),
            HBAR,
            req("kappa", 1.0, Any),
            req("ic_x0", 0.0, Any),
            req("ic_y0", -0.3, Any),
            req("ic_yp0", 0.0, Any),
        ],
        integral_labels: &["a px^3 - b px^2 py"],
        canonical_ic: Some("P2(0) = -0.3, P2'(0) = 0 with alpha = kappa"),
        notes: &["The printed potential has unbalanced parentheses; it is read as P2'(z, kappa) + P2(z, kappa)^2 with z = -(4b/hbar^2)^(1/3) x."],
        build: q21,
    },
    PotentialEntry {
        id: "C.1",
        table1_label: Some("Va"),
        regime: Classical,
        tier: ClosedForm,
        formula: "V = a(x^2 + y^2)",
        params: &[req("a", 1.0, Any)],
        integral_labels: &["L^3", "{L, px py}", "{L, py^2}", "{L, px^2}"],
        canonical_ic: None,
        notes: &[],
        build: c1,
    },
    PotentialEntry {
        id: "C.2",
        table1_label: Some("Vb"),
        regime: Classical,
        tier: ClosedForm,
        formula: "V = a(x^2 + y^2) + b/x^2 + c/y^2",
        params: &[req("a", 1.0, Any), req("b", 1.0, Any), req("c", 1.0, Any)],
        integral_labels: &["{L, px py}"],
        canonical_ic: None,
        notes: &[],
        build: c2,
    },
    PotentialEntry {
        id: "C.3",
        table1_label: Some("Vh"),
        regime: Classical,
        tier: ClosedForm,
        formula: "V = a(4x^2 + y^2) + b/y^2 + cx",
        params: &[req("a", 1.0, Any), req("b", 1.0, Any), req("c", 1.0, Any)],
        integral_labels: &["px py^2"],
        canonical_ic: None,
        notes: &[],
        build: c3,
    },
    PotentialEntry {
        id: "C.4",
        table1_label: Some("Vi"),
        regime: Classical,
        tier: ClosedForm,
        formula: "V = a(9x^2 + y^2)",
        params: &[req("a", 1.0, Any)],
        integral_labels: &["{L, py^2}"],
        canonical_ic: None,
        notes: &[],
        build: c4,
    },
    PotentialEntry {
        id: "C.5",
        table1_label: None,
        regime: Classical,
        tier: ClosedForm,
        formula: "V = sign1 sqrt(beta1 x) + sign2 sqrt(beta2 y)",
        params: &[req("beta1", 1.0, NonZero), req("beta2", 1.0, NonZero), req("sign1", -1.0, Sign), req("sign2", -1.0, Sign)],
        integral_labels: &["beta2 px^3 - beta1 py^3"],
        canonical_ic: None,
        notes: &["Implemented inside one open quadrant; patching across the axes is not attempted."],
        build: c5,
    },
    PotentialEntry {
        id: "C.6",
        table1_label: None,
        regime: Classical,
        tier: ClosedForm,
        formula: "V = ay^2 + V1, cx^2 - d^2 + 2d(V1 - ax^2)(3V1 + ax^2) = (9V1 - ax^2)(V1 - ax^2)^3",
        params: &[
            req("a", 1.0, NonZero),
            req("c", 1.0, Any),
            req("d", 1.0, Any),
            req("seed_x", 0.3, Any),
            req("branch", 0.0, NonNegative),
        ],
        integral_labels: &["{L, px^2}"],
        canonical_ic: Some("branch = index of the real root at seed_x, in increasing order (0 = lowest)"),
        notes: &["V1 is traced over x in [0.02, 3] and differentiated implicitly."],
        build: c6,
    },
    PotentialEntry {
        id: "C.7",
        table1_label: None,
        regime: Classical,
        tier: ClosedForm,
        formula: "V = ay + b sqrt(x)",
        params: &[req("a", 1.0, NonZero), req("b", -1.0, Any)],
        integral_labels: &["px^3"],
        canonical_ic: None,
        notes: &["With b > 0 the force drives every trajectory into the wall x = 0; the default b = -1 keeps trajectories inside x > 0."],
        build: c7,
    },
    PotentialEntry {
        id: "C.8",
        table1_label: None,
        regime: Classical,
        tier: ClosedForm,
        formula: "V = ay + V1, (V1 - bx)^2 V1 = d",
        params: &[req("a", 1.0, NonZero), req("b", 1.0, NonZero), req("d", 1.0, Positive)],
        integral_labels: &["a px^3 - b px^2 py"],
        canonical_ic: Some("the unique root with V1 > max(0, bx), seeded at V1(0) = d^(1/3)"),
        notes: &["The px^2 py term maps to A021 = -b. V1 is traced over x in [-400, 30]."],
        build: c8,
    },
];

// ---------------------------------------------------------------------------
// queries

pub fn entries() -> &'static [PotentialEntry] {
    &ENTRIES
}

pub fn find(id: &str) -> Result<&'static PotentialEntry> {
    ENTRIES.iter().find(|e| e.id == id).ok_or_else(|| Error::UnknownEntry(id.to_string()))
}

pub fn list_entries() -> Vec<EntrySummary> {
    ENTRIES
        .iter()
        .map(|e| EntrySummary {
            id: e.id,
            table1_label: e.table1_label,
            regime: e.regime,
            params: e.params.to_vec(),
            integral_count: e.integral_labels.len(),
            integral_labels: e.integral_labels.to_vec(),
        })
        .collect()
}

/// Defaults filled in, foreign names rejected, rules checked.
fn resolve(entry: &PotentialEntry, params: &ParamSet) -> Result<ParamSet> {
    for (name, _) in params.iter() {
        if !entry.params.iter().any(|s| s.name == name) {
            return Err(Error::InvalidParameter { name: name.into(), reason: format!("not a parameter of {}", entry.id) });
        }
    }
    let mut out = ParamSet::new();
    for spec in entry.params {
        if let Some(v) = params.get(spec.name).or(spec.default) {
            spec.rule.check(spec.name, v)?;
            out.set(spec.name, v)?;
        }
    }
    Ok(out)
}

fn finish(entry: &'static PotentialEntry, params: ParamSet, built: Built) -> Instance {
    Instance {
        id: entry.id,
        params,
        potential: built.potential,
        integrals: built.integrals,
        domain: built.domain,
        dynamics_box: built.dynamics_box,
        tier: entry.tier,
        metadata: built.metadata,
    }
}

/// Builds the potential and every listed integral of an entry.
pub fn instantiate(id: &str, params: &ParamSet) -> Result<Instance> {
    let entry = find(id)?;
    let ps = resolve(entry, params)?;
    let built = (entry.build)(&ps)?;
    debug_assert_eq!(built.integrals.len(), entry.integral_labels.len());
    Ok(finish(entry, ps, built))
}

/// Integrals exactly as printed where the printed form differs from the
/// stored one, as `(index into the listed integrals, integral)`.
pub fn printed_variants(id: &str, params: &ParamSet) -> Result<Vec<(usize, ThirdOrderIntegral)>> {
    let entry = find(id)?;
    let ps = resolve(entry, params)?;
    let h2 = ps.get("hbar").map_or(0.0, |h| h * h);
    Ok(match id {
        "Q.5" => vec![(0, q5_x1(h2, p(&ps, "alpha"), true)?)],
        "Q.6" => vec![(0, q6_x1(h2, p(&ps, "alpha"), true)?)],
        "Q.7" => vec![(0, q7_x1(h2, p(&ps, "alpha"), true)?)],
        "Q.12" => vec![(0, q12_x1_printed(h2, p(&ps, "a"))?)],
        "Q.13" => vec![(2, q13_x3(h2, true)?)],
        _ => Vec::new(),
    })
}

/// Parses a leading-term label into the monomials it names, e.g.
/// `"2L^3 - 3alpha^2{L, py^2}"` gives `[(3,0,0), (1,0,2)]`.
pub fn parse_leading_label(label: &str) -> Result<Vec<(u8, u8, u8)>> {
    let cleaned: String = label.chars().filter(|c| !matches!(c, '(' | ')')).collect();
    let mut terms = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for ch in cleaned.chars() {
        match ch {
            '{' => depth += 1,
            '}' => depth -= 1,
            _ => {}
        }
        if (ch == '+' || ch == '-') && depth == 0 {
            terms.push(std::mem::take(&mut cur));
        } else {
            cur.push(ch);
        }
    }
    terms.push(cur);
    let mut out = Vec::new();
    for term in terms.iter().map(|t| t.trim()).filter(|t| !t.is_empty()) {
        let start = ["{", "L", "px", "py"].iter().filter_map(|k| term.find(k)).min();
        let Some(start) = start else {
            return Err(Error::InvalidParameter { name: "label".into(), reason: format!("no momentum monomial in `{term}`") });
        };
        let mono: String = term[start..].chars().filter(|c| !c.is_whitespace()).collect();
        let m = match mono.as_str() {
            "L^3" => (3, 0, 0),
            "{L^2,px}" => (2, 1, 0),
            "{L^2,py}" => (2, 0, 1),
            "{L,px^2}" => (1, 2, 0),
            "{L,pxpy}" => (1, 1, 1),
            "{L,py^2}" => (1, 0, 2),
            "px^3" => (0, 3, 0),
            "px^2py" => (0, 2, 1),
            "pxpy^2" => (0, 1, 2),
            "py^3" => (0, 0, 3),
            other => {
                return Err(Error::InvalidParameter { name: "label".into(), reason: format!("unrecognized monomial `{other}`") })
            }
        };
        out.push(m);
    }
    out.sort_by_key(|m| crate::phasecore::MONOMIALS.iter().position(|x| x == m));
    out.dedup();
    Ok(out)
}

/// Rows of Table 1: `(row label, entry id, leading terms joined by "; ")`.
pub fn table1() -> Vec<(&'static str, &'static str, String)> {
    ENTRIES
        .iter()
        .filter(|e| e.regime == Quantum)
        .filter_map(|e| e.table1_label.map(|l| (l, e.id, e.integral_labels.join("; "))))
        .collect()
}

/// Classical counterpart of an entry as ħ → 0.
pub fn classical_limit(id: &str, params: &ParamSet) -> Result<ClassicalLimit> {
    let entry = find(id)?;
    let ps = resolve(entry, params)?;
    let to = |target: &'static str, pairs: &[(&str, f64)]| -> Result<ClassicalLimit> {
        Ok(ClassicalLimit { target: LimitTarget::Entry(target), params: ParamSet::from_pairs(pairs)? })
    };
    let free = || Ok(ClassicalLimit { target: LimitTarget::FreeMotion, params: ParamSet::new() });
    let none = || Err(Error::NoLimit(id.to_string()));
    let get = |n: &str| p(&ps, n);
    match id {
        "Q.1" | "Q.3" | "Q.4" => to("C.1", &[("a", get("a"))]),
        "Q.2" => to("C.2", &[("a", get("a")), ("b", get("b")), ("c", get("c"))]),
        // α = sqrt(ħ)/ω turns the ħ²/(8α⁴) prefactor into ω⁴/8
        "Q.5" | "Q.6" | "Q.7" => match ps.get("omega") {
            Some(w) => to("C.1", &[("a", w.powi(4) / 8.0)]),
            None => free(),
        },
        "Q.8" => to("C.3", &[("a", get("a")), ("b", get("b")), ("c", get("c"))]),
        "Q.9" | "Q.10" => to("C.4", &[("a", get("a"))]),
        "Q.11" => match ps.get("omega") {
            Some(w) => to("C.4", &[("a", w.powi(4) / 8.0)]),
            None => free(),
        },
        "Q.12" => to("C.2", &[("a", 0.0), ("b", 0.0), ("c", get("a"))]),
        "Q.13" | "Q.16" => free(),
        "Q.14" => to("C.3", &[("a", 0.0), ("b", 0.0), ("c", get("a"))]),
        "Q.17" => {
            let h4 = get("hbar").powi(4);
            to("C.5", &[("beta1", h4 * get("omega1").powi(5) / 6.0), ("beta2", h4 * get("omega2").powi(5) / 6.0)])
        }
        "Q.18" if get("K2") == 0.0 => to("C.1", &[("a", get("a"))]),
        "Q.19" => {
            let lambda = get("hbar").powi(4) * get("omega").powi(5);
            if lambda > 0.0 {
                to("C.7", &[("a", get("a")), ("b", (lambda / 6.0).sqrt())])
            } else {
                none()
            }
        }
        "Q.20" => to("C.8", &[("a", get("a")), ("b", get("b")), ("d", 0.0)]),
        _ => none(),
    }
}

/// Markdown reference: one section per entry with formula, schema,
/// canonical initial data, default domain and audit notes.
pub fn reference_document() -> String {
    let mut s = String::from("# Catalog reference\n\nGenerated by `superint list --reference`.\n\n");
    s.push_str("Integrals are stored as `X = Σ A_ijk {L^i, px^j py^k} + {g1, px} + {g2, py}` with the classical reading `{f, p} = 2fp`.\n");
    s.push_str("A printed `L^3` is therefore `A300 = 1/2` and a printed `2L^3` is `A300 = 1`.\n");
    for e in ENTRIES.iter() {
        let _ = writeln!(s, "\n## {}\n", e.id);
        let _ = writeln!(s, "- Formula: `{}`", e.formula);
        if let Some(l) = e.table1_label {
            let _ = writeln!(s, "- Table 1 row: {l}");
        }
        let _ = writeln!(s, "- Regime: {:?}; tolerance {:e}", e.regime, e.tier.tolerance());
        let schema: Vec<String> = e
            .params
            .iter()
            .map(|p| match p.default {
                Some(d) => format!("`{}` = {d} ({:?})", p.name, p.rule),
                None => format!("`{}` optional ({:?})", p.name, p.rule),
            })
            .collect();
        let _ = writeln!(s, "- Parameters: {}", schema.join(", "));
        let _ = writeln!(s, "- Integrals: {}", e.integral_labels.iter().map(|l| format!("`{l}`")).collect::<Vec<_>>().join(", "));
        if let Some(ic) = e.canonical_ic {
            let _ = writeln!(s, "- Canonical initial data: {ic}");
        }
        match instantiate(e.id, &ParamSet::new()) {
            Ok(inst) => {
                let d = inst.domain;
                let _ = writeln!(s, "- Default domain: x in [{}, {}], y in [{}, {}]", d.x.0, d.x.1, d.y.0, d.y.1);
                for (k, x) in inst.integrals.iter().enumerate() {
                    let a: Vec<String> = crate::phasecore::MONOMIALS
                        .iter()
                        .zip(x.coeffs.to_array())
                        .filter(|(_, v)| *v != 0.0)
                        .map(|((i, j, l), v)| format!("A{i}{j}{l} = {v}"))
                        .collect();
                    let _ = writeln!(s, "- X{}: {}", k + 1, a.join(", "));
                }
            }
            Err(err) => {
                let _ = writeln!(s, "- Default instance unavailable: {err}");
            }
        }
        for n in e.notes {
            let _ = writeln!(s, "- Note: {n}");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_nine_entries_with_listed_counts() {
        assert_eq!(ENTRIES.len(), 29);
        let count = |id: &str| find(id).unwrap().integral_labels.len();
        assert_eq!(count("Q.13"), 6);
        assert_eq!(count("C.1"), 4);
        assert_eq!(count("Q.18"), 1);
    }

    #[test]
    fn label_parser() {
        assert_eq!(parse_leading_label("2L^3 - 3alpha^2{L, py^2}").unwrap(), vec![(3, 0, 0), (1, 0, 2)]);
        assert_eq!(
            parse_leading_label("2L^3 - 3alpha^2({L, px^2} + {L, py^2})").unwrap(),
            vec![(3, 0, 0), (1, 2, 0), (1, 0, 2)]
        );
        assert_eq!(parse_leading_label("omega2^5 px^3 - omega1^5 py^3").unwrap(), vec![(0, 3, 0), (0, 0, 3)]);
        assert!(parse_leading_label("p_z^3").is_err());
    }

    #[test]
    fn foreign_parameter_is_rejected() {
        let ps = ParamSet::from_pairs(&[("kappa", 1.0)]).unwrap();
        assert!(matches!(instantiate("Q.1", &ps), Err(Error::InvalidParameter { .. })));
        assert!(matches!(instantiate("Q.99", &ParamSet::new()), Err(Error::UnknownEntry(_))));
    }
}
