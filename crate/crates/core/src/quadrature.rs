//! Adaptive one-dimensional quadrature.
//!
//! The rule pair is the 7-point Gauss / 15-point Kronrod pair with the
//! QUADPACK error scaling. Subdivision is global: the interval with the
//! largest error estimate is bisected until the summed estimate falls
//! below `max(abs_tol, rel_tol·|value|)`. Ties between equal error
//! estimates are broken by position, so the subdivision order (and hence
//! the result) is a pure function of the inputs.
//!
//! Semi-infinite ranges `[a, ∞)` are mapped onto `[0, 1)` with
//! `x = a + t/(1 − t)`, Jacobian `dx/dt = 1/(1 − t)²`. Gauss–Kronrod nodes
//! are interior, so neither `t = 1` nor finite endpoints are evaluated.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

pub const DEFAULT_REL_TOL: f64 = 1e-12;
pub const DEFAULT_ABS_TOL: f64 = 1e-14;
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 4000;

/// Upper limit of an [`Integral`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Upper {
    Finite(f64),
    Infinity,
}

/// A definite integral together with its accuracy request.
#[derive(Clone)]
pub struct Integral<F> {
    integrand: F,
    lower: f64,
    upper: Upper,
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
}

impl<F: Fn(f64) -> f64> Integral<F> {
    pub fn new(integrand: F, lower: f64, upper: f64) -> Self {
        Self {
            integrand,
            lower,
            upper: Upper::Finite(upper),
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: DEFAULT_ABS_TOL,
            max_subdivisions: DEFAULT_MAX_SUBDIVISIONS,
        }
    }

    /// `∫_lower^∞`.
    pub fn semi_infinite(integrand: F, lower: f64) -> Self {
        Self {
            integrand,
            lower,
            upper: Upper::Infinity,
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: DEFAULT_ABS_TOL,
            max_subdivisions: DEFAULT_MAX_SUBDIVISIONS,
        }
    }

    pub fn rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> Upper {
        self.upper
    }

    fn validate(&self) -> Result<()> {
        if !self.lower.is_finite() {
            return Err(Error::InvalidInput(format!(
                "lower limit must be finite, got {}",
                self.lower
            )));
        }
        if let Upper::Finite(b) = self.upper {
            if !(b.is_finite() && self.lower < b) {
                return Err(Error::InvalidInput(format!(
                    "integration limits must satisfy lower < upper, got [{}, {}]",
                    self.lower, b
                )));
            }
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::domain("rel_tol", self.rel_tol, "rel_tol > 0"));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(Error::domain("abs_tol", self.abs_tol, "abs_tol >= 0"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidInput("max_subdivisions must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

// Kronrod abscissae (descending), Kronrod weights, and Gauss weights for
// the nodes xgk[1], xgk[3], xgk[5], xgk[7] (the last is the centre).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// The error estimate is the rounding floor `50ε ∫|f|` of the panel.
    at_floor: bool,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    // Max-heap on error; leftmost segment first among equal errors.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// QUADPACK error rescaling. The flag reports whether the rounding floor
/// was the binding term.
fn rescale_error(err: f64, resabs: f64, resasc: f64) -> (f64, bool) {
    let mut scaled = err.abs();
    if resasc != 0.0 && scaled != 0.0 {
        scaled = resasc * (200.0 * scaled / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let floor = 50.0 * f64::EPSILON * resabs;
        if floor >= scaled {
            return (floor, true);
        }
    }
    (scaled, false)
}

fn eval_checked<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteIntegrand { x, value: v })
    }
}

/// One Gauss–Kronrod 7/15 panel on `[a, b]`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = eval_checked(f, center)?;
    let mut res_k = f_center * WGK[7];
    let mut res_g = f_center * WG[3];
    let mut resabs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval_checked(f, center - dx)?;
        let f2 = eval_checked(f, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut resasc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let (error, at_floor) = rescale_error((res_k - res_g) * half, resabs * half.abs(), resasc * half.abs());
    Ok(Segment {
        a,
        b,
        value,
        error,
        at_floor,
    })
}

fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<QuadratureResult> {
    let first = gk15(f, a, b)?;
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 0;

    loop {
        // Re-summing keeps the totals free of accumulated add/subtract drift.
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        let target = abs_tol.max(rel_tol * value.abs());
        let worst = *heap.peek().expect("heap is never empty");
        // Once the largest panel error is pure rounding, bisecting cannot
        // reduce it; this happens for integrands that cancel to near zero.
        if error <= target || worst.at_floor {
            return Ok(QuadratureResult {
                value,
                error_estimate: error,
                evaluations,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        if subdivisions >= max_subdivisions || !(worst.a < mid && mid < worst.b) {
            return Err(Error::QuadratureNotConverged {
                estimate: value,
                error_estimate: error,
                subdivisions,
            });
        }
        heap.pop();
        heap.push(gk15(f, worst.a, mid)?);
        heap.push(gk15(f, mid, worst.b)?);
        evaluations += 30;
        subdivisions += 1;
    }
}

/// Evaluates `spec` to its requested tolerance.
///
/// Integrals with an infinite upper limit are forwarded to
/// [`integrate_semi_infinite`].
pub fn integrate<F: Fn(f64) -> f64>(spec: &Integral<F>) -> Result<QuadratureResult> {
    spec.validate()?;
    match spec.upper {
        Upper::Finite(b) => adaptive(
            &spec.integrand,
            spec.lower,
            b,
            spec.rel_tol,
            spec.abs_tol,
            spec.max_subdivisions,
        ),
        Upper::Infinity => integrate_semi_infinite(spec),
    }
}

/// `∫_a^∞ f(x) dx` through the map `x = a + t/(1 − t)`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(spec: &Integral<F>) -> Result<QuadratureResult> {
    spec.validate()?;
    if spec.upper != Upper::Infinity {
        return Err(Error::InvalidInput(
            "integrate_semi_infinite requires an infinite upper limit".into(),
        ));
    }
    let a = spec.lower;
    let f = &spec.integrand;
    let mapped = |t: f64| {
        let s = 1.0 - t;
        let x = a + t / s;
        let v = f(x);
        // Surface the original abscissa rather than the mapped one.
        if !v.is_finite() {
            return v;
        }
        v / (s * s)
    };
    adaptive(
        &mapped,
        0.0,
        1.0,
        spec.rel_tol,
        spec.abs_tol,
        spec.max_subdivisions,
    )
    .map_err(|e| match e {
        Error::NonFiniteIntegrand { x: t, value } => Error::NonFiniteIntegrand {
            x: a + t / (1.0 - t),
            value,
        },
        other => other,
    })
}
