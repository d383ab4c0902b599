//! Derivative-free scalar minimization, local-minimum enumeration on
//! log-spaced scans, and bracketing root finding.
//!
//! Both the minimizer and the root finder are Brent's methods: parabolic
//! (resp. inverse quadratic / secant) steps when they are safe, golden
//! section (resp. bisection) otherwise. The fallback bounds the number of
//! iterations independently of smoothness.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative location tolerance used when refining scanned minima.
pub const DEFAULT_REL_X_TOL: f64 = 1e-9;

/// Two minima closer than this (relative) are one minimum found twice.
const DUPLICATE_REL_DISTANCE: f64 = 1e-6;

/// Energies closer than this are treated as a tie when picking the global minimum.
const GLOBAL_TIE_TOL: f64 = 1e-12;

const GOLDEN: f64 = 0.381_966_011_250_105_1; // (3 − √5)/2
const MAX_MINIMIZE_ITERATIONS: usize = 500;
const MAX_ROOT_ITERATIONS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    pub lo: f64,
    pub mid: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, mid: f64, hi: f64) -> Self {
        Self { lo, mid, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimumKind {
    LocalMin,
    GlobalMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryPoint {
    pub r_star: f64,
    pub v_star: f64,
    pub kind: MinimumKind,
    pub bracket: Bracket,
}

/// Located root of `g` together with the final bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub x: f64,
    pub g_x: f64,
    pub lo: f64,
    pub hi: f64,
    pub g_lo: f64,
    pub g_hi: f64,
    pub iterations: usize,
}

fn checked<F>(f: &mut F, x: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let v = f(x)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteObjective { x, value: v })
    }
}

/// Minimizes `f` inside `bracket` to an absolute location tolerance `x_tol`.
///
/// The returned point is always labelled [`MinimumKind::LocalMin`];
/// [`find_local_minima`] upgrades the lowest one.
pub fn minimize_scalar<F>(mut f: F, bracket: Bracket, x_tol: f64) -> Result<StationaryPoint>
where
    F: FnMut(f64) -> Result<f64>,
{
    let Bracket { lo, mid, hi } = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < mid && mid < hi) {
        return Err(Error::InvalidBracket {
            lo,
            mid,
            hi,
            reason: "requires lo < mid < hi",
        });
    }
    if !(x_tol > 0.0) {
        return Err(Error::domain("x_tol", x_tol, "x_tol > 0"));
    }
    let f_lo = checked(&mut f, lo)?;
    let f_hi = checked(&mut f, hi)?;
    let f_mid = checked(&mut f, mid)?;
    if !(f_mid < f_lo && f_mid < f_hi) {
        return Err(Error::InvalidBracket {
            lo,
            mid,
            hi,
            reason: "requires f(mid) < min(f(lo), f(hi))",
        });
    }

    let (mut a, mut b) = (lo, hi);
    let (mut x, mut w, mut v) = (mid, mid, mid);
    let (mut fx, mut fw, mut fv) = (f_mid, f_mid, f_mid);
    let mut d = 0.0_f64;
    let mut e = 0.0_f64;

    for _ in 0..MAX_MINIMIZE_ITERATIONS {
        let xm = 0.5 * (a + b);
        let tol1 = 2.0 * f64::EPSILON * x.abs() + x_tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = checked(&mut f, u)?;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }

    Ok(StationaryPoint {
        r_star: x,
        v_star: fx,
        kind: MinimumKind::LocalMin,
        bracket,
    })
}

/// `points` log-spaced abscissae from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    let last = (points - 1) as f64;
    (0..points)
        .map(|i| match i {
            0 => lo,
            _ if i == points - 1 => hi,
            _ => (l0 + (l1 - l0) * i as f64 / last).exp(),
        })
        .collect()
}

/// Grid brackets around every interior point where the discrete slope
/// turns from negative to positive. Plateaus are collapsed.
fn discrete_minima(grid: &[f64], values: &[f64]) -> Vec<Bracket> {
    let mut out = Vec::new();
    let n = values.len();
    let mut i = 1;
    while i + 1 < n {
        if values[i - 1] > values[i] {
            let mut j = i + 1;
            while j < n && values[j] == values[i] {
                j += 1;
            }
            if j < n && values[j] > values[i] {
                let centre = (i + j - 1) / 2;
                out.push(Bracket::new(grid[i - 1], grid[centre], grid[j]));
            }
            i = j;
        } else {
            i += 1;
        }
    }
    out
}

/// Picks the global minimum (lowest energy, smaller `r` on ties) and
/// sorts by position.
pub fn label_global(points: &mut [StationaryPoint]) {
    points.sort_by(|a, b| a.r_star.total_cmp(&b.r_star));
    let mut best: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        best = match best {
            None => Some(i),
            Some(j) if p.v_star < points[j].v_star - GLOBAL_TIE_TOL => Some(i),
            keep => keep,
        };
    }
    for (i, p) in points.iter_mut().enumerate() {
        p.kind = if Some(i) == best {
            MinimumKind::GlobalMin
        } else {
            MinimumKind::LocalMin
        };
    }
}

/// Scans `f` on a log grid over `[r_min, r_max]` and refines every
/// discrete minimum with [`minimize_scalar`].
///
/// Every minimum whose basin spans at least three grid points is found.
/// Grid values are computed in parallel; the result is sorted by `r_star`
/// and does not depend on evaluation order. An empty result is not an error.
pub fn find_local_minima<F>(
    f: F,
    r_min: f64,
    r_max: f64,
    points_per_decade: usize,
) -> Result<Vec<StationaryPoint>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "scan range must satisfy 0 < r_min < r_max, got ({r_min:e}, {r_max:e})"
        )));
    }
    if points_per_decade < 10 {
        return Err(Error::InvalidInput(format!(
            "points_per_decade must be at least 10, got {points_per_decade}"
        )));
    }
    let decades = (r_max / r_min).log10();
    let points = ((decades * points_per_decade as f64).ceil() as usize + 1).max(3);
    let grid = log_grid(r_min, r_max, points);
    let values = grid
        .par_iter()
        .map(|&r| {
            let v = f(r)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFiniteObjective { x: r, value: v })
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut found: Vec<StationaryPoint> = Vec::new();
    for bracket in discrete_minima(&grid, &values) {
        let p = minimize_scalar(&f, bracket, DEFAULT_REL_X_TOL * bracket.mid)?;
        let duplicate = found
            .iter()
            .any(|q| (q.r_star - p.r_star).abs() <= DUPLICATE_REL_DISTANCE * p.r_star.abs());
        if !duplicate {
            found.push(p);
        }
    }
    label_global(&mut found);
    Ok(found)
}

/// Brent's root finder on `[lo, hi]`. Requires a sign change.
///
/// The final bracket has width at most `tol + 4ε|x|`, and `|g(x)|` is no
/// larger than `|g|` at either end of it.
pub fn find_root<F>(mut g: F, lo: f64, hi: f64, tol: f64) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidInput(format!(
            "root bracket must satisfy lo < hi, got [{lo:e}, {hi:e}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("tol", tol, "tol > 0"));
    }
    let mut a = lo;
    let mut b = hi;
    let mut fa = checked(&mut g, a)?;
    let mut fb = checked(&mut g, b)?;
    let exact = |x: f64, gx: f64| Root {
        x,
        g_x: gx,
        lo: x,
        hi: x,
        g_lo: gx,
        g_hi: gx,
        iterations: 0,
    };
    if fa == 0.0 {
        return Ok(exact(a, fa));
    }
    if fb == 0.0 {
        return Ok(exact(b, fb));
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange {
            lo,
            hi,
            g_lo: fa,
            g_hi: fb,
        });
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for iteration in 0..MAX_ROOT_ITERATIONS {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(Root {
                x: b,
                g_x: fb,
                lo: b.min(c),
                hi: b.max(c),
                g_lo: if b < c { fb } else { fc },
                g_hi: if b < c { fc } else { fb },
                iterations: iteration,
            });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = checked(&mut g, b)?;
    }
    Err(Error::NoSolution(format!(
        "root finder exceeded {MAX_ROOT_ITERATIONS} iterations on [{lo:e}, {hi:e}]"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ok<F: Fn(f64) -> f64>(f: F) -> impl Fn(f64) -> Result<f64> {
        move |x| Ok(f(x))
    }

    #[test]
    fn quadratic_minimum() {
        let p = minimize_scalar(ok(|x| (x - 3.0).powi(2)), Bracket::new(0.0, 2.0, 10.0), 1e-9)
            .unwrap();
        assert!((p.r_star - 3.0).abs() <= 1e-9);
        assert!(p.v_star.abs() <= 1e-17);
        assert_eq!(p.kind, MinimumKind::LocalMin);
        assert!(p.bracket.contains(p.r_star));
    }

    #[test]
    fn non_smooth_minimum_is_still_found() {
        let p = minimize_scalar(ok(|x: f64| (x - 0.7).abs()), Bracket::new(0.0, 0.5, 2.0), 1e-10)
            .unwrap();
        assert!((p.r_star - 0.7).abs() <= 1e-10);
    }

    #[test]
    fn invalid_brackets_are_rejected() {
        let f = ok(|x| (x - 3.0).powi(2));
        assert!(matches!(
            minimize_scalar(&f, Bracket::new(0.0, 5.0, 4.0), 1e-9),
            Err(Error::InvalidBracket { .. })
        ));
        assert!(matches!(
            minimize_scalar(&f, Bracket::new(4.0, 5.0, 6.0), 1e-9),
            Err(Error::InvalidBracket { .. })
        ));
    }

    #[test]
    fn non_finite_objective_reports_abscissa() {
        let f = |x: f64| {
            if x > 2.9 && x < 3.1 {
                Ok(f64::NAN)
            } else {
                Ok((x - 3.0).powi(2))
            }
        };
        match minimize_scalar(f, Bracket::new(0.0, 2.0, 10.0), 1e-9) {
            Err(Error::NonFiniteObjective { x, .. }) => assert!(x > 2.9 && x < 3.1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cosine_minima() {
        let minima = find_local_minima(ok(f64::cos), 1.0, 20.0, 100).unwrap();
        let expected = [PI, 3.0 * PI, 5.0 * PI];
        assert_eq!(minima.len(), 3);
        for (m, e) in minima.iter().zip(expected) {
            assert!((m.r_star - e).abs() <= 1e-8, "{} vs {}", m.r_star, e);
        }
        // cos is −1 at all three; the tie goes to the smallest r.
        assert_eq!(minima[0].kind, MinimumKind::GlobalMin);
        assert_eq!(minima[1].kind, MinimumKind::LocalMin);
    }

    #[test]
    fn monotone_function_has_no_minima() {
        let minima = find_local_minima(ok(|x: f64| -x.ln()), 1e-6, 1e3, 20).unwrap();
        assert!(minima.is_empty());
    }

    #[test]
    fn scan_arguments_are_validated() {
        assert!(find_local_minima(ok(f64::cos), 0.0, 1.0, 20).is_err());
        assert!(find_local_minima(ok(f64::cos), 2.0, 1.0, 20).is_err());
        assert!(find_local_minima(ok(f64::cos), 1.0, 2.0, 5).is_err());
    }

    #[test]
    fn plateau_is_collapsed() {
        let grid = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let values = [3.0, 1.0, 1.0, 1.0, 2.0, 0.0];
        let b = discrete_minima(&grid, &values);
        assert_eq!(b, vec![Bracket::new(1.0, 3.0, 5.0)]);
    }

    #[test]
    fn sqrt_two() {
        let r = find_root(ok(|x| x * x - 2.0), 1.0, 2.0, 1e-12).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() <= 1e-12);
        assert!(r.hi - r.lo <= 1e-12 + 4.0 * f64::EPSILON * 2.0);
        assert!(r.g_x.abs() <= r.g_lo.abs() && r.g_x.abs() <= r.g_hi.abs());
    }

    #[test]
    fn root_requires_sign_change() {
        assert!(matches!(
            find_root(ok(|x| x * x + 1.0), -1.0, 1.0, 1e-12),
            Err(Error::NoSignChange { .. })
        ));
        let r = find_root(ok(|x| x - 1.0), 1.0, 2.0, 1e-12).unwrap();
        assert_eq!(r.x, 1.0);
    }

    #[test]
    fn root_of_step_function_falls_back_to_bisection() {
        let r = find_root(ok(|x| if x < 0.3 { -1.0 } else { 1.0 }), 0.0, 1.0, 1e-12).unwrap();
        assert!((r.x - 0.3).abs() <= 2e-12);
    }
}
