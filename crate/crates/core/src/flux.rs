//! Flux quantization for the BLTP ring.
//!
//! Requiring the magnetic self-flux through a ring of radius `R` to equal
//! the flux quantum ties `R` to the BLTP inverse length `κ`:
//!
//!   R = (α²/2π) G(κR),   G(u) = ∫₀^π cos 2φ (1 − e^{−2u sin φ}) / sin φ dφ.
//!
//! `G` depends on `u = κR` alone. `G(u)/u` rises from 0, peaks at
//! `u_peak ≈ 2`, and decays like `ln u / u`, so for a given `κ` the
//! constraint has either no nontrivial solution or two. The lower one
//! (`u < u_peak`) is a repelling fixed point of `R ↦ (α²/2π)G(κR)`; the
//! upper one attracts, and it is the branch used throughout this crate.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{bltp_kernel, lowest_minimum, ring_scan_window, PhysicalConfig, PotentialModel};
use crate::optimize::{find_root, minimize_scalar, Bracket, StationaryPoint};
use crate::quadrature::{integrate, Integral};

/// Search range for `R` at fixed `κ`.
pub const RADIUS_BRACKET: (f64, f64) = (1e-9, 1e-2);
const FIXED_POINT_DAMPING: f64 = 0.5;
const FIXED_POINT_MAX_ITERATIONS: usize = 400;
const RESIDUAL_REL_TOL: f64 = 1e-12;
const TUNE_ENERGY_TOL: f64 = 1e-8;
/// Upper end of the `u = κR` range searched when tuning.
const TUNE_U_MAX: f64 = 40.0;
const TUNE_U_SCAN_POINTS: usize = 24;

/// `G(u)`. The integrand tends to `2u` as `sin φ → 0`.
pub fn flux_integral(u: f64) -> Result<f64> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::domain("kappa * R", u, "kappa * R > 0"));
    }
    // Symmetric about π/2.
    let half = integrate(&Integral::new(
        |phi: f64| (2.0 * phi).cos() * bltp_kernel(phi.sin(), u),
        0.0,
        PI / 2.0,
    ))
    .map_err(|e| e.context(format!("flux integral at kappa * R = {u:e}")))?;
    Ok(2.0 * half.value)
}

/// Right-hand side of the constraint, `(α²/2π) G(κR)`.
pub fn flux_rhs(kappa: f64, radius: f64, alpha: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::domain("kappa", kappa, "kappa > 0"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::domain("R", radius, "R > 0"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain("alpha", alpha, "0 < alpha < 1"));
    }
    Ok(alpha * alpha / (2.0 * PI) * flux_integral(kappa * radius)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxSolution {
    pub kappa: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    /// `R − (α²/2π) G(κR)`
    pub residual: f64,
}

impl FluxSolution {
    pub fn product(&self) -> f64 {
        self.kappa * self.radius
    }
}

/// Location and value of the maximum of `G(u)/u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxPeak {
    pub u: f64,
    pub ratio: f64,
}

pub fn flux_peak() -> Result<FluxPeak> {
    let p = minimize_scalar(
        |u| Ok(-flux_integral(u)? / u),
        Bracket::new(0.1, 2.0, 50.0),
        1e-10,
    )?;
    Ok(FluxPeak {
        u: p.r_star,
        ratio: -p.v_star,
    })
}

fn solution(kappa: f64, radius: f64, alpha: f64) -> Result<FluxSolution> {
    Ok(FluxSolution {
        kappa,
        radius,
        residual: radius - flux_rhs(kappa, radius, alpha)?,
    })
}

fn accept(s: FluxSolution) -> bool {
    s.residual.abs() <= RESIDUAL_REL_TOL * s.radius
}

/// Solves the constraint for `R` at fixed `κ` on the attracting branch.
///
/// Damped fixed-point iteration from the top of [`RADIUS_BRACKET`]; if it
/// has not met the residual tolerance after a fixed budget, Brent's method
/// finishes on `[u_peak/κ, 1e−2]`.
pub fn solve_r_given_kappa(kappa: f64, alpha: f64) -> Result<FluxSolution> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::domain("kappa", kappa, "kappa > 0"));
    }
    let peak = flux_peak()?;
    let c = alpha * alpha / (2.0 * PI);
    // The upper branch exists iff the constraint's right-hand side reaches
    // R at u_peak: c G(u_peak) ≥ u_peak/κ.
    let required_ratio = 1.0 / (c * kappa);
    if peak.ratio < required_ratio {
        return Err(Error::NoSolution(format!(
            "no nontrivial flux solution for kappa = {kappa:e}: G(u)/u peaks at {:.6} \
             (u = {:.4}) but {required_ratio:.6} is needed; kappa must be at least {:e}",
            peak.ratio,
            peak.u,
            1.0 / (c * peak.ratio)
        )));
    }
    let (lo, hi) = ((peak.u / kappa).max(RADIUS_BRACKET.0), RADIUS_BRACKET.1);
    if lo >= hi {
        return Err(Error::NoSolution(format!(
            "flux solution for kappa = {kappa:e} lies below R = {:e}",
            RADIUS_BRACKET.0
        )));
    }

    let mut radius = hi;
    for _ in 0..FIXED_POINT_MAX_ITERATIONS {
        let s = solution(kappa, radius, alpha)?;
        if accept(s) {
            return Ok(s);
        }
        radius -= FIXED_POINT_DAMPING * s.residual;
        if !(radius > lo && radius <= hi) {
            break;
        }
    }

    let root = find_root(|r| Ok(solution(kappa, r, alpha)?.residual), lo, hi, f64::MIN_POSITIVE)
        .map_err(|e| e.context(format!("flux constraint at kappa = {kappa:e}")))?;
    let s = solution(kappa, root.x, alpha)?;
    if accept(s) {
        Ok(s)
    } else {
        Err(Error::NoSolution(format!(
            "flux residual {:e} at R = {:e} exceeds {RESIDUAL_REL_TOL:e} R",
            s.residual, s.radius
        )))
    }
}

/// Every nontrivial solution in [`RADIUS_BRACKET`], ordered by `R`:
/// empty, or the repelling and the attracting branch.
pub fn flux_branches(kappa: f64, alpha: f64) -> Result<Vec<FluxSolution>> {
    let upper = match solve_r_given_kappa(kappa, alpha) {
        Ok(s) => s,
        Err(Error::NoSolution(_)) => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let peak_r = flux_peak()?.u / kappa;
    let lo = RADIUS_BRACKET.0;
    let g = |r: f64| Ok(solution(kappa, r, alpha)?.residual);
    let mut out = Vec::with_capacity(2);
    if peak_r > lo && g(lo)? * g(peak_r)? < 0.0 {
        let root = find_root(g, lo, peak_r, f64::MIN_POSITIVE)?;
        out.push(solution(kappa, root.x, alpha)?);
    }
    out.push(upper);
    Ok(out)
}

/// The constraint solution on the attracting branch with `κR = u`.
pub fn solution_at_product(u: f64, alpha: f64) -> Result<FluxSolution> {
    let radius = alpha * alpha / (2.0 * PI) * flux_integral(u)?;
    let kappa = u / radius;
    solution(kappa, radius, alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BltpTuning {
    pub solution: FluxSolution,
    pub minimum: StationaryPoint,
    pub target_energy: f64,
    pub energy_residual: f64,
    /// True when the residual is limited by the spacing of representable
    /// `κR` values rather than by the root finder.
    pub at_float_resolution: bool,
}

/// Tightly bound `n = 1` minimum of the BLTP model on the constraint
/// manifold at `κR = u`.
pub fn bltp_ground_state(u: f64, alpha: f64) -> Result<(FluxSolution, StationaryPoint)> {
    let s = solution_at_product(u, alpha)?;
    let cfg = PhysicalConfig::new(alpha, 1)?;
    let model = PotentialModel::ring_bltp(cfg, s.radius, s.kappa)?;
    let minimum = lowest_minimum(&model, ring_scan_window(s.radius))?.ok_or_else(|| {
        Error::NoSolution(format!(
            "no tightly bound BLTP minimum at kappa = {:e}, R = {:e}",
            s.kappa, s.radius
        ))
    })?;
    Ok((s, minimum))
}

/// Moves along the attracting constraint branch until the tightly bound
/// ground state reaches `target_energy`.
pub fn tune_bltp(alpha: f64, target_energy: f64) -> Result<BltpTuning> {
    let peak = flux_peak()?;
    let energy = |u: f64| -> Result<f64> { Ok(bltp_ground_state(u, alpha)?.1.v_star - target_energy) };

    // Coarse scan in u for the first sign change.
    let grid = crate::optimize::log_grid(peak.u, TUNE_U_MAX, TUNE_U_SCAN_POINTS);
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(grid.len());
    let mut bracket = None;
    for &u in &grid {
        let e = match energy(u) {
            Ok(e) => e,
            Err(Error::NoSolution(_)) => continue,
            Err(e) => return Err(e),
        };
        if let Some(&(u_prev, e_prev)) = samples.last() {
            if e_prev * e <= 0.0 {
                bracket = Some((u_prev, u));
                samples.push((u, e));
                break;
            }
        }
        samples.push((u, e));
    }
    let (lo, hi) = bracket.ok_or_else(|| {
        let diag: Vec<String> = samples
            .iter()
            .map(|(u, e)| format!("u = {u:.4}: E - target = {e:.4e}"))
            .collect();
        Error::NoSolution(format!(
            "target energy {target_energy} not bracketed on u in [{:.4}, {TUNE_U_MAX}]: {}",
            peak.u,
            diag.join("; ")
        ))
    })?;

    let root = find_root(energy, lo, hi, f64::MIN_POSITIVE)
        .map_err(|e| e.context("tuning kappa * R on the flux constraint"))?;
    let (solution, minimum) = bltp_ground_state(root.x, alpha)?;
    let energy_residual = minimum.v_star - target_energy;
    let at_float_resolution = root.hi - root.lo <= 8.0 * f64::EPSILON * root.x;
    if energy_residual.abs() > TUNE_ENERGY_TOL && !at_float_resolution {
        return Err(Error::NoSolution(format!(
            "BLTP tuning stalled with energy residual {energy_residual:e}"
        )));
    }
    Ok(BltpTuning {
        solution,
        minimum,
        target_energy,
        energy_residual,
        at_float_resolution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::DEFAULT_ALPHA;
    use approx::assert_relative_eq;

    /// Termwise series of G(u): expand 1 − e^{−x} and integrate
    /// cos 2φ sinᵐφ = −m/(m+2) Wₘ with Wₘ = ∫₀^π sinᵐφ dφ.
    fn series_oracle(u: f64) -> f64 {
        let mut w = vec![PI, 2.0];
        for m in 2..200 {
            let next = w[m - 2] * (m as f64 - 1.0) / m as f64;
            w.push(next);
        }
        let mut total = 0.0;
        let mut coeff = 1.0; // (2u)^j / j!
        for j in 1..190 {
            coeff *= 2.0 * u / j as f64;
            let m = j - 1;
            let angular = -(m as f64) / (m as f64 + 2.0) * w[m];
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            total += sign * coeff * angular;
        }
        total
    }

    #[test]
    fn integral_matches_series() {
        for &u in &[0.05, 0.5, 1.0, 2.0, 4.0] {
            assert_relative_eq!(flux_integral(u).unwrap(), series_oracle(u), max_relative = 1e-10);
        }
    }

    #[test]
    fn small_product_limit() {
        // G(u) = (4/3)u² + O(u³), so the right-hand side vanishes as κR → 0.
        let u = 1e-4;
        assert_relative_eq!(flux_integral(u).unwrap(), 4.0 / 3.0 * u * u, max_relative = 1e-3);
        assert!(flux_rhs(1.0, 1e-8, DEFAULT_ALPHA).unwrap().abs() < 1e-20);
    }

    #[test]
    fn rhs_depends_on_product_only() {
        let a = DEFAULT_ALPHA;
        for &(kappa, radius) in &[(1.8e5, 2.57e-5), (1e3, 1e-3), (7.0, 0.4)] {
            let base = flux_rhs(kappa, radius, a).unwrap();
            for &c in &[0.5, 3.0, 1e2] {
                assert_relative_eq!(flux_rhs(kappa / c, radius * c, a).unwrap(), base, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn argument_validation() {
        assert!(flux_rhs(-1.0, 1e-5, DEFAULT_ALPHA).is_err());
        assert!(flux_rhs(1.0, 0.0, DEFAULT_ALPHA).is_err());
        assert!(flux_rhs(1.0, 1e-5, 1.5).is_err());
        assert!(solve_r_given_kappa(0.0, DEFAULT_ALPHA).is_err());
    }

    #[test]
    fn peak_of_ratio() {
        let p = flux_peak().unwrap();
        assert!(p.u > 1.5 && p.u < 2.5, "{p:?}");
        assert!(p.ratio > 0.7 && p.ratio < 0.8, "{p:?}");
    }

    #[test]
    fn solution_near_published_pair() {
        let s = solve_r_given_kappa(1.8e5, DEFAULT_ALPHA).unwrap();
        assert!((s.radius - 2.57e-5).abs() <= 0.05 * 2.57e-5, "{s:?}");
        let rhs = flux_rhs(s.kappa, s.radius, DEFAULT_ALPHA).unwrap();
        assert!((s.radius - rhs).abs() <= 1e-12 * s.radius);
    }

    #[test]
    fn branch_structure_across_kappa() {
        assert!(flux_branches(1e5, DEFAULT_ALPHA).unwrap().is_empty());
        assert!(matches!(solve_r_given_kappa(1e5, DEFAULT_ALPHA), Err(Error::NoSolution(_))));
        for &kappa in &[1.8e5, 3e5] {
            let b = flux_branches(kappa, DEFAULT_ALPHA).unwrap();
            assert_eq!(b.len(), 2, "kappa = {kappa}");
            assert!(b[0].radius < b[1].radius);
            for s in &b {
                assert!(s.residual.abs() <= 1e-12 * s.radius, "{s:?}");
            }
        }
        // Along the attracting branch R grows with κ.
        let r18 = solve_r_given_kappa(1.8e5, DEFAULT_ALPHA).unwrap().radius;
        let r30 = solve_r_given_kappa(3e5, DEFAULT_ALPHA).unwrap().radius;
        assert!(r30 > r18);
    }

    #[test]
    fn product_parametrization_round_trips() {
        let s = solution_at_product(4.6, DEFAULT_ALPHA).unwrap();
        assert_relative_eq!(s.product(), 4.6, max_relative = 1e-14);
        assert!(s.residual.abs() <= 1e-12 * s.radius);
        let again = solve_r_given_kappa(s.kappa, DEFAULT_ALPHA).unwrap();
        assert_relative_eq!(again.radius, s.radius, max_relative = 1e-10);
    }
}
