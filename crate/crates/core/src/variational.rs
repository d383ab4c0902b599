//! Rayleigh–Ritz upper bound for `H = 2√(1 − Δ) + U_R(|q|)` with the
//! normalized trial states `ψ_a(q) = e^{−|q|/a} / √(π a³)`.
//!
//! Fourier convention `ψ̂(k) = ∫ e^{−2πi k·q} ψ(q) d³q`, which gives
//! `ψ̂_a(k) = 8√(π a³) / (1 + 4π² a² |k|²)²` and the kinetic symbol
//! `2√(1 + 4π²|k|²)`. Both expectations reduce to radial integrals:
//!
//!   ⟨T⟩ = 2 ∫ 4πk² √(1 + 4π²k²) |ψ̂_a|² dk = (64/π) ∫₀^∞ x² √(1 + x²/a²) / (1 + x²)⁴ dx,
//!         with x = 2πak;
//!   ⟨U⟩ = ∫ 4πr² U_R(r) e^{−2r/a} / (π a³) dr = 4 ∫₀^∞ ρ² U_R(aρ) e^{−2ρ} dρ,
//!         with ρ = r/a.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{ring_pair_energy_ml, PhysicalConfig, RingParams};
use crate::optimize::{find_local_minima, MinimumKind};
use crate::quadrature::{integrate_semi_infinite, Integral};

/// Scan range in `a` covering both the ring-scale and the hydrogenic minimum.
pub const DEFAULT_A_RANGE: (f64, f64) = (1e-7, 1e4);
pub const DEFAULT_POINTS_PER_DECADE: usize = 20;

/// Scale `a > 0` of the exponential trial state.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct TrialScale(f64);

impl TrialScale {
    pub fn new(a: f64) -> Result<Self> {
        if a > 0.0 && a.is_finite() {
            Ok(Self(a))
        } else {
            Err(Error::domain("a", a, "a > 0"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariationalResult {
    pub a_star: TrialScale,
    pub kinetic: f64,
    pub potential: f64,
    pub energy: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub kind: MinimumKind,
    /// Grid point of the scan that bracketed this minimum, before refinement.
    pub scan_a: f64,
    pub scan_energy: f64,
}

/// `∫ |ψ̂_a(k)|² d³k`, integrated in `k` itself. Equals 1 when the Fourier
/// convention and the transform above are consistent.
pub fn momentum_norm(a: TrialScale) -> Result<f64> {
    let a = a.value();
    let scale = 2.0 * PI * a;
    let density = |k: f64| {
        let d = 1.0 + (scale * k).powi(2);
        4.0 * PI * k * k * 64.0 * PI * a.powi(3) / d.powi(4)
    };
    // Integrate in k/k₀ with k₀ = 1/(2πa) so the semi-infinite map sees
    // an O(1) scale; the Jacobian is k₀.
    let k0 = 1.0 / scale;
    let r = integrate_semi_infinite(&Integral::semi_infinite(|s| k0 * density(k0 * s), 0.0))?;
    Ok(r.value)
}

/// `⟨ψ_a| 2√(1 − Δ) |ψ_a⟩`.
pub fn kinetic_expectation(a: TrialScale) -> Result<f64> {
    let a = a.value();
    let r = integrate_semi_infinite(&Integral::semi_infinite(
        |x: f64| x * x * (a.hypot(x) / a) / (1.0 + x * x).powi(4),
        0.0,
    ))
    .map_err(|e| e.context(format!("kinetic expectation at a = {a:e}")))?;
    Ok(64.0 / PI * r.value)
}

/// `⟨ψ_a| U_R |ψ_a⟩` for the Maxwell–Lorentz ring pair of radius `R`.
pub fn potential_expectation(a: TrialScale, radius: f64, alpha: f64) -> Result<f64> {
    let a = a.value();
    let ring = RingParams::ml(radius)?;
    let cfg = PhysicalConfig::new(alpha, 1)?;
    let integrand = |rho: f64| {
        if rho == 0.0 {
            return 0.0;
        }
        // The pair energy only fails for r ≤ 0, excluded above.
        let u = ring_pair_energy_ml(&ring, &cfg, a * rho).unwrap_or(f64::NAN);
        rho * rho * u * (-2.0 * rho).exp()
    };
    let r = integrate_semi_infinite(&Integral::semi_infinite(integrand, 0.0))
        .map_err(|e| e.context(format!("potential expectation at a = {a:e}, R = {radius:e}")))?;
    Ok(4.0 * r.value)
}

/// `⟨ψ_a| H |ψ_a⟩`, an upper bound on the ground-state energy.
pub fn energy_expectation(a: TrialScale, radius: f64, alpha: f64) -> Result<f64> {
    Ok(kinetic_expectation(a)? + potential_expectation(a, radius, alpha)?)
}

/// Single-point evaluation with the energy split into its parts.
pub fn evaluate(a: TrialScale, radius: f64, alpha: f64) -> Result<(f64, f64, f64)> {
    let t = kinetic_expectation(a)?;
    let u = potential_expectation(a, radius, alpha)?;
    Ok((t, u, t + u))
}

/// Log-scans `⟨H⟩(a)` over `[a_min, a_max]`, refines every local minimum
/// and returns them sorted by energy; the first entry is the bound.
pub fn minimize_over_a(
    radius: f64,
    alpha: f64,
    a_min: f64,
    a_max: f64,
    points_per_decade: usize,
) -> Result<Vec<VariationalResult>> {
    RingParams::ml(radius)?;
    PhysicalConfig::new(alpha, 1)?;
    let objective = |a: f64| energy_expectation(TrialScale::new(a)?, radius, alpha);
    let minima = find_local_minima(objective, a_min, a_max, points_per_decade)
        .map_err(|e| e.context(format!("scanning the trial scale a for R = {radius:e}")))?;
    if minima.is_empty() {
        return Err(Error::NoSolution(format!(
            "no local minimum of the energy expectation for a in [{a_min:e}, {a_max:e}]"
        )));
    }
    let mut out = minima
        .into_iter()
        .map(|p| {
            let (kinetic, potential, energy) = evaluate(TrialScale::new(p.r_star)?, radius, alpha)?;
            Ok(VariationalResult {
                a_star: TrialScale::new(p.r_star)?,
                kinetic,
                potential,
                energy,
                radius,
                kind: p.kind,
                scan_a: p.bracket.mid,
                scan_energy: objective(p.bracket.mid)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|x, y| x.energy.total_cmp(&y.energy));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::DEFAULT_ALPHA;
    use approx::assert_relative_eq;

    const R_REF: f64 = 2.661639e-5;

    fn ts(a: f64) -> TrialScale {
        TrialScale::new(a).unwrap()
    }

    #[test]
    fn trial_state_is_normalized_in_momentum_space() {
        for &a in &[1e-5, 1.0, 274.0] {
            let n = momentum_norm(ts(a)).unwrap();
            assert!((n - 1.0).abs() <= 1e-10, "a = {a}: {n}");
        }
    }

    #[test]
    fn kinetic_limits() {
        assert!((kinetic_expectation(ts(1e8)).unwrap() - 2.0).abs() < 1e-10);
        let a = 1e-6;
        assert_relative_eq!(kinetic_expectation(ts(a)).unwrap(), 16.0 / (3.0 * PI * a), max_relative = 1e-2);
        // Non-relativistic limit: 2 + ⟨p²⟩ = 2 + 1/a².
        let a = 274.0;
        assert_relative_eq!(kinetic_expectation(ts(a)).unwrap() - 2.0, 1.0 / (a * a), max_relative = 1e-3);
    }

    #[test]
    fn kinetic_is_at_least_rest_energy() {
        for i in -8..=6 {
            let a = 10f64.powi(i);
            assert!(kinetic_expectation(ts(a)).unwrap() >= 2.0);
        }
    }

    #[test]
    fn potential_is_coulombic_for_large_states() {
        let a = 274.0;
        let u = potential_expectation(ts(a), R_REF, DEFAULT_ALPHA).unwrap();
        assert_relative_eq!(u, -DEFAULT_ALPHA / a, max_relative = 1e-2);
        for i in -7..=3 {
            assert!(potential_expectation(ts(10f64.powi(i)), R_REF, DEFAULT_ALPHA).unwrap() < 0.0);
        }
    }

    #[test]
    fn hydrogenic_minimum() {
        let a0 = 2.0 / DEFAULT_ALPHA;
        let found = minimize_over_a(R_REF, DEFAULT_ALPHA, 100.0, 1000.0, 20).unwrap();
        assert_eq!(found.len(), 1);
        let m = found[0];
        assert_relative_eq!(m.a_star.value(), a0, max_relative = 1e-3);
        let expected = 2.0 - DEFAULT_ALPHA.powi(2) / 4.0;
        assert!((m.energy - expected).abs() <= 1e-7, "{}", m.energy - expected);
        assert!(m.energy >= expected - 1e-9);
    }

    #[test]
    fn argument_validation() {
        assert!(TrialScale::new(0.0).is_err());
        assert!(TrialScale::new(f64::NAN).is_err());
        assert!(potential_expectation(ts(1.0), -1.0, DEFAULT_ALPHA).is_err());
        assert!(minimize_over_a(-1.0, DEFAULT_ALPHA, 1e-7, 1e4, 20).is_err());
        assert!(minimize_over_a(R_REF, DEFAULT_ALPHA, 1.0, 0.5, 20).is_err());
    }

    #[test]
    fn continuity_in_scale() {
        for &a in &[1.5e-5, 1.0, 274.0] {
            let e0 = energy_expectation(ts(a), R_REF, DEFAULT_ALPHA).unwrap();
            let e1 = energy_expectation(ts(a * (1.0 + 1e-6)), R_REF, DEFAULT_ALPHA).unwrap();
            let e2 = energy_expectation(ts(a * (1.0 + 2e-6)), R_REF, DEFAULT_ALPHA).unwrap();
            // Successive differences agree with a smooth slope.
            let (d1, d2) = (e1 - e0, e2 - e1);
            assert!((d1 - d2).abs() <= 1e-3 * d1.abs().max(1e-9), "a = {a}: {d1} vs {d2}");
        }
    }
}
