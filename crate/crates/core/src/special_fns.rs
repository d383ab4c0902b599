//! Complete elliptic integrals of the first and second kind.
//!
//! **Convention:** every function here takes the *modulus* `k`, not the
//! parameter `m = k²`. This is the form used when writing the ring-ring
//! interaction as `K(1/√(1 + r²/4R²))`. Libraries such as scipy and
//! Cephes take `m`; passing `m` where `k` is expected silently corrupts
//! the ring potentials.
//!
//!   K(k) = ∫₀^{π/2} dθ / √(1 − k² sin²θ)
//!   E(k) = ∫₀^{π/2} √(1 − k² sin²θ) dθ
//!
//! Both are computed with the arithmetic-geometric mean. Starting from
//! `a₀ = 1`, `b₀ = k' = √(1 − k²)`, `c₀ = k`:
//!
//!   a_{n+1} = (a_n + b_n)/2,  b_{n+1} = √(a_n b_n),  c_{n+1} = c_n² / (4 a_{n+1})
//!
//! gives `K = π / (2 a_∞)` and `K − E = K · Σ 2^{n−1} c_n²`. The `c_n`
//! recurrence is the cancellation-free form of `(a_n − b_n)/2`, so
//! `K − E` keeps full relative accuracy as `k → 0`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Elliptic modulus `k ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Modulus(f64);

impl Modulus {
    pub fn new(k: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&k) {
            return Err(Error::domain("elliptic modulus k", k, "0 <= k <= 1"));
        }
        Ok(Self(k))
    }

    /// Modulus whose complement `k' = √(1 − k²)` is `kp`.
    ///
    /// Use this when `k'` is known more accurately than `k`, e.g. near `k = 1`.
    pub fn from_complement(kp: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&kp) {
            return Err(Error::domain("complementary modulus k'", kp, "0 <= k' <= 1"));
        }
        Ok(Self(((1.0 - kp) * (1.0 + kp)).sqrt()))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> f64 {
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }
}

/// K and E evaluated together from one AGM run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompleteIntegrals {
    pub k: f64,
    pub e: f64,
    /// `K − E`, accurate to full relative precision for small moduli.
    pub k_minus_e: f64,
}

const MAX_AGM_STEPS: usize = 64;

/// Runs the AGM with explicit `k` and `k'`. Requires `kp > 0`.
fn agm(k: f64, kp: f64) -> CompleteIntegrals {
    let mut a = 1.0_f64;
    let mut b = kp;
    let mut c = k;
    let mut weight = 0.5_f64;
    let mut sum = weight * c * c;
    for _ in 0..MAX_AGM_STEPS {
        let a_next = 0.5 * (a + b);
        let b_next = (a * b).sqrt();
        c = c * c / (4.0 * a_next);
        weight *= 2.0;
        let term = weight * c * c;
        sum += term;
        a = a_next;
        b = b_next;
        if (a - b).abs() <= f64::EPSILON * a && term <= f64::EPSILON * sum {
            break;
        }
    }
    let k_val = FRAC_PI_2 / a;
    let k_minus_e = k_val * sum;
    CompleteIntegrals {
        k: k_val,
        e: k_val - k_minus_e,
        k_minus_e,
    }
}

/// K(k) and E(k) together; `k = 1` is a domain error because K diverges.
pub fn complete_integrals(k: Modulus) -> Result<CompleteIntegrals> {
    let kp = k.complement();
    if kp == 0.0 {
        return Err(Error::domain(
            "elliptic modulus k for K",
            k.value(),
            "k < 1 (K diverges logarithmically at k = 1)",
        ));
    }
    Ok(agm(k.value(), kp))
}

/// Like [`complete_integrals`], but taking `k` and `k'` separately so
/// neither has to be recomputed from the other.
///
/// The caller guarantees `k² + k'² = 1` to rounding; `kp` must be positive.
pub fn complete_integrals_with_complement(k: f64, kp: f64) -> Result<CompleteIntegrals> {
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::domain("elliptic modulus k", k, "0 <= k < 1"));
    }
    if !(kp > 0.0 && kp <= 1.0) {
        return Err(Error::domain(
            "complementary modulus k'",
            kp,
            "0 < k' <= 1 (K diverges at k' = 0)",
        ));
    }
    Ok(agm(k, kp))
}

/// Complete elliptic integral of the first kind, modulus convention.
pub fn ellip_k(k: f64) -> Result<f64> {
    let m = Modulus::new(k)?;
    complete_integrals(m).map(|ci| ci.k)
}

/// Complete elliptic integral of the second kind, modulus convention.
pub fn ellip_e(k: f64) -> Result<f64> {
    let m = Modulus::new(k)?;
    if m.value() == 1.0 {
        return Ok(1.0);
    }
    complete_integrals(m).map(|ci| ci.e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    /// Trapezoid rule over a full period of the (π-periodic, even) integrand.
    /// Converges geometrically, independent of the AGM path.
    fn periodic_trapezoid(g: impl Fn(f64) -> f64, n: usize) -> f64 {
        let h = PI / n as f64;
        let s: f64 = (0..n).map(|i| g(i as f64 * h)).sum();
        0.5 * s * h
    }

    fn k_oracle(k: f64) -> f64 {
        periodic_trapezoid(|t| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(), 400)
    }

    fn e_oracle(k: f64) -> f64 {
        periodic_trapezoid(|t| (1.0 - k * k * t.sin().powi(2)).sqrt(), 400)
    }

    #[test]
    fn zero_modulus_gives_half_pi() {
        assert_eq!(ellip_k(0.0).unwrap(), FRAC_PI_2);
        assert_eq!(ellip_e(0.0).unwrap(), FRAC_PI_2);
    }

    #[test]
    fn e_at_one_is_one() {
        assert_eq!(ellip_e(1.0).unwrap(), 1.0);
    }

    #[test]
    fn k_at_one_is_a_domain_error() {
        assert!(matches!(ellip_k(1.0), Err(Error::Domain { .. })));
        assert!(ellip_k(-0.1).is_err());
        assert!(ellip_k(f64::NAN).is_err());
        assert!(ellip_e(1.0 + 1e-12).is_err());
        assert!(ellip_e(-1e-300).is_err());
    }

    #[test]
    fn half_modulus_matches_quadrature_oracle() {
        let k = ellip_k(0.5).unwrap();
        let e = ellip_e(0.5).unwrap();
        assert_relative_eq!(k, k_oracle(0.5), max_relative = 1e-12);
        assert_relative_eq!(e, e_oracle(0.5), max_relative = 1e-12);
        // Reference digits (DLMF / Abramowitz-Stegun, m = 0.25).
        assert_relative_eq!(k, 1.685_750_354_812_596, max_relative = 1e-14);
        assert_relative_eq!(e, 1.467_462_209_339_427, max_relative = 1e-14);
    }

    #[test]
    fn oracle_agreement_across_moduli() {
        for i in 1..20 {
            let k = i as f64 / 20.0;
            assert_relative_eq!(ellip_k(k).unwrap(), k_oracle(k), max_relative = 1e-12);
            assert_relative_eq!(ellip_e(k).unwrap(), e_oracle(k), max_relative = 1e-12);
        }
    }

    #[test]
    fn logarithmic_asymptote_near_one() {
        let k = 0.999_999_f64;
        let kp = ((1.0 - k) * (1.0 + k)).sqrt();
        let asymptote = (4.0 / kp).ln();
        assert_relative_eq!(ellip_k(k).unwrap(), asymptote, max_relative = 1e-4);
    }

    #[test]
    fn k_minus_e_keeps_precision_for_tiny_modulus() {
        // K − E = (π/4) k² (1 + 3k²/8 + ...)
        let k = 1e-6;
        let ci = complete_integrals(Modulus::new(k).unwrap()).unwrap();
        let series = PI / 4.0 * k * k * (1.0 + 3.0 * k * k / 8.0);
        assert_relative_eq!(ci.k_minus_e, series, max_relative = 1e-14);
    }

    #[test]
    fn complement_constructor_agrees() {
        let kp: f64 = 1e-9;
        let ci = complete_integrals_with_complement(((1.0 - kp) * (1.0 + kp)).sqrt(), kp).unwrap();
        // K(k) ≈ ln(4/k') + (k'²/4)(ln(4/k') − 1)
        let l = (4.0 / kp).ln();
        assert_relative_eq!(ci.k, l, max_relative = 1e-15);
        assert!(Modulus::from_complement(2.0).is_err());
        assert_relative_eq!(Modulus::from_complement(0.6).unwrap().value(), 0.8, max_relative = 1e-15);
    }

    #[test]
    fn legendre_relation_on_grid() {
        for i in 1..=100 {
            let k = i as f64 / 101.0;
            let kp = ((1.0 - k) * (1.0 + k)).sqrt();
            let (kk, ee) = (ellip_k(k).unwrap(), ellip_e(k).unwrap());
            let (kkp, eep) = (ellip_k(kp).unwrap(), ellip_e(kp).unwrap());
            let lhs = ee * kkp + eep * kk - kk * kkp;
            assert!((lhs - FRAC_PI_2).abs() <= 1e-12, "k = {k}: {lhs}");
        }
    }

    #[test]
    fn ordering_and_monotonicity() {
        let mut prev_k = 0.0;
        let mut prev_e = f64::INFINITY;
        for i in 0..1000 {
            let k = i as f64 / 1000.0;
            let (kk, ee) = (ellip_k(k).unwrap(), ellip_e(k).unwrap());
            assert!(ee <= FRAC_PI_2 && FRAC_PI_2 <= kk);
            if i > 0 {
                assert!(kk > prev_k, "K not increasing at {k}");
                assert!(ee < prev_e, "E not decreasing at {k}");
            }
            prev_k = kk;
            prev_e = ee;
        }
    }
}
