//! Effective potentials for a circulating electron-positron pair.
//!
//! Units: energy in `mc²`, length in reduced Compton lengths `ħ/mc`,
//! charge in `e`. Angular momentum enters only through Bohr's condition
//! `p r = n` on circular orbits, so every model has the kinetic term
//! `2√(1 + n²/r²)`.
//!
//! | model            | interaction                                              |
//! |------------------|----------------------------------------------------------|
//! | `Coulomb`        | `−α/r`                                                   |
//! | `CoulombDipole`  | `−α/r − α³/(8π² r³)`                                     |
//! | `RingMl`         | co-planar charged current rings, Maxwell–Lorentz fields  |
//! | `RingBltp`       | the same rings with Bopp–Landé–Thomas–Podolsky fields    |
//! | `Scaling { k }`  | `RingMl` with magnetic coupling `α^(1+2k)`               |
//!
//! The ring current is fixed by the anomalous moment, so a ring model has
//! only its radius `R` (and for BLTP the inverse length `κ`) as parameters.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimize::{find_local_minima, find_root, MinimumKind, StationaryPoint};
use crate::quadrature::{integrate, Integral, DEFAULT_REL_TOL};
use crate::special_fns::complete_integrals_with_complement;

/// Sommerfeld fine-structure constant.
pub const DEFAULT_ALPHA: f64 = 1.0 / 137.036;

/// Published `R / α²` that places the tightly bound ML ground state at
/// zero energy.
pub const REFERENCE_ML_COEFFICIENT: f64 = 0.495_978_323_75;
pub const REFERENCE_ML_COEFFICIENT_LITERAL: &str = "0.49597832375";

/// Short-distance regime where the magnetic attraction dominates.
pub const BIOT_SAVART_REGIME: (f64, f64) = (1e-7, 1e-3);
/// Regime of the hydrogenic (Coulomb-dominated) levels.
pub const COULOMB_REGIME: (f64, f64) = (1.0, 1e4);

/// Scan density for minimum searches inside the model layer.
pub const SCAN_POINTS_PER_DECADE: usize = 20;

/// Ring-model scan window relative to `R`. For the ML radius
/// (`R ≈ 2.6e−5`) this reproduces the Biot–Savart regime.
const RING_WINDOW: (f64, f64) = (4e-3, 40.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConfig {
    pub alpha: f64,
    pub n: u32,
}

impl PhysicalConfig {
    pub fn new(alpha: f64, n: u32) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain("alpha", alpha, "0 < alpha < 1"));
        }
        if n == 0 {
            return Err(Error::domain("n", 0.0, "n >= 1"));
        }
        Ok(Self { alpha, n })
    }

    pub fn with_n(self, n: u32) -> Result<Self> {
        Self::new(self.alpha, n)
    }
}

impl Default for PhysicalConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            n: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RingParams {
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

impl RingParams {
    pub fn ml(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain("R", radius, "R > 0"));
        }
        Ok(Self {
            radius,
            kappa: None,
        })
    }

    pub fn bltp(radius: f64, kappa: f64) -> Result<Self> {
        let mut p = Self::ml(radius)?;
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::domain("kappa", kappa, "kappa > 0"));
        }
        p.kappa = Some(kappa);
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelKind {
    Coulomb,
    CoulombDipole,
    RingMl { ring: RingParams },
    RingBltp { ring: RingParams },
    Scaling { k: u32, ring: RingParams },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialModel {
    #[serde(flatten)]
    pub kind: ModelKind,
    pub config: PhysicalConfig,
}

impl PotentialModel {
    pub fn coulomb(config: PhysicalConfig) -> Self {
        Self {
            kind: ModelKind::Coulomb,
            config,
        }
    }

    pub fn coulomb_dipole(config: PhysicalConfig) -> Self {
        Self {
            kind: ModelKind::CoulombDipole,
            config,
        }
    }

    pub fn ring_ml(config: PhysicalConfig, radius: f64) -> Result<Self> {
        Ok(Self {
            kind: ModelKind::RingMl {
                ring: RingParams::ml(radius)?,
            },
            config,
        })
    }

    pub fn ring_bltp(config: PhysicalConfig, radius: f64, kappa: f64) -> Result<Self> {
        Ok(Self {
            kind: ModelKind::RingBltp {
                ring: RingParams::bltp(radius, kappa)?,
            },
            config,
        })
    }

    pub fn scaling(config: PhysicalConfig, k: u32, radius: f64) -> Result<Self> {
        check_scaling_k(k)?;
        Ok(Self {
            kind: ModelKind::Scaling {
                k,
                ring: RingParams::ml(radius)?,
            },
            config,
        })
    }

    /// Same interaction, different orbital quantum number.
    pub fn with_n(self, n: u32) -> Result<Self> {
        Ok(Self {
            config: self.config.with_n(n)?,
            ..self
        })
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        let cfg = &self.config;
        match &self.kind {
            ModelKind::Coulomb => potential_v1(cfg, r),
            ModelKind::CoulombDipole => potential_v2(cfg, r),
            ModelKind::RingMl { ring } => potential_v3(ring, cfg, r),
            ModelKind::RingBltp { ring } => potential_v4(ring, cfg, r),
            ModelKind::Scaling { k, ring } => potential_scaling_law(*k, ring, cfg, r),
        }
    }

    /// `dV/dr` where it has a closed form (the point-charge models).
    pub fn derivative(&self, r: f64) -> Option<Result<f64>> {
        let cfg = &self.config;
        let d1 = |r: f64| -> Result<f64> {
            check_r(r)?;
            let n = cfg.n as f64;
            Ok(-2.0 * n * n / (r * r * r.hypot(n)) + cfg.alpha / (r * r))
        };
        match self.kind {
            ModelKind::Coulomb => Some(d1(r)),
            ModelKind::CoulombDipole => {
                Some(d1(r).map(|d| d + 3.0 * cfg.alpha.powi(3) / (8.0 * PI * PI * r.powi(4))))
            }
            _ => None,
        }
    }

    /// All local minima of the model in `[r_min, r_max]`.
    ///
    /// A minimum located from function values alone is only fixed to
    /// about `√ε` relative, because `V` is flat there. Where `dV/dr` is
    /// available, each minimum is polished to a root of the derivative.
    pub fn minima(&self, r_min: f64, r_max: f64, points_per_decade: usize) -> Result<Vec<StationaryPoint>> {
        let mut minima = find_local_minima(|r| self.eval(r), r_min, r_max, points_per_decade)?;
        if self.derivative(r_min).is_none() {
            return Ok(minima);
        }
        for p in &mut minima {
            let d = |r: f64| self.derivative(r).expect("closed form checked above");
            let (lo, hi) = (p.bracket.lo, p.bracket.hi);
            if d(lo)? < 0.0 && d(hi)? > 0.0 {
                let root = find_root(d, lo, hi, f64::MIN_POSITIVE)?;
                p.r_star = root.x;
                p.v_star = self.eval(root.x)?;
            }
        }
        Ok(minima)
    }
}

fn check_r(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("r", r, "r > 0"))
    }
}

fn check_scaling_k(k: u32) -> Result<()> {
    if k <= 3 {
        Ok(())
    } else {
        Err(Error::domain("k", k as f64, "k in {0, 1, 2, 3}"))
    }
}

/// `2√(1 + n²/r²)`
fn kinetic(n: u32, r: f64) -> f64 {
    2.0 * r.hypot(n as f64) / r
}

/// Bohr energy `2√(1 − α²/4n²)` of the point-Coulomb model.
pub fn bohr_energy(cfg: &PhysicalConfig) -> f64 {
    let x = cfg.alpha / (2.0 * cfg.n as f64);
    2.0 * ((1.0 - x) * (1.0 + x)).sqrt()
}

/// `r` at which `V_n^(1)` is minimal: `n√(4n² − α²)/α`.
pub fn bohr_radius(cfg: &PhysicalConfig) -> f64 {
    let n = cfg.n as f64;
    n * (4.0 * n * n - cfg.alpha * cfg.alpha).sqrt() / cfg.alpha
}

/// Coefficients `(c2, c4)` in `E_n = 2(1 + c2 α² + c4 α⁴ + …)`.
pub fn bohr_expansion_coeffs(cfg: &PhysicalConfig) -> (f64, f64) {
    let n2 = (cfg.n as f64).powi(2);
    (-1.0 / (8.0 * n2), -1.0 / (128.0 * n2 * n2))
}

/// Point charges: `2√(1 + n²/r²) − α/r`.
pub fn potential_v1(cfg: &PhysicalConfig, r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(kinetic(cfg.n, r) - cfg.alpha / r)
}

/// Point charges with anomalous-moment dipoles: `V^(1) − α³/(8π² r³)`.
pub fn potential_v2(cfg: &PhysicalConfig, r: f64) -> Result<f64> {
    let v1 = potential_v1(cfg, r)?;
    Ok(v1 - cfg.alpha.powi(3) / (8.0 * PI * PI * r.powi(3)))
}

/// Electric and magnetic parts of the co-planar ring-ring energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RingPairTerms {
    pub electric: f64,
    pub magnetic: f64,
}

impl RingPairTerms {
    pub fn total(&self) -> f64 {
        self.electric + self.magnetic
    }
}

/// Ring-ring interaction energy with an explicit magnetic coupling.
///
/// With `k = 1/√(1 + r²/4R²)`:
///
///   electric = −(α/πR) k K(k)
///   magnetic = −(g/4π³R³) (1/k) [(2 − k²) K(k) − 2 E(k)]
///
/// The bracket cancels to `πk⁴/16` for `r ≫ R`; it is evaluated through
/// the descending Landen transform `k₁ = (1 − k')/(1 + k')` as
/// `2(1 + k')(K(k₁) − E(k₁))`, which is free of cancellation.
pub fn ring_pair_terms(alpha: f64, magnetic_coupling: f64, radius: f64, r: f64) -> Result<RingPairTerms> {
    check_r(r)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::domain("R", radius, "R > 0"));
    }
    let b = r / (2.0 * radius);
    let sq = b.hypot(1.0);
    let k = 1.0 / sq;
    let kp = b / sq;
    let ci = complete_integrals_with_complement(k, kp)?;
    let electric = -(alpha / (PI * radius)) * k * ci.k;

    let one_plus_kp = 1.0 + kp;
    let k1 = k * k / (one_plus_kp * one_plus_kp);
    let kp1 = 2.0 * kp.sqrt() / one_plus_kp;
    let landen = complete_integrals_with_complement(k1, kp1)?;
    let bracket = 2.0 * one_plus_kp * landen.k_minus_e;
    let magnetic = -(magnetic_coupling / (4.0 * PI.powi(3) * radius.powi(3))) * sq * bracket;
    Ok(RingPairTerms { electric, magnetic })
}

/// Maxwell–Lorentz ring-ring energy `U_R(r)`, magnetic coupling `α³`.
pub fn ring_pair_energy_ml(params: &RingParams, cfg: &PhysicalConfig, r: f64) -> Result<f64> {
    ring_pair_terms(cfg.alpha, cfg.alpha.powi(3), params.radius, r).map(|t| t.total())
}

/// `2√(1 + n²/r²) + U_R(r)`.
pub fn potential_v3(params: &RingParams, cfg: &PhysicalConfig, r: f64) -> Result<f64> {
    Ok(kinetic(cfg.n, r) + ring_pair_energy_ml(params, cfg, r)?)
}

/// `V^(3)` with the magnetic coupling `α³` replaced by `α^(1+2k)`.
pub fn potential_scaling_law(k: u32, params: &RingParams, cfg: &PhysicalConfig, r: f64) -> Result<f64> {
    check_scaling_k(k)?;
    let coupling = cfg.alpha.powi(1 + 2 * k as i32);
    let terms = ring_pair_terms(cfg.alpha, coupling, params.radius, r)?;
    Ok(kinetic(cfg.n, r) + terms.total())
}

/// `(1 − e^{−2us})/s`, with its limit `2u` at `s = 0`.
pub(crate) fn bltp_kernel(s: f64, u: f64) -> f64 {
    if s == 0.0 {
        2.0 * u
    } else {
        -(-2.0 * u * s).exp_m1() / s
    }
}

/// The two angular integrals of the BLTP ring-ring energy,
///
///   I₁ = ∫₀^π g(s) dφ,   I₂ = ∫₀^π cos 2φ g(s) dφ,
///
/// with `s = √(sin²φ + b²)`, `g(s) = (1 − e^{−2us})/s`, `u = κR`, `b = r/2R`.
/// Both integrands are symmetric about `π/2`, so only `[0, π/2]` is sampled.
pub fn bltp_integrals(u: f64, b: f64) -> Result<(f64, f64)> {
    let s = |phi: f64| phi.sin().hypot(b);
    let i1 = integrate(&Integral::new(|phi| bltp_kernel(s(phi), u), 0.0, PI / 2.0))
        .map_err(|e| e.context(format!("BLTP electric integral (u = {u:e}, b = {b:e})")))?
        .value
        * 2.0;
    // |I₂| ≤ I₁; for b ≫ 1 the cos 2φ integral cancels to O(1/b³) while
    // the integrand stays O(1/b), so the tolerance is anchored to I₁.
    let i2 = integrate(
        &Integral::new(|phi| (2.0 * phi).cos() * bltp_kernel(s(phi), u), 0.0, PI / 2.0)
            .abs_tol(0.5 * DEFAULT_REL_TOL * i1),
    )
    .map_err(|e| e.context(format!("BLTP magnetic integral (u = {u:e}, b = {b:e})")))?
    .value
        * 2.0;
    Ok((i1, i2))
}

/// BLTP ring model:
/// `2√(1 + n²/r²) − (α/2πR) I₁ − (α/2πR)³ I₂`.
pub fn potential_v4(params: &RingParams, cfg: &PhysicalConfig, r: f64) -> Result<f64> {
    check_r(r)?;
    let kappa = params
        .kappa
        .ok_or_else(|| Error::InvalidInput("the BLTP model requires kappa".into()))?;
    let radius = params.radius;
    let (i1, i2) = bltp_integrals(kappa * radius, r / (2.0 * radius))?;
    let c = cfg.alpha / (2.0 * PI * radius);
    Ok(kinetic(cfg.n, r) - c * i1 - c.powi(3) * i2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyCurve {
    pub model: PotentialModel,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// Samples `model` on a deterministic grid. Points are evaluated in
/// parallel; the output is ordered by `r`.
pub fn sample_curve(
    model: &PotentialModel,
    r_min: f64,
    r_max: f64,
    points: usize,
    spacing: Spacing,
) -> Result<EnergyCurve> {
    if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "grid requires 0 < rmin < rmax, got ({r_min:e}, {r_max:e})"
        )));
    }
    if points < 2 {
        return Err(Error::InvalidInput(format!(
            "grid requires at least 2 points, got {points}"
        )));
    }
    let grid: Vec<f64> = match spacing {
        Spacing::Log => crate::optimize::log_grid(r_min, r_max, points),
        Spacing::Linear => {
            let step = (r_max - r_min) / (points - 1) as f64;
            (0..points)
                .map(|i| if i == points - 1 { r_max } else { r_min + step * i as f64 })
                .collect()
        }
    };
    let values = grid
        .par_iter()
        .map(|&r| {
            model
                .eval(r)
                .map_err(|e| e.context(format!("evaluating the potential at r = {r:e}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(EnergyCurve {
        model: *model,
        grid,
        values,
    })
}

/// Family of ring models whose radius is tuned as `R = c · α^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum RadiusFamily {
    RingMl,
    Scaling { k: u32 },
}

impl RadiusFamily {
    /// Power `p` in `R = c α^p`.
    pub fn radius_power(self) -> i32 {
        match self {
            RadiusFamily::RingMl => 2,
            RadiusFamily::Scaling { k } => 1 + k as i32,
        }
    }

    pub fn radius(self, cfg: &PhysicalConfig, coefficient: f64) -> f64 {
        coefficient * cfg.alpha.powi(self.radius_power())
    }

    pub fn model(self, cfg: PhysicalConfig, coefficient: f64) -> Result<PotentialModel> {
        let radius = self.radius(&cfg, coefficient);
        match self {
            RadiusFamily::RingMl => PotentialModel::ring_ml(cfg, radius),
            RadiusFamily::Scaling { k } => PotentialModel::scaling(cfg, k, radius),
        }
    }
}

/// Scan window around a ring of radius `R` that contains its tightly
/// bound minimum and excludes the hydrogenic one.
pub fn ring_scan_window(radius: f64) -> (f64, f64) {
    (radius * RING_WINDOW.0, radius * RING_WINDOW.1)
}

/// Lowest local minimum of `model` inside `window`, if there is one.
pub fn lowest_minimum(model: &PotentialModel, window: (f64, f64)) -> Result<Option<StationaryPoint>> {
    let mut minima = model.minima(window.0, window.1, SCAN_POINTS_PER_DECADE)?;
    minima.retain(|p| p.kind == MinimumKind::GlobalMin);
    Ok(minima.pop())
}

/// Tightly bound ground state of `family` at `R = c α^p`.
pub fn ring_ground_state(family: RadiusFamily, cfg: PhysicalConfig, coefficient: f64) -> Result<StationaryPoint> {
    let model = family.model(cfg, coefficient)?;
    let radius = family.radius(&cfg, coefficient);
    lowest_minimum(&model, ring_scan_window(radius))?.ok_or_else(|| {
        Error::NoSolution(format!(
            "no tightly bound minimum for R = {radius:e} (coefficient {coefficient})"
        ))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TunedRadius {
    pub family: RadiusFamily,
    /// `R / α^p`
    pub coefficient: f64,
    pub radius_power: i32,
    #[serde(rename = "R")]
    pub radius: f64,
    pub minimum: StationaryPoint,
    pub target_energy: f64,
    pub energy_residual: f64,
    /// True when the residual is limited by the spacing of representable
    /// coefficients rather than by the root finder.
    pub at_float_resolution: bool,
}

pub const DEFAULT_COEFFICIENT_BRACKET: (f64, f64) = (0.45, 0.55);
const TUNE_ENERGY_TOL: f64 = 1e-10;

/// Finds the ring radius whose tightly bound `n = 1` minimum has energy
/// `target_energy`.
pub fn tune_ring_radius(family: RadiusFamily, cfg: PhysicalConfig, target_energy: f64) -> Result<TunedRadius> {
    tune_ring_radius_in(family, cfg, target_energy, DEFAULT_COEFFICIENT_BRACKET)
}

pub fn tune_ring_radius_in(
    family: RadiusFamily,
    cfg: PhysicalConfig,
    target_energy: f64,
    bracket: (f64, f64),
) -> Result<TunedRadius> {
    if let RadiusFamily::Scaling { k } = family {
        check_scaling_k(k)?;
    }
    let cfg = cfg.with_n(1)?;
    let residual = |c: f64| -> Result<f64> { Ok(ring_ground_state(family, cfg, c)?.v_star - target_energy) };
    let root = find_root(residual, bracket.0, bracket.1, f64::MIN_POSITIVE).map_err(|e| {
        e.context(format!(
            "tuning R/α^{} on [{}, {}]",
            family.radius_power(),
            bracket.0,
            bracket.1
        ))
    })?;
    let coefficient = root.x;
    let minimum = ring_ground_state(family, cfg, coefficient)?;
    let energy_residual = minimum.v_star - target_energy;
    let spacing = 8.0 * f64::EPSILON * coefficient.abs();
    let at_float_resolution = root.hi - root.lo <= spacing;
    if energy_residual.abs() > TUNE_ENERGY_TOL && !at_float_resolution {
        return Err(Error::NoSolution(format!(
            "tuning stalled with energy residual {energy_residual:e}"
        )));
    }
    Ok(TunedRadius {
        family,
        coefficient,
        radius_power: family.radius_power(),
        radius: family.radius(&cfg, coefficient),
        minimum,
        target_energy,
        energy_residual,
        at_float_resolution,
    })
}

/// Drops the final digit of a decimal literal: `"0.49597832375"` → `"0.4959783237"`.
pub fn drop_last_digit(literal: &str) -> Result<String> {
    let trimmed = literal.trim();
    let bad = || Error::InvalidInput(format!("not a plain decimal literal: {literal:?}"));
    let (int, frac) = trimmed.split_once('.').ok_or_else(bad)?;
    if frac.len() < 2 || !frac.bytes().all(|c| c.is_ascii_digit()) || int.parse::<u64>().is_err() {
        return Err(bad());
    }
    Ok(format!("{int}.{}", &frac[..frac.len() - 1]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityProbe {
    pub coefficient_literal: String,
    pub energy: f64,
    pub dropped_literal: String,
    pub dropped_energy: f64,
}

/// Ground-state energy at a decimal coefficient and at the same
/// coefficient with its last digit dropped.
pub fn dropped_digit_probe(family: RadiusFamily, cfg: PhysicalConfig, literal: &str) -> Result<SensitivityProbe> {
    let cfg = cfg.with_n(1)?;
    let dropped_literal = drop_last_digit(literal)?;
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| Error::InvalidInput(format!("not a number: {s:?}")))
    };
    let energy = ring_ground_state(family, cfg, parse(literal)?)?.v_star;
    let dropped_energy = ring_ground_state(family, cfg, parse(&dropped_literal)?)?.v_star;
    Ok(SensitivityProbe {
        coefficient_literal: literal.trim().to_string(),
        energy,
        dropped_literal,
        dropped_energy,
    })
}
