//! Command-line flags, the optional `key = value` config file, and their
//! resolution into validated parameters.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::Serialize;

use positronium_core::models::{
    PhysicalConfig, PotentialModel, RadiusFamily, Spacing, BIOT_SAVART_REGIME, COULOMB_REGIME, DEFAULT_ALPHA,
    REFERENCE_ML_COEFFICIENT,
};

/// Invalid or inconsistent user input; maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub type Usage<T> = Result<T, UsageError>;

fn usage<T>(msg: impl Into<String>) -> Usage<T> {
    Err(UsageError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Coulomb,
    CoulombDipole,
    RingMl,
    RingBltp,
    Scaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Default ring radius for the BLTP model when neither flag nor file sets it.
pub const DEFAULT_BLTP_RADIUS: f64 = 2.57e-5;
pub const DEFAULT_BLTP_KAPPA: f64 = 1.8e5;
pub const DEFAULT_VARIATIONAL_RADIUS: f64 = 2.661639e-5;
pub const DEFAULT_SCAN_POINTS: usize = 400;
pub const DEFAULT_POINTS_PER_DECADE: usize = 20;
pub const FULL_RANGE: (f64, f64) = (1e-7, 1e4);

/// Every flag a subcommand can take. All are optional here; each command
/// declares which ones it reads and supplies its own defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Params {
    /// Read `key = value` lines from this file; flags override it
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Interaction model
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,

    /// Orbital quantum number
    #[arg(long)]
    pub n: Option<u32>,

    /// Fine-structure constant
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,

    /// Ring radius in reduced Compton lengths
    #[arg(long = "R", allow_negative_numbers = true)]
    pub radius: Option<f64>,

    /// Ring radius as a multiple of alpha^2 (ring-ml)
    #[arg(long = "R-over-alpha2", allow_negative_numbers = true)]
    pub radius_over_alpha2: Option<f64>,

    /// Ring radius as a multiple of alpha^(1+k) (scaling)
    #[arg(long = "R-over-alpha-power", allow_negative_numbers = true)]
    pub radius_over_alpha_power: Option<f64>,

    /// BLTP inverse length
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,

    /// Exponent of the scaling-law family, 0..=3
    #[arg(long)]
    pub k: Option<u32>,

    /// Lower end of the r range
    #[arg(long, allow_negative_numbers = true)]
    pub rmin: Option<f64>,

    /// Upper end of the r range
    #[arg(long, allow_negative_numbers = true)]
    pub rmax: Option<f64>,

    /// Number of grid points
    #[arg(long)]
    pub points: Option<usize>,

    /// Logarithmic grid (default)
    #[arg(long, conflicts_with = "linear")]
    pub log: bool,

    /// Linear grid
    #[arg(long)]
    pub linear: bool,

    /// Scan density for minimum searches
    #[arg(long)]
    pub points_per_decade: Option<usize>,

    /// Output format
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Shorthand for --format json
    #[arg(long, conflicts_with = "format")]
    pub json: bool,

    /// Write output here instead of stdout
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Leave timing out of the JSON envelope, for byte-exact comparisons
    #[arg(long)]
    pub no_timing: bool,

    /// Target energy for tuning, in mc^2
    #[arg(long, allow_negative_numbers = true)]
    pub target: Option<f64>,

    /// Single trial scale for the variational energy
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,

    /// Lower end of the trial-scale scan
    #[arg(long, allow_negative_numbers = true)]
    pub amin: Option<f64>,

    /// Upper end of the trial-scale scan
    #[arg(long, allow_negative_numbers = true)]
    pub amax: Option<f64>,

    /// Decimal literal of the reference R/alpha^2 (tuning probe, reproduce)
    #[arg(long)]
    pub reference_coefficient: Option<String>,
}

/// Config-file keys, spelled as the long flags without dashes.
const KEYS: &[&str] = &[
    "model",
    "n",
    "alpha",
    "R",
    "R-over-alpha2",
    "R-over-alpha-power",
    "kappa",
    "k",
    "rmin",
    "rmax",
    "points",
    "spacing",
    "points-per-decade",
    "format",
    "output",
    "no-timing",
    "target",
    "a",
    "amin",
    "amax",
    "reference-coefficient",
];

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Usage<T> {
    raw.parse::<T>()
        .map_err(|_| UsageError(format!("config key {key}: cannot parse {raw:?}")))
}

fn parse_enum<T: ValueEnum>(key: &str, raw: &str) -> Usage<T> {
    T::from_str(raw, false).map_err(|_| UsageError(format!("config key {key}: unknown value {raw:?}")))
}

fn fill<T>(slot: &mut Option<T>, value: Usage<T>) -> Usage<()> {
    let v = value?;
    if slot.is_none() {
        *slot = Some(v);
    }
    Ok(())
}

pub fn read_config_file(path: &Path) -> Usage<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("--config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| UsageError(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return usage(format!("{}:{}: unknown key {key:?}", path.display(), i + 1));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return usage(format!("{}:{}: duplicate key {key:?}", path.display(), i + 1));
        }
    }
    Ok(map)
}

impl Params {
    /// Fills every unset flag from the config file, if one was given.
    pub fn merge_config_file(mut self) -> Usage<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        for (key, raw) in read_config_file(&path)? {
            let (k, r) = (key.as_str(), raw.as_str());
            match k {
                "model" => fill(&mut self.model, parse_enum(k, r))?,
                "n" => fill(&mut self.n, parse_value(k, r))?,
                "alpha" => fill(&mut self.alpha, parse_value(k, r))?,
                "R" => fill(&mut self.radius, parse_value(k, r))?,
                "R-over-alpha2" => fill(&mut self.radius_over_alpha2, parse_value(k, r))?,
                "R-over-alpha-power" => fill(&mut self.radius_over_alpha_power, parse_value(k, r))?,
                "kappa" => fill(&mut self.kappa, parse_value(k, r))?,
                "k" => fill(&mut self.k, parse_value(k, r))?,
                "rmin" => fill(&mut self.rmin, parse_value(k, r))?,
                "rmax" => fill(&mut self.rmax, parse_value(k, r))?,
                "points" => fill(&mut self.points, parse_value(k, r))?,
                "points-per-decade" => fill(&mut self.points_per_decade, parse_value(k, r))?,
                "format" => {
                    if !self.json {
                        fill(&mut self.format, parse_enum(k, r))?
                    }
                }
                "output" => fill(&mut self.output, Ok(PathBuf::from(r)))?,
                "target" => fill(&mut self.target, parse_value(k, r))?,
                "a" => fill(&mut self.a, parse_value(k, r))?,
                "amin" => fill(&mut self.amin, parse_value(k, r))?,
                "amax" => fill(&mut self.amax, parse_value(k, r))?,
                "reference-coefficient" => fill(&mut self.reference_coefficient, Ok(r.to_string()))?,
                "spacing" => match r {
                    "log" if !self.linear => self.log = true,
                    "linear" if !self.log => self.linear = true,
                    "log" | "linear" => {}
                    _ => return usage(format!("config key spacing: expected log or linear, got {r:?}")),
                },
                "no-timing" => self.no_timing |= parse_value::<bool>(k, r)?,
                _ => unreachable!("keys are checked while reading"),
            }
        }
        Ok(self)
    }

    /// Flags that carry a value, by their command-line name.
    fn set_flags(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut mark = |set: bool, name: &'static str| {
            if set {
                out.push(name)
            }
        };
        mark(self.model.is_some(), "--model");
        mark(self.n.is_some(), "--n");
        mark(self.alpha.is_some(), "--alpha");
        mark(self.radius.is_some(), "--R");
        mark(self.radius_over_alpha2.is_some(), "--R-over-alpha2");
        mark(self.radius_over_alpha_power.is_some(), "--R-over-alpha-power");
        mark(self.kappa.is_some(), "--kappa");
        mark(self.k.is_some(), "--k");
        mark(self.rmin.is_some(), "--rmin");
        mark(self.rmax.is_some(), "--rmax");
        mark(self.points.is_some(), "--points");
        mark(self.log || self.linear, "--log/--linear");
        mark(self.points_per_decade.is_some(), "--points-per-decade");
        mark(self.target.is_some(), "--target");
        mark(self.a.is_some(), "--a");
        mark(self.amin.is_some(), "--amin");
        mark(self.amax.is_some(), "--amax");
        mark(self.reference_coefficient.is_some(), "--reference-coefficient");
        out
    }

    /// Rejects flags the command does not read.
    pub fn only(&self, command: &str, allowed: &[&str]) -> Usage<()> {
        for flag in self.set_flags() {
            if !allowed.contains(&flag) {
                return usage(format!("{flag} is not used by `{command}`"));
            }
        }
        Ok(())
    }

    pub fn format(&self, default: Format) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format.unwrap_or(default)
        }
    }

    pub fn spacing(&self) -> Spacing {
        if self.linear {
            Spacing::Linear
        } else {
            Spacing::Log
        }
    }

    pub fn physical(&self) -> Usage<PhysicalConfig> {
        let alpha = self.alpha.unwrap_or(DEFAULT_ALPHA);
        if !(alpha > 0.0 && alpha < 1.0) {
            return usage(format!("--alpha must lie in (0, 1), got {alpha}"));
        }
        let n = self.n.unwrap_or(1);
        if n == 0 {
            return usage("--n must be at least 1");
        }
        PhysicalConfig::new(alpha, n).map_err(|e| UsageError(e.to_string()))
    }

    pub fn scaling_k(&self) -> Usage<u32> {
        let k = self.k.unwrap_or(1);
        if k > 3 {
            return usage(format!("--k must be 0, 1, 2 or 3, got {k}"));
        }
        Ok(k)
    }

    fn ring_radius(&self, cfg: &PhysicalConfig, scaled: Option<(f64, i32, &'static str)>) -> Usage<f64> {
        let given = [
            self.radius.map(|r| (r, "--R")),
            self.radius_over_alpha2.map(|c| (c * cfg.alpha.powi(2), "--R-over-alpha2")),
            self.radius_over_alpha_power
                .map(|c| (c * cfg.alpha.powi(scaled.map_or(2, |s| s.1)), "--R-over-alpha-power")),
        ];
        let set: Vec<(f64, &str)> = given.into_iter().flatten().collect();
        match set.as_slice() {
            [] => Ok(scaled.map_or(DEFAULT_BLTP_RADIUS, |(c, p, _)| c * cfg.alpha.powi(p))),
            [(r, flag)] => {
                if *r > 0.0 && r.is_finite() {
                    Ok(*r)
                } else {
                    usage(format!("{flag} must be positive, got {r}"))
                }
            }
            _ => usage("give the ring radius with only one of --R, --R-over-alpha2, --R-over-alpha-power"),
        }
    }

    pub fn model(&self, default: Option<ModelArg>) -> Usage<PotentialModel> {
        let kind = self
            .model
            .or(default)
            .ok_or_else(|| UsageError("--model is required".into()))?;
        let cfg = self.physical()?;
        let no_ring_flags = |name: &str| -> Usage<()> {
            let ring_flags = [
                (self.radius.is_some(), "--R"),
                (self.radius_over_alpha2.is_some(), "--R-over-alpha2"),
                (self.radius_over_alpha_power.is_some(), "--R-over-alpha-power"),
                (self.kappa.is_some(), "--kappa"),
                (self.k.is_some(), "--k"),
            ];
            match ring_flags.iter().find(|(set, _)| *set) {
                Some((_, flag)) => usage(format!("{flag} is not used by model {name}")),
                None => Ok(()),
            }
        };
        let core = |r: positronium_core::Result<PotentialModel>| r.map_err(|e| UsageError(e.to_string()));
        match kind {
            ModelArg::Coulomb => {
                no_ring_flags("coulomb")?;
                Ok(PotentialModel::coulomb(cfg))
            }
            ModelArg::CoulombDipole => {
                no_ring_flags("coulomb-dipole")?;
                Ok(PotentialModel::coulomb_dipole(cfg))
            }
            ModelArg::RingMl => {
                self.reject(&[(self.kappa.is_some(), "--kappa"), (self.k.is_some(), "--k")], "ring-ml")?;
                self.reject(&[(self.radius_over_alpha_power.is_some(), "--R-over-alpha-power")], "ring-ml")?;
                let radius = self.ring_radius(&cfg, Some((REFERENCE_ML_COEFFICIENT, 2, "--R-over-alpha2")))?;
                core(PotentialModel::ring_ml(cfg, radius))
            }
            ModelArg::RingBltp => {
                self.reject(&[(self.k.is_some(), "--k")], "ring-bltp")?;
                self.reject(
                    &[
                        (self.radius_over_alpha2.is_some(), "--R-over-alpha2"),
                        (self.radius_over_alpha_power.is_some(), "--R-over-alpha-power"),
                    ],
                    "ring-bltp",
                )?;
                let radius = self.ring_radius(&cfg, None)?;
                let kappa = self.kappa.unwrap_or(DEFAULT_BLTP_KAPPA);
                if !(kappa > 0.0 && kappa.is_finite()) {
                    return usage(format!("--kappa must be positive, got {kappa}"));
                }
                core(PotentialModel::ring_bltp(cfg, radius, kappa))
            }
            ModelArg::Scaling => {
                self.reject(&[(self.kappa.is_some(), "--kappa")], "scaling")?;
                self.reject(&[(self.radius_over_alpha2.is_some(), "--R-over-alpha2")], "scaling")?;
                let k = self.scaling_k()?;
                let radius = self.ring_radius(&cfg, Some((REFERENCE_ML_COEFFICIENT, 1 + k as i32, "")))?;
                core(PotentialModel::scaling(cfg, k, radius))
            }
        }
    }

    fn reject(&self, flags: &[(bool, &str)], model: &str) -> Usage<()> {
        match flags.iter().find(|(set, _)| *set) {
            Some((_, flag)) => usage(format!("{flag} is not used by model {model}")),
            None => Ok(()),
        }
    }

    pub fn radius_family(&self) -> Usage<Option<RadiusFamily>> {
        match self.model.unwrap_or(ModelArg::RingMl) {
            ModelArg::RingMl => {
                self.reject(&[(self.k.is_some(), "--k")], "ring-ml")?;
                Ok(Some(RadiusFamily::RingMl))
            }
            ModelArg::Scaling => Ok(Some(RadiusFamily::Scaling { k: self.scaling_k()? })),
            ModelArg::RingBltp => {
                self.reject(&[(self.k.is_some(), "--k")], "ring-bltp")?;
                Ok(None)
            }
            other => usage(format!(
                "model {} has no tunable radius; use ring-ml, ring-bltp or scaling",
                other.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
            )),
        }
    }

    pub fn range(&self, default: (f64, f64), lo_flag: &str, hi_flag: &str, lo: Option<f64>, hi: Option<f64>) -> Usage<(f64, f64)> {
        let (lo, hi) = (lo.unwrap_or(default.0), hi.unwrap_or(default.1));
        if !(lo > 0.0 && lo.is_finite()) {
            return usage(format!("{lo_flag} must be positive, got {lo}"));
        }
        if !(hi > lo && hi.is_finite()) {
            return usage(format!("{hi_flag} must exceed {lo_flag} ({hi} <= {lo})"));
        }
        Ok((lo, hi))
    }

    pub fn r_range(&self, default: (f64, f64)) -> Usage<(f64, f64)> {
        self.range(default, "--rmin", "--rmax", self.rmin, self.rmax)
    }

    pub fn points_per_decade(&self) -> Usage<usize> {
        let p = self.points_per_decade.unwrap_or(DEFAULT_POINTS_PER_DECADE);
        if p < 10 {
            return usage(format!("--points-per-decade must be at least 10, got {p}"));
        }
        Ok(p)
    }
}

/// Default scan window for a model: the hydrogenic regime for the point
/// Coulomb model, the Biot–Savart regime for the others.
pub fn default_window(model: &PotentialModel) -> (f64, f64) {
    match model.kind {
        positronium_core::models::ModelKind::Coulomb => COULOMB_REGIME,
        _ => BIOT_SAVART_REGIME,
    }
}
