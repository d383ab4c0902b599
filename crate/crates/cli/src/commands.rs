use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use positronium_core::flux::{
    bltp_ground_state, flux_branches, flux_peak, solve_r_given_kappa, tune_bltp, BltpTuning, FluxPeak, FluxSolution,
};
use positronium_core::models::{
    drop_last_digit, dropped_digit_probe, sample_curve, tune_ring_radius, PotentialModel, RadiusFamily,
    SensitivityProbe, Spacing, TunedRadius, REFERENCE_ML_COEFFICIENT_LITERAL,
};
use positronium_core::optimize::StationaryPoint;
use positronium_core::reproduce::{run_all, CriterionReport, ReproduceConfig, ReproduceReport};
use positronium_core::variational::{
    evaluate, minimize_over_a, TrialScale, VariationalResult, DEFAULT_A_RANGE,
};
use positronium_core::Error;

use crate::output::{float, open, write_csv, write_json, Envelope, Meta, TOOL_VERSION};
use crate::params::{
    default_window, Format, Params, UsageError, DEFAULT_SCAN_POINTS, DEFAULT_VARIATIONAL_RADIUS, FULL_RANGE,
};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

/// Outcome of a command that ran to completion.
#[derive(Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    AcceptanceFailed,
}

pub type Outcome = Result<Status, Failure>;

const MODEL_FLAGS: &[&str] = &[
    "--model",
    "--n",
    "--alpha",
    "--R",
    "--R-over-alpha2",
    "--R-over-alpha-power",
    "--kappa",
    "--k",
];

fn with(base: &[&'static str], extra: &[&'static str]) -> Vec<&'static str> {
    base.iter().chain(extra).copied().collect()
}

struct Emitter<'a> {
    params: &'a Params,
    command: &'static str,
    started: Instant,
}

impl Emitter<'_> {
    fn writer(&self) -> Result<Box<dyn Write>, Failure> {
        open(self.params.output.as_deref()).map_err(|e| {
            let target = self
                .params
                .output
                .as_ref()
                .map_or("stdout".to_string(), |p| format!("--output {}", p.display()));
            Failure::Usage(format!("cannot write to {target}: {e}"))
        })
    }

    fn io(e: anyhow::Error) -> Failure {
        Failure::Usage(format!("writing output failed: {e}"))
    }

    fn json<P: Serialize, R: Serialize>(&self, parameters: &P, results: &R) -> Result<(), Failure> {
        let elapsed = (!self.params.no_timing).then(|| self.started.elapsed());
        let envelope = Envelope {
            version: TOOL_VERSION,
            command: self.command,
            parameters,
            results,
            meta: Meta::from_elapsed(elapsed),
        };
        write_json(&mut *self.writer()?, &envelope).map_err(Self::io)
    }

    fn csv(&self, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<(), Failure> {
        write_csv(&mut *self.writer()?, header, rows).map_err(Self::io)
    }

    fn json_only(&self) -> Result<(), Failure> {
        if self.params.format(Format::Json) == Format::Csv {
            return Err(Failure::Usage(format!("`{}` has no CSV output; use --format json", self.command)));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct ScanParameters {
    #[serde(flatten)]
    model: PotentialModel,
    rmin: f64,
    rmax: f64,
    points: usize,
    spacing: Spacing,
}

#[derive(Serialize)]
struct CurveOut<'a> {
    r: &'a [f64],
    #[serde(rename = "V")]
    v: &'a [f64],
}

pub fn scan(params: &Params) -> Outcome {
    let started = Instant::now();
    params.only("scan", &with(MODEL_FLAGS, &["--rmin", "--rmax", "--points", "--log/--linear"]))?;
    let model = params.model(None)?;
    let (rmin, rmax) = params.r_range(default_window(&model))?;
    let points = params.points.unwrap_or(DEFAULT_SCAN_POINTS);
    if points < 2 {
        return Err(Failure::Usage(format!("--points must be at least 2, got {points}")));
    }
    let spacing = params.spacing();
    let curve = sample_curve(&model, rmin, rmax, points, spacing)?;
    let out = Emitter {
        params,
        command: "scan",
        started,
    };
    match params.format(Format::Csv) {
        Format::Csv => out.csv(
            &["r", "V"],
            curve.grid.iter().zip(&curve.values).map(|(r, v)| vec![float(*r), float(*v)]),
        )?,
        Format::Json => out.json(
            &ScanParameters {
                model,
                rmin,
                rmax,
                points,
                spacing,
            },
            &CurveOut {
                r: &curve.grid,
                v: &curve.values,
            },
        )?,
    }
    Ok(Status::Success)
}

#[derive(Serialize)]
struct MinimizeParameters {
    #[serde(flatten)]
    model: PotentialModel,
    rmin: f64,
    rmax: f64,
    points_per_decade: usize,
}

pub fn minimize(params: &Params) -> Outcome {
    let started = Instant::now();
    params.only("minimize", &with(MODEL_FLAGS, &["--rmin", "--rmax", "--points-per-decade"]))?;
    let model = params.model(None)?;
    let (rmin, rmax) = params.r_range(FULL_RANGE)?;
    let ppd = params.points_per_decade()?;
    let minima: Vec<StationaryPoint> = model.minima(rmin, rmax, ppd)?;
    let out = Emitter {
        params,
        command: "minimize",
        started,
    };
    match params.format(Format::Json) {
        Format::Json => out.json(
            &MinimizeParameters {
                model,
                rmin,
                rmax,
                points_per_decade: ppd,
            },
            &minima,
        )?,
        Format::Csv => out.csv(
            &["r_star", "V", "kind"],
            minima.iter().map(|p| {
                let kind = serde_json::to_value(p.kind)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default();
                vec![float(p.r_star), float(p.v_star), kind]
            }),
        )?,
    }
    Ok(Status::Success)
}

#[derive(Serialize)]
struct TuneParameters {
    model: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    alpha: f64,
    target: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_coefficient: Option<String>,
}

#[derive(Serialize)]
struct RadiusTuneOut {
    tuned: TunedRadius,
    /// Ground state at the reference coefficient and with its last digit dropped.
    probe: SensitivityProbe,
}

#[derive(Serialize)]
struct ProductProbe {
    product_literal: String,
    energy: f64,
    dropped_literal: String,
    dropped_energy: f64,
}

#[derive(Serialize)]
struct BltpTuneOut {
    tuned: BltpTuning,
    #[serde(rename = "kappa_R")]
    product: f64,
    /// Ground state at the tuned `κR` rounded to ten decimals and with its
    /// last digit dropped.
    probe: ProductProbe,
}

pub fn tune(params: &Params) -> Outcome {
    let started = Instant::now();
    params.only("tune", &["--model", "--alpha", "--k", "--target", "--reference-coefficient"])?;
    let cfg = params.physical()?;
    let target = params.target.unwrap_or(0.0);
    if !target.is_finite() {
        return Err(Failure::Usage(format!("--target must be finite, got {target}")));
    }
    let out = Emitter {
        params,
        command: "tune",
        started,
    };
    out.json_only()?;
    match params.radius_family()? {
        Some(family) => {
            let literal = params
                .reference_coefficient
                .clone()
                .unwrap_or_else(|| REFERENCE_ML_COEFFICIENT_LITERAL.to_string());
            drop_last_digit(&literal).map_err(|_| {
                Failure::Usage(format!("--reference-coefficient must be a decimal like 0.123, got {literal:?}"))
            })?;
            let tuned = tune_ring_radius(family, cfg, target)?;
            let probe = dropped_digit_probe(family, cfg, &literal)?;
            let (model, k) = match family {
                RadiusFamily::RingMl => ("ring-ml", None),
                RadiusFamily::Scaling { k } => ("scaling", Some(k)),
            };
            out.json(
                &TuneParameters {
                    model,
                    k,
                    alpha: cfg.alpha,
                    target,
                    reference_coefficient: Some(literal),
                },
                &RadiusTuneOut { tuned, probe },
            )?;
        }
        None => {
            if params.reference_coefficient.is_some() {
                return Err(Failure::Usage("--reference-coefficient is not used by model ring-bltp".into()));
            }
            let tuned = tune_bltp(cfg.alpha, target)?;
            let product = tuned.solution.product();
            let product_literal = format!("{product:.10}");
            let dropped_literal = drop_last_digit(&product_literal)?;
            let energy_at = |lit: &str| -> Result<f64, Failure> {
                let u: f64 = lit.parse().map_err(|_| Failure::Numerical(format!("bad literal {lit}")))?;
                Ok(bltp_ground_state(u, cfg.alpha)?.1.v_star)
            };
            let probe = ProductProbe {
                energy: energy_at(&product_literal)?,
                dropped_energy: energy_at(&dropped_literal)?,
                product_literal,
                dropped_literal,
            };
            out.json(
                &TuneParameters {
                    model: "ring-bltp",
                    k: None,
                    alpha: cfg.alpha,
                    target,
                    reference_coefficient: None,
                },
                &BltpTuneOut {
                    tuned,
                    product,
                    probe,
                },
            )?;
        }
    }
    Ok(Status::Success)
}

#[derive(Serialize)]
struct FluxParameters {
    kappa: f64,
    alpha: f64,
}

#[derive(Serialize)]
struct FluxOut {
    /// Solution on the attracting branch.
    solution: FluxSolution,
    /// All nontrivial solutions, ordered by R.
    branches: Vec<FluxSolution>,
    peak: FluxPeak,
}

pub fn flux_solve(params: &Params) -> Outcome {
    let started = Instant::now();
    params.only("flux-solve", &["--kappa", "--alpha"])?;
    let cfg = params.physical()?;
    let kappa = params.kappa.unwrap_or(crate::params::DEFAULT_BLTP_KAPPA);
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Failure::Usage(format!("--kappa must be positive, got {kappa}")));
    }
    let out = Emitter {
        params,
        command: "flux-solve",
        started,
    };
    out.json_only()?;
    let solution = solve_r_given_kappa(kappa, cfg.alpha)?;
    let branches = flux_branches(kappa, cfg.alpha)?;
    let peak = flux_peak()?;
    out.json(
        &FluxParameters {
            kappa,
            alpha: cfg.alpha,
        },
        &FluxOut {
            solution,
            branches,
            peak,
        },
    )?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct VariationalParameters {
    #[serde(rename = "R")]
    radius: f64,
    alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    amin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    amax: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    points_per_decade: Option<usize>,
}

#[derive(Serialize)]
struct SinglePoint {
    a: f64,
    kinetic: f64,
    potential: f64,
    energy: f64,
    #[serde(rename = "R")]
    radius: f64,
}

pub fn variational(params: &Params) -> Outcome {
    let started = Instant::now();
    params.only("variational", &["--R", "--alpha", "--a", "--amin", "--amax", "--points-per-decade"])?;
    let cfg = params.physical()?;
    let radius = params.radius.unwrap_or(DEFAULT_VARIATIONAL_RADIUS);
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Failure::Usage(format!("--R must be positive, got {radius}")));
    }
    let out = Emitter {
        params,
        command: "variational",
        started,
    };
    if let Some(a) = params.a {
        if params.amin.is_some() || params.amax.is_some() || params.points_per_decade.is_some() {
            return Err(Failure::Usage("--a evaluates a single trial scale; drop --amin/--amax/--points-per-decade".into()));
        }
        let scale = TrialScale::new(a).map_err(|_| Failure::Usage(format!("--a must be positive, got {a}")))?;
        let (kinetic, potential, energy) = evaluate(scale, radius, cfg.alpha)?;
        let point = SinglePoint {
            a,
            kinetic,
            potential,
            energy,
            radius,
        };
        let parameters = VariationalParameters {
            radius,
            alpha: cfg.alpha,
            a: Some(a),
            amin: None,
            amax: None,
            points_per_decade: None,
        };
        return match params.format(Format::Json) {
            Format::Json => out.json(&parameters, &point).map(|_| Status::Success),
            Format::Csv => out
                .csv(
                    &["a", "kinetic", "potential", "energy"],
                    std::iter::once(vec![float(a), float(kinetic), float(potential), float(energy)]),
                )
                .map(|_| Status::Success),
        };
    }
    let (amin, amax) = params.range(DEFAULT_A_RANGE, "--amin", "--amax", params.amin, params.amax)?;
    let ppd = params.points_per_decade()?;
    let found: Vec<VariationalResult> = minimize_over_a(radius, cfg.alpha, amin, amax, ppd)?;
    match params.format(Format::Json) {
        Format::Json => out.json(
            &VariationalParameters {
                radius,
                alpha: cfg.alpha,
                a: None,
                amin: Some(amin),
                amax: Some(amax),
                points_per_decade: Some(ppd),
            },
            &found,
        )?,
        Format::Csv => out.csv(
            &["a", "kinetic", "potential", "energy", "kind"],
            found.iter().map(|v| {
                let kind = serde_json::to_value(v.kind)
                    .ok()
                    .and_then(|x| x.as_str().map(str::to_string))
                    .unwrap_or_default();
                vec![float(v.a_star.value()), float(v.kinetic), float(v.potential), float(v.energy), kind]
            }),
        )?,
    }
    Ok(Status::Success)
}

fn print_table(out: &mut dyn Write, report: &ReproduceReport) -> std::io::Result<()> {
    let line = |r: &CriterionReport| {
        format!(
            "{:>2}  {}  {}",
            r.id,
            if r.passed { "PASS" } else { "FAIL" },
            r.title
        )
    };
    for r in &report.criteria {
        writeln!(out, "{}", line(r))?;
        for c in &r.checks {
            let expected = c.expected.map(|e| format!("  expected {e:.10e}")).unwrap_or_default();
            let delta = c.delta.map(|d| format!("  delta {d:+.3e}")).unwrap_or_default();
            writeln!(
                out,
                "      {} {:<44} computed {:.10e}{expected}{delta}  [{}]",
                if c.passed { "ok" } else { "xx" },
                c.label,
                c.computed,
                c.comparison.describe()
            )?;
        }
        if let Some(e) = &r.error {
            writeln!(out, "      error: {e}")?;
        }
    }
    let failed: Vec<String> = report
        .criteria
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.id.to_string())
        .collect();
    if failed.is_empty() {
        writeln!(out, "all {} criteria passed", report.criteria.len())?;
    } else {
        writeln!(out, "failed criteria: {}", failed.join(", "))?;
    }
    out.flush()
}

pub fn reproduce(params: &Params) -> Outcome {
    let started = Instant::now();
    params.only("reproduce", &["--alpha", "--R", "--reference-coefficient"])?;
    let cfg = params.physical()?;
    let mut rc = ReproduceConfig {
        alpha: cfg.alpha,
        ..ReproduceConfig::default()
    };
    if let Some(lit) = &params.reference_coefficient {
        drop_last_digit(lit)
            .map_err(|_| Failure::Usage(format!("--reference-coefficient must be a decimal like 0.123, got {lit:?}")))?;
        rc.ml_coefficient = lit.clone();
    }
    if let Some(r) = params.radius {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Failure::Usage(format!("--R must be positive, got {r}")));
        }
        rc.variational_radius = r;
    }
    let report = run_all(&rc);
    let out = Emitter {
        params,
        command: "reproduce",
        started,
    };
    match params.format(Format::Csv) {
        Format::Json => out.json(&rc, &report)?,
        Format::Csv if params.format.is_some() => {
            return Err(Failure::Usage("`reproduce` prints a table or, with --json, JSON".into()))
        }
        Format::Csv => {
            let mut w = out.writer()?;
            print_table(&mut *w, &report).map_err(|e| Emitter::io(e.into()))?;
        }
    }
    Ok(if report.passed {
        Status::Success
    } else {
        Status::AcceptanceFailed
    })
}
