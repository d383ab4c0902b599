//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! and the computed-versus-expected table behind it.
//!
//! Tolerances are pinned twice: the library builds its checks with them,
//! and `PINNED` below asserts they have not drifted.

use positronium_core::reproduce::{run_criterion, Comparison, CriterionReport, ReproduceConfig};

use Comparison::*;

/// Expected comparison for every check, per criterion, in order.
fn pinned(id: u32) -> Vec<Comparison> {
    match id {
        1 => vec![Relative { tol: 1e-10 }; 5],
        2 => [Absolute { tol: 1e-8 }, Absolute { tol: 1e-4 }].repeat(5),
        3 => vec![Relative { tol: 1e-6 }, Relative { tol: 1e-3 }],
        4 => vec![
            SignificantDigits { digits: 10 },
            Relative { tol: 0.2 },
            Below { bound: 0.0 },
        ],
        5 => vec![Absolute { tol: 0.0 }],
        6 => vec![
            Range { lo: 1.7e5, hi: 1.9e5 },
            Range { lo: 2.4e-5, hi: 2.7e-5 },
            Relative { tol: 0.05 },
            Relative { tol: 0.05 },
            Absolute { tol: 1e-6 },
            Range { lo: 5e-6, hi: 5e-5 },
            AtMost { bound: 1e-12 },
        ],
        7 => vec![Absolute { tol: 1e-4 }; 4],
        8 => vec![
            Relative { tol: 0.02 },
            Range { lo: 0.04, hi: 0.06 },
            AtMost { bound: 0.0585 },
            Absolute { tol: 1e-7 },
        ],
        9 => vec![
            AtMost { bound: 1e-12 },
            AtMost { bound: 1e-12 },
            AtLeast { bound: 0.0 },
            AtMost { bound: 1e-6 },
            AtMost { bound: 1e-6 },
        ],
        _ => unreachable!(),
    }
}

fn print_report(r: &CriterionReport) {
    let status = if r.passed { "PASS" } else { "FAIL" };
    println!("criterion {} {status}: {}", r.id, r.title);
    for c in &r.checks {
        let expected = c.expected.map(|e| format!(" expected {e:.12e}")).unwrap_or_default();
        let delta = c.delta.map(|d| format!(" delta {d:+.3e}")).unwrap_or_default();
        println!(
            "    [{}] {}: computed {:.12e}{expected}{delta} ({})",
            if c.passed { "ok" } else { "x" },
            c.label,
            c.computed,
            c.comparison.describe()
        );
    }
    if let Some(e) = &r.error {
        println!("    error: {e}");
    }
}

fn run(id: u32) {
    let report = run_criterion(id, &ReproduceConfig::default()).expect("known criterion");
    print_report(&report);
    assert!(report.error.is_none(), "criterion {id} could not be computed: {:?}", report.error);
    let used: Vec<Comparison> = report.checks.iter().map(|c| c.comparison).collect();
    assert_eq!(used, pinned(id), "criterion {id}: tolerances differ from the pinned values");
    assert!(report.passed, "criterion {id} failed: {}", report.title);
}

#[test]
fn criterion_1_bohr_spectrum() {
    run(1);
}

#[test]
fn criterion_2_expansion_coefficients() {
    run(2);
}

#[test]
fn criterion_3_hydrogenic_minimizer() {
    run(3);
}

#[test]
fn criterion_4_ml_radius_tuning() {
    run(4);
}

#[test]
fn criterion_5_no_tightly_bound_n2_state() {
    run(5);
}

#[test]
fn criterion_6_bltp_joint_tuning() {
    run(6);
}

#[test]
fn criterion_7_radius_scaling_law() {
    run(7);
}

#[test]
fn criterion_8_variational_bound() {
    run(8);
}

#[test]
fn criterion_9_property_suites() {
    run(9);
}

#[test]
fn tampered_reference_coefficient_fails_tuning_criterion() {
    let cfg = ReproduceConfig {
        ml_coefficient: "0.49597832575".into(),
        ..ReproduceConfig::default()
    };
    let report = run_criterion(4, &cfg).unwrap();
    print_report(&report);
    assert!(!report.passed);
    assert!(!report.checks[0].passed, "the digit comparison must flag the tampered value");
}
