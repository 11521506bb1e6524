//! Acceptance gate: every headline claim at full scale, one test per
//! criterion. Sample counts and tolerances sit in the library defaults;
//! nothing here may weaken them. Expect roughly an hour single-core for
//! the whole target.

use dronecell::validate::{
    check_boundary_identities, check_density_profiles, check_displacement_laws,
    check_exact_closures, check_exclusion_ordering, check_normalization,
    check_rate_against_simulation, check_rate_trends, check_rayleigh_asymptote,
    check_repeatability, CheckOutcome, MobilityLaws, ValidationConfig, SPEED,
};
use std::sync::OnceLock;

fn cfg() -> ValidationConfig {
    ValidationConfig::default()
}

fn laws() -> &'static MobilityLaws {
    static LAWS: OnceLock<MobilityLaws> = OnceLock::new();
    LAWS.get_or_init(|| {
        let cfg = cfg();
        let t_max = cfg
            .displacement_times
            .iter()
            .chain(&cfg.density_times)
            .chain(&cfg.ordering_times)
            .chain(&cfg.rate_times)
            .chain([&cfg.fit_time, &cfg.session_length])
            .fold(0.0f64, |a, &b| a.max(b));
        MobilityLaws::build(SPEED * t_max, cfg.seed).expect("law tables build")
    })
}

/// Prints one line per outcome and fails on the full list, so a red run
/// names every violated gate at once.
fn report(outcomes: Vec<CheckOutcome>) {
    let mut failures = Vec::new();
    for o in &outcomes {
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {} (measured {:.6}, tolerance {:.6}; {})",
            o.name, o.measured, o.tolerance, o.detail
        );
        if !o.passed {
            failures.push(format!("{}: measured {} vs tolerance {}", o.name, o.measured, o.tolerance));
        }
    }
    assert!(failures.is_empty(), "failed gates:\n{}", failures.join("\n"));
}

#[test]
fn criterion_01_displacement_laws_match_sampled_walks() {
    report(check_displacement_laws(&cfg(), laws()).unwrap());
}

#[test]
fn criterion_02_walk_law_approaches_a_rayleigh() {
    report(check_rayleigh_asymptote(&cfg(), laws()).unwrap());
}

#[test]
fn criterion_03_density_profiles_match_displaced_fields() {
    report(check_density_profiles(&cfg(), laws()).unwrap());
}

#[test]
fn criterion_04_reaches_bearings_and_counts_close_exactly() {
    report(check_exact_closures(&cfg(), laws()).unwrap());
}

#[test]
fn criterion_05_straight_line_keeps_the_fullest_disc() {
    report(check_exclusion_ordering(&cfg(), laws()).unwrap());
}

#[test]
fn criterion_06_densities_join_their_boundary_limits() {
    report(check_boundary_identities(&cfg(), laws()).unwrap());
}

#[test]
fn criterion_07_analytic_rate_matches_simulation() {
    report(check_rate_against_simulation(&cfg()).unwrap());
}

#[test]
fn criterion_08_rate_orderings_hold() {
    report(check_rate_trends(&cfg(), laws()).unwrap());
}

#[test]
fn criterion_09_laws_normalize_and_transforms_differentiate() {
    report(check_normalization(&cfg(), laws()).unwrap());
}

#[test]
fn criterion_10_identical_runs_write_identical_bytes() {
    report(check_repeatability(&cfg()).unwrap());

    // The same guarantee end to end: two binary invocations with one seed
    // must write identical result tables.
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/validate_all_quick.toml");
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &std::path::Path| {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_dronecell"))
            .args(["validate-all", "--config", config, "--seed", "11"])
            .arg("--out")
            .arg(out)
            .status()
            .expect("binary runs");
        assert!(status.success(), "quick validation sweep failed");
    };
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    run(&out_a);
    run(&out_b);
    for name in ["validate_all.csv", "validate_all.json", "config_resolved.toml"] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical invocations");
        assert!(!a.is_empty());
    }
    println!("PASS determinism/binary (two seeded runs wrote identical tables)");
}
