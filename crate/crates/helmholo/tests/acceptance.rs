//! Acceptance gate: one test per criterion of the experiment suite.
//!
//! Each test prints a single `[PASS]`/`[FAIL]` line with the measured
//! quantities and asserts the verdict, so `cargo test --test acceptance`
//! doubles as a human-readable report.

use helmholo::suite::{self, CriterionOutcome};

fn check(outcome: helmholo::Result<CriterionOutcome>) {
    let outcome = outcome.expect("criterion computation failed");
    let verdict = if outcome.pass { "PASS" } else { "FAIL" };
    println!(
        "[{verdict}] criterion {} ({}): {}",
        outcome.id, outcome.name, outcome.detail
    );
    assert!(outcome.pass, "criterion {} failed: {}", outcome.id, outcome.detail);
}

#[test]
fn criterion_1_nontrapping_slope() {
    check(suite::criterion_nontrapping_slope());
}

#[test]
fn criterion_2_sharpness_sequence() {
    check(suite::criterion_sharpness_sequence());
}

#[test]
fn criterion_3_two_oracle_poles() {
    check(suite::criterion_two_oracle_poles());
}

#[test]
fn criterion_4_region_soundness() {
    check(suite::criterion_region_soundness());
}

#[test]
fn criterion_5_region_vs_pole() {
    check(suite::criterion_region_vs_pole());
}

#[test]
fn criterion_6_cauchy_analyticity() {
    check(suite::criterion_cauchy());
}

#[test]
fn criterion_7_dtn_sign_properties() {
    check(suite::criterion_dtn_signs());
}

#[test]
fn criterion_8_norm_relations() {
    check(suite::criterion_norm_relations());
}
