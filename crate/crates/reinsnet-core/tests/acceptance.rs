//! Acceptance suite: every criterion runs as its own test and prints one
//! pass/fail line. Run with `cargo test --test acceptance -- --nocapture`
//! to see criterion details and timings.

use reinsnet_core::acceptance::{self, CriterionOutcome};

fn assert_criterion(outcome: CriterionOutcome) {
    println!(
        "{} C{} {} [{} ms] {}",
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.id,
        outcome.name,
        outcome.elapsed_ms,
        outcome.details,
    );
    assert!(
        outcome.passed,
        "criterion {} failed: {}",
        outcome.id, outcome.details
    );
}

#[test]
fn criterion_1_counterexample_exact_reproduction() {
    assert_criterion(acceptance::criterion_1());
}

#[test]
fn criterion_2_var_dominance_battery() {
    assert_criterion(acceptance::criterion_2());
}

#[test]
fn criterion_3_rvar_dominance_battery() {
    assert_criterion(acceptance::criterion_3());
}

#[test]
fn criterion_4_reduction_optimality() {
    assert_criterion(acceptance::criterion_4());
}

#[test]
fn criterion_5_zero_deductibles_under_translation_invariance() {
    assert_criterion(acceptance::criterion_5());
}

#[test]
fn criterion_6_separability() {
    assert_criterion(acceptance::criterion_6());
}

#[test]
fn criterion_7_bernoulli_mixture() {
    assert_criterion(acceptance::criterion_7());
}

#[test]
fn criterion_8_measure_identities() {
    assert_criterion(acceptance::criterion_8());
}
