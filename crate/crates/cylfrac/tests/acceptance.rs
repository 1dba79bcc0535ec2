//! Acceptance suite: one test per criterion, each printing its own pass/fail
//! line (run with `cargo test --test acceptance -- --nocapture` to see all of
//! them).

use cylfrac::acceptance::{self, CriterionResult};

fn check(result: CriterionResult) {
    println!("{}", result.status_line());
    assert!(result.passed, "{}", result.status_line());
}

#[test]
fn criterion_01_classical_limit_constant() {
    check(acceptance::classical_limit_constant());
}

#[test]
fn criterion_02_symbol_identity_at_zero() {
    check(acceptance::symbol_identity_at_zero());
}

#[test]
fn criterion_03_integer_reduction() {
    check(acceptance::integer_reduction());
}

#[test]
fn criterion_04_oracle_equivalence() {
    check(acceptance::oracle_equivalence());
}

#[test]
fn criterion_05_period_limit() {
    check(acceptance::period_limit());
}

#[test]
fn criterion_06_fowler_period_consistency() {
    check(acceptance::fowler_period_consistency());
}

#[test]
fn criterion_07_hamiltonian_constancy() {
    check(acceptance::hamiltonian_constancy());
}

#[test]
fn criterion_08_nonlinear_boundary_condition() {
    check(acceptance::nonlinear_boundary_condition());
}

#[test]
fn criterion_09_bubble_constant() {
    check(acceptance::bubble_constant_checks());
}

#[test]
fn criterion_10_monotonicity_suite() {
    check(acceptance::monotonicity_suite());
}

#[test]
fn criterion_11_rho_star_expansion() {
    check(acceptance::rho_star_expansion());
}

#[test]
fn criterion_12_specfun_identity_suite() {
    check(acceptance::specfun_identity_suite());
}

#[test]
fn criterion_13_conjecture_scan() {
    check(acceptance::conjecture_scan_report());
}
