//! Acceptance gate: every pinned criterion at full sample counts and stated
//! tolerances, one pass/fail line per criterion. Criteria are independent
//! and deterministic in the default seed.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use lebesgue_core::verify::{run_criterion, DEFAULT_SEED};

fn check(id: usize) {
    let rep = run_criterion(id, DEFAULT_SEED, false).expect("criterion must run");
    let verdict = if rep.pass { "PASS" } else { "FAIL" };
    println!("{verdict}  criterion {:02} — {}", rep.id, rep.name);
    for row in &rep.rows {
        println!(
            "      [{}] {}: estimate {:.6e}{}{} tol {:.3e}",
            if row.pass { "ok" } else { "FAIL" },
            row.name,
            row.estimate,
            row.stderr.map_or(String::new(), |s| format!(" ± {s:.2e}")),
            row.oracle.map_or(String::new(), |o| format!(" vs {o:.6e}")),
            row.tolerance,
        );
    }
    assert!(
        rep.pass,
        "criterion {:02} ({}) failed rows: {:?}",
        rep.id,
        rep.name,
        rep.rows
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.name.clone())
            .collect::<Vec<_>>()
    );
}

#[test]
fn criterion_01_weak_density_laplace_identity() {
    check(1);
}

#[test]
fn criterion_02_refinement_consistency() {
    check(2);
}

#[test]
fn criterion_03_weight_cancellation() {
    check(3);
}

#[test]
fn criterion_04_laplace_estimator() {
    check(4);
}

#[test]
fn criterion_05_multiplier_invariance() {
    check(5);
}

#[test]
fn criterion_06_thinning_partition() {
    check(6);
}

#[test]
fn criterion_07_pd_cross_construction() {
    check(7);
}

#[test]
fn criterion_08_sphere_projection_limit() {
    check(8);
}

#[test]
fn criterion_09_mellin_barnes_values() {
    check(9);
}

#[test]
fn criterion_10_equal_rho_invariance() {
    check(10);
}

#[test]
fn criterion_11_permutation_cycles() {
    check(11);
}

#[test]
fn criterion_12_prime_divisor_profiles() {
    check(12);
}

#[test]
fn criterion_13_dickman_oracle() {
    check(13);
}

#[test]
fn criterion_14_signed_extension() {
    check(14);
}

#[test]
fn criterion_15_profile_ode_residual() {
    check(15);
}
