//! Acceptance suite: every criterion runs at its pinned tolerance through
//! the same check registry as `annulus-moduli verify`, one test per
//! criterion, printing one line per criterion.

// the binary's modules, compiled into the test
#[path = "../src/checks.rs"]
mod checks;

use checks::{criteria, CheckResult, RunConfig};

fn thread_count() -> usize {
    if let Ok(v) = std::env::var("ANNULUS_MODULI_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn run_criterion(id: &str) -> Vec<CheckResult> {
    let cfg = RunConfig {
        tol_scale: 1.0,
        threads: thread_count(),
    };
    let criterion = criteria()
        .into_iter()
        .find(|c| c.id == id)
        .expect("criterion id exists");
    let results = (criterion.run)(&cfg);
    let ok = results.iter().all(|r| r.passed);
    println!(
        "{} {} [{}/{} checks] {}",
        criterion.id,
        if ok { "pass" } else { "FAIL" },
        results.iter().filter(|r| r.passed).count(),
        results.len(),
        criterion.title,
    );
    for r in &results {
        if !r.passed {
            println!(
                "    FAIL {}: computed {:.17e} vs reference {:.17e} (tolerance {:.3e}) [{}]",
                r.name, r.computed, r.reference, r.tolerance, r.identity
            );
        }
    }
    results
}

fn assert_all_pass(id: &str) {
    let results = run_criterion(id);
    let failures: Vec<String> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| {
            format!(
                "{}: computed {:.17e} vs reference {:.17e} (tol {:.3e})",
                r.name, r.computed, r.reference, r.tolerance
            )
        })
        .collect();
    assert!(failures.is_empty(), "{id} failed:\n{}", failures.join("\n"));
}

#[test]
fn c01_special_function_identities() {
    assert_all_pass("c01");
}

#[test]
fn c02_partition_function_modular_invariance() {
    assert_all_pass("c02");
}

#[test]
fn c03_eta_theta_laplace_transforms() {
    assert_all_pass("c03");
}

#[test]
fn c04_partition_laplace_closed_form() {
    assert_all_pass("c04");
}

#[test]
fn c05_weight_transform_and_mellin_identities() {
    assert_all_pass("c05");
}

#[test]
fn c06_mgf_normalization_and_density_round_trip() {
    assert_all_pass("c06");
}

#[test]
fn c07_modulus_cr_factorization() {
    assert_all_pass("c07");
}

#[test]
fn c08_hitting_time_representation() {
    assert_all_pass("c08");
}

#[test]
fn c09_nested_loop_identity() {
    assert_all_pass("c09");
}

#[test]
fn c10_cardy_laplace_proportionality() {
    assert_all_pass("c10");
}

#[test]
fn c11_bootstrap_consistency() {
    assert_all_pass("c11");
}

// The truncated-chaos estimator at the pinned resolution (n_boundary =
// 2^10) carries a transverse-cutoff bias of +0.022 (x = 0.5) and +0.045
// (x = 1) on the lateral factor, decaying like m_cut^{-1/3}; at the pinned
// 2^14 samples the 3-sigma band at (tau = 0.5, x = 0.5) is ~0.009, so this
// criterion cannot pass as stated at any seed. It runs faithfully and
// reports the measured brackets.
#[test]
fn c12_gmc_ratio_cf_monte_carlo() {
    assert_all_pass("c12");
}

#[test]
fn c13_lateral_ratio_monte_carlo() {
    assert_all_pass("c13");
}

#[test]
fn c14_ba_modulus_end_to_end() {
    assert_all_pass("c14");
}
