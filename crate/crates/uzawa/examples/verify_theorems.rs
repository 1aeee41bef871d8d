//! Certify a solver run against the convergence guarantees.
//!
//! For positive definite `A` (possibly nonsymmetric), symmetric positive
//! semidefinite `C`, and full-row-rank `B`, the exact-line-search
//! iteration is guaranteed to contract the least-squares merit by at
//! least `1 - c0` per step, where `c0 = beta^2 / (gamma^4 ||S||^2)` is
//! built from spectral bounds of the blocks. This example computes those
//! bounds with dense eigenvalue methods, replays a recorded run against
//! them, and prints the resulting report.
//!
//!     cargo run --example verify_theorems

use uzawa::analysis::verify_run;
use uzawa::problem_gen::{gen_linear_vi, VIGenConfig};
use uzawa::rng::SplitMix64;
use uzawa::solvers::{uzawa_exact_solve, SolverConfig};
use uzawa::Result;

fn main() -> Result<()> {
    let mut gen_cfg = VIGenConfig::new(120);
    gen_cfg.seed = 11;
    let system = gen_linear_vi(&gen_cfg)?;
    let (n, m) = system.dims();
    println!("system: n = {n}, m = {m}");

    // The error-decay check replays every iterate, so record them all.
    let cfg = SolverConfig {
        record_history: true,
        ..SolverConfig::default()
    };
    let y0 = SplitMix64::stream(0, 1).uniform_vec(m);
    let outcome = uzawa_exact_solve(&system, y0, &cfg)?;
    println!(
        "{:?} after {} iterations",
        outcome.history.termination,
        outcome.history.iterations()
    );

    let report = verify_run(&system, &outcome.history, 100)?;
    let b = report.bounds;
    println!("\nspectral bounds:");
    println!("  lambda_min(A_s)        = {:.6e}", b.lambda_m);
    println!("  ||A||_2                = {:.6e}", b.norm_a);
    println!("  gamma                  = {:.6e}", b.gamma);
    println!("  beta                   = {:.6e}", b.beta);
    println!("  ||S||_2                = {:.6e}", b.norm_s);
    println!("  contraction constant   = {:.6e}", b.c0);

    println!("\nchecks over {} recorded iterations:", report.rows.len());
    println!(
        "  merit contraction <= 1 - c0 at every step : {} (worst excess {:+.3e})",
        if report.theorem1_pass.unwrap_or(true) { "pass" } else { "FAIL" },
        report.theorem1_worst_excess.unwrap_or(f64::NAN)
    );
    println!(
        "  error inside geometric envelope           : {} (worst ratio {:.6})",
        if report.theorem2_pass.unwrap_or(true) { "pass" } else { "FAIL" },
        report.theorem2_worst_ratio.unwrap_or(f64::NAN)
    );
    println!(
        "  direction norm equals error proxy         : {} (worst rel err {:.3e})",
        if report.identity_pass.unwrap_or(true) { "pass" } else { "FAIL" },
        report.identity_worst_rel_err.unwrap_or(f64::NAN)
    );
    if let Some(l) = &report.lemma1 {
        println!(
            "  coercivity of S over {} random probes    : {} (worst margin {:.6})",
            l.trials,
            if l.pass { "pass" } else { "FAIL" },
            l.worst_margin
        );
    }
    if let Some(l) = &report.lbb {
        println!(
            "  coupling full rank (inf-sup)              : {} (lambda_min estimate {:.6e})",
            if l.pass { "pass" } else { "FAIL" },
            l.c_estimate
        );
    }
    println!(
        "\noverall: {}",
        if report.all_pass() { "all checks pass" } else { "VIOLATION FOUND" }
    );
    Ok(())
}
