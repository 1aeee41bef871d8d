//! Compare the exact line search against the classical fixed-step
//! iteration on the same system.
//!
//! The fixed-step method needs a step length inside `(0, 2/lambda_max(S))`
//! to converge and slows down near both ends of that window; the exact
//! search computes the optimal step each iteration and needs no tuning.
//!
//!     cargo run --example classical_vs_exact

use uzawa::analysis::spectral_bounds;
use uzawa::problem_gen::{gen_linear_vi, VIGenConfig};
use uzawa::rng::SplitMix64;
use uzawa::solvers::{
    uzawa_classical_solve, uzawa_exact_solve, SolverConfig, TerminationReason,
};
use uzawa::Result;

fn main() -> Result<()> {
    let mut gen_cfg = VIGenConfig::new(200);
    gen_cfg.seed = 3;
    let system = gen_linear_vi(&gen_cfg)?;
    let (n, m) = system.dims();

    // lambda_max(S) <= ||S||_2 gives the stability window for the fixed step.
    let bounds = spectral_bounds(&system)?;
    let alpha_limit = 2.0 / bounds.norm_s;
    println!("system: n = {n}, m = {m}, fixed-step stability window (0, {alpha_limit:.4e})");

    let cfg = SolverConfig::default();
    let y0 = || SplitMix64::stream(0, 1).uniform_vec(m);

    let exact = uzawa_exact_solve(&system, y0(), &cfg)?;
    println!(
        "\nexact line search:     {:?} in {} iterations",
        exact.history.termination,
        exact.history.iterations()
    );

    for factor in [0.5, 0.9, 1.1] {
        let alpha = factor * alpha_limit;
        let classical = uzawa_classical_solve(&system, y0(), alpha, &cfg)?;
        let last = classical.history.final_record();
        let note = match classical.history.termination {
            TerminationReason::Converged => "".to_string(),
            _ => format!(" (residual ratio {:.3e})", last.residual_ratio),
        };
        println!(
            "fixed step {:.4e}: {:?} in {} iterations{note}",
            alpha,
            classical.history.termination,
            classical.history.iterations()
        );
    }
    println!("\nthe step past the window diverges; the exact search cannot.");
    Ok(())
}
