//! Generate a random coupled system and solve it with the exact line
//! search. The generator draws a nonsymmetric positive definite `A`
//! (symmetric base plus a scaled antisymmetric part), a full-row-rank
//! coupling `B`, and seeded right-hand sides, so every run of this
//! example reproduces the same numbers.
//!
//!     cargo run --example solve_linear_vi

use uzawa::problem_gen::{gen_linear_vi, VIGenConfig};
use uzawa::rng::SplitMix64;
use uzawa::solvers::{uzawa_exact_solve, SolverConfig};
use uzawa::Result;

fn main() -> Result<()> {
    let mut gen_cfg = VIGenConfig::new(400);
    gen_cfg.seed = 7;
    let system = gen_linear_vi(&gen_cfg)?;
    let (n, m) = system.dims();
    println!("generated system: n = {n}, m = {m}, seed = {}", gen_cfg.seed);

    let y0 = SplitMix64::stream(0, 1).uniform_vec(m);
    let outcome = uzawa_exact_solve(&system, y0, &SolverConfig::default())?;

    let history = &outcome.history;
    println!(
        "{:?} after {} iterations ({:.3} ms)",
        history.termination,
        history.iterations(),
        history.wall_seconds * 1e3
    );

    println!("\n  k   residual ratio      step length");
    let rows = &history.records;
    for record in rows.iter().take(5) {
        println!(
            "{:>3}   {:<17.10e}   {:.10e}",
            record.k, record.residual_ratio, record.alpha
        );
    }
    if rows.len() > 6 {
        println!("  ...");
    }
    if let Some(last) = rows.last() {
        println!("{:>3}   {:<17.10e}", last.k, last.residual_ratio);
    }

    let (r_top, r_bottom) = system.residual(&outcome.x, &outcome.y);
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
    println!(
        "\nfinal block residuals: ||top||_inf = {:.3e}, ||bottom||_inf = {:.3e}",
        sup(&r_top),
        sup(&r_bottom)
    );
    Ok(())
}
