//! Uzawa-type iterations on the reduced equation `S y = b`.
//!
//! Both solvers iterate on the dual variable `y` while keeping the primal
//! `x` consistent with the top block, driving the reduced residual
//! `d = B x - C y - h = -(S y - b)` to zero:
//!
//! * [`uzawa_exact_solve`] picks each step length by exact line search on
//!   the least-squares merit `Q(y) = 1/2 ||S y - b||^2`; it converges for
//!   any positive definite (not necessarily symmetric) `A` without tuning.
//! * [`uzawa_classical_solve`] takes a fixed user-supplied step `alpha`;
//!   it is the textbook gradient-type iteration and diverges when `alpha`
//!   is too large. Included as the baseline.
//!
//! The per-step update is exposed as [`step_exact`] on [`IterationState`]
//! values so callers can interleave their own checks between iterations;
//! [`solve_with_config`] is the driver loop. Every iteration appends an
//! [`IterationRecord`] (residual norms, step length, merit value) so a
//! run's convergence behaviour can be audited after the fact.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::sparse::{axpy_in_place, dot, norm2, norm_inf, DenseVector};
use crate::system::{SaddleSystem, SchurOperator};

/// Smallest admissible curvature `p . p` in the exact line search; below
/// this with a nonzero direction the iteration reports breakdown.
pub const BREAKDOWN_TOL: f64 = 1e-300;

/// Number of consecutive near-flat residual ratios that counts as a stall.
pub const STALL_WINDOW: usize = 10;

/// Stopping rules and solver options.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Converged when `||r_k|| / ||r_0|| < rel_residual_tol` (2-norm of the
    /// stacked block residual).
    pub rel_residual_tol: f64,
    /// Convergence also requires the ratio to have settled:
    /// `|ratio_k - ratio_{k-1}| < ratio_stall_tol`.
    pub ratio_stall_tol: f64,
    /// Hard iteration cap.
    pub max_iterations: usize,
    /// `Some(alpha)` selects the fixed-step classical iteration inside
    /// [`solve_with_config`]; `None` selects the exact line search.
    pub fixed_alpha: Option<f64>,
    /// Keep every iterate `(x_k, y_k)` in the history. Needed by the
    /// error-decay checks in [`crate::analysis`]; costs O(k (n + m)) memory.
    pub record_history: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rel_residual_tol: 1e-6,
            ratio_stall_tol: 1e-7,
            max_iterations: 2000,
            fixed_alpha: None,
            record_history: false,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !(self.rel_residual_tol > 0.0 && self.ratio_stall_tol > 0.0) {
            return Err(Error::InvalidConfig(
                "tolerances must be positive".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if let Some(alpha) = self.fixed_alpha {
            if !(alpha.is_finite() && alpha > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "fixed step length must be positive and finite, got {alpha}"
                )));
            }
        }
        Ok(())
    }
}

/// Why the iteration stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    /// Residual ratio below tolerance and settled.
    Converged,
    /// Residual ratio flat for [`STALL_WINDOW`] consecutive iterations while
    /// still two orders of magnitude above the tolerance.
    Stalled,
    /// Iteration cap reached first.
    MaxIterations,
    /// Exact line search met zero curvature with a nonzero direction.
    Breakdown,
}

/// Per-iteration measurements. Row `k` describes the state *after* `k`
/// updates; row 0 is the initial guess.
#[derive(Clone, Debug, serde::Serialize)]
pub struct IterationRecord {
    /// Iteration index.
    pub k: usize,
    /// 2-norm of the stacked block residual.
    pub residual_norm: f64,
    /// `residual_norm / residual_norm at k = 0`.
    pub residual_ratio: f64,
    /// Max-norm of the stacked block residual.
    pub residual_inf: f64,
    /// `||A x_k + B^T y_k - f||`, recomputed from scratch.
    pub top_norm: f64,
    /// `||B x_k - C y_k - h||`, recomputed from scratch.
    pub bottom_norm: f64,
    /// Step length used to *produce* the next iterate (0 on the final row).
    pub alpha: f64,
    /// `||d_k||` as the iteration carries it.
    pub d_norm: f64,
    /// Least-squares merit `Q(y_k) = 1/2 ||S y_k - b||^2 = 1/2 ||d_k||^2`.
    pub q_value: f64,
}

/// Full convergence record of one solver run.
#[derive(Clone, Debug)]
pub struct ConvergenceHistory {
    /// One record per iterate, index 0 = initial guess.
    pub records: Vec<IterationRecord>,
    /// Iterates `(x_k, y_k)`, only when `record_history` was set.
    pub iterates: Vec<(DenseVector, DenseVector)>,
    pub termination: TerminationReason,
    /// Wall-clock time of the iteration loop (excludes factoring `A`).
    pub wall_seconds: f64,
}

impl ConvergenceHistory {
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn final_record(&self) -> &IterationRecord {
        self.records.last().expect("history has at least row 0")
    }
}

/// Solution and its convergence record.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub x: DenseVector,
    pub y: DenseVector,
    pub history: ConvergenceHistory,
}

/// One iterate with everything the update and the records need.
///
/// `q`, `p`, and `alpha` belong to the step that *produced* this state
/// (empty/zero at `k = 0`); the hand-worked scalar example reaches state
/// `k = 1` carrying `y = 2, x = 0, alpha = 2`.
#[derive(Clone, Debug)]
pub struct IterationState {
    /// Iteration index (0 = initial guess).
    pub k: usize,
    pub x: DenseVector,
    pub y: DenseVector,
    /// Reduced residual `d_k = B x_k - C y_k - h = -(S y_k - b)`, carried
    /// by the recurrence `d_{k+1} = d_k - alpha_k p_k` in the exact method.
    pub d: DenseVector,
    /// Solution of `A q = B^T d` in the producing step.
    pub q: DenseVector,
    /// `p = B q + C d = S d` in the producing step.
    pub p: DenseVector,
    /// Step length of the producing step.
    pub alpha: f64,
    /// 2-norm of the stacked block residual at this iterate.
    pub residual_norm: f64,
    /// `residual_norm / r0`.
    pub residual_ratio: f64,
    /// Max-norm of the stacked block residual.
    pub residual_inf: f64,
    /// `||A x + B^T y - f||`, recomputed.
    pub top_norm: f64,
    /// `||B x - C y - h||`, recomputed.
    pub bottom_norm: f64,
    /// Residual norm of the initial iterate, carried for the ratio.
    r0: f64,
}

impl IterationState {
    /// Initial iterate: `x_0 = A^-1 (f - B^T y_0)` so the top block is
    /// consistent, then `d_0 = B x_0 - C y_0 - h`.
    pub fn initial(op: &SchurOperator, y0: DenseVector) -> Result<Self> {
        let sys = op.system();
        let (_, m) = sys.dims();
        if y0.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "initial guess has length {} but m = {m}",
                y0.len()
            )));
        }
        let mut rhs = sys.f().to_vec();
        axpy_in_place(-1.0, &sys.b().spmv_transpose(&y0), &mut rhs);
        let x = op.factors().solve(&rhs);
        let d = reduced_residual(sys, &x, &y0);
        Ok(Self::measured(
            sys,
            0,
            x,
            y0,
            d,
            Vec::new(),
            Vec::new(),
            0.0,
            None,
        ))
    }

    /// Builds a state and fills in its residual measurements; `r0 = None`
    /// marks this state as the reference iterate for the ratio.
    #[allow(clippy::too_many_arguments)]
    fn measured(
        sys: &SaddleSystem,
        k: usize,
        x: DenseVector,
        y: DenseVector,
        d: DenseVector,
        q: DenseVector,
        p: DenseVector,
        alpha: f64,
        r0: Option<f64>,
    ) -> Self {
        let (top, bottom) = sys.residual(&x, &y);
        let top_norm = norm2(&top);
        let bottom_norm = norm2(&bottom);
        let residual_norm = top_norm.hypot(bottom_norm);
        let residual_inf = norm_inf(&top).max(norm_inf(&bottom));
        let r0 = r0.unwrap_or(residual_norm);
        IterationState {
            k,
            x,
            y,
            d,
            q,
            p,
            alpha,
            residual_norm,
            residual_ratio: if r0 > 0.0 { residual_norm / r0 } else { 0.0 },
            residual_inf,
            top_norm,
            bottom_norm,
            r0,
        }
    }

    /// True when the carried direction is exactly zero, i.e. the iterate
    /// solves the reduced equation exactly.
    pub fn at_solution(&self) -> bool {
        self.d.iter().all(|&v| v == 0.0)
    }

    fn record(&self) -> IterationRecord {
        let d_norm = norm2(&self.d);
        IterationRecord {
            k: self.k,
            residual_norm: self.residual_norm,
            residual_ratio: self.residual_ratio,
            residual_inf: self.residual_inf,
            top_norm: self.top_norm,
            bottom_norm: self.bottom_norm,
            alpha: 0.0,
            d_norm,
            q_value: 0.5 * d_norm * d_norm,
        }
    }
}

fn reduced_residual(sys: &SaddleSystem, x: &[f64], y: &[f64]) -> DenseVector {
    let mut d = sys.b().spmv(x);
    axpy_in_place(-1.0, &sys.c().spmv(y), &mut d);
    axpy_in_place(-1.0, sys.h(), &mut d);
    d
}

/// What one update step did.
#[derive(Debug)]
pub enum StepOutcome {
    /// The next iterate.
    Advanced(IterationState),
    /// The input direction was exactly zero: the state already solves the
    /// system and no further iterate exists.
    AtSolution,
}

/// One exact-line-search update from `state`:
/// solve `A q = B^T d`, form `p = B q + C d`, step
/// `alpha = (d . p) / (p . p)`, then `y += alpha d`, `x -= alpha q`,
/// `d -= alpha p`.
pub fn step_exact(op: &SchurOperator, state: &IterationState) -> Result<StepOutcome> {
    let sys = op.system();
    let q = op.half_apply(&state.d);
    let mut p = sys.b().spmv(&q);
    axpy_in_place(1.0, &sys.c().spmv(&state.d), &mut p);
    let pp = dot(&p, &p);
    if pp < BREAKDOWN_TOL {
        // A definite reduced operator maps nonzero d to nonzero p = S d,
        // so an exactly zero direction means we are at the solution.
        if state.at_solution() {
            return Ok(StepOutcome::AtSolution);
        }
        return Err(Error::Breakdown {
            iteration: state.k,
            curvature: pp,
            direction_norm: norm2(&state.d),
        });
    }
    let alpha = dot(&state.d, &p) / pp;
    let mut y = state.y.clone();
    axpy_in_place(alpha, &state.d, &mut y);
    let mut x = state.x.clone();
    axpy_in_place(-alpha, &q, &mut x);
    let mut d = state.d.clone();
    axpy_in_place(-alpha, &p, &mut d);
    Ok(StepOutcome::Advanced(IterationState::measured(
        sys,
        state.k + 1,
        x,
        y,
        d,
        q,
        p,
        alpha,
        Some(state.r0),
    )))
}

/// One fixed-step update: `y += alpha d`, re-solve `x = A^-1 (f - B^T y)`,
/// recompute `d` from scratch.
pub fn step_classical(op: &SchurOperator, state: &IterationState, alpha: f64) -> StepOutcome {
    if state.at_solution() {
        return StepOutcome::AtSolution;
    }
    let sys = op.system();
    let mut y = state.y.clone();
    axpy_in_place(alpha, &state.d, &mut y);
    let mut rhs = sys.f().to_vec();
    axpy_in_place(-1.0, &sys.b().spmv_transpose(&y), &mut rhs);
    let x = op.factors().solve(&rhs);
    let d = reduced_residual(sys, &x, &y);
    StepOutcome::Advanced(IterationState::measured(
        sys,
        state.k + 1,
        x,
        y,
        d,
        Vec::new(),
        Vec::new(),
        alpha,
        Some(state.r0),
    ))
}

/// Stopping decision from the recorded ratios; `None` means keep iterating.
pub fn check_stop(records: &[IterationRecord], cfg: &SolverConfig) -> Option<TerminationReason> {
    let last = records.last().expect("at least one record");
    // Converged: ratio below tolerance AND settled against the previous
    // ratio. With a single record the settled test is vacuous (an initial
    // guess can only satisfy the ratio test when r0 = 0).
    let settled = records
        .len()
        .checked_sub(2)
        .map(|i| (last.residual_ratio - records[i].residual_ratio).abs() < cfg.ratio_stall_tol);
    if last.residual_ratio < cfg.rel_residual_tol && settled.unwrap_or(true) {
        return Some(TerminationReason::Converged);
    }
    // Stalled: the ratio has been flat for STALL_WINDOW consecutive steps
    // while still well above the target. The two-orders-of-magnitude guard
    // keeps a healthy run that is crossing the tolerance band slowly from
    // being declared dead.
    if records.len() > STALL_WINDOW && last.residual_ratio > 100.0 * cfg.rel_residual_tol {
        let tail = &records[records.len() - (STALL_WINDOW + 1)..];
        let flat = tail
            .windows(2)
            .all(|w| (w[1].residual_ratio - w[0].residual_ratio).abs() < cfg.ratio_stall_tol);
        if flat {
            return Some(TerminationReason::Stalled);
        }
    }
    if last.k >= cfg.max_iterations {
        return Some(TerminationReason::MaxIterations);
    }
    None
}

/// Runs the iteration selected by `cfg.fixed_alpha` on a prepared operator.
pub fn solve_with_config(
    op: &SchurOperator,
    y0: DenseVector,
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    let start = Instant::now();
    let mut state = IterationState::initial(op, y0)?;
    let mut records = vec![state.record()];
    let mut iterates = Vec::new();
    if cfg.record_history {
        iterates.push((state.x.clone(), state.y.clone()));
    }

    let termination = loop {
        if let Some(reason) = check_stop(&records, cfg) {
            break reason;
        }
        let outcome = match cfg.fixed_alpha {
            None => step_exact(op, &state)?,
            Some(alpha) => step_classical(op, &state, alpha),
        };
        match outcome {
            StepOutcome::AtSolution => break TerminationReason::Converged,
            StepOutcome::Advanced(next) => {
                records.last_mut().expect("nonempty").alpha = next.alpha;
                records.push(next.record());
                if cfg.record_history {
                    iterates.push((next.x.clone(), next.y.clone()));
                }
                state = next;
            }
        }
    };
    let wall_seconds = start.elapsed().as_secs_f64();
    Ok(SolveOutcome {
        x: state.x,
        y: state.y,
        history: ConvergenceHistory {
            records,
            iterates,
            termination,
            wall_seconds,
        },
    })
}

/// Solves with exact line search from the given initial dual guess.
///
/// Factors `A` once, keeps `x` consistent with the top block throughout,
/// and needs no step-size parameter. Converges whenever `A` is positive
/// definite (symmetric or not), `C` is symmetric positive semidefinite,
/// and `B A^-1 B^T + C` is nonsingular.
pub fn uzawa_exact_solve(
    system: &SaddleSystem,
    y0: DenseVector,
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    let op = SchurOperator::new(system)?;
    let cfg = SolverConfig {
        fixed_alpha: None,
        ..cfg.clone()
    };
    solve_with_config(&op, y0, &cfg)
}

/// Solves with the classical fixed-step iteration `y_{k+1} = y_k + alpha d_k`.
///
/// Convergence depends on `alpha`: for symmetric positive definite `S` the
/// iteration converges iff `alpha` is in `(0, 2 / lambda_max(S))`. Offered
/// as the baseline the exact line search is measured against.
pub fn uzawa_classical_solve(
    system: &SaddleSystem,
    y0: DenseVector,
    alpha: f64,
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    let op = SchurOperator::new(system)?;
    let cfg = SolverConfig {
        fixed_alpha: Some(alpha),
        ..cfg.clone()
    };
    solve_with_config(&op, y0, &cfg)
}
