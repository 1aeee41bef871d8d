//! Dense verification layer: spectral constants, a direct solve of the
//! full block system, and post-hoc certification of the solver's
//! convergence guarantees on desk-scale instances.
//!
//! Everything here runs on *densified* copies of the system through
//! independent dense linear algebra (eigendecompositions, dense LU), so a
//! run of the sparse iterative path can be checked against arithmetic that
//! shares none of its code. Three guarantees are certified per run:
//!
//! 1. **Coercivity of the reduced operator** ([`verify_lemma1`]): the
//!    reduced matrix `S = B A^-1 B^T + C` satisfies
//!    `(S v, v) >= gamma^-2 beta ||v||^2` with `gamma = ||A|| /
//!    lambda_min(A_s)` and `beta = lambda_min(B A_s^-1 B^T + C)`, where
//!    `A_s` is the symmetric part of `A`.
//! 2. **Strict merit contraction** ([`verify_theorem1`]): each exact
//!    line-search step contracts the merit `Q(y) = 1/2 ||S y - b||^2` by
//!    at least the factor `1 - c0`, `c0 = beta^2 / (gamma^4 ||S||^2)`.
//! 3. **Geometric error decay** ([`verify_theorem2`]): the error proxy
//!    `||B(x_k - x*) - C(y_k - y*)||` equals `||d_k||` and decays at
//!    least like `(1 - c0)^{k/2}`.
//!
//! Sizes are gated by the limits in [`crate::limits`] so the dense work
//! stays desk-scale; [`dense_eligible`] reports whether a system qualifies.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::limits::{dense_entry_limit, eigen_n_limit, schur_m_limit};
use crate::rng::SplitMix64;
use crate::solvers::ConvergenceHistory;
use crate::sparse::{norm2, DenseVector as Dense, SparseMatrix};
use crate::system::SaddleSystem;

/// Relative floor below which a computed `beta` counts as a failure of
/// the stabilizing condition rather than a tiny-but-valid eigenvalue.
const BETA_ZERO_TOL: f64 = 1e-12;

/// Merit values below this floor are considered converged-to-roundoff and
/// excluded from contraction-ratio checks.
pub const Q_FLOOR: f64 = 1e-20;

/// The spectral constants governing the convergence guarantees.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct SpectralBounds {
    /// `lambda_min(A_s)`, smallest eigenvalue of the symmetric part of A.
    pub lambda_m: f64,
    /// `||A||_2`.
    pub norm_a: f64,
    /// `gamma = norm_a / lambda_m` (the tightest admissible value).
    pub gamma: f64,
    /// `beta = lambda_min(B A_s^-1 B^T + C)` (the tightest admissible value).
    pub beta: f64,
    /// `||S||_2` of the reduced matrix `S = B A^-1 B^T + C`.
    pub norm_s: f64,
    /// Contraction constant `c0 = beta^2 / (gamma^4 norm_s^2)`, in (0, 1].
    pub c0: f64,
}

/// Result of the coercivity probe ([`verify_lemma1`]).
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct Lemma1Report {
    pub trials: usize,
    /// Worst observed `(S v, v) / (gamma^-2 beta ||v||^2)`; the bound
    /// requires this to be at least 1.
    pub worst_margin: f64,
    pub pass: bool,
}

/// Result of the inf-sup (full-rank coupling) check ([`verify_lbb`]).
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct LbbReport {
    /// `lambda_min(B A_s^-1 B^T)`, the best constant in the inf-sup bound.
    pub c_estimate: f64,
    pub pass: bool,
}

/// One row of the per-iteration certification table. Columns belonging to
/// checks that were not run are `None`.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct TheoremRow {
    pub k: usize,
    /// Merit contraction `Q(y_{k+1}) / Q(y_k)`; `None` when `Q(y_k)` is
    /// below [`Q_FLOOR`] or on the final row.
    pub q_ratio: Option<f64>,
    /// The guaranteed contraction bound `1 - c0`.
    pub q_bound: f64,
    /// Coercivity along the descent direction: `(S d_k, d_k)`.
    pub lemma1_lhs: Option<f64>,
    /// `gamma^-2 beta ||d_k||^2`.
    pub lemma1_rhs: Option<f64>,
    /// Error proxy `||B(x_k - x*) - C(y_k - y*)||`.
    pub thm2_lhs: Option<f64>,
    /// Geometric envelope `thm2_lhs(0) * (1 - c0)^{k/2}`.
    pub thm2_rhs: Option<f64>,
    /// Relative gap between the error proxy and `||d_k||`.
    pub identity_rel_err: Option<f64>,
}

/// Certification report for one recorded run; serializes to JSON.
#[derive(Clone, Debug, serde::Serialize)]
pub struct TheoremReport {
    pub bounds: SpectralBounds,
    pub rows: Vec<TheoremRow>,
    /// Merit contraction holds at every recorded step.
    pub theorem1_pass: Option<bool>,
    /// Worst `q_ratio - (1 - c0)` (negative when comfortably inside).
    pub theorem1_worst_excess: Option<f64>,
    /// Geometric error envelope holds at every step.
    pub theorem2_pass: Option<bool>,
    /// Worst `thm2_lhs / thm2_rhs` (must stay at or below 1).
    pub theorem2_worst_ratio: Option<f64>,
    /// The error proxy matches `||d_k||` at every step.
    pub identity_pass: Option<bool>,
    pub identity_worst_rel_err: Option<f64>,
    pub lemma1: Option<Lemma1Report>,
    pub lbb: Option<LbbReport>,
}

impl TheoremReport {
    fn empty(bounds: SpectralBounds) -> Self {
        TheoremReport {
            bounds,
            rows: Vec::new(),
            theorem1_pass: None,
            theorem1_worst_excess: None,
            theorem2_pass: None,
            theorem2_worst_ratio: None,
            identity_pass: None,
            identity_worst_rel_err: None,
            lemma1: None,
            lbb: None,
        }
    }

    /// True when every check that was run passed.
    pub fn all_pass(&self) -> bool {
        self.theorem1_pass.unwrap_or(true)
            && self.theorem2_pass.unwrap_or(true)
            && self.identity_pass.unwrap_or(true)
            && self.lemma1.map(|l| l.pass).unwrap_or(true)
            && self.lbb.map(|l| l.pass).unwrap_or(true)
    }

    /// Folds another report over the same run into this one, filling
    /// columns and summary fields this report does not have yet.
    pub fn merge(mut self, other: TheoremReport) -> Self {
        if self.rows.is_empty() {
            self.rows = other.rows;
        } else if !other.rows.is_empty() {
            assert_eq!(
                self.rows.len(),
                other.rows.len(),
                "cannot merge reports over different histories"
            );
            for (row, extra) in self.rows.iter_mut().zip(other.rows) {
                assert_eq!(row.k, extra.k);
                row.q_ratio = row.q_ratio.or(extra.q_ratio);
                row.lemma1_lhs = row.lemma1_lhs.or(extra.lemma1_lhs);
                row.lemma1_rhs = row.lemma1_rhs.or(extra.lemma1_rhs);
                row.thm2_lhs = row.thm2_lhs.or(extra.thm2_lhs);
                row.thm2_rhs = row.thm2_rhs.or(extra.thm2_rhs);
                row.identity_rel_err = row.identity_rel_err.or(extra.identity_rel_err);
            }
        }
        self.theorem1_pass = self.theorem1_pass.or(other.theorem1_pass);
        self.theorem1_worst_excess = self.theorem1_worst_excess.or(other.theorem1_worst_excess);
        self.theorem2_pass = self.theorem2_pass.or(other.theorem2_pass);
        self.theorem2_worst_ratio = self.theorem2_worst_ratio.or(other.theorem2_worst_ratio);
        self.identity_pass = self.identity_pass.or(other.identity_pass);
        self.identity_worst_rel_err =
            self.identity_worst_rel_err.or(other.identity_worst_rel_err);
        self.lemma1 = self.lemma1.or(other.lemma1);
        self.lbb = self.lbb.or(other.lbb);
        self
    }
}

/// Whether the dense verification layer accepts this system's size under
/// the current limits (`n` for eigenwork, `m` for explicit reduction).
pub fn dense_eligible(sys: &SaddleSystem) -> bool {
    let (n, m) = sys.dims();
    n <= eigen_n_limit() && m <= schur_m_limit()
}

fn check_eigen_limit(n: usize) -> Result<()> {
    if n > eigen_n_limit() {
        return Err(Error::AnalysisLimitExceeded {
            what: "matrix dimension for dense eigenwork",
            size: n,
            limit: eigen_n_limit(),
            env_var: "UZAWA_EIGEN_LIMIT",
        });
    }
    Ok(())
}

fn check_schur_limit(m: usize) -> Result<()> {
    if m > schur_m_limit() {
        return Err(Error::AnalysisLimitExceeded {
            what: "reduced dimension m for explicit Schur formation",
            size: m,
            limit: schur_m_limit(),
            env_var: "UZAWA_SCHUR_LIMIT",
        });
    }
    Ok(())
}

fn symmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn min_eigenvalue(sym: DMatrix<f64>) -> f64 {
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn max_eigenvalue(sym: DMatrix<f64>) -> f64 {
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Dense 2-norm via the largest eigenvalue of the (symmetrized) Gram
/// matrix; exact symmetrization guards against roundoff asymmetry.
fn two_norm(m: &DMatrix<f64>) -> f64 {
    let gram = symmetric_part(&(m.transpose() * m));
    max_eigenvalue(gram).max(0.0).sqrt()
}

/// Forms the reduced matrix `S = B A^-1 B^T + C` explicitly by dense
/// solves against the `m` columns of `B^T`. Oracle use only.
pub fn form_dense_schur(sys: &SaddleSystem) -> Result<DMatrix<f64>> {
    let (n, m) = sys.dims();
    check_schur_limit(m)?;
    check_eigen_limit(n)?;
    let a = sys.a().to_dense_with_limit(dense_entry_limit())?;
    let bt = sys.b().transpose().to_dense_with_limit(dense_entry_limit())?;
    let lu = a.lu();
    let a_inv_bt = lu
        .solve(&bt)
        .ok_or_else(|| Error::OracleFailure("A is singular to working precision".into()))?;
    let b = sys.b().to_dense_with_limit(dense_entry_limit())?;
    let c = sys.c().to_dense_with_limit(dense_entry_limit())?;
    Ok(&b * a_inv_bt + c)
}

/// Computes the spectral constants of the convergence theory.
///
/// Fails with [`Error::NotPositiveDefinite`] when `lambda_min(A_s) <= 0`
/// and with [`Error::StabilizingConditionFails`] when
/// `lambda_min(B A_s^-1 B^T + C)` is not strictly positive (rank-deficient
/// `B` uncovered by `C`).
pub fn spectral_bounds(sys: &SaddleSystem) -> Result<SpectralBounds> {
    let (n, m) = sys.dims();
    check_eigen_limit(n)?;
    check_schur_limit(m)?;
    let a = sys.a().to_dense_with_limit(dense_entry_limit())?;
    let a_s = symmetric_part(&a);
    let eig = SymmetricEigen::new(a_s);
    let lambda_m = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if lambda_m <= 0.0 {
        return Err(Error::NotPositiveDefinite { lambda_min: lambda_m });
    }
    let norm_a = two_norm(&a);
    let gamma = norm_a / lambda_m;

    // B A_s^-1 B^T + C through the eigendecomposition of A_s (reuses the
    // factorization that certified definiteness).
    let bt = sys.b().transpose().to_dense_with_limit(dense_entry_limit())?;
    let vt_bt = eig.eigenvectors.transpose() * &bt;
    let mut scaled = vt_bt.clone();
    for (i, mut row) in scaled.row_iter_mut().enumerate() {
        row *= 1.0 / eig.eigenvalues[i];
    }
    let c = sys.c().to_dense_with_limit(dense_entry_limit())?;
    let s_sym = symmetric_part(&(vt_bt.transpose() * scaled + c));
    let s_sym_scale = s_sym.amax().max(1.0);
    let beta = min_eigenvalue(s_sym);
    if beta <= BETA_ZERO_TOL * s_sym_scale {
        return Err(Error::StabilizingConditionFails { beta });
    }

    let s = form_dense_schur(sys)?;
    let norm_s = two_norm(&s);
    let c0 = beta * beta / (gamma.powi(4) * norm_s * norm_s);
    Ok(SpectralBounds {
        lambda_m,
        norm_a,
        gamma,
        beta,
        norm_s,
        c0,
    })
}

/// Probes the coercivity bound `(S v, v) >= gamma^-2 beta ||v||^2` with
/// `trials` seeded random unit vectors against the dense `S`.
pub fn verify_lemma1(
    sys: &SaddleSystem,
    bounds: &SpectralBounds,
    trials: usize,
) -> Result<Lemma1Report> {
    let (_, m) = sys.dims();
    let s = form_dense_schur(sys)?;
    let floor = bounds.beta / (bounds.gamma * bounds.gamma);
    let mut gen = SplitMix64::stream(0xC0E2_51FE, trials as u64);
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let v = DVector::from_vec(gen.unit_vec(m));
        let sv = &s * &v;
        let margin = v.dot(&sv) / floor;
        worst = worst.min(margin);
    }
    Ok(Lemma1Report {
        trials,
        worst_margin: worst,
        pass: worst >= 1.0 - 1e-8,
    })
}

/// Checks the per-step merit contraction `Q(y_{k+1})/Q(y_k) <= 1 - c0`
/// (and that each raw ratio lies in [0, 1]) on a recorded run.
pub fn verify_theorem1(history: &ConvergenceHistory, bounds: &SpectralBounds) -> TheoremReport {
    let q_bound = 1.0 - bounds.c0;
    let mut report = TheoremReport::empty(*bounds);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut pass = true;
    let records = &history.records;
    for (i, rec) in records.iter().enumerate() {
        let q_ratio = records.get(i + 1).and_then(|next| {
            (rec.q_value > Q_FLOOR).then(|| next.q_value / rec.q_value)
        });
        if let Some(ratio) = q_ratio {
            worst_excess = worst_excess.max(ratio - q_bound);
            if ratio > q_bound + 1e-8 || !(0.0..=1.0 + 1e-12).contains(&ratio) {
                pass = false;
            }
        }
        report.rows.push(TheoremRow {
            k: rec.k,
            q_ratio,
            q_bound,
            lemma1_lhs: None,
            lemma1_rhs: None,
            thm2_lhs: None,
            thm2_rhs: None,
            identity_rel_err: None,
        });
    }
    report.theorem1_pass = Some(pass);
    report.theorem1_worst_excess = if worst_excess.is_finite() {
        Some(worst_excess)
    } else {
        None
    };
    report
}

/// Checks the geometric error-decay envelope and the error identity
/// `||B(x_k - x*) - C(y_k - y*)|| = ||d_k||` against a reference solution
/// (normally from [`solve_kkt_dense`]). Needs recorded iterates. Also
/// fills the per-direction coercivity columns `(S d_k, d_k)` versus
/// `gamma^-2 beta ||d_k||^2`.
pub fn verify_theorem2(
    history: &ConvergenceHistory,
    sys: &SaddleSystem,
    reference: (&[f64], &[f64]),
    bounds: &SpectralBounds,
) -> Result<TheoremReport> {
    if history.iterates.len() != history.records.len() {
        return Err(Error::MissingIterates);
    }
    let (x_star, y_star) = reference;
    let s = form_dense_schur(sys)?;
    let coercivity_floor = bounds.beta / (bounds.gamma * bounds.gamma);
    let decay = (1.0 - bounds.c0).max(0.0).sqrt();

    let mut report = TheoremReport::empty(*bounds);
    let mut envelope: f64 = 0.0;
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut worst_identity: f64 = 0.0;
    let mut pass_bound = true;
    let mut pass_identity = true;

    for (i, rec) in history.records.iter().enumerate() {
        let (x, y) = &history.iterates[i];
        let e_x: Vec<f64> = x.iter().zip(x_star).map(|(a, b)| a - b).collect();
        let e_y: Vec<f64> = y.iter().zip(y_star).map(|(a, b)| a - b).collect();
        let mut proxy = sys.b().spmv(&e_x);
        let ce_y = sys.c().spmv(&e_y);
        for (p, c) in proxy.iter_mut().zip(&ce_y) {
            *p -= c;
        }
        let lhs = norm2(&proxy);
        if i == 0 {
            envelope = lhs;
        }
        let rhs = envelope * decay.powi(i as i32);
        // Absolute floor: once the true error reaches roundoff scale the
        // envelope comparison is vacuous.
        if lhs > rhs * (1.0 + 1e-8) + 1e-12 * envelope {
            pass_bound = false;
        }
        if rhs > 0.0 {
            worst_ratio = worst_ratio.max(lhs / rhs);
        }

        // Identity: the error proxy is exactly the reduced residual norm.
        let d_norm = rec.d_norm;
        let scale = lhs.max(d_norm);
        let identity_rel = if scale > 1e-14 * envelope.max(1e-300) {
            let rel = (lhs - d_norm).abs() / scale;
            worst_identity = worst_identity.max(rel);
            if rel > 1e-8 {
                pass_identity = false;
            }
            Some(rel)
        } else {
            None
        };

        // Coercivity along the actual direction d_k (recomputed densely).
        let mut d = sys.b().spmv(x);
        let cy = sys.c().spmv(y);
        for ((di, c), h) in d.iter_mut().zip(&cy).zip(sys.h()) {
            *di -= c + h;
        }
        let dv = DVector::from_vec(d);
        let lemma_lhs = dv.dot(&(&s * &dv));
        let lemma_rhs = coercivity_floor * dv.norm_squared();

        report.rows.push(TheoremRow {
            k: rec.k,
            q_ratio: None,
            q_bound: 1.0 - bounds.c0,
            lemma1_lhs: Some(lemma_lhs),
            lemma1_rhs: Some(lemma_rhs),
            thm2_lhs: Some(lhs),
            thm2_rhs: Some(rhs),
            identity_rel_err: identity_rel,
        });
    }
    report.theorem2_pass = Some(pass_bound);
    report.theorem2_worst_ratio = if worst_ratio.is_finite() {
        Some(worst_ratio)
    } else {
        None
    };
    report.identity_pass = Some(pass_identity);
    report.identity_worst_rel_err = Some(worst_identity);
    Ok(report)
}

/// Estimates the inf-sup constant: the smallest eigenvalue of
/// `B A_s^-1 B^T` (no stabilization term). Positive iff `B` has full row
/// rank; `trials` extra Rayleigh probes guard the eigen computation.
pub fn verify_lbb(sys: &SaddleSystem, trials: usize) -> Result<LbbReport> {
    let (n, m) = sys.dims();
    check_eigen_limit(n)?;
    check_schur_limit(m)?;
    let a_s = symmetric_part(&sys.a().to_dense_with_limit(dense_entry_limit())?);
    let eig = SymmetricEigen::new(a_s);
    let lambda_m = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if lambda_m <= 0.0 {
        return Err(Error::NotPositiveDefinite { lambda_min: lambda_m });
    }
    let bt = sys.b().transpose().to_dense_with_limit(dense_entry_limit())?;
    let vt_bt = eig.eigenvectors.transpose() * &bt;
    let mut scaled = vt_bt.clone();
    for (i, mut row) in scaled.row_iter_mut().enumerate() {
        row *= 1.0 / eig.eigenvalues[i];
    }
    let gram = symmetric_part(&(vt_bt.transpose() * scaled));
    let mut c_estimate = min_eigenvalue(gram.clone());
    let mut gen = SplitMix64::stream(0x1BB_CAFE, trials as u64);
    for _ in 0..trials {
        let v = DVector::from_vec(gen.unit_vec(m));
        c_estimate = c_estimate.min(v.dot(&(&gram * &v)));
    }
    Ok(LbbReport {
        c_estimate,
        pass: c_estimate > 1e-10,
    })
}

/// Directly solves the assembled block system with dense LU plus two
/// rounds of iterative refinement; the reference every run is checked
/// against. Fails on sizes whose dense form exceeds `(2 * eigen limit)^2`
/// entries.
pub fn solve_kkt_dense(sys: &SaddleSystem) -> Result<(Dense, Dense)> {
    let (n, m) = sys.dims();
    let dim = n + m;
    if dim > 2 * eigen_n_limit() {
        return Err(Error::AnalysisLimitExceeded {
            what: "block system dimension for the dense direct solve",
            size: dim,
            limit: 2 * eigen_n_limit(),
            env_var: "UZAWA_EIGEN_LIMIT",
        });
    }
    let kkt = sys.assemble_kkt().to_dense_with_limit(dim * dim)?;
    let mut rhs = DVector::zeros(dim);
    rhs.as_mut_slice()[..n].copy_from_slice(sys.f());
    rhs.as_mut_slice()[n..].copy_from_slice(sys.h());
    let lu = kkt.clone().lu();
    let mut sol = lu
        .solve(&rhs)
        .ok_or_else(|| Error::OracleFailure("block matrix is singular to working precision".into()))?;
    // Iterative refinement tightens the residual toward machine scale so
    // downstream identity checks are not polluted by the oracle itself.
    for _ in 0..2 {
        let residual = &rhs - &kkt * &sol;
        match lu.solve(&residual) {
            Some(correction) => sol += correction,
            None => break,
        }
    }
    let x = sol.as_slice()[..n].to_vec();
    let y = sol.as_slice()[n..].to_vec();
    Ok((x, y))
}

/// Runs every certification on one recorded run and merges the results:
/// spectral constants, coercivity probes, merit contraction, error decay,
/// and the inf-sup check.
pub fn verify_run(
    sys: &SaddleSystem,
    history: &ConvergenceHistory,
    trials: usize,
) -> Result<TheoremReport> {
    let bounds = spectral_bounds(sys)?;
    let (x_star, y_star) = solve_kkt_dense(sys)?;
    let t1 = verify_theorem1(history, &bounds);
    let t2 = verify_theorem2(history, sys, (&x_star, &y_star), &bounds)?;
    let report = t1.merge(t2);
    let lemma1 = verify_lemma1(sys, &bounds, trials)?;
    let lbb = verify_lbb(sys, trials)?;
    Ok(TheoremReport {
        lemma1: Some(lemma1),
        lbb: Some(lbb),
        ..report
    })
}

/// 2-norm condition estimate by power iteration on the Gram matrix and
/// inverse power iteration through a sparse factorization. Reporting
/// accuracy (target ~10%); returns `+inf` for singular input.
pub fn condition_estimate(matrix: &SparseMatrix) -> f64 {
    assert_eq!(
        matrix.nrows(),
        matrix.ncols(),
        "condition estimate requires a square matrix"
    );
    let n = matrix.nrows();
    if n == 0 {
        return 1.0;
    }
    let factors = match crate::factorization::lu_factor(matrix, 1.0) {
        Ok(f) => f,
        Err(_) => return f64::INFINITY,
    };
    let mut gen = SplitMix64::stream(0xC0DE_0017, n as u64);

    // sigma_max^2: power iteration on M^T M.
    let sigma_max_sq = power_iterate(gen.unit_vec(n), |v| {
        matrix.spmv_transpose(&matrix.spmv(v))
    });
    // 1 / sigma_min^2: power iteration on (M^T M)^-1 = M^-1 M^-T.
    let inv_sigma_min_sq = power_iterate(gen.unit_vec(n), |v| {
        factors.solve(&factors.solve_transpose(v))
    });
    if !(sigma_max_sq.is_finite() && inv_sigma_min_sq.is_finite()) {
        return f64::INFINITY;
    }
    (sigma_max_sq * inv_sigma_min_sq).sqrt()
}

/// Power iteration returning the dominant Rayleigh quotient of the (symmetric
/// positive semidefinite) operator `apply`; stops once the quotient settles
/// to 1e-6 relative or after 500 rounds.
fn power_iterate(start: Dense, apply: impl Fn(&Dense) -> Dense) -> f64 {
    let mut v = start;
    let mut previous = 0.0;
    for _ in 0..500 {
        let w = apply(&v);
        let rayleigh: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let norm = norm2(&w);
        if norm == 0.0 {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        if (rayleigh - previous).abs() <= 1e-6 * rayleigh.abs() {
            return rayleigh;
        }
        previous = rayleigh;
    }
    previous
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{uzawa_exact_solve, SolverConfig, TerminationReason};
    use crate::sparse::dot;
    use crate::system::SchurOperator;

    /// A = 2I (n = 2), B = [1 0], C = 0: the hand-solved spectral example
    /// with lambda_m = 2, ||A|| = 2, gamma = 1, S = [1/2], beta = 1/2,
    /// ||S|| = 1/2, c0 = 1.
    fn spectral_hand_system() -> SaddleSystem {
        SaddleSystem::new(
            SparseMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (1, 1, 2.0)]).unwrap(),
            SparseMatrix::from_triplets(1, 2, &[(0, 0, 1.0)]).unwrap(),
            SparseMatrix::zeros(1, 1),
            vec![2.0, 0.0],
            vec![0.0],
        )
        .unwrap()
    }

    fn random_system(seed: u64, n: usize, m: usize, skew: f64) -> SaddleSystem {
        let mut gen = SplitMix64::new(seed);
        let scale = 1.0 / (n as f64).sqrt();
        let mut a_t = Vec::new();
        for r in 0..n {
            a_t.push((r, r, 3.0 + gen.next_f64()));
            for c in (r + 1)..n {
                let sym = 0.3 * gen.next_normal() * scale;
                let anti = skew * gen.next_normal() * scale;
                a_t.push((r, c, sym + anti));
                a_t.push((c, r, sym - anti));
            }
        }
        let mut b_t = Vec::new();
        for r in 0..m {
            for c in 0..n {
                b_t.push((r, c, gen.next_normal()));
            }
        }
        SaddleSystem::new(
            SparseMatrix::from_triplets(n, n, &a_t).unwrap(),
            SparseMatrix::from_triplets(m, n, &b_t).unwrap(),
            SparseMatrix::zeros(m, m),
            gen.normal_vec(n),
            gen.normal_vec(m),
        )
        .unwrap()
    }

    #[test]
    fn dense_schur_matches_hand_value() {
        let sys = spectral_hand_system();
        let s = form_dense_schur(&sys).unwrap();
        assert_eq!(s.nrows(), 1);
        assert!((s[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dense_schur_with_zero_b_is_c() {
        let sys = SaddleSystem::new(
            SparseMatrix::identity(3),
            SparseMatrix::zeros(2, 3),
            SparseMatrix::identity(2),
            vec![0.0; 3],
            vec![0.0; 2],
        )
        .unwrap();
        let s = form_dense_schur(&sys).unwrap();
        assert_eq!(s, DMatrix::identity(2, 2));
    }

    #[test]
    fn dense_schur_matches_implicit_operator() {
        let sys = random_system(5, 24, 11, 0.5);
        let s = form_dense_schur(&sys).unwrap();
        let op = SchurOperator::new(&sys).unwrap();
        let mut gen = SplitMix64::new(77);
        for _ in 0..20 {
            let v = gen.normal_vec(11);
            let dense = &s * DVector::from_column_slice(&v);
            let implicit = op.apply(&v);
            for (d, i) in dense.iter().zip(&implicit) {
                assert!(
                    (d - i).abs() <= 1e-9 * (1.0 + d.abs()),
                    "implicit and dense reduction disagree: {d} vs {i}"
                );
            }
        }
    }

    #[test]
    fn spectral_bounds_match_hand_example() {
        let b = spectral_bounds(&spectral_hand_system()).unwrap();
        assert!((b.lambda_m - 2.0).abs() < 1e-12);
        assert!((b.norm_a - 2.0).abs() < 1e-12);
        assert!((b.gamma - 1.0).abs() < 1e-12);
        assert!((b.beta - 0.5).abs() < 1e-12);
        assert!((b.norm_s - 0.5).abs() < 1e-12);
        assert!((b.c0 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spectral_bounds_invariants_on_random_systems() {
        for seed in [1u64, 2, 3, 4] {
            let sys = random_system(seed, 30, 14, 1.0);
            let b = spectral_bounds(&sys).unwrap();
            assert!(b.lambda_m > 0.0);
            assert!(b.gamma >= 1.0 - 1e-12, "gamma = {}", b.gamma);
            assert!(b.beta > 0.0);
            assert!(
                b.c0 > 0.0 && b.c0 <= 1.0 + 1e-10,
                "c0 = {} out of range",
                b.c0
            );
        }
    }

    #[test]
    fn beta_matches_direct_computation_for_symmetric_a() {
        // For symmetric A, beta = lambda_min(B A^-1 B^T) exactly.
        let sys = random_system(9, 20, 8, 0.0);
        let b = spectral_bounds(&sys).unwrap();
        let s = form_dense_schur(&sys).unwrap();
        let direct = min_eigenvalue(symmetric_part(&s));
        assert!(
            (b.beta - direct).abs() <= 1e-8 * direct.abs(),
            "beta {} vs direct {direct}",
            b.beta
        );
    }

    #[test]
    fn not_positive_definite_is_reported() {
        let sys = SaddleSystem::new(
            SparseMatrix::from_triplets(2, 2, &[(0, 0, -1.0), (1, 1, 1.0)]).unwrap(),
            SparseMatrix::from_triplets(1, 2, &[(0, 0, 1.0)]).unwrap(),
            SparseMatrix::zeros(1, 1),
            vec![0.0; 2],
            vec![0.0],
        )
        .unwrap();
        match spectral_bounds(&sys) {
            Err(Error::NotPositiveDefinite { lambda_min }) => assert!(lambda_min <= 0.0),
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn rank_deficient_b_fails_stabilizing_condition() {
        // Zero row in B with C = 0: the reduced operator is singular.
        let sys = SaddleSystem::new(
            SparseMatrix::identity(3),
            SparseMatrix::from_triplets(2, 3, &[(0, 0, 1.0)]).unwrap(),
            SparseMatrix::zeros(2, 2),
            vec![0.0; 3],
            vec![0.0; 2],
        )
        .unwrap();
        match spectral_bounds(&sys) {
            Err(Error::StabilizingConditionFails { .. }) => {}
            other => panic!("expected StabilizingConditionFails, got {other:?}"),
        }
    }

    #[test]
    fn lemma1_margin_is_exactly_one_on_hand_example() {
        let sys = spectral_hand_system();
        let bounds = spectral_bounds(&sys).unwrap();
        let report = verify_lemma1(&sys, &bounds, 50).unwrap();
        assert!(report.pass);
        assert!(
            (report.worst_margin - 1.0).abs() < 1e-12,
            "scalar reduction gives equality, got {}",
            report.worst_margin
        );
    }

    #[test]
    fn lemma1_holds_on_random_nonsymmetric_systems() {
        for seed in [11u64, 12, 13] {
            let sys = random_system(seed, 26, 12, 1.5);
            let bounds = spectral_bounds(&sys).unwrap();
            let report = verify_lemma1(&sys, &bounds, 500).unwrap();
            assert!(report.pass, "seed {seed}: margin {}", report.worst_margin);
        }
    }

    #[test]
    fn theorem1_certifies_a_recorded_run() {
        let sys = random_system(21, 30, 14, 1.0);
        let bounds = spectral_bounds(&sys).unwrap();
        let out = uzawa_exact_solve(&sys, vec![0.0; 14], &SolverConfig::default()).unwrap();
        let report = verify_theorem1(&out.history, &bounds);
        assert_eq!(report.theorem1_pass, Some(true));
        assert!(report.theorem1_worst_excess.unwrap() <= 1e-8);
        // Every evaluated ratio must sit inside [0, 1].
        for row in &report.rows {
            if let Some(r) = row.q_ratio {
                assert!((0.0..=1.0 + 1e-12).contains(&r), "ratio {r} at k {}", row.k);
            }
        }
    }

    #[test]
    fn theorem1_flags_a_tampered_history() {
        let sys = random_system(22, 20, 9, 1.0);
        let bounds = spectral_bounds(&sys).unwrap();
        let mut out = uzawa_exact_solve(&sys, vec![0.0; 9], &SolverConfig::default()).unwrap();
        assert!(out.history.records.len() > 2);
        // Inflate one interior merit value so its predecessor's ratio > 1.
        out.history.records[1].q_value = out.history.records[0].q_value * 10.0;
        let report = verify_theorem1(&out.history, &bounds);
        assert_eq!(report.theorem1_pass, Some(false));
    }

    #[test]
    fn theorem2_certifies_against_dense_reference() {
        let sys = random_system(31, 28, 13, 1.0);
        let bounds = spectral_bounds(&sys).unwrap();
        let cfg = SolverConfig {
            record_history: true,
            ..SolverConfig::default()
        };
        let out = uzawa_exact_solve(&sys, vec![0.0; 13], &cfg).unwrap();
        assert_eq!(out.history.termination, TerminationReason::Converged);
        let (x_star, y_star) = solve_kkt_dense(&sys).unwrap();
        let report =
            verify_theorem2(&out.history, &sys, (&x_star, &y_star), &bounds).unwrap();
        assert_eq!(report.theorem2_pass, Some(true));
        assert_eq!(report.identity_pass, Some(true));
        assert!(report.identity_worst_rel_err.unwrap() <= 1e-8);
        // Direction coercivity columns populated and consistent.
        for row in &report.rows {
            let (lhs, rhs) = (row.lemma1_lhs.unwrap(), row.lemma1_rhs.unwrap());
            assert!(lhs >= rhs * (1.0 - 1e-8), "coercivity at k {}", row.k);
        }
    }

    #[test]
    fn theorem2_requires_iterates() {
        let sys = random_system(32, 16, 7, 1.0);
        let bounds = spectral_bounds(&sys).unwrap();
        let out = uzawa_exact_solve(&sys, vec![0.0; 7], &SolverConfig::default()).unwrap();
        let (x_star, y_star) = solve_kkt_dense(&sys).unwrap();
        match verify_theorem2(&out.history, &sys, (&x_star, &y_star), &bounds) {
            Err(Error::MissingIterates) => {}
            other => panic!("expected MissingIterates, got {other:?}"),
        }
    }

    #[test]
    fn dense_solve_satisfies_both_blocks() {
        let sys = random_system(41, 30, 12, 1.0);
        let (x, y) = solve_kkt_dense(&sys).unwrap();
        let (two, _) = sys.residual_norms(&x, &y);
        let scale = norm2(sys.f()) + norm2(sys.h());
        assert!(two <= 1e-10 * scale.max(1.0), "oracle residual {two}");
    }

    #[test]
    fn lbb_constant_positive_for_full_rank_and_zero_for_deficient() {
        // Full rank with A = I: c = lambda_min(B B^T) > 0.
        let sys = random_system(51, 18, 6, 0.0);
        let report = verify_lbb(&sys, 50).unwrap();
        assert!(report.pass);
        assert!(report.c_estimate > 0.0);

        let deficient = SaddleSystem::new(
            SparseMatrix::identity(3),
            SparseMatrix::from_triplets(2, 3, &[(0, 0, 1.0)]).unwrap(),
            SparseMatrix::zeros(2, 2),
            vec![0.0; 3],
            vec![0.0; 2],
        )
        .unwrap();
        let report = verify_lbb(&deficient, 50).unwrap();
        assert!(!report.pass);
        assert!(report.c_estimate.abs() <= 1e-10);
    }

    #[test]
    fn lbb_matches_bbt_for_identity_a() {
        let sys = SaddleSystem::new(
            SparseMatrix::identity(4),
            SparseMatrix::from_triplets(2, 4, &[(0, 0, 2.0), (1, 1, 3.0)]).unwrap(),
            SparseMatrix::zeros(2, 2),
            vec![0.0; 4],
            vec![0.0; 2],
        )
        .unwrap();
        let report = verify_lbb(&sys, 10).unwrap();
        // B B^T = diag(4, 9); minimum eigenvalue 4.
        assert!((report.c_estimate - 4.0).abs() < 1e-10);
    }

    #[test]
    fn condition_estimate_identity_and_diagonal() {
        assert!((condition_estimate(&SparseMatrix::identity(5)) - 1.0).abs() < 1e-6);
        let d = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 1e-6)]).unwrap();
        let cond = condition_estimate(&d);
        assert!(
            (cond - 1e6).abs() <= 0.1 * 1e6,
            "diagonal condition estimate {cond}"
        );
    }

    #[test]
    fn condition_estimate_matches_svd_oracle() {
        let sys = random_system(61, 40, 20, 1.0);
        let kkt = sys.assemble_kkt();
        let estimate = condition_estimate(&kkt);
        let svd = kkt.to_dense().unwrap().svd(false, false);
        let vals = svd.singular_values;
        let truth = vals.max() / vals.min();
        assert!(
            (estimate - truth).abs() <= 0.1 * truth,
            "estimate {estimate} vs SVD {truth}"
        );
    }

    #[test]
    fn condition_estimate_reports_infinity_for_singular() {
        let singular =
            SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        assert!(condition_estimate(&singular).is_infinite());
    }

    #[test]
    fn verify_run_merges_all_sections() {
        let sys = random_system(71, 24, 10, 1.0);
        let cfg = SolverConfig {
            record_history: true,
            ..SolverConfig::default()
        };
        let out = uzawa_exact_solve(&sys, vec![0.0; 10], &cfg).unwrap();
        let report = verify_run(&sys, &out.history, 100).unwrap();
        assert!(report.all_pass(), "full verification failed");
        assert!(report.theorem1_pass.is_some());
        assert!(report.theorem2_pass.is_some());
        assert!(report.lemma1.is_some());
        assert!(report.lbb.is_some());
        assert_eq!(report.rows.len(), out.history.records.len());
        // Merged rows carry both the merit and the error columns.
        let interior = &report.rows[0];
        assert!(interior.q_ratio.is_some());
        assert!(interior.thm2_lhs.is_some());
        // JSON serialization round-trips structurally.
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"bounds\""));
        assert!(json.contains("\"lemma1\""));
    }

    #[test]
    fn limits_are_enforced() {
        // m > schur limit is rejected by the dense layer. Use a fake tiny
        // system only if the default limit is in force; otherwise skip.
        if schur_m_limit() != 500 {
            return;
        }
        let n = 501;
        let tri: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        let sys = SaddleSystem::new(
            SparseMatrix::identity(n),
            SparseMatrix::from_triplets(n, n, &tri).unwrap(),
            SparseMatrix::zeros(n, n),
            vec![0.0; n],
            vec![0.0; n],
        )
        .unwrap();
        match form_dense_schur(&sys) {
            Err(Error::AnalysisLimitExceeded { env_var, .. }) => {
                assert_eq!(env_var, "UZAWA_SCHUR_LIMIT");
            }
            other => panic!("expected AnalysisLimitExceeded, got {other:?}"),
        }
        assert!(!dense_eligible(&sys));
    }

    #[test]
    fn schur_positive_definiteness_probe_via_dense_matrix() {
        let sys = random_system(81, 22, 9, 1.2);
        let s = form_dense_schur(&sys).unwrap();
        let mut gen = SplitMix64::new(4);
        for _ in 0..200 {
            let v = gen.unit_vec(9);
            let sv = &s * DVector::from_column_slice(&v);
            assert!(dot(&v, sv.as_slice()) > 0.0);
        }
    }
}
