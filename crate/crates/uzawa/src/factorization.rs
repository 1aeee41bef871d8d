//! Sparse LU factorization with partial pivoting.
//!
//! `lu_factor` computes `P A = L U` with `L` unit lower triangular and `U`
//! upper triangular, both stored as CSR with fill-in retained exactly. The
//! algorithm is left-looking and column-oriented: column k of the factors
//! is obtained by scattering column k of `A` into a dense work vector,
//! eliminating against the previously finished columns in ascending order,
//! then choosing a pivot among the not-yet-pivotal rows. Threshold
//! pivoting interpolates between strict partial pivoting
//! (`pivot_threshold = 1.0`, the default used everywhere in this crate)
//! and sparsity-friendlier choices.
//!
//! Factor once, solve many: the saddle point solvers factor `A` a single
//! time and reuse the factors for every inner solve. Solves are pure
//! functions of the factors, so repeated calls are bitwise identical.

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Result of `P A = L U`.
#[derive(Clone, Debug)]
pub struct LuFactors {
    lower: SparseMatrix,
    upper: SparseMatrix,
    row_permutation: Vec<usize>,
}

const UNPIVOTED: usize = usize::MAX;

/// Relative magnitude below which a best pivot candidate counts as zero.
const SINGULARITY_RELATIVE_TOL: f64 = 1e-13;

/// Factors a square sparse matrix; `pivot_threshold` in (0, 1].
///
/// With threshold t, the pivot for a column is the lowest-index candidate
/// whose magnitude is at least t times the best candidate magnitude; t = 1
/// is strict partial pivoting with deterministic smallest-index
/// tie-breaking. A column whose best candidate falls below
/// `1e-13 * max|A|` aborts with a singularity error naming the column.
pub fn lu_factor(a: &SparseMatrix, pivot_threshold: f64) -> Result<LuFactors> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "lu_factor requires a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if !(pivot_threshold > 0.0 && pivot_threshold <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "pivot_threshold must lie in (0, 1], got {pivot_threshold}"
        )));
    }
    let n = a.nrows();
    let singular_tol = SINGULARITY_RELATIVE_TOL * a.max_abs();

    // Columns of A are rows of A^T.
    let at = a.transpose();

    // perm[k] = original row placed at pivotal position k.
    let mut perm = vec![UNPIVOTED; n];
    // perm_inv[r] = pivotal position of original row r, UNPIVOTED until chosen.
    let mut perm_inv = vec![UNPIVOTED; n];

    // Dense work vector indexed by original row, plus the touched set.
    let mut work = vec![0.0f64; n];
    let mut touched: Vec<usize> = Vec::with_capacity(64);

    // Factor entries in column-major order of discovery. L rows are stored
    // by original index and mapped to pivotal positions at the end; U rows
    // are pivotal positions already.
    let mut l_rows: Vec<usize> = Vec::new();
    let mut l_cols: Vec<usize> = Vec::new();
    let mut l_vals: Vec<f64> = Vec::new();
    let mut u_rows: Vec<usize> = Vec::new();
    let mut u_cols: Vec<usize> = Vec::new();
    let mut u_vals: Vec<f64> = Vec::new();

    // Per finished column: strictly-lower entries (original row, value),
    // reused by later eliminations.
    let mut l_col_rows: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut l_col_vals: Vec<Vec<f64>> = Vec::with_capacity(n);

    for k in 0..n {
        let (a_rows, a_vals) = at.row(k);
        for (&r, &v) in a_rows.iter().zip(a_vals) {
            work[r] = v;
            touched.push(r);
        }

        // Forward-eliminate against finished columns in ascending pivotal
        // order; ascending order is a valid topological order because
        // column j only updates rows pivoted after j.
        for j in 0..k {
            let xj = work[perm[j]];
            if xj == 0.0 {
                continue;
            }
            let rows = &l_col_rows[j];
            let vals = &l_col_vals[j];
            for (&r, &lv) in rows.iter().zip(vals) {
                if work[r] == 0.0 {
                    touched.push(r);
                }
                work[r] -= lv * xj;
            }
        }

        // Pivot among original rows not yet pivotal. `touched` may hold
        // duplicates; scanning it twice is still linear in fill.
        let mut best_mag = 0.0f64;
        for &r in &touched {
            if perm_inv[r] == UNPIVOTED {
                let mag = work[r].abs();
                if mag > best_mag {
                    best_mag = mag;
                }
            }
        }
        if best_mag <= singular_tol {
            for &r in &touched {
                work[r] = 0.0;
            }
            return Err(Error::Singular {
                column: k,
                magnitude: best_mag,
                threshold: singular_tol,
            });
        }
        let accept = pivot_threshold * best_mag;
        let mut pivot_row = UNPIVOTED;
        for &r in &touched {
            if perm_inv[r] == UNPIVOTED && work[r].abs() >= accept && r < pivot_row {
                pivot_row = r;
            }
        }
        let pivot_val = work[pivot_row];
        perm[k] = pivot_row;
        perm_inv[pivot_row] = k;

        // Emit U column k: solved values at pivotal rows j < k, then the
        // pivot. Ascending j keeps each future CSR row sorted.
        for j in 0..k {
            let v = work[perm[j]];
            if v != 0.0 {
                u_rows.push(j);
                u_cols.push(k);
                u_vals.push(v);
            }
        }
        u_rows.push(k);
        u_cols.push(k);
        u_vals.push(pivot_val);

        // Emit L column k, scaled by the pivot, and clear the work vector.
        let mut col_rows = Vec::new();
        let mut col_vals = Vec::new();
        for &r in &touched {
            let v = work[r];
            work[r] = 0.0;
            if v != 0.0 && perm_inv[r] == UNPIVOTED {
                let lv = v / pivot_val;
                col_rows.push(r);
                col_vals.push(lv);
                l_rows.push(r);
                l_cols.push(k);
                l_vals.push(lv);
            }
        }
        touched.clear();
        l_col_rows.push(col_rows);
        l_col_vals.push(col_vals);
    }

    // Map L's original rows to pivotal positions, add the unit diagonal,
    // and assemble both factors as CSR. Inputs are globally column-ordered,
    // so a stable counting scatter by row yields sorted rows directly.
    for r in l_rows.iter_mut() {
        *r = perm_inv[*r];
    }
    for k in 0..n {
        l_rows.push(k);
        l_cols.push(k);
        l_vals.push(1.0);
    }
    let lower = csr_from_column_ordered(n, &l_rows, &l_cols, &l_vals);
    let upper = csr_from_column_ordered(n, &u_rows, &u_cols, &u_vals);

    Ok(LuFactors {
        lower,
        upper,
        row_permutation: perm,
    })
}

/// Assembles CSR from entries whose column indices are globally
/// non-decreasing; the stable scatter preserves that order within rows.
fn csr_from_column_ordered(n: usize, rows: &[usize], cols: &[usize], vals: &[f64]) -> SparseMatrix {
    let mut offsets = vec![0usize; n + 1];
    for &r in rows {
        offsets[r + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut col_indices = vec![0usize; vals.len()];
    let mut values = vec![0.0f64; vals.len()];
    let mut next = offsets.clone();
    for ((&r, &c), &v) in rows.iter().zip(cols).zip(vals) {
        let slot = next[r];
        col_indices[slot] = c;
        values[slot] = v;
        next[r] += 1;
    }
    SparseMatrix::from_csr_parts(n, n, offsets, col_indices, values)
}

impl LuFactors {
    /// Unit lower triangular factor (explicit unit diagonal), CSR.
    pub fn lower(&self) -> &SparseMatrix {
        &self.lower
    }

    /// Upper triangular factor, CSR.
    pub fn upper(&self) -> &SparseMatrix {
        &self.upper
    }

    /// Row permutation: pivotal row i of `P A` is original row
    /// `row_permutation[i]`.
    pub fn row_permutation(&self) -> &[usize] {
        &self.row_permutation
    }

    pub fn dim(&self) -> usize {
        self.row_permutation.len()
    }

    /// Solves `A x = rhs` by forward and backward substitution.
    ///
    /// Pure function of the factors: repeated calls with the same input are
    /// bitwise identical. Panics if `rhs.len()` differs from the dimension.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(
            rhs.len(),
            n,
            "lu solve: rhs length {} does not match dimension {}",
            rhs.len(),
            n
        );
        // L z = P rhs. Row i of L holds columns <= i with the unit
        // diagonal last.
        let mut z = vec![0.0f64; n];
        for i in 0..n {
            let (cols, vals) = self.lower.row(i);
            let mut acc = rhs[self.row_permutation[i]];
            for (&c, &v) in cols.iter().zip(vals) {
                if c < i {
                    acc -= v * z[c];
                }
            }
            z[i] = acc;
        }
        // U x = z. Row i of U holds the diagonal first.
        let mut x = z;
        for i in (0..n).rev() {
            let (cols, vals) = self.upper.row(i);
            let mut acc = x[i];
            let mut diag = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                if c == i {
                    diag = v;
                } else {
                    acc -= v * x[c];
                }
            }
            x[i] = acc / diag;
        }
        x
    }

    /// Solves `A^T x = rhs` using the same factors.
    ///
    /// With `A = P^T L U` this is `U^T L^T P x = rhs`: a forward sweep with
    /// `U^T`, a backward sweep with `L^T`, then the permutation.
    pub fn solve_transpose(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(
            rhs.len(),
            n,
            "lu solve_transpose: rhs length {} does not match dimension {}",
            rhs.len(),
            n
        );
        // U^T z = rhs, column-sweeping U's CSR rows.
        let mut z = rhs.to_vec();
        for i in 0..n {
            let (cols, vals) = self.upper.row(i);
            let mut diag = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                if c == i {
                    diag = v;
                }
            }
            z[i] /= diag;
            let zi = z[i];
            for (&c, &v) in cols.iter().zip(vals) {
                if c > i {
                    z[c] -= v * zi;
                }
            }
        }
        // L^T w = z (unit diagonal), column-sweeping in reverse.
        for i in (0..n).rev() {
            let (cols, vals) = self.lower.row(i);
            let wi = z[i];
            for (&c, &v) in cols.iter().zip(vals) {
                if c < i {
                    z[c] -= v * wi;
                }
            }
        }
        // P x = w.
        let mut x = vec![0.0f64; n];
        for i in 0..n {
            x[self.row_permutation[i]] = z[i];
        }
        x
    }

    /// Frobenius norm of `P A - L U`, relative to `||A||_F` (1 for ||A|| = 0).
    ///
    /// Verification helper used by the test suites.
    pub fn factorization_residual(&self, a: &SparseMatrix) -> f64 {
        let n = self.dim();
        let mut sum = 0.0f64;
        // Row i of LU = sum over L[i, j] * U[j, :]; accumulate densely per
        // row and compare against row perm[i] of A.
        let mut dense = vec![0.0f64; n];
        for i in 0..n {
            let (lc, lv) = self.lower.row(i);
            for (&j, &l) in lc.iter().zip(lv) {
                let (uc, uv) = self.upper.row(j);
                for (&c, &u) in uc.iter().zip(uv) {
                    dense[c] += l * u;
                }
            }
            let (ac, av) = a.row(self.row_permutation[i]);
            for (&c, &v) in ac.iter().zip(av) {
                dense[c] -= v;
            }
            for v in dense.iter_mut() {
                sum += *v * *v;
                *v = 0.0;
            }
        }
        let scale = a.frobenius_norm();
        if scale == 0.0 {
            1.0
        } else {
            sum.sqrt() / scale
        }
    }
}
