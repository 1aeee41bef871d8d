//! Saddle point systems and the implicit Schur operator.
//!
//! A [`SaddleSystem`] is the block system
//!
//! ```text
//! [ A  B^T ] [x]   [f]
//! [ B  -C  ] [y] = [h]
//! ```
//!
//! with `A` n x n, `B` m x n (m <= n), `C` m x m symmetric positive
//! semidefinite. Eliminating `x = A^-1 (f - B^T y)` leaves the reduced
//! equation `S y = b` with `S = B A^-1 B^T + C` and `b = B A^-1 f - h`.
//! [`SchurOperator`] applies `S` implicitly: `A` is factored once at
//! construction and every application costs two sparse triangular solves
//! plus three products. `S` itself is never formed here; the dense
//! verification route lives in [`crate::analysis`].

use crate::error::{Error, Result};
use crate::factorization::{lu_factor, LuFactors};
use crate::sparse::{axpy_in_place, norm2, norm_inf, DenseVector, SparseMatrix};

/// Validated saddle point system.
#[derive(Clone, Debug)]
pub struct SaddleSystem {
    a: SparseMatrix,
    b: SparseMatrix,
    c: SparseMatrix,
    f: DenseVector,
    h: DenseVector,
}

impl SaddleSystem {
    /// Validates shapes, `n >= m`, and exact symmetry of `C`.
    ///
    /// `C` must equal its transpose structurally and numerically; systems
    /// with two different off-diagonal blocks (B1 != B2) are not supported.
    pub fn new(
        a: SparseMatrix,
        b: SparseMatrix,
        c: SparseMatrix,
        f: DenseVector,
        h: DenseVector,
    ) -> Result<Self> {
        let n = a.nrows();
        let m = b.nrows();
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "B is {}x{} but A is {n}x{n}",
                b.nrows(),
                b.ncols()
            )));
        }
        if c.nrows() != m || c.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "C is {}x{} but B has {m} rows",
                c.nrows(),
                c.ncols()
            )));
        }
        if m > n {
            return Err(Error::DimensionMismatch(format!(
                "B must have at most as many rows as columns, got m = {m} > n = {n}"
            )));
        }
        if f.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "f has length {} but n = {n}",
                f.len()
            )));
        }
        if h.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "h has length {} but m = {m}",
                h.len()
            )));
        }
        if c != c.transpose() {
            return Err(Error::DimensionMismatch(
                "C must be exactly symmetric (systems with B1 != B2 are not supported)".into(),
            ));
        }
        Ok(SaddleSystem { a, b, c, f, h })
    }

    pub fn a(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn b(&self) -> &SparseMatrix {
        &self.b
    }

    pub fn c(&self) -> &SparseMatrix {
        &self.c
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    /// (n, m).
    pub fn dims(&self) -> (usize, usize) {
        (self.a.nrows(), self.b.nrows())
    }

    /// Block residual `(A x + B^T y - f, B x - C y - h)`.
    ///
    /// Panics if `x` or `y` have the wrong length.
    pub fn residual(&self, x: &[f64], y: &[f64]) -> (DenseVector, DenseVector) {
        let mut top = self.a.spmv(x);
        axpy_in_place(1.0, &self.b.spmv_transpose(y), &mut top);
        axpy_in_place(-1.0, &self.f, &mut top);

        let mut bottom = self.b.spmv(x);
        axpy_in_place(-1.0, &self.c.spmv(y), &mut bottom);
        axpy_in_place(-1.0, &self.h, &mut bottom);
        (top, bottom)
    }

    /// 2-norm and max-norm of the stacked residual.
    pub fn residual_norms(&self, x: &[f64], y: &[f64]) -> (f64, f64) {
        let (top, bottom) = self.residual(x, y);
        let two = (norm2(&top).powi(2) + norm2(&bottom).powi(2)).sqrt();
        let inf = norm_inf(&top).max(norm_inf(&bottom));
        (two, inf)
    }

    /// Assembles the full (n+m) x (n+m) block matrix
    /// `[[A, B^T], [B, -C]]` by direct row merging.
    pub fn assemble_kkt(&self) -> SparseMatrix {
        let (n, m) = self.dims();
        let bt = self.b.transpose();
        let nnz = self.a.nnz() + 2 * self.b.nnz() + self.c.nnz();
        let mut offsets = Vec::with_capacity(n + m + 1);
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        offsets.push(0);
        for i in 0..n {
            let (ac, av) = self.a.row(i);
            cols.extend_from_slice(ac);
            vals.extend_from_slice(av);
            let (bc, bv) = bt.row(i);
            cols.extend(bc.iter().map(|&c| n + c));
            vals.extend_from_slice(bv);
            offsets.push(cols.len());
        }
        for i in 0..m {
            let (bc, bv) = self.b.row(i);
            cols.extend_from_slice(bc);
            vals.extend_from_slice(bv);
            let (cc, cv) = self.c.row(i);
            cols.extend(cc.iter().map(|&c| n + c));
            vals.extend(cv.iter().map(|&v| -v));
            offsets.push(cols.len());
        }
        SparseMatrix::from_csr_parts(n + m, n + m, offsets, cols, vals)
    }
}

/// Implicit Schur complement operator `S = B A^-1 B^T + C`.
///
/// Holds the LU factors of `A` (factored once at construction) and the
/// reduced right-hand side `b = B A^-1 f - h`.
#[derive(Debug)]
pub struct SchurOperator<'s> {
    system: &'s SaddleSystem,
    factors: LuFactors,
    rhs: DenseVector,
}

impl<'s> SchurOperator<'s> {
    /// Factors `A` and caches the reduced right-hand side.
    pub fn new(system: &'s SaddleSystem) -> Result<Self> {
        let factors = lu_factor(system.a(), 1.0)?;
        let a_inv_f = factors.solve(system.f());
        let mut rhs = system.b().spmv(&a_inv_f);
        axpy_in_place(-1.0, system.h(), &mut rhs);
        Ok(SchurOperator {
            system,
            factors,
            rhs,
        })
    }

    pub fn system(&self) -> &SaddleSystem {
        self.system
    }

    pub fn factors(&self) -> &LuFactors {
        &self.factors
    }

    /// Reduced right-hand side `b = B A^-1 f - h`.
    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Applies `S v = B A^-1 B^T v + C v` without forming `S`.
    ///
    /// Panics if `v.len() != m`.
    pub fn apply(&self, v: &[f64]) -> DenseVector {
        let bt_v = self.system.b().spmv_transpose(v);
        let a_inv = self.factors.solve(&bt_v);
        let mut out = self.system.b().spmv(&a_inv);
        axpy_in_place(1.0, &self.system.c().spmv(v), &mut out);
        out
    }

    /// Solves `A q = B^T v`, returning `q`; the intermediate the exact
    /// line search needs alongside `S v`.
    pub fn half_apply(&self, v: &[f64]) -> DenseVector {
        self.factors.solve(&self.system.b().spmv_transpose(v))
    }
}
