use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
///
/// Construction, factorization, generation and I/O entry points return
/// `Result`; the hot vector kernels (`spmv`, `dot`, `axpy`, triangular
/// solves) instead panic on dimension misuse, which is a programming error
/// rather than a data error. See the module docs of [`crate::sparse`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("triplet {position}: index ({row}, {col}) out of range for a {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        position: usize,
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },

    #[error(
        "dense conversion of a {nrows}x{ncols} matrix ({entries} entries) exceeds the limit of \
         {limit} entries; raise UZAWA_DENSE_LIMIT or use an explicit limit"
    )]
    DenseLimitExceeded {
        nrows: usize,
        ncols: usize,
        entries: usize,
        limit: usize,
    },

    #[error(
        "matrix is numerically singular: no acceptable pivot in column {column} \
         (best candidate magnitude {magnitude:.3e}, threshold {threshold:.3e})"
    )]
    Singular {
        column: usize,
        magnitude: f64,
        threshold: f64,
    },

    #[error("{what} = {size} exceeds the dense analysis limit {limit}; raise {env_var} to override")]
    AnalysisLimitExceeded {
        what: &'static str,
        size: usize,
        limit: usize,
        env_var: &'static str,
    },

    #[error("dense oracle failure: {0}")]
    OracleFailure(String),

    #[error("matrix A is not positive definite: lambda_min of its symmetric part is {lambda_min:.6e}")]
    NotPositiveDefinite { lambda_min: f64 },

    #[error(
        "stabilizing condition fails: lambda_min(B A_s^-1 B^T + C) = {beta:.6e} <= 0; \
         B is rank deficient or C does not compensate"
    )]
    StabilizingConditionFails { beta: f64 },

    #[error("generated B is rank deficient after {attempts} attempts; try another seed")]
    RankDeficient { attempts: usize },

    #[error(
        "convection dominates diffusion: lambda_min of the symmetric part of A is \
         {lambda_min:.6e} <= 0; increase the viscosity or refine the grid"
    )]
    ConvectionDominated { lambda_min: f64 },

    #[error(
        "exact line search broke down at iteration {iteration}: curvature p.p = {curvature:.3e} \
         vanished while the direction norm ||d|| = {direction_norm:.3e} is nonzero"
    )]
    Breakdown {
        iteration: usize,
        curvature: f64,
        direction_norm: f64,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("bundle at {0} already exists; pass force to overwrite")]
    BundleExists(PathBuf),

    #[error("invalid bundle: {0}")]
    BundleInvalid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("convergence history lacks per-iteration iterates; solve with record_history enabled")]
    MissingIterates,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
