//! Size guards for dense fallbacks.
//!
//! The verification layer works on explicit dense matrices, which only
//! makes sense at desk scale. Each guard has a default and an environment
//! override so larger runs can opt in deliberately:
//!
//! * `UZAWA_DENSE_LIMIT`   - max entries for a dense conversion (4e6)
//! * `UZAWA_SCHUR_LIMIT`   - max m for explicit Schur formation (500)
//! * `UZAWA_EIGEN_LIMIT`   - max n for dense eigenvalue work (2000)
//!
//! Overrides are read once per process.

use std::sync::OnceLock;

pub const DEFAULT_DENSE_ENTRY_LIMIT: usize = 4_000_000;
pub const DEFAULT_SCHUR_M_LIMIT: usize = 500;
pub const DEFAULT_EIGEN_N_LIMIT: usize = 2_000;

fn env_limit(var: &str, default: usize) -> usize {
    match std::env::var(var) {
        Ok(s) => s.trim().parse().unwrap_or(default),
        Err(_) => default,
    }
}

/// Max entries allowed in a default dense conversion.
pub fn dense_entry_limit() -> usize {
    static LIMIT: OnceLock<usize> = OnceLock::new();
    *LIMIT.get_or_init(|| env_limit("UZAWA_DENSE_LIMIT", DEFAULT_DENSE_ENTRY_LIMIT))
}

/// Max Schur dimension m for explicit dense formation.
pub fn schur_m_limit() -> usize {
    static LIMIT: OnceLock<usize> = OnceLock::new();
    *LIMIT.get_or_init(|| env_limit("UZAWA_SCHUR_LIMIT", DEFAULT_SCHUR_M_LIMIT))
}

/// Max dimension n for dense symmetric eigenvalue computations.
pub fn eigen_n_limit() -> usize {
    static LIMIT: OnceLock<usize> = OnceLock::new();
    *LIMIT.get_or_init(|| env_limit("UZAWA_EIGEN_LIMIT", DEFAULT_EIGEN_N_LIMIT))
}
