//! Frozen acceptance thresholds.
//!
//! The limit theorems give convergence without rates, so each threshold is a
//! calibration at the stated `(n, replicates)`: it must cover the finite-`n`
//! bias plus KS sampling noise (about `0.9 / sqrt(replicates)` at the median,
//! `0.0064` for `2e4` replicates).

/// KS of `sigma / (n (alpha - 1))` at `n = 5000`, `2e4` replicates.
pub const KS_SIGMA: f64 = 0.02;
/// KS of `n^(alpha-1) T` (direct sampler) at `n = 5000`, `2e4` replicates.
pub const KS_TLEN: f64 = 0.02;
/// KS of `n^(alpha-1) T` from the recursive sampler at `n = 1000`.
pub const KS_TLEN_COX: f64 = 0.03;
/// KS of `n T` for Kingman at `n = 5000`.
pub const KS_KINGMAN_TLEN: f64 = 0.02;
/// KS of Kingman `sigma / n` against `Beta(1, 2)`.
pub const KS_KINGMAN_SIGMA: f64 = 0.02;
/// KS of `T` against `Exp(mu_-1)`.
pub const KS_TLEN_EXP: f64 = 0.02;
/// KS of `sigma / tau`.
pub const KS_SIGMA_OVER_TAU: f64 = 0.02;
/// KS of `Y_sigma / n`.
pub const KS_Y_SIGMA: f64 = 0.02;
/// `|mean(tau / n) - (alpha - 1)|`.
pub const TAU_OVER_N: f64 = 0.02;
/// Sup-norm bound per block-count replicate.
pub const BLOCK_SUP: f64 = 0.03;
/// Largest admissible fraction of block-count replicates above [`BLOCK_SUP`].
pub const BLOCK_FAIL_FRACTION: f64 = 0.05;
/// Grid size for the block-count sup-norm.
pub const BLOCK_GRID: usize = 512;
/// Significance level of the two-sample KS and chi-square tests.
pub const SIGNIFICANCE: f64 = 1e-3;
/// Monte Carlo standard errors allowed against the exact small-`n` law.
pub const SMALL_N_STANDARD_ERRORS: f64 = 3.0;
/// The Bolthausen–Sznitman limits converge at logarithmic speed; their
/// reports carry no sharp threshold and are judged by monotonicity in `n`.
pub const BS_LOOSE: f64 = 1.0;
