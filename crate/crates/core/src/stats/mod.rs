//! Goodness-of-fit statistics and the Monte Carlo verifiers built on them.

mod verify;

pub mod tolerances;

pub use verify::{
    convergence_table, is_decreasing, jump_time_diagnostics, verify_blockcount, verify_bs_sigma,
    verify_bs_tlen, verify_cox, verify_kingman_sigma, verify_partition_agreement, verify_ratios,
    verify_sigma, verify_small_n, verify_tlen, ConvergenceKind, JumpTimeDiagnostics, Sampler,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::limits::LimitLaw;

/// Which limit statement a report checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// `sigma / (n (alpha - 1))` against `Beta(1, alpha)`.
    SigmaLimit,
    /// `n^(alpha-1) T` against its limit law.
    TLenLimit,
    /// Sup-norm deviation of the rescaled block count.
    BlockCount,
    /// Kingman block count against `(1 + t/2)^-1`.
    BlockCountKingman,
    /// Two-sample comparison of the direct and recursive samplers.
    CoxEquivalence,
    /// Small `n` against the exact law.
    SmallNOracle,
    /// `|mean(tau / n) - (alpha - 1)|`.
    TauOverN,
    /// `sigma / tau` against `Beta(1, alpha)`.
    SigmaOverTau,
    /// `Y_sigma / n` against cdf `x^alpha`.
    YSigmaLimit,
    /// Kingman `sigma / n` against `Beta(1, 2)`.
    KingmanSigma,
    /// Kingman `n T` against cdf `1 - 4 / (2 + t)^2`.
    KingmanTLen,
    /// `T` against `Exp(mu_-1)` when `mu_-1` is finite.
    TLenExponential,
    /// Bolthausen–Sznitman `log(n) sigma / n` against `Uniform(0, 1)`.
    BsSigma,
    /// Bolthausen–Sznitman `log(n) T` against `Exp(1)`.
    BsTLen,
    /// Chi-square comparison of the partition and jump-chain samplers.
    PartitionAgreement,
}

/// One point of an empirical cdf: the value, the ecdf just after it, and the
/// reference cdf at it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcdfPoint {
    pub value: f64,
    pub empirical: f64,
    pub analytic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub theorem: Theorem,
    pub measure: String,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub statistic: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Set when the sampled quantity is almost surely constant.
    pub degenerate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ecdf_grid: Option<Vec<EcdfPoint>>,
    #[serde(default)]
    pub details: BTreeMap<String, f64>,
}

impl VerificationReport {
    pub(crate) fn new(
        theorem: Theorem,
        measure: String,
        n: usize,
        replicates: usize,
        seed: u64,
        statistic: f64,
        threshold: f64,
    ) -> Self {
        VerificationReport {
            theorem,
            measure,
            n,
            replicates,
            seed,
            statistic,
            threshold,
            passed: statistic <= threshold,
            degenerate: false,
            ecdf_grid: None,
            details: BTreeMap::new(),
        }
    }

    pub(crate) fn with_detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    /// Copy without the ecdf grid.
    pub fn summary(&self) -> Self {
        VerificationReport {
            ecdf_grid: None,
            ..self.clone()
        }
    }
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// One-sample KS distance against an arbitrary continuous cdf.
pub fn ks_one_sample_cdf<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    let v = sorted(samples)?;
    let m = v.len() as f64;
    Ok(v.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max((((i + 1) as f64) / m - f).abs())
            .max((i as f64 / m - f).abs())
    }))
}

pub fn ks_one_sample(samples: &[f64], law: &LimitLaw) -> Result<f64> {
    ks_one_sample_cdf(samples, |x| law.cdf(x))
}

/// Two-sample KS distance over the pooled order statistics.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (ma, mb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / ma - j as f64 / mb).abs());
    }
    Ok(d.max((i as f64 / ma - j as f64 / mb).abs()))
}

/// Asymptotic two-sample KS critical value `sqrt(-ln(level/2)/2) sqrt((m1+m2)/(m1 m2))`.
pub fn ks_two_sample_critical(m1: usize, m2: usize, level: f64) -> f64 {
    let (m1, m2) = (m1 as f64, m2 as f64);
    (-(0.5 * level).ln() / 2.0).sqrt() * ((m1 + m2) / (m1 * m2)).sqrt()
}

/// Ecdf at each distinct sample value together with the reference cdf.
pub fn ecdf_grid<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<Vec<EcdfPoint>> {
    let v = sorted(samples)?;
    let m = v.len() as f64;
    let mut out: Vec<EcdfPoint> = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        let empirical = (i + 1) as f64 / m;
        match out.last_mut() {
            Some(last) if last.value == x => last.empirical = empirical,
            _ => out.push(EcdfPoint {
                value: x,
                empirical,
                analytic: cdf(x),
            }),
        }
    }
    Ok(out)
}

/// KS distance recovered from an ecdf grid.
pub fn ks_from_grid(grid: &[EcdfPoint]) -> f64 {
    let mut before = 0.0;
    let mut d: f64 = 0.0;
    for p in grid {
        d = d
            .max((p.empirical - p.analytic).abs())
            .max((before - p.analytic).abs());
        before = p.empirical;
    }
    d
}

/// Chi-square homogeneity test of two count tables over the same lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub critical: f64,
    pub p_value: f64,
}

/// Compares two multinomial samples. Cells whose expected count under the
/// pooled law is below 5 in either sample are merged into one cell.
pub fn chi_square_homogeneity<K: Ord + Clone>(
    a: &BTreeMap<K, u64>,
    b: &BTreeMap<K, u64>,
    level: f64,
) -> Result<ChiSquareTest> {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    if na == 0 || nb == 0 {
        return Err(Error::EmptySample);
    }
    let total = (na + nb) as f64;
    let mut keys: Vec<&K> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for k in keys {
        let ca = a.get(k).copied().unwrap_or(0) as f64;
        let cb = b.get(k).copied().unwrap_or(0) as f64;
        let share = (ca + cb) / total;
        if share * (na.min(nb) as f64) < 5.0 {
            pooled.0 += ca;
            pooled.1 += cb;
        } else {
            cells.push((ca, cb));
        }
    }
    if pooled.0 + pooled.1 > 0.0 {
        cells.push(pooled);
    }
    let statistic: f64 = cells
        .iter()
        .map(|&(ca, cb)| {
            let share = (ca + cb) / total;
            let ea = share * na as f64;
            let eb = share * nb as f64;
            (ca - ea).powi(2) / ea + (cb - eb).powi(2) / eb
        })
        .sum();
    let dof = cells.len().saturating_sub(1);
    if dof == 0 {
        return Ok(ChiSquareTest {
            statistic: 0.0,
            dof,
            critical: 0.0,
            p_value: 1.0,
        });
    }
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::DomainError(e.to_string()))?;
    Ok(ChiSquareTest {
        statistic,
        dof,
        critical: dist.inverse_cdf(1.0 - level),
        p_value: 1.0 - dist.cdf(statistic),
    })
}
