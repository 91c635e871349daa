use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tolerances::*;
use super::{
    chi_square_homogeneity, ecdf_grid, ks_from_grid, ks_two_sample, ks_two_sample_critical,
    Theorem, VerificationReport,
};
use crate::error::{out_of_range, Error, Result};
use crate::limits::{
    block_limit, bs_sigma_limit, bs_t_limit, exp_limit, kingman_block_limit, kingman_sigma_limit,
    kingman_t_limit, sigma_limit, t_limit, y_sigma_limit, LimitLaw,
};
use crate::measures::CoalescentMeasure;
use crate::rates::RateTable;
use crate::rng::{mix_seed, SeedSpec};
use crate::simulator::{
    cox_external_branch, exact_external_law, external_branch, external_branch_until_absorbed,
    simulate_jump_chain, AbsorptionSample, ExternalBranchSample, PartitionSampler,
};

const COX_STREAM: u64 = 0xC0C5;
const PARTITION_STREAM: u64 = 0x9A27;

/// Sampler used for the external branch length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    /// The jump-chain walk on `n` blocks.
    Direct,
    /// The recursive construction attaching `{1}` to the other `n - 1` lineages.
    Cox,
}

/// Quantity tracked by [`convergence_table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvergenceKind {
    Sigma,
    Tlen,
}

fn absorption_samples(
    table: &RateTable,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<Vec<AbsorptionSample>> {
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| external_branch_until_absorbed(table, n, SeedSpec::new(seed, r)))
        .collect()
}

fn full_samples(
    table: &RateTable,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<Vec<ExternalBranchSample>> {
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| external_branch(table, n, SeedSpec::new(seed, r)))
        .collect()
}

fn cox_samples(table: &RateTable, n: usize, replicates: usize, seed: u64) -> Result<Vec<f64>> {
    let cox_seed = mix_seed(seed, COX_STREAM);
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| cox_external_branch(table, n, SeedSpec::new(cox_seed, r)))
        .collect()
}

struct Setup<'a> {
    measure: &'a CoalescentMeasure,
    n: usize,
    replicates: usize,
    seed: u64,
}

impl Setup<'_> {
    fn ks_report(
        &self,
        theorem: Theorem,
        samples: &[f64],
        law: &LimitLaw,
        threshold: f64,
    ) -> Result<VerificationReport> {
        let grid = ecdf_grid(samples, |x| law.cdf(x))?;
        let statistic = ks_from_grid(&grid);
        let degenerate = grid.len() == 1;
        let mut report = VerificationReport::new(
            theorem,
            self.measure.describe(),
            self.n,
            self.replicates,
            self.seed,
            statistic,
            threshold,
        );
        report.degenerate = degenerate;
        report.ecdf_grid = Some(grid);
        for (k, v) in law.params() {
            report = report.with_detail(k, v);
        }
        Ok(report)
    }

    fn report(&self, theorem: Theorem, statistic: f64, threshold: f64) -> VerificationReport {
        VerificationReport::new(
            theorem,
            self.measure.describe(),
            self.n,
            self.replicates,
            self.seed,
            statistic,
            threshold,
        )
    }
}

fn check_replicates(replicates: usize) -> Result<()> {
    if replicates == 0 {
        return Err(Error::EmptySample);
    }
    Ok(())
}

fn alpha_of(measure: &CoalescentMeasure) -> Result<(f64, f64)> {
    measure.c0_alpha()
}

/// `sigma / (n (alpha - 1))` against `Beta(1, alpha)`.
pub fn verify_sigma(
    measure: &CoalescentMeasure,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let (_, alpha) = alpha_of(measure)?;
    check_replicates(replicates)?;
    let table = RateTable::new(measure, n)?;
    let scale = 1.0 / (n as f64 * (alpha - 1.0));
    let xs: Vec<f64> = absorption_samples(&table, n, replicates, seed)?
        .iter()
        .map(|s| s.sigma as f64 * scale)
        .collect();
    let setup = Setup {
        measure,
        n,
        replicates,
        seed,
    };
    setup.ks_report(Theorem::SigmaLimit, &xs, &sigma_limit(alpha)?, KS_SIGMA)
}

/// Kingman cross-check: `sigma / n` against `Beta(1, 2)`.
pub fn verify_kingman_sigma(n: usize, replicates: usize, seed: u64) -> Result<VerificationReport> {
    check_replicates(replicates)?;
    let measure = CoalescentMeasure::kingman();
    let table = RateTable::new(&measure, n)?;
    let xs: Vec<f64> = absorption_samples(&table, n, replicates, seed)?
        .iter()
        .map(|s| s.sigma as f64 / n as f64)
        .collect();
    let setup = Setup {
        measure: &measure,
        n,
        replicates,
        seed,
    };
    setup.ks_report(
        Theorem::KingmanSigma,
        &xs,
        &kingman_sigma_limit(),
        KS_KINGMAN_SIGMA,
    )
}

/// Bolthausen–Sznitman: `log(n) sigma / n` against `Uniform(0, 1)`.
pub fn verify_bs_sigma(n: usize, replicates: usize, seed: u64) -> Result<VerificationReport> {
    check_replicates(replicates)?;
    let measure = CoalescentMeasure::bolthausen_sznitman();
    let table = RateTable::new(&measure, n)?;
    let scale = (n as f64).ln() / n as f64;
    let xs: Vec<f64> = absorption_samples(&table, n, replicates, seed)?
        .iter()
        .map(|s| s.sigma as f64 * scale)
        .collect();
    let setup = Setup {
        measure: &measure,
        n,
        replicates,
        seed,
    };
    setup.ks_report(Theorem::BsSigma, &xs, &bs_sigma_limit(), BS_LOOSE)
}

/// Bolthausen–Sznitman: `log(n) T` against `Exp(1)`.
pub fn verify_bs_tlen(n: usize, replicates: usize, seed: u64) -> Result<VerificationReport> {
    check_replicates(replicates)?;
    let measure = CoalescentMeasure::bolthausen_sznitman();
    let table = RateTable::new(&measure, n)?;
    let scale = (n as f64).ln();
    let xs: Vec<f64> = absorption_samples(&table, n, replicates, seed)?
        .iter()
        .map(|s| s.t_len * scale)
        .collect();
    let setup = Setup {
        measure: &measure,
        n,
        replicates,
        seed,
    };
    setup.ks_report(Theorem::BsTLen, &xs, &bs_t_limit(), BS_LOOSE)
}

/// External branch length against its limit: `n^(alpha-1) T` for the
/// regularly varying class, `n T` for Kingman, `T` against `Exp(mu_-1)` when
/// `mu_-1` is finite.
pub fn verify_tlen(
    measure: &CoalescentMeasure,
    n: usize,
    replicates: usize,
    seed: u64,
    sampler: Sampler,
) -> Result<VerificationReport> {
    check_replicates(replicates)?;
    if measure.is_bolthausen_sznitman() && sampler == Sampler::Direct {
        return verify_bs_tlen(n, replicates, seed);
    }
    let (theorem, scale, law, threshold) = if measure.is_kingman() {
        (
            Theorem::KingmanTLen,
            n as f64,
            kingman_t_limit(),
            KS_KINGMAN_TLEN,
        )
    } else if let Ok((c0, alpha)) = measure.c0_alpha() {
        let threshold = match sampler {
            Sampler::Direct => KS_TLEN,
            Sampler::Cox => KS_TLEN_COX,
        };
        (
            Theorem::TLenLimit,
            (n as f64).powf(alpha - 1.0),
            t_limit(alpha, c0)?,
            threshold,
        )
    } else if let Some(mu1) = measure.mu_minus(1).finite() {
        (Theorem::TLenExponential, 1.0, exp_limit(mu1)?, KS_TLEN_EXP)
    } else {
        return Err(Error::HypothesisUnavailable(measure.describe()));
    };
    let table = RateTable::new(measure, n)?;
    let raw: Vec<f64> = match sampler {
        Sampler::Direct => absorption_samples(&table, n, replicates, seed)?
            .iter()
            .map(|s| s.t_len)
            .collect(),
        Sampler::Cox => cox_samples(&table, n, replicates, seed)?,
    };
    let xs: Vec<f64> = raw.iter().map(|t| t * scale).collect();
    let setup = Setup {
        measure,
        n,
        replicates,
        seed,
    };
    Ok(setup
        .ks_report(theorem, &xs, &law, threshold)?
        .with_detail("scale", scale)
        .with_detail("cox_sampler", f64::from(u8::from(sampler == Sampler::Cox))))
}

/// Two-sample KS between the direct and recursive samplers of `T`, judged
/// by the asymptotic critical value at the fixed significance level.
pub fn verify_cox(
    measure: &CoalescentMeasure,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<VerificationReport> {
    check_replicates(replicates)?;
    let table = RateTable::new(measure, n)?;
    let direct: Vec<f64> = absorption_samples(&table, n, replicates, seed)?
        .iter()
        .map(|s| s.t_len)
        .collect();
    let cox = cox_samples(&table, n, replicates, seed)?;
    let statistic = ks_two_sample(&direct, &cox)?;
    let critical = ks_two_sample_critical(replicates, replicates, SIGNIFICANCE);
    let setup = Setup {
        measure,
        n,
        replicates,
        seed,
    };
    Ok(setup
        .report(Theorem::CoxEquivalence, statistic, critical)
        .with_detail("significance", SIGNIFICANCE)
        .with_detail("mean_direct", mean(&direct))
        .with_detail("mean_cox", mean(&cox)))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sup-norm deviation of the rescaled block count from its deterministic
/// limit on a uniform grid over `[0, t_max]`, per replicate. The statistic is
/// the fraction of replicates whose deviation exceeds the per-replicate bound.
pub fn verify_blockcount(
    measure: &CoalescentMeasure,
    n: usize,
    t_max: f64,
    grid_points: usize,
    replicates: usize,
    seed: u64,
) -> Result<VerificationReport> {
    check_replicates(replicates)?;
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(out_of_range("t_max", format!("{t_max}")));
    }
    if grid_points < 2 {
        return Err(out_of_range("grid points", format!("{grid_points} < 2")));
    }
    let (theorem, time_scale, limit): (Theorem, f64, Box<dyn Fn(f64) -> f64 + Sync>) =
        if measure.is_kingman() {
            (
                Theorem::BlockCountKingman,
                1.0 / n as f64,
                Box::new(kingman_block_limit),
            )
        } else {
            let (c0, alpha) = alpha_of(measure)?;
            (
                Theorem::BlockCount,
                (n as f64).powf(1.0 - alpha),
                Box::new(move |t| block_limit(alpha, c0, t)),
            )
        };
    let table = RateTable::new(measure, n)?;
    let grid: Vec<f64> = (0..grid_points)
        .map(|i| t_max * i as f64 / (grid_points - 1) as f64)
        .collect();
    let times: Vec<f64> = grid.iter().map(|t| t * time_scale).collect();
    let targets: Vec<f64> = grid.iter().map(|&t| limit(t)).collect();
    let fractions: Vec<Vec<f64>> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let path = simulate_jump_chain(&table, n, SeedSpec::new(seed, r))?;
            Ok(path
                .block_count_at(&times)?
                .iter()
                .map(|&c| c as f64 / n as f64)
                .collect())
        })
        .collect::<Result<_>>()?;
    let sup_dev = |curve: &[f64]| {
        curve
            .iter()
            .zip(&targets)
            .map(|(c, f)| (c - f).abs())
            .fold(0.0, f64::max)
    };
    let sups: Vec<f64> = fractions.iter().map(|c| sup_dev(c)).collect();
    // deviation of the replicate-averaged curve: separates bias from fluctuation
    let mut average = vec![0.0; grid_points];
    for curve in &fractions {
        for (a, c) in average.iter_mut().zip(curve) {
            *a += c / replicates as f64;
        }
    }
    let failures = sups.iter().filter(|&&s| s > BLOCK_SUP).count();
    let statistic = failures as f64 / replicates as f64;
    let setup = Setup {
        measure,
        n,
        replicates,
        seed,
    };
    Ok(setup
        .report(theorem, statistic, BLOCK_FAIL_FRACTION)
        .with_detail("epsilon", BLOCK_SUP)
        .with_detail("t_max", t_max)
        .with_detail("grid_points", grid_points as f64)
        .with_detail("pass_fraction", 1.0 - statistic)
        .with_detail("mean_sup", mean(&sups))
        .with_detail("max_sup", sups.iter().copied().fold(0.0, f64::max))
        .with_detail("mean_curve_sup", sup_dev(&average)))
}

/// `sigma / tau` against `Beta(1, alpha)`, `|mean(tau / n) - (alpha - 1)|`
/// and `Y_sigma / n` against cdf `x^alpha`, from the same replicates.
pub fn verify_ratios(
    measure: &CoalescentMeasure,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<Vec<VerificationReport>> {
    let (_, alpha) = alpha_of(measure)?;
    check_replicates(replicates)?;
    let table = RateTable::new(measure, n)?;
    let samples = full_samples(&table, n, replicates, seed)?;
    let setup = Setup {
        measure,
        n,
        replicates,
        seed,
    };
    let over_tau: Vec<f64> = samples
        .iter()
        .map(|s| s.sigma as f64 / s.tau as f64)
        .collect();
    let tau_over_n: Vec<f64> = samples.iter().map(|s| s.tau as f64 / n as f64).collect();
    let y_over_n: Vec<f64> = samples
        .iter()
        .map(|s| s.y_at_sigma as f64 / n as f64)
        .collect();
    let mean_tau = mean(&tau_over_n);
    let mut tau_report = setup
        .report(
            Theorem::TauOverN,
            (mean_tau - (alpha - 1.0)).abs(),
            TAU_OVER_N,
        )
        .with_detail("mean_tau_over_n", mean_tau)
        .with_detail("alpha", alpha);
    tau_report.degenerate = tau_over_n.iter().all(|&t| t == tau_over_n[0]);
    Ok(vec![
        setup.ks_report(
            Theorem::SigmaOverTau,
            &over_tau,
            &sigma_limit(alpha)?,
            KS_SIGMA_OVER_TAU,
        )?,
        tau_report,
        setup.ks_report(
            Theorem::YSigmaLimit,
            &y_over_n,
            &y_sigma_limit(alpha)?,
            KS_Y_SIGMA,
        )?,
    ])
}

/// Monte Carlo `P(sigma = 1)` and `E[T]` against the exact law. The
/// statistic is the larger of the two standardized deviations.
pub fn verify_small_n(
    measure: &CoalescentMeasure,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<VerificationReport> {
    check_replicates(replicates)?;
    let table = RateTable::new(measure, n)?;
    let exact = exact_external_law(&table, n)?;
    let samples = absorption_samples(&table, n, replicates, seed)?;
    let m = replicates as f64;
    let p_exact = exact.sigma_pmf(1);
    let p_hat = samples.iter().filter(|s| s.sigma == 1).count() as f64 / m;
    let p_se = (p_exact * (1.0 - p_exact) / m).sqrt();
    let ts: Vec<f64> = samples.iter().map(|s| s.t_len).collect();
    let t_hat = mean(&ts);
    let t_var = ts.iter().map(|t| (t - t_hat).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    let t_se = (t_var / m).sqrt();
    let z_p = if p_se > 0.0 {
        (p_hat - p_exact).abs() / p_se
    } else {
        (p_hat - p_exact).abs()
    };
    let z_t = (t_hat - exact.mean_t_len).abs() / t_se;
    let setup = Setup {
        measure,
        n,
        replicates,
        seed,
    };
    Ok(setup
        .report(Theorem::SmallNOracle, z_p.max(z_t), SMALL_N_STANDARD_ERRORS)
        .with_detail("p_sigma1_exact", p_exact)
        .with_detail("p_sigma1_mc", p_hat)
        .with_detail("z_sigma1", z_p)
        .with_detail("mean_t_exact", exact.mean_t_len)
        .with_detail("mean_t_mc", t_hat)
        .with_detail("z_mean_t", z_t))
}

/// Chi-square homogeneity of the `(sigma, Y_sigma)` counts from the
/// jump-chain sampler and the explicit partition sampler.
pub fn verify_partition_agreement(
    measure: &CoalescentMeasure,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<VerificationReport> {
    check_replicates(replicates)?;
    let table = RateTable::new(measure, n)?;
    let sampler = PartitionSampler::new(&table, n)?;
    let lean = absorption_samples(&table, n, replicates, seed)?;
    let part_seed = mix_seed(seed, PARTITION_STREAM);
    let explicit: Vec<(usize, usize)> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let (s, _) = sampler.sample(SeedSpec::new(part_seed, r));
            (s.sigma, s.y_at_sigma)
        })
        .collect();
    let mut a: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for s in &lean {
        *a.entry((s.sigma, s.y_at_sigma)).or_default() += 1;
    }
    let mut b: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for key in explicit {
        *b.entry(key).or_default() += 1;
    }
    let test = chi_square_homogeneity(&a, &b, SIGNIFICANCE)?;
    let setup = Setup {
        measure,
        n,
        replicates,
        seed,
    };
    Ok(setup
        .report(Theorem::PartitionAgreement, test.statistic, test.critical)
        .with_detail("dof", test.dof as f64)
        .with_detail("p_value", test.p_value))
}

/// Runs the sigma or T verifier (or its Kingman / Bolthausen–Sznitman
/// variant) for each `n`.
pub fn convergence_table(
    measure: &CoalescentMeasure,
    n_list: &[usize],
    replicates: usize,
    seed: u64,
    kind: ConvergenceKind,
) -> Result<Vec<VerificationReport>> {
    n_list
        .iter()
        .map(|&n| match kind {
            ConvergenceKind::Sigma if measure.is_bolthausen_sznitman() => {
                verify_bs_sigma(n, replicates, seed)
            }
            ConvergenceKind::Sigma if measure.is_kingman() => {
                verify_kingman_sigma(n, replicates, seed)
            }
            ConvergenceKind::Sigma => verify_sigma(measure, n, replicates, seed),
            ConvergenceKind::Tlen => verify_tlen(measure, n, replicates, seed, Sampler::Direct),
        })
        .collect()
}

/// Strictly decreasing statistics along a convergence table.
pub fn is_decreasing(reports: &[VerificationReport]) -> bool {
    reports.windows(2).all(|w| w[1].statistic < w[0].statistic)
}

/// Distance between the jump times `A_k`, their conditional means given the
/// jump chain, and the same with `g_b` replaced by its leading asymptotics,
/// at `k = floor(n t)`, each scaled by `n^(alpha-1)` and averaged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpTimeDiagnostics {
    pub n: usize,
    pub k: usize,
    /// Mean of `n^(alpha-1) |A_k - A~_k|`.
    pub actual_vs_expected: f64,
    /// Mean of `n^(alpha-1) |A~_k - A^_k|`.
    pub expected_vs_asymptotic: f64,
    /// Mean of `n^(alpha-1) A_k`.
    pub mean_scaled_jump_time: f64,
}

pub fn jump_time_diagnostics(
    measure: &CoalescentMeasure,
    n: usize,
    t: f64,
    replicates: usize,
    seed: u64,
) -> Result<JumpTimeDiagnostics> {
    let (_, alpha) = alpha_of(measure)?;
    check_replicates(replicates)?;
    if !(t > 0.0 && t < alpha - 1.0) {
        return Err(out_of_range(
            "t",
            format!("{t} not in (0, {})", alpha - 1.0),
        ));
    }
    let table = RateTable::new(measure, n)?;
    let rate_constant = measure.rate_constant()?;
    let k = (n as f64 * t).floor() as usize;
    let scale = (n as f64).powf(alpha - 1.0);
    let rows: Vec<(f64, f64, f64)> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let path = simulate_jump_chain(&table, n, SeedSpec::new(seed, r))?;
            let k = k.min(path.tau);
            let a = path.jump_time(k)?;
            let tilde = path.jump_time_expected(&table, k)?;
            let hat = path.jump_time_asymptotic(rate_constant, alpha, k)?;
            Ok((
                scale * (a - tilde).abs(),
                scale * (tilde - hat).abs(),
                scale * a,
            ))
        })
        .collect::<Result<_>>()?;
    let m = replicates as f64;
    Ok(JumpTimeDiagnostics {
        n,
        k,
        actual_vs_expected: rows.iter().map(|r| r.0).sum::<f64>() / m,
        expected_vs_asymptotic: rows.iter().map(|r| r.1).sum::<f64>() / m,
        mean_scaled_jump_time: rows.iter().map(|r| r.2).sum::<f64>() / m,
    })
}
