//! Samplers for the block-count jump chain and the external branch of
//! individual 1.
//!
//! The lean samplers never materialize partitions: the jump chain `(Y, X)`
//! carries all the information, and whether the singleton `{1}` takes part in
//! a collision that merges `X + 1` of `Y` blocks is a single Bernoulli draw
//! with success probability `(X + 1) / Y` (exchangeability).

mod cox;
mod exact;
mod partition;

pub use cox::cox_external_branch;
pub use exact::{exact_external_law, ExactExternalLaw};
pub use partition::{full_partition_simulate, PartitionSampler, MAX_PARTITION_N};

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::rates::RateTable;
use crate::rng::SeedSpec;

/// One realization of the block-count jump chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpChainPath {
    pub n: usize,
    /// Block counts `Y_0 = n, ..., Y_tau = 1`.
    pub y: Vec<usize>,
    /// Blocks lost per collision, `x[i-1] = Y_{i-1} - Y_i`.
    pub x: Vec<usize>,
    /// Holding times `e_i / g_{Y_{i-1}}`.
    pub waits: Vec<f64>,
    pub tau: usize,
}

/// External-branch functionals of one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExternalBranchSample {
    /// Index of the collision that absorbs `{1}`.
    pub sigma: usize,
    /// Length of the external branch of `{1}`.
    pub t_len: f64,
    /// Total number of collisions.
    pub tau: usize,
    /// Block count just after collision `sigma`.
    pub y_at_sigma: usize,
}

/// Functionals up to absorption only (`tau` is not observed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorptionSample {
    pub sigma: usize,
    pub t_len: f64,
    pub y_at_sigma: usize,
}

/// Draws the number of blocks lost at a collision from `b` blocks by
/// sequential inversion from `k = 1`. Residual mass left by rounding goes to
/// `k = b - 1`.
pub fn sample_first_jump<R: Rng + ?Sized>(table: &RateTable, b: usize, rng: &mut R) -> usize {
    if b <= 2 || table.is_kingman() {
        return 1;
    }
    let u: f64 = rng.random();
    let mut p = table.binary_prob(b);
    let mut cumulative = p;
    let mut k = 1;
    while u >= cumulative && k < b - 1 {
        p *= table.pmf_ratio(b, k);
        k += 1;
        cumulative += p;
    }
    k
}

fn check_n(table: &RateTable, n: usize) -> Result<()> {
    if n < 2 || n > table.n_max() {
        return Err(out_of_range(
            "sample size",
            format!("n = {n} not in [2, {}]", table.n_max()),
        ));
    }
    Ok(())
}

struct Walk {
    sigma: usize,
    t_len: f64,
    y_at_sigma: usize,
    tau: Option<usize>,
}

/// Walks the chain from `n` blocks. Per collision the draws are, in order:
/// the exponential holding time, the merger size, and (while `{1}` is still
/// a singleton) the participation uniform.
fn walk<R: Rng + ?Sized>(
    table: &RateTable,
    n: usize,
    rng: &mut R,
    mut path: Option<&mut JumpChainPath>,
    stop_at_absorption: bool,
) -> Walk {
    let mut b = n;
    let mut clock = 0.0;
    let mut absorbed: Option<(usize, f64, usize)> = None;
    let mut i = 0;
    while b > 1 {
        i += 1;
        let e: f64 = rng.sample(Exp1);
        let wait = e / table.g(b);
        clock += wait;
        let x = sample_first_jump(table, b, rng);
        if absorbed.is_none() {
            let u: f64 = rng.random();
            if u * (b as f64) < (x + 1) as f64 {
                absorbed = Some((i, clock, b - x));
            }
        }
        b -= x;
        if let Some(p) = path.as_deref_mut() {
            p.y.push(b);
            p.x.push(x);
            p.waits.push(wait);
        }
        if stop_at_absorption && absorbed.is_some() {
            break;
        }
    }
    let (sigma, t_len, y_at_sigma) = absorbed.expect("the last collision absorbs every block");
    Walk {
        sigma,
        t_len,
        y_at_sigma,
        tau: (b == 1).then_some(i),
    }
}

/// Samples a full jump-chain path together with the external branch of `{1}`.
pub fn simulate_replicate(
    table: &RateTable,
    n: usize,
    seed: SeedSpec,
) -> Result<(ExternalBranchSample, JumpChainPath)> {
    check_n(table, n)?;
    let mut rng = seed.rng();
    let mut path = JumpChainPath {
        n,
        y: vec![n],
        x: Vec::new(),
        waits: Vec::new(),
        tau: 0,
    };
    let w = walk(table, n, &mut rng, Some(&mut path), false);
    path.tau = path.x.len();
    let tau = w.tau.expect("complete walk");
    Ok((
        ExternalBranchSample {
            sigma: w.sigma,
            t_len: w.t_len,
            tau,
            y_at_sigma: w.y_at_sigma,
        },
        path,
    ))
}

/// Samples the jump chain from `n` blocks with exponential holding times.
pub fn simulate_jump_chain(table: &RateTable, n: usize, seed: SeedSpec) -> Result<JumpChainPath> {
    simulate_replicate(table, n, seed).map(|(_, p)| p)
}

/// Samples `(sigma, T, tau, Y_sigma)` for individual 1 of an `n`-coalescent.
///
/// Uses the same stream as [`simulate_jump_chain`] for the same seed, so the
/// result is consistent with that path.
pub fn external_branch(
    table: &RateTable,
    n: usize,
    seed: SeedSpec,
) -> Result<ExternalBranchSample> {
    check_n(table, n)?;
    let mut rng = seed.rng();
    let w = walk(table, n, &mut rng, None, false);
    Ok(ExternalBranchSample {
        sigma: w.sigma,
        t_len: w.t_len,
        tau: w.tau.expect("complete walk"),
        y_at_sigma: w.y_at_sigma,
    })
}

/// Like [`external_branch`] but stops at absorption; the returned values are
/// identical to the corresponding fields of [`external_branch`].
pub fn external_branch_until_absorbed(
    table: &RateTable,
    n: usize,
    seed: SeedSpec,
) -> Result<AbsorptionSample> {
    check_n(table, n)?;
    let mut rng = seed.rng();
    let w = walk(table, n, &mut rng, None, true);
    Ok(AbsorptionSample {
        sigma: w.sigma,
        t_len: w.t_len,
        y_at_sigma: w.y_at_sigma,
    })
}

impl JumpChainPath {
    /// Block count `R(t)` at each of the ascending `times` (right-continuous;
    /// 1 after absorption).
    pub fn block_count_at(&self, times: &[f64]) -> Result<Vec<usize>> {
        if times.iter().any(|t| t.is_nan()) || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::UnsortedTimes);
        }
        let mut out = Vec::with_capacity(times.len());
        let mut jumps = 0;
        let mut next_jump = self.waits.first().copied().unwrap_or(f64::INFINITY);
        for &t in times {
            while jumps < self.tau && next_jump <= t {
                jumps += 1;
                next_jump = if jumps < self.tau {
                    next_jump + self.waits[jumps]
                } else {
                    f64::INFINITY
                };
            }
            out.push(self.y[jumps]);
        }
        Ok(out)
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k > self.tau {
            return Err(out_of_range(
                "jump index",
                format!("k = {k} > tau = {}", self.tau),
            ));
        }
        Ok(())
    }

    /// Time `A_k` at which the `k`-th collision happens (`A_0 = 0`).
    pub fn jump_time(&self, k: usize) -> Result<f64> {
        self.check_k(k)?;
        Ok(self.waits[..k].iter().sum())
    }

    /// `sum_{i<=k} 1 / g_{Y_{i-1}}`: `A_k` with the exponentials replaced by
    /// their mean.
    pub fn jump_time_expected(&self, table: &RateTable, k: usize) -> Result<f64> {
        self.check_k(k)?;
        Ok(self.y[..k].iter().map(|&b| 1.0 / table.g(b)).sum())
    }

    /// `sum_{i<=k} Y_{i-1}^-alpha / (C0 Gamma(2-alpha))`: the expected jump
    /// time with `g_b` replaced by its leading asymptotics.
    pub fn jump_time_asymptotic(&self, rate_constant: f64, alpha: f64, k: usize) -> Result<f64> {
        self.check_k(k)?;
        Ok(self.y[..k]
            .iter()
            .map(|&b| (b as f64).powf(-alpha))
            .sum::<f64>()
            / rate_constant)
    }

    /// Height of the tree (time to the most recent common ancestor).
    pub fn height(&self) -> f64 {
        self.waits.iter().sum()
    }
}
