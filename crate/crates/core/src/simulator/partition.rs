//! Partition-valued simulator for small `n`: keeps the blocks explicitly and
//! merges a uniformly chosen subset at each collision.

use rand::Rng;
use rand_distr::Exp1;

use super::{check_n, ExternalBranchSample, JumpChainPath};
use crate::error::{Error, Result};
use crate::rates::RateTable;
use crate::rng::SeedSpec;

pub const MAX_PARTITION_N: usize = 12;

/// Cumulative merger-size distributions for `b = 2..=n`, reused across
/// replicates.
#[derive(Debug, Clone)]
pub struct PartitionSampler {
    n: usize,
    cumulative: Vec<Vec<f64>>,
    totals: Vec<f64>,
}

impl PartitionSampler {
    pub fn new(table: &RateTable, n: usize) -> Result<Self> {
        if n > MAX_PARTITION_N {
            return Err(Error::TooLarge(n));
        }
        check_n(table, n)?;
        let mut cumulative = vec![Vec::new(); n + 1];
        let mut totals = vec![0.0; n + 1];
        for b in 2..=n {
            let law = table.first_jump_law(b)?;
            let mut acc = 0.0;
            cumulative[b] = law
                .pmf
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect();
            totals[b] = table.total_rate(b)?;
        }
        Ok(PartitionSampler {
            n,
            cumulative,
            totals,
        })
    }

    pub fn sample(&self, seed: SeedSpec) -> (ExternalBranchSample, JumpChainPath) {
        let n = self.n;
        let mut rng = seed.rng();
        // block of element i is the bitmask with bit i set
        let mut blocks: Vec<u16> = (0..n).map(|i| 1u16 << i).collect();
        let mut path = JumpChainPath {
            n,
            y: vec![n],
            x: Vec::new(),
            waits: Vec::new(),
            tau: 0,
        };
        let mut clock = 0.0;
        let mut absorbed: Option<(usize, f64, usize)> = None;
        let mut idx = [0usize; MAX_PARTITION_N];
        while blocks.len() > 1 {
            let b = blocks.len();
            let e: f64 = rng.sample(Exp1);
            let wait = e / self.totals[b];
            clock += wait;
            let u: f64 = rng.random();
            let cum = &self.cumulative[b];
            let lost = cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1) + 1;
            let size = lost + 1;
            for (i, slot) in idx.iter_mut().enumerate().take(b) {
                *slot = i;
            }
            for i in 0..size {
                let j = rng.random_range(i..b);
                idx.swap(i, j);
            }
            let chosen = &mut idx[..size];
            chosen.sort_unstable_by(|a, b| b.cmp(a));
            let mut merged = 0u16;
            for &c in chosen.iter() {
                merged |= blocks.swap_remove(c);
            }
            blocks.push(merged);
            let step = path.x.len() + 1;
            if absorbed.is_none() && merged & 1 == 1 {
                absorbed = Some((step, clock, blocks.len()));
            }
            path.x.push(lost);
            path.y.push(blocks.len());
            path.waits.push(wait);
        }
        path.tau = path.x.len();
        let (sigma, t_len, y_at_sigma) = absorbed.expect("all blocks merge eventually");
        (
            ExternalBranchSample {
                sigma,
                t_len,
                tau: path.tau,
                y_at_sigma,
            },
            path,
        )
    }
}

/// Simulates the partition-valued `n`-coalescent explicitly (`n <= 12`).
pub fn full_partition_simulate(
    table: &RateTable,
    n: usize,
    seed: SeedSpec,
) -> Result<(ExternalBranchSample, JumpChainPath)> {
    Ok(PartitionSampler::new(table, n)?.sample(seed))
}
