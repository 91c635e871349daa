use rand::Rng;
use rand_distr::Exp1;

use super::{check_n, sample_first_jump};
use crate::error::Result;
use crate::rates::RateTable;
use crate::rng::SeedSpec;

/// External branch length of individual 1 from the recursive construction:
/// run the coalescent of individuals `2..n` and attach `{1}` to it.
///
/// While the other lineages hold `b` blocks, `{1}` joins one of them in a
/// binary merger at rate `b * lambda_{b+1,2}` (a competing exponential clock
/// raced against the holding time). When the other lineages merge `k` blocks,
/// `{1}` joins that merger with probability `1 - lambda_{b+1,k} / lambda_{b,k}`.
/// Returns the first connection time.
pub fn cox_external_branch(table: &RateTable, n: usize, seed: SeedSpec) -> Result<f64> {
    check_n(table, n)?;
    let mut rng = seed.rng();
    let mut b = n - 1;
    let mut clock = 0.0;
    loop {
        let binary_rate = b as f64 * table.pair_rate(b + 1);
        let race: f64 = rng.sample(Exp1);
        if b == 1 {
            return Ok(clock + race / binary_rate);
        }
        let e: f64 = rng.sample(Exp1);
        let wait = e / table.g(b);
        if race < binary_rate * wait {
            return Ok(clock + race / binary_rate);
        }
        clock += wait;
        let x = sample_first_jump(table, b, &mut rng);
        let join = 1.0 - table.stay_out_ratio(b, x + 1);
        debug_assert!(
            (-1e-12..=1.0 + 1e-12).contains(&join),
            "join probability {join} at b={b}, k={}",
            x + 1
        );
        let u: f64 = rng.random();
        if u < join {
            return Ok(clock);
        }
        b -= x;
    }
}
