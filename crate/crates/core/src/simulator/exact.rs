use std::collections::BTreeMap;

use super::check_n;
use crate::error::Result;
use crate::rates::RateTable;

/// Exact joint law of `(sigma, Y_sigma)` and `E[T]` for moderate `n`.
#[derive(Debug, Clone)]
pub struct ExactExternalLaw {
    pub n: usize,
    /// `P(sigma = s, Y_sigma = y)` keyed by `(s, y)`.
    pub joint: BTreeMap<(usize, usize), f64>,
    pub mean_t_len: f64,
}

impl ExactExternalLaw {
    pub fn sigma_pmf(&self, sigma: usize) -> f64 {
        self.joint
            .iter()
            .filter(|((s, _), _)| *s == sigma)
            .map(|(_, p)| p)
            .sum()
    }
}

/// Propagates the mass of "`{1}` still a singleton with `b` blocks present"
/// through the jump chain. `O(n^3)`.
pub fn exact_external_law(table: &RateTable, n: usize) -> Result<ExactExternalLaw> {
    check_n(table, n)?;
    let laws = (2..=n)
        .map(|b| table.first_jump_law(b))
        .collect::<Result<Vec<_>>>()?;
    let mut alive = vec![0.0; n + 1];
    alive[n] = 1.0;
    let mut joint = BTreeMap::new();
    let mut mean_t_len = 0.0;
    for step in 1..n {
        let mut next = vec![0.0; n + 1];
        for b in 2..=n {
            let mass = alive[b];
            if mass == 0.0 {
                continue;
            }
            mean_t_len += mass / table.total_rate(b)?;
            let law = &laws[b - 2];
            for x in 1..b {
                let p = law.prob(x);
                let hit = (x + 1) as f64 / b as f64;
                *joint.entry((step, b - x)).or_insert(0.0) += mass * p * hit;
                next[b - x] += mass * p * (1.0 - hit);
            }
        }
        alive = next;
    }
    Ok(ExactExternalLaw {
        n,
        joint,
        mean_t_len,
    })
}
