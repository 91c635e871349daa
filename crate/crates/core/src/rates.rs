//! Merger rates `lambda_{b,k}`, total rates `g_b`, and the law of the number
//! of blocks lost at one collision.

use crate::error::{out_of_range, Result};
use crate::measures::{CoalescentMeasure, MeasureKind};
use crate::quadrature::{integrate_unit, Tolerance};
use crate::special::{ln_beta, ln_choose, ln_gamma};

pub use crate::special::binomial_tail;

#[derive(Debug, Clone)]
enum Model {
    Kingman,
    /// Log-gamma caches indexed by `m = 0..=n_max`:
    /// `ln Gamma(m + a)`, `ln Gamma(m + b)`, `ln Gamma(m + a + b)`.
    Beta {
        a: f64,
        b: f64,
        ln_norm: f64,
        lg_a: Vec<f64>,
        lg_b: Vec<f64>,
        lg_ab: Vec<f64>,
    },
    Density,
}

/// Precomputed rate arithmetic for block counts up to `n_max`.
#[derive(Debug, Clone)]
pub struct RateTable {
    measure: CoalescentMeasure,
    n_max: usize,
    model: Model,
    /// `lambda_{b,2}`, indexed by `b`.
    pair: Vec<f64>,
    /// `g_b`, indexed by `b`.
    total: Vec<f64>,
}

/// The pmf of the number of blocks lost at a collision from `b` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstJumpLaw {
    pub b: usize,
    /// `pmf[k - 1] = P(X = k)` for `k = 1..b-1`.
    pub pmf: Vec<f64>,
}

impl FirstJumpLaw {
    pub fn prob(&self, k: usize) -> f64 {
        if k == 0 || k >= self.b {
            0.0
        } else {
            self.pmf[k - 1]
        }
    }

    /// `P(X >= k)`.
    pub fn tail(&self, k: usize) -> f64 {
        if k == 0 {
            return 1.0;
        }
        self.pmf.iter().skip(k - 1).sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn moment(&self, power: i32) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(i, p)| ((i + 1) as f64).powi(power) * p)
            .sum()
    }

    /// `E[exp(-u X)]`.
    pub fn laplace(&self, u: f64) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(i, p)| (-u * (i + 1) as f64).exp() * p)
            .sum()
    }
}

/// `int_0^1 x^(k-2) (1-x)^(b-k) Lambda(dx)` by adaptive quadrature.
///
/// Works for every measure kind; the Kingman atom contributes `1{k = 2}`.
pub fn lambda_by_quadrature(measure: &CoalescentMeasure, b: usize, k: usize) -> f64 {
    if measure.is_kingman() {
        return if k == 2 { 1.0 } else { 0.0 };
    }
    let (pk, pb) = ((k - 2) as i32, (b - k) as i32);
    integrate_unit(
        &|x: f64| x.powi(pk) * (1.0 - x).powi(pb) * measure.lambda_density(x),
        0.0,
        1.0,
        Tolerance::default(),
    )
}

impl RateTable {
    /// Builds the table for block counts `2..=n_max`.
    pub fn new(measure: &CoalescentMeasure, n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(out_of_range("n_max", format!("{n_max} < 2")));
        }
        let model = match &measure.kind {
            MeasureKind::KingmanAtom => Model::Kingman,
            MeasureKind::Beta { a, b } => {
                let cache = |shift: f64| (0..=n_max).map(|m| ln_gamma(m as f64 + shift)).collect();
                Model::Beta {
                    a: *a,
                    b: *b,
                    ln_norm: ln_beta(*a, *b),
                    lg_a: cache(*a),
                    lg_b: cache(*b),
                    lg_ab: cache(a + b),
                }
            }
            MeasureKind::GeneralDensity(_) => Model::Density,
        };
        let mut table = RateTable {
            measure: measure.clone(),
            n_max,
            model,
            pair: vec![0.0; n_max + 1],
            total: vec![0.0; n_max + 1],
        };
        for b in 2..=n_max {
            table.pair[b] = table.lambda_unchecked(b, 2);
        }
        // g_{b+1} = g_b + b * lambda_{b+1,2}
        table.total[2] = table.pair[2];
        for b in 2..n_max {
            table.total[b + 1] = table.total[b] + b as f64 * table.pair[b + 1];
        }
        Ok(table)
    }

    pub fn measure(&self) -> &CoalescentMeasure {
        &self.measure
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn is_kingman(&self) -> bool {
        matches!(self.model, Model::Kingman)
    }

    fn check_b(&self, b: usize) -> Result<()> {
        if b < 2 || b > self.n_max {
            return Err(out_of_range(
                "block count",
                format!("b = {b} not in [2, {}]", self.n_max),
            ));
        }
        Ok(())
    }

    /// Cached `ln Gamma(m + a)` values (Beta kind only).
    pub fn log_gamma_cache(&self) -> Option<[&[f64]; 3]> {
        match &self.model {
            Model::Beta {
                lg_a, lg_b, lg_ab, ..
            } => Some([lg_a, lg_b, lg_ab]),
            _ => None,
        }
    }

    #[inline]
    fn ln_lambda_beta(&self, b: usize, k: usize) -> f64 {
        match &self.model {
            Model::Beta {
                ln_norm,
                lg_a,
                lg_b,
                lg_ab,
                ..
            } => lg_a[k - 2] + lg_b[b - k] - lg_ab[b - 2] - ln_norm,
            _ => unreachable!("Beta model only"),
        }
    }

    fn lambda_unchecked(&self, b: usize, k: usize) -> f64 {
        match &self.model {
            Model::Kingman => {
                if k == 2 {
                    1.0
                } else {
                    0.0
                }
            }
            Model::Beta { .. } => self.ln_lambda_beta(b, k).exp(),
            Model::Density => lambda_by_quadrature(&self.measure, b, k),
        }
    }

    /// Rate `lambda_{b,k}` at which a given set of `k` of `b` blocks merges.
    pub fn lambda(&self, b: usize, k: usize) -> Result<f64> {
        self.check_b(b)?;
        if k < 2 || k > b {
            return Err(out_of_range(
                "merger size",
                format!("k = {k} not in [2, {b}]"),
            ));
        }
        Ok(self.lambda_unchecked(b, k))
    }

    /// Total collision rate `g_n`.
    pub fn total_rate(&self, n: usize) -> Result<f64> {
        self.check_b(n)?;
        Ok(self.total[n])
    }

    #[inline]
    pub(crate) fn g(&self, b: usize) -> f64 {
        self.total[b]
    }

    /// `lambda_{b,2}` for `2 <= b <= n_max`.
    #[inline]
    pub(crate) fn pair_rate(&self, b: usize) -> f64 {
        self.pair[b]
    }

    /// `g_n` as the direct sum `sum_k C(n,k) lambda_{n,k}`.
    pub fn total_rate_sum(&self, n: usize) -> Result<f64> {
        self.check_b(n)?;
        Ok(match &self.model {
            Model::Kingman => (n * (n - 1) / 2) as f64,
            Model::Beta { .. } => (2..=n)
                .map(|k| (ln_choose(n, k) + self.ln_lambda_beta(n, k)).exp())
                .sum(),
            Model::Density => (2..=n)
                .map(|k| ln_choose(n, k).exp() * self.lambda_unchecked(n, k))
                .sum(),
        })
    }

    /// `g_n` as `n(n-1) int_0^1 (1-t)^(n-2) t rho(t) dt`, plus `C(n,2)` times
    /// the mass of an atom at 0.
    pub fn total_rate_integral(&self, n: usize) -> Result<f64> {
        self.check_b(n)?;
        if self.is_kingman() {
            return Ok((n * (n - 1) / 2) as f64);
        }
        let m = &self.measure;
        let pn = (n - 2) as i32;
        let integral = integrate_unit(
            &|t: f64| (1.0 - t).powi(pn) * t * m.rho(t).unwrap_or(0.0),
            0.0,
            1.0,
            Tolerance::default(),
        );
        Ok((n * (n - 1)) as f64 * integral)
    }

    /// `P(X = k)` when `b` blocks are present.
    fn pmf_unchecked(&self, b: usize, k: usize) -> f64 {
        match &self.model {
            Model::Kingman => {
                if k == 1 {
                    1.0
                } else {
                    0.0
                }
            }
            Model::Beta { .. } => {
                (ln_choose(b, k + 1) + self.ln_lambda_beta(b, k + 1) - self.total[b].ln()).exp()
            }
            Model::Density => {
                ln_choose(b, k + 1).exp() * self.lambda_unchecked(b, k + 1) / self.total[b]
            }
        }
    }

    /// `P(X = 1)`, the probability that a collision is binary.
    #[inline]
    pub(crate) fn binary_prob(&self, b: usize) -> f64 {
        let bf = b as f64;
        0.5 * bf * (bf - 1.0) * self.pair[b] / self.total[b]
    }

    /// `P(X = k + 1) / P(X = k)` for `1 <= k <= b - 2`.
    #[inline]
    pub(crate) fn pmf_ratio(&self, b: usize, k: usize) -> f64 {
        match &self.model {
            Model::Kingman => 0.0,
            Model::Beta { a, b: bb, .. } => {
                let (bf, kf) = (b as f64, k as f64);
                (bf - kf - 1.0) * (kf - 1.0 + a) / ((kf + 2.0) * (bf - kf - 2.0 + bb))
            }
            Model::Density => {
                let bf = b as f64;
                let kf = k as f64;
                (bf - kf - 1.0) / (kf + 2.0) * self.lambda_unchecked(b, k + 2)
                    / self.lambda_unchecked(b, k + 1)
            }
        }
    }

    /// `lambda_{b+1,k} / lambda_{b,k}`, the probability that an extra block
    /// stays out of a `k`-merger among `b` blocks.
    #[inline]
    pub(crate) fn stay_out_ratio(&self, b: usize, k: usize) -> f64 {
        match &self.model {
            Model::Kingman => 1.0,
            Model::Beta { a, b: bb, .. } => (b as f64 - k as f64 + bb) / (b as f64 - 2.0 + a + bb),
            Model::Density => self.lambda_unchecked(b + 1, k) / self.lambda_unchecked(b, k),
        }
    }

    /// Probability that an extra block joins a `k`-merger among `b` blocks,
    /// `1 - lambda_{b+1,k} / lambda_{b,k}`. Requires `b + 1 <= n_max`.
    pub fn join_probability(&self, b: usize, k: usize) -> Result<f64> {
        self.lambda(b + 1, k)?;
        self.lambda(b, k)?;
        Ok(1.0 - self.stay_out_ratio(b, k))
    }

    /// Full pmf of the blocks lost at one collision from `b` blocks.
    pub fn first_jump_law(&self, b: usize) -> Result<FirstJumpLaw> {
        self.check_b(b)?;
        let pmf = (1..b).map(|k| self.pmf_unchecked(b, k)).collect();
        Ok(FirstJumpLaw { b, pmf })
    }

    /// `P(X >= k)` via the integral ratio of the tail form; validation path.
    pub fn first_jump_tail_integral(&self, b: usize, k: usize) -> Result<f64> {
        self.check_b(b)?;
        if k == 0 || k >= b {
            return Err(out_of_range(
                "jump size",
                format!("k = {k} not in [1, {}]", b - 1),
            ));
        }
        if self.is_kingman() {
            return Ok(if k == 1 { 1.0 } else { 0.0 });
        }
        let m = &self.measure;
        let num = integrate_unit(
            &|t: f64| {
                (1.0 - t).powi((b - k - 1) as i32) * t.powi(k as i32) * m.rho(t).unwrap_or(0.0)
            },
            0.0,
            1.0,
            Tolerance::default(),
        );
        let den = integrate_unit(
            &|t: f64| (1.0 - t).powi((b - 2) as i32) * t * m.rho(t).unwrap_or(0.0),
            0.0,
            1.0,
            Tolerance::default(),
        );
        let ln_coef =
            ln_gamma((b - 1) as f64) - ln_gamma((k + 1) as f64) - ln_gamma((b - k) as f64);
        Ok(ln_coef.exp() * num / den)
    }

    pub fn first_jump_mean(&self, b: usize) -> Result<f64> {
        if self.is_kingman() {
            self.check_b(b)?;
            return Ok(1.0);
        }
        Ok(self.first_jump_law(b)?.mean())
    }

    /// `E[X^2] g_b / b^2`, bounded in `b` under the regular-variation hypothesis.
    pub fn second_moment_diagnostic(&self, b: usize) -> Result<f64> {
        let law = self.first_jump_law(b)?;
        Ok(law.moment(2) * self.total[b] / (b as f64 * b as f64))
    }

    /// Laplace transform `E[exp(-u X)]` of the blocks lost from `b` blocks.
    pub fn laplace_x1(&self, b: usize, u: f64) -> Result<f64> {
        if u < 0.0 {
            return Err(crate::error::Error::DomainError(format!("u = {u} < 0")));
        }
        if self.is_kingman() {
            self.check_b(b)?;
            return Ok((-u).exp());
        }
        Ok(self.first_jump_law(b)?.laplace(u))
    }
}
