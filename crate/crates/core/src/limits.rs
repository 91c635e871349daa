//! Closed-form limit laws and the deterministic curves of the limit theorems.
//!
//! Laws carry `(alpha, C0)` directly rather than a measure, so the Kingman,
//! exponential and Bolthausen–Sznitman cases share one interface.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LawName {
    /// `Beta(1, alpha)`: limit of `sigma / (n (alpha - 1))` and of `sigma / tau`.
    SigmaBeta1Alpha,
    /// Limit of `n^(alpha-1) T`.
    TLenBetaClass,
    /// Limit of `Y_sigma / n`, density `alpha x^(alpha-1)`.
    BlockCountBetaClass,
    /// Kingman analogue of `BlockCountBetaClass`, density `2x`.
    BlockCountKingman,
    /// Limit of `n T` for Kingman, density `8 / (2 + t)^3`.
    TLenKingman,
    /// `Exp(mu_-1)`, limit of `T` when `mu_-1 < infinity`.
    TLenExpFinite,
    /// `Exp(1)`, limit of `log(n) T` for Bolthausen–Sznitman.
    BsTLen,
    /// `Uniform(0, 1)`, limit of `log(n) sigma / n` for Bolthausen–Sznitman.
    BsSigma,
}

/// An analytic distribution: cdf, density and quantile function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    pub name: LawName,
    /// Exponent parameter (alpha, or 2 for the Kingman Beta(1, 2) law).
    pub alpha: f64,
    /// `C0 Gamma(2 - alpha)` for `TLenBetaClass`; the rate for exponential laws.
    pub scale: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::BadAlpha(alpha))
    }
}

/// `C0 Gamma(2 - alpha)`.
fn rate_constant(alpha: f64, c0: f64) -> f64 {
    c0 * ln_gamma(2.0 - alpha).exp()
}

/// `C0` of the Beta(2 - alpha, alpha) coalescent, `1 / (alpha Gamma(alpha) Gamma(2 - alpha))`.
pub fn beta_class_c0(alpha: f64) -> f64 {
    1.0 / (alpha * (ln_gamma(alpha) + ln_gamma(2.0 - alpha)).exp())
}

pub fn sigma_limit(alpha: f64) -> Result<LimitLaw> {
    check_alpha(alpha)?;
    Ok(LimitLaw {
        name: LawName::SigmaBeta1Alpha,
        alpha,
        scale: 1.0,
    })
}

/// `Beta(1, 2)`, the Kingman limit of `sigma / n`.
pub fn kingman_sigma_limit() -> LimitLaw {
    LimitLaw {
        name: LawName::SigmaBeta1Alpha,
        alpha: 2.0,
        scale: 1.0,
    }
}

pub fn t_limit(alpha: f64, c0: f64) -> Result<LimitLaw> {
    check_alpha(alpha)?;
    if c0.is_nan() || c0 <= 0.0 {
        return Err(Error::DomainError(format!("C0 must be positive, got {c0}")));
    }
    Ok(LimitLaw {
        name: LawName::TLenBetaClass,
        alpha,
        scale: rate_constant(alpha, c0),
    })
}

/// Limit law of `Y_sigma / n`: cdf `x^alpha` on `[0, 1]`.
pub fn y_sigma_limit(alpha: f64) -> Result<LimitLaw> {
    check_alpha(alpha)?;
    Ok(LimitLaw {
        name: LawName::BlockCountBetaClass,
        alpha,
        scale: 1.0,
    })
}

pub fn kingman_y_sigma_limit() -> LimitLaw {
    LimitLaw {
        name: LawName::BlockCountKingman,
        alpha: 2.0,
        scale: 1.0,
    }
}

pub fn kingman_t_limit() -> LimitLaw {
    LimitLaw {
        name: LawName::TLenKingman,
        alpha: 2.0,
        scale: 1.0,
    }
}

pub fn exp_limit(mu1: f64) -> Result<LimitLaw> {
    if !(mu1 > 0.0 && mu1.is_finite()) {
        return Err(Error::DomainError(format!(
            "mu_-1 must be finite and positive, got {mu1}"
        )));
    }
    Ok(LimitLaw {
        name: LawName::TLenExpFinite,
        alpha: f64::NAN,
        scale: mu1,
    })
}

pub fn bs_t_limit() -> LimitLaw {
    LimitLaw {
        name: LawName::BsTLen,
        alpha: 1.0,
        scale: 1.0,
    }
}

pub fn bs_sigma_limit() -> LimitLaw {
    LimitLaw {
        name: LawName::BsSigma,
        alpha: 1.0,
        scale: 1.0,
    }
}

impl LimitLaw {
    pub fn cdf(&self, x: f64) -> f64 {
        let a = self.alpha;
        match self.name {
            LawName::SigmaBeta1Alpha => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    -(a * (-x).ln_1p()).exp_m1()
                }
            }
            LawName::BlockCountBetaClass | LawName::BlockCountKingman => x.clamp(0.0, 1.0).powf(a),
            LawName::TLenBetaClass => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-a / (a - 1.0) * (self.scale * x).ln_1p()).exp_m1()
                }
            }
            LawName::TLenKingman => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - 4.0 / ((2.0 + x) * (2.0 + x))
                }
            }
            LawName::TLenExpFinite | LawName::BsTLen => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-self.scale * x).exp_m1()
                }
            }
            LawName::BsSigma => x.clamp(0.0, 1.0),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let a = self.alpha;
        match self.name {
            LawName::SigmaBeta1Alpha => {
                if (0.0..=1.0).contains(&x) {
                    a * (1.0 - x).powf(a - 1.0)
                } else {
                    0.0
                }
            }
            LawName::BlockCountBetaClass | LawName::BlockCountKingman => {
                if (0.0..=1.0).contains(&x) {
                    a * x.powf(a - 1.0)
                } else {
                    0.0
                }
            }
            LawName::TLenBetaClass => {
                if x < 0.0 {
                    0.0
                } else {
                    let k = self.scale;
                    a * k / (a - 1.0) * (1.0 + k * x).powf(-a / (a - 1.0) - 1.0)
                }
            }
            LawName::TLenKingman => {
                if x < 0.0 {
                    0.0
                } else {
                    8.0 / (2.0 + x).powi(3)
                }
            }
            LawName::TLenExpFinite | LawName::BsTLen => {
                if x < 0.0 {
                    0.0
                } else {
                    self.scale * (-self.scale * x).exp()
                }
            }
            LawName::BsSigma => {
                if (0.0..=1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Inverse cdf on `(0, 1)`.
    pub fn quantile(&self, p: f64) -> f64 {
        let a = self.alpha;
        match self.name {
            LawName::SigmaBeta1Alpha => -((-p).ln_1p() / a).exp_m1(),
            LawName::BlockCountBetaClass | LawName::BlockCountKingman => p.powf(1.0 / a),
            LawName::TLenBetaClass => ((-(a - 1.0) / a * (-p).ln_1p()).exp_m1()) / self.scale,
            LawName::TLenKingman => 2.0 / (1.0 - p).sqrt() - 2.0,
            LawName::TLenExpFinite | LawName::BsTLen => -(-p).ln_1p() / self.scale,
            LawName::BsSigma => p,
        }
    }

    /// `(name, value)` pairs describing the parameters.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match self.name {
            LawName::TLenBetaClass => vec![("alpha", self.alpha), ("c0_gamma", self.scale)],
            LawName::TLenExpFinite => vec![("mu_minus_1", self.scale)],
            LawName::BsTLen | LawName::BsSigma | LawName::TLenKingman => vec![],
            _ => vec![("alpha", self.alpha)],
        }
    }

    /// `(x, cdf, pdf)` on a uniform grid of `points` values over `[lo, hi]`.
    pub fn tabulate(&self, lo: f64, hi: f64, points: usize) -> Vec<(f64, f64, f64)> {
        let steps = points.max(2) - 1;
        (0..=steps)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / steps as f64;
                (x, self.cdf(x), self.pdf(x))
            })
            .collect()
    }
}

/// `(1 + C0 Gamma(2-alpha) t)^(-1/(alpha-1))`, the limit of `R(t n^(1-alpha)) / n`.
pub fn block_limit(alpha: f64, c0: f64, t: f64) -> f64 {
    (-(rate_constant(alpha, c0) * t).ln_1p() / (alpha - 1.0)).exp()
}

/// `(1 + t/2)^-1`, the Kingman limit of `R(t / n) / n`.
pub fn kingman_block_limit(t: f64) -> f64 {
    1.0 / (1.0 + 0.5 * t)
}

/// `r(t) = (alpha-1) (1 - (1 + C0 Gamma(2-alpha) t)^(-1/(alpha-1)))`: the
/// scaled number of collisions by time `t n^(1-alpha)`.
pub fn r_of_t(alpha: f64, c0: f64, t: f64) -> f64 {
    (alpha - 1.0) * -(-(rate_constant(alpha, c0) * t).ln_1p() / (alpha - 1.0)).exp_m1()
}

/// Inverse of [`r_of_t`]: `((1 - r/(alpha-1))^(1-alpha) - 1) / (C0 Gamma(2-alpha))`,
/// the scaled time of collision `floor(n r)`.
pub fn jump_time_limit(alpha: f64, c0: f64, r: f64) -> f64 {
    ((1.0 - alpha) * (-r / (alpha - 1.0)).ln_1p()).exp_m1() / rate_constant(alpha, c0)
}

/// `nu_eta(t) = int_0^t (1 - x/(alpha-1))^-eta dx` for `0 <= t < alpha - 1`.
pub fn nu_eta(alpha: f64, eta: f64, t: f64) -> Result<f64> {
    let gamma = alpha - 1.0;
    if !(t >= 0.0 && t < gamma) {
        return Err(Error::DomainError(format!("t = {t} outside [0, {gamma})")));
    }
    let log_base = (-t / gamma).ln_1p();
    if (eta - 1.0).abs() < 1e-12 {
        return Ok(-gamma * log_base);
    }
    Ok(-gamma * ((1.0 - eta) * log_base).exp_m1() / (1.0 - eta))
}

/// `v_alpha(t) = nu_alpha(t)`.
pub fn v_alpha(alpha: f64, t: f64) -> Result<f64> {
    nu_eta(alpha, alpha, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_unit, Tolerance};
    use approx::assert_relative_eq;

    #[test]
    fn sigma_law_values() {
        let law = sigma_limit(1.5).unwrap();
        assert_eq!(law.cdf(0.0), 0.0);
        assert_eq!(law.cdf(1.0), 1.0);
        assert_relative_eq!(law.cdf(0.5), 1.0 - 0.5f64.powf(1.5), max_relative = 1e-14);
        assert_relative_eq!(law.cdf(0.5), 0.646447, epsilon = 1e-6);
        assert_relative_eq!(law.pdf(0.0), 1.5);
        assert!(matches!(sigma_limit(2.0), Err(Error::BadAlpha(_))));
        assert!(matches!(sigma_limit(1.0), Err(Error::BadAlpha(_))));
    }

    #[test]
    fn t_law_values() {
        let alpha = 1.5;
        let c0 = beta_class_c0(alpha);
        let law = t_limit(alpha, c0).unwrap();
        assert_eq!(law.cdf(0.0), 0.0);
        // median: 1.5 Gamma(1.5) (2^(1/3) - 1)
        let g15 = ln_gamma(1.5).exp();
        let median = 1.5 * g15 * (2f64.powf(1.0 / 3.0) - 1.0);
        assert_relative_eq!(median, 0.345524, epsilon = 1e-6);
        assert_relative_eq!(law.cdf(median), 0.5, max_relative = 1e-12);
        assert_relative_eq!(law.quantile(0.5), median, max_relative = 1e-12);
        // pdf(0) = alpha C0 Gamma(2-alpha) / (alpha - 1)
        let k = c0 * ln_gamma(0.5).exp();
        assert_relative_eq!(
            law.pdf(0.0),
            alpha * k / (alpha - 1.0),
            max_relative = 1e-13
        );
        // Beta special case of the density
        let t = 0.8;
        let special = 1.0 / ((alpha - 1.0) * g15)
            * (1.0 + t / (alpha * g15)).powf(-alpha / (alpha - 1.0) - 1.0);
        assert_relative_eq!(law.pdf(t), special, max_relative = 1e-12);
    }

    #[test]
    fn block_curves() {
        let alpha = 1.5;
        let c0 = beta_class_c0(alpha);
        assert_eq!(block_limit(alpha, c0, 0.0), 1.0);
        // (1 + 1/(1.5 Gamma(1.5)))^-2
        let direct = (1.0 + 1.0 / (1.5 * ln_gamma(1.5).exp())).powi(-2);
        assert_relative_eq!(block_limit(alpha, c0, 1.0), direct, max_relative = 1e-14);
        assert_relative_eq!(block_limit(alpha, c0, 1.0), 0.325692, epsilon = 1e-6);
        assert_eq!(kingman_block_limit(0.0), 1.0);
        assert_eq!(kingman_block_limit(2.0), 0.5);
        assert_eq!(kingman_block_limit(6.0), 0.25);
    }

    #[test]
    fn kingman_and_exponential_laws() {
        let k = kingman_t_limit();
        assert_eq!(k.cdf(0.0), 0.0);
        assert_eq!(k.cdf(2.0), 0.75);
        assert_eq!(k.pdf(0.0), 1.0);
        let e = exp_limit(2.5).unwrap();
        assert_eq!(e.cdf(0.0), 0.0);
        let mean = integrate(&|x: f64| x * e.pdf(x), 0.0, 40.0, Tolerance::default()).value;
        assert_relative_eq!(mean, 1.0 / 2.5, max_relative = 1e-10);
    }

    #[test]
    fn r_of_t_round_trip() {
        let alpha = 1.5;
        let c0 = beta_class_c0(alpha);
        assert_eq!(r_of_t(alpha, c0, 0.0), 0.0);
        assert_relative_eq!(r_of_t(alpha, c0, 1e12), alpha - 1.0, max_relative = 1e-6);
        for &t in &[0.01, 1.0, 7.5] {
            let back = jump_time_limit(alpha, c0, r_of_t(alpha, c0, t));
            assert!((back - t).abs() <= 1e-10 * t.max(1.0));
        }
    }

    #[test]
    fn nu_eta_values() {
        let alpha = 1.5;
        assert_relative_eq!(nu_eta(alpha, 0.0, 0.3).unwrap(), 0.3, max_relative = 1e-14);
        let want = -(alpha - 1.0) * (1.0f64 - 0.3 / (alpha - 1.0)).ln();
        assert_relative_eq!(nu_eta(alpha, 1.0, 0.3).unwrap(), want, max_relative = 1e-14);
        // quadrature oracle
        let quad = integrate(
            &|x: f64| (1.0 - x / (alpha - 1.0)).powf(-1.5),
            0.0,
            0.25,
            Tolerance::default(),
        )
        .value;
        assert!((nu_eta(alpha, 1.5, 0.25).unwrap() - quad).abs() <= 1e-10);
        assert_eq!(
            v_alpha(alpha, 0.25).unwrap(),
            nu_eta(alpha, alpha, 0.25).unwrap()
        );
        assert!(nu_eta(alpha, 1.0, 0.5).is_err());
    }

    fn all_laws() -> Vec<(LimitLaw, f64, f64)> {
        let alpha = 1.3;
        vec![
            (sigma_limit(alpha).unwrap(), 0.0, 1.0),
            (kingman_sigma_limit(), 0.0, 1.0),
            (t_limit(alpha, 0.8).unwrap(), 0.0, f64::INFINITY),
            (y_sigma_limit(alpha).unwrap(), 0.0, 1.0),
            (kingman_y_sigma_limit(), 0.0, 1.0),
            (kingman_t_limit(), 0.0, f64::INFINITY),
            (exp_limit(1.7).unwrap(), 0.0, f64::INFINITY),
            (bs_t_limit(), 0.0, f64::INFINITY),
            (bs_sigma_limit(), 0.0, 1.0),
        ]
    }

    #[test]
    fn pdf_integrates_to_one() {
        for (law, lo, hi) in all_laws() {
            let total = if hi.is_finite() {
                integrate_unit(&|x: f64| law.pdf(x), lo, hi, Tolerance::default())
            } else {
                // x = u / (1 - u) maps [0, 1) onto [0, inf)
                integrate_unit(
                    &|u: f64| law.pdf(u / (1.0 - u)) / ((1.0 - u) * (1.0 - u)),
                    0.0,
                    1.0,
                    Tolerance::default(),
                )
            };
            assert!((total - 1.0).abs() <= 1e-8, "{:?}: {total}", law.name);
        }
    }

    #[test]
    fn cdf_derivative_matches_pdf() {
        for (law, _, hi) in all_laws() {
            let top = if hi.is_finite() { 0.95 } else { 10.0 };
            for i in 1..40 {
                let x = top * i as f64 / 40.0;
                let h = 1e-5 * x.max(1e-3);
                let d = (law.cdf(x + h) - law.cdf(x - h)) / (2.0 * h);
                assert!(
                    (d - law.pdf(x)).abs() <= 1e-6 * law.pdf(x).max(1.0),
                    "{:?} at {x}: {d} vs {}",
                    law.name,
                    law.pdf(x)
                );
            }
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for (law, _, _) in all_laws() {
            for &p in &[0.01, 0.3, 0.5, 0.9, 0.999] {
                assert_relative_eq!(law.cdf(law.quantile(p)), p, max_relative = 1e-12);
            }
        }
    }
}
