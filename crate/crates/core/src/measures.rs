//! The driving measure `Lambda` of a Lambda-coalescent, its tail
//! `rho(t) = int_t^1 x^-2 Lambda(dx)` and regular-variation constants.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_unit, Tolerance};
use crate::special::{ln_beta, ln_gamma, upper_incomplete_beta};

/// A probability (or finite) density on `(0, 1]`, registered under a name.
#[derive(Clone)]
pub struct NamedDensity {
    pub name: String,
    density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub total_mass: f64,
}

impl NamedDensity {
    pub fn new(
        name: impl Into<String>,
        total_mass: f64,
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        NamedDensity {
            name: name.into(),
            density: Arc::new(density),
            total_mass,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.density)(x)
    }
}

impl fmt::Debug for NamedDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NamedDensity")
            .field("name", &self.name)
            .field("total_mass", &self.total_mass)
            .finish()
    }
}

/// Names accepted by [`named_density`].
pub const DENSITY_REGISTRY: &[&str] = &["beta-2ma-a", "power"];

/// Looks up a built-in density family, instantiated at `alpha`.
///
/// * `beta-2ma-a`: the Beta(2-alpha, alpha) density.
/// * `power`: `(2-alpha) x^(1-alpha)` on `(0, 1]`, i.e. Beta(2-alpha, 1).
pub fn named_density(name: &str, alpha: f64) -> Result<NamedDensity> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::BadAlpha(alpha));
    }
    match name {
        "beta-2ma-a" => {
            let a = 2.0 - alpha;
            let b = alpha;
            let ln_norm = ln_beta(a, b);
            Ok(NamedDensity::new(name, 1.0, move |x: f64| {
                ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_norm).exp()
            }))
        }
        "power" => Ok(NamedDensity::new(name, 1.0, move |x: f64| {
            (2.0 - alpha) * x.powf(1.0 - alpha)
        })),
        other => Err(Error::UnknownDensity(other.to_string())),
    }
}

/// Which family the measure belongs to.
#[derive(Debug, Clone)]
pub enum MeasureKind {
    /// `Lambda = delta_0`.
    KingmanAtom,
    /// The Beta(a, b) probability distribution.
    Beta { a: f64, b: f64 },
    /// A density on `(0, 1]` with user-declared regularity constants.
    GeneralDensity(NamedDensity),
}

/// Result of `int x^-order Lambda(dx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Moment {
    Finite(f64),
    Infinite,
}

impl Moment {
    pub fn finite(self) -> Option<f64> {
        match self {
            Moment::Finite(v) => Some(v),
            Moment::Infinite => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CoalescentMeasure {
    pub kind: MeasureKind,
    c0: Option<f64>,
    alpha: Option<f64>,
    pub hypothesis_ok: bool,
}

impl CoalescentMeasure {
    pub fn kingman() -> Self {
        CoalescentMeasure {
            kind: MeasureKind::KingmanAtom,
            c0: None,
            alpha: None,
            hypothesis_ok: false,
        }
    }

    /// Beta(a, b). With `a in (0, 1)` the regular-variation constants are
    /// derived (`alpha = 2 - a`, `C0 = 1 / ((2 - a) B(a, b))`) and the
    /// hypothesis is certified. `Beta(1, 1)` is labelled `alpha = 1`.
    pub fn beta(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidMeasure(format!(
                "Beta parameters must be positive, got ({a}, {b})"
            )));
        }
        let (c0, alpha, ok) = if a < 1.0 {
            let alpha = 2.0 - a;
            (Some(1.0 / (alpha * ln_beta(a, b).exp())), Some(alpha), true)
        } else if a == 1.0 && b == 1.0 {
            (None, Some(1.0), false)
        } else {
            (None, None, false)
        };
        Ok(CoalescentMeasure {
            kind: MeasureKind::Beta { a, b },
            c0,
            alpha,
            hypothesis_ok: ok,
        })
    }

    /// The Beta(2 - alpha, alpha) coalescent.
    pub fn beta_alpha(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::BadAlpha(alpha));
        }
        Self::beta(2.0 - alpha, alpha)
    }

    pub fn bolthausen_sznitman() -> Self {
        Self::beta(1.0, 1.0).expect("valid parameters")
    }

    /// A general density with declared `(C0, alpha)`; the hypothesis is taken
    /// as asserted by the caller.
    pub fn density(density: NamedDensity, c0: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::BadAlpha(alpha));
        }
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::InvalidMeasure(format!(
                "C0 must be positive, got {c0}"
            )));
        }
        if !(density.total_mass > 0.0 && density.total_mass.is_finite()) {
            return Err(Error::InvalidMeasure(
                "total mass must be finite and positive".into(),
            ));
        }
        Ok(CoalescentMeasure {
            kind: MeasureKind::GeneralDensity(density),
            c0: Some(c0),
            alpha: Some(alpha),
            hypothesis_ok: true,
        })
    }

    pub fn is_kingman(&self) -> bool {
        matches!(self.kind, MeasureKind::KingmanAtom)
    }

    pub fn is_bolthausen_sznitman(&self) -> bool {
        matches!(self.kind, MeasureKind::Beta { a, b } if a == 1.0 && b == 1.0)
    }

    /// Label alpha (may be present even when the hypothesis does not hold).
    pub fn alpha_label(&self) -> Option<f64> {
        self.alpha
    }

    pub fn total_mass(&self) -> f64 {
        match &self.kind {
            MeasureKind::KingmanAtom | MeasureKind::Beta { .. } => 1.0,
            MeasureKind::GeneralDensity(d) => d.total_mass,
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            MeasureKind::KingmanAtom => "kingman".to_string(),
            MeasureKind::Beta { a, b } => format!("beta({a},{b})"),
            MeasureKind::GeneralDensity(d) => format!(
                "density({},c0={},alpha={})",
                d.name,
                self.c0.unwrap_or(f64::NAN),
                self.alpha.unwrap_or(f64::NAN)
            ),
        }
    }

    /// Density of `Lambda` at `x in (0, 1)` (zero for the Kingman atom).
    pub fn lambda_density(&self, x: f64) -> f64 {
        match &self.kind {
            MeasureKind::KingmanAtom => 0.0,
            MeasureKind::Beta { a, b } => {
                ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(*a, *b)).exp()
            }
            MeasureKind::GeneralDensity(d) => d.eval(x),
        }
    }

    /// `(C0, alpha)` of `rho(t) = C0 t^-alpha + O(t^(-alpha + zeta))`.
    pub fn c0_alpha(&self) -> Result<(f64, f64)> {
        match (self.hypothesis_ok, self.c0, self.alpha) {
            (true, Some(c0), Some(alpha)) => Ok((c0, alpha)),
            _ => Err(Error::HypothesisUnavailable(self.describe())),
        }
    }

    /// `C0 * Gamma(2 - alpha)`, the constant in front of `n^alpha` in the
    /// asymptotics of the total merger rate.
    pub fn rate_constant(&self) -> Result<f64> {
        let (c0, alpha) = self.c0_alpha()?;
        Ok(c0 * ln_gamma(2.0 - alpha).exp())
    }

    /// `rho(t) = int_t^1 x^-2 Lambda(dx)`.
    pub fn rho(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(match &self.kind {
            MeasureKind::KingmanAtom => 0.0,
            MeasureKind::Beta { a, b } => {
                if t >= 1.0 {
                    return Ok(0.0);
                }
                match upper_incomplete_beta(a - 2.0, *b, t) {
                    Some(v) => v / ln_beta(*a, *b).exp(),
                    None => self.rho_quadrature_unchecked(t),
                }
            }
            MeasureKind::GeneralDensity(_) => self.rho_quadrature_unchecked(t),
        })
    }

    /// `rho` by adaptive quadrature, for any kind.
    pub fn rho_quadrature(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.rho_quadrature_unchecked(t))
    }

    fn rho_quadrature_unchecked(&self, t: f64) -> f64 {
        if self.is_kingman() || t >= 1.0 {
            return 0.0;
        }
        integrate_unit(
            &|x: f64| self.lambda_density(x) / (x * x),
            t,
            1.0,
            Tolerance::default(),
        )
    }

    /// `int x^-order Lambda(dx)`, or `Infinite` when it diverges.
    pub fn mu_minus(&self, order: u32) -> Moment {
        let order_f = order as f64;
        match &self.kind {
            MeasureKind::KingmanAtom => {
                if order == 0 {
                    Moment::Finite(1.0)
                } else {
                    Moment::Infinite
                }
            }
            MeasureKind::Beta { a, b } => {
                if *a > order_f {
                    Moment::Finite((ln_beta(a - order_f, *b) - ln_beta(*a, *b)).exp())
                } else {
                    Moment::Infinite
                }
            }
            MeasureKind::GeneralDensity(d) => {
                // declared density ~ x^(1 - alpha): x^-order integrable iff order < 2 - alpha
                let alpha = self.alpha.unwrap_or(2.0);
                if order_f >= 2.0 - alpha && order > 0 {
                    Moment::Infinite
                } else {
                    Moment::Finite(integrate_unit(
                        &|x: f64| d.eval(x) * x.powi(-(order as i32)),
                        0.0,
                        1.0,
                        Tolerance::default(),
                    ))
                }
            }
        }
    }

    pub fn to_config(&self) -> MeasureConfig {
        match &self.kind {
            MeasureKind::KingmanAtom => MeasureConfig::Kingman,
            MeasureKind::Beta { a, b } => MeasureConfig::Beta { a: *a, b: *b },
            MeasureKind::GeneralDensity(d) => MeasureConfig::Density {
                name: d.name.clone(),
                c0: self.c0.unwrap_or(f64::NAN),
                alpha: self.alpha.unwrap_or(f64::NAN),
            },
        }
    }
}

fn check_t(t: f64) -> Result<()> {
    if t <= 0.0 || t.is_nan() {
        return Err(Error::NonPositiveT(t));
    }
    if t > 1.0 {
        return Err(Error::DomainError(format!("t = {t} exceeds 1")));
    }
    Ok(())
}

/// Serializable description of a measure.
///
/// `{"kind":"beta","a":0.5,"b":1.5}`, `{"kind":"kingman"}` or
/// `{"kind":"density","name":"power","c0":0.333,"alpha":1.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeasureConfig {
    Kingman,
    Beta { a: f64, b: f64 },
    Density { name: String, c0: f64, alpha: f64 },
}

impl MeasureConfig {
    pub fn build(&self) -> Result<CoalescentMeasure> {
        match self {
            MeasureConfig::Kingman => Ok(CoalescentMeasure::kingman()),
            MeasureConfig::Beta { a, b } => CoalescentMeasure::beta(*a, *b),
            MeasureConfig::Density { name, c0, alpha } => {
                CoalescentMeasure::density(named_density(name, *alpha)?, *c0, *alpha)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn kingman_rho_and_moments() {
        let k = CoalescentMeasure::kingman();
        assert_eq!(k.rho(0.5).unwrap(), 0.0);
        assert_eq!(k.mu_minus(1), Moment::Infinite);
        assert!(matches!(k.c0_alpha(), Err(Error::HypothesisUnavailable(_))));
    }

    #[test]
    fn rho_rejects_nonpositive_t() {
        let m = CoalescentMeasure::beta(0.5, 1.5).unwrap();
        assert_eq!(m.rho(0.0), Err(Error::NonPositiveT(0.0)));
        assert_eq!(m.rho(-1.0), Err(Error::NonPositiveT(-1.0)));
    }

    #[test]
    fn rho_vanishes_at_one() {
        let m = CoalescentMeasure::beta(0.5, 1.5).unwrap();
        assert_eq!(m.rho(1.0).unwrap(), 0.0);
    }

    #[test]
    fn beta_constants() {
        let m = CoalescentMeasure::beta(0.5, 1.5).unwrap();
        let (c0, alpha) = m.c0_alpha().unwrap();
        assert_relative_eq!(alpha, 1.5);
        // B(0.5, 1.5) = Gamma(0.5) Gamma(1.5) / Gamma(2) = pi / 2
        assert_relative_eq!(c0, 1.0 / (1.5 * PI / 2.0), max_relative = 1e-13);
        // C0 Gamma(2 - alpha) = 1 / (alpha Gamma(alpha))
        assert_relative_eq!(
            m.rate_constant().unwrap(),
            1.0 / (1.5 * ln_gamma(1.5).exp()),
            max_relative = 1e-13
        );
    }

    #[test]
    fn bolthausen_sznitman_is_labelled_only() {
        let bs = CoalescentMeasure::bolthausen_sznitman();
        assert!(!bs.hypothesis_ok);
        assert_eq!(bs.alpha_label(), Some(1.0));
        assert!(bs.c0_alpha().is_err());
        // rho(t) = 1/t - 1 through the quadrature fallback
        assert_relative_eq!(bs.rho(0.01).unwrap(), 99.0, max_relative = 1e-10);
        assert!(CoalescentMeasure::beta(1.5, 1.5)
            .unwrap()
            .c0_alpha()
            .is_err());
    }

    #[test]
    fn mu_minus_beta_identity() {
        let m = CoalescentMeasure::beta(1.5, 1.5).unwrap();
        let want = (ln_beta(0.5, 1.5) - ln_beta(1.5, 1.5)).exp();
        assert_relative_eq!(m.mu_minus(1).finite().unwrap(), want, max_relative = 1e-14);
        assert_eq!(
            CoalescentMeasure::beta(0.5, 1.5).unwrap().mu_minus(1),
            Moment::Infinite
        );
    }

    #[test]
    fn tail_exponent_fit_recovers_alpha() {
        // slope of log rho against log t over [1e-6, 1e-3]
        let m = CoalescentMeasure::beta(0.2, 1.8).unwrap();
        let (t1, t2) = (1e-6f64, 1e-3f64);
        let slope = (m.rho(t2).unwrap().ln() - m.rho(t1).unwrap().ln()) / (t2.ln() - t1.ln());
        assert!((-slope - 1.8).abs() < 1e-3, "slope {slope}");
        assert_relative_eq!(m.c0_alpha().unwrap().1, 1.8);
    }

    #[test]
    fn config_round_trip() {
        let json = r#"{"kind":"beta","a":0.5,"b":1.5}"#;
        let cfg: MeasureConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg, MeasureConfig::Beta { a: 0.5, b: 1.5 });
        let cfg: MeasureConfig = serde_json::from_str(r#"{"kind":"kingman"}"#).unwrap();
        assert!(cfg.build().unwrap().is_kingman());
        let cfg: MeasureConfig = serde_json::from_str(
            r#"{"kind":"density","name":"power","c0":0.3333333333333333,"alpha":1.5}"#,
        )
        .unwrap();
        let m = cfg.build().unwrap();
        assert!(m.hypothesis_ok);
        assert_eq!(m.to_config(), cfg);
        let bad: MeasureConfig =
            serde_json::from_str(r#"{"kind":"density","name":"nope","c0":1,"alpha":1.5}"#).unwrap();
        assert!(matches!(bad.build(), Err(Error::UnknownDensity(_))));
    }

    #[test]
    fn power_density_constants() {
        // rho(t) = (2-alpha)/alpha (t^-alpha - 1) for the power density
        let alpha = 1.5;
        let m =
            CoalescentMeasure::density(named_density("power", alpha).unwrap(), 1.0 / 3.0, alpha)
                .unwrap();
        let t: f64 = 0.01;
        let want = (2.0 - alpha) / alpha * (t.powf(-alpha) - 1.0);
        assert_relative_eq!(m.rho(t).unwrap(), want, max_relative = 1e-10);
    }
}
