//! Special functions: log-gamma/log-beta wrappers, binomial tails and the
//! upper incomplete Beta integral with a possibly negative first exponent.

pub use statrs::function::beta::ln_beta;
pub use statrs::function::gamma::ln_gamma;

const SERIES_EPS: f64 = 1e-17;
const SERIES_MAX_TERMS: usize = 2000;

/// `ln C(n, k)` for integers `0 <= k <= n`.
pub fn ln_choose(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `P(B >= k)` for `B ~ Binomial(n, x)`, through the incomplete-Beta identity
/// `P(B >= k) = I_x(k, n - k + 1)`.
pub fn binomial_tail(n: usize, x: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    if k == 1 {
        // complement of zero successes, without cancellation for small x
        return -(n as f64 * (-x).ln_1p()).exp_m1();
    }
    statrs::function::beta::beta_reg(k as f64, (n - k + 1) as f64, x)
}

/// `x^p * sum_j (1-q)_j / j! * x^j / (p + j)`: an antiderivative of
/// `x^(p-1) (1-x)^(q-1)` valid for `0 < x <= 1/2` and `p` not a
/// non-positive integer.
fn lower_antiderivative(p: f64, q: f64, x: f64) -> f64 {
    let mut coef = 1.0;
    let mut pow = 1.0;
    let mut sum = 1.0 / p;
    for j in 1..SERIES_MAX_TERMS {
        let jf = j as f64;
        coef *= (jf - q) / jf;
        pow *= x;
        let term = coef * pow / (p + jf);
        sum += term;
        if term.abs() <= SERIES_EPS * sum.abs() || coef == 0.0 {
            break;
        }
    }
    x.powf(p) * sum
}

/// `int_0^y u^(q-1) (1-u)^(p-1) du` for `0 <= y <= 1/2`, `q > 0`, any real `p`.
fn upper_piece(p: f64, q: f64, y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let mut coef = 1.0;
    let mut pow = 1.0;
    let mut sum = 1.0 / q;
    for j in 1..SERIES_MAX_TERMS {
        let jf = j as f64;
        coef *= (jf - p) / jf;
        pow *= y;
        let term = coef * pow / (q + jf);
        sum += term;
        if term.abs() <= SERIES_EPS * sum.abs() || coef == 0.0 {
            break;
        }
    }
    y.powf(q) * sum
}

/// `int_t^1 x^(p-1) (1-x)^(q-1) dx` for `t in (0, 1]` and `q > 0`.
///
/// `p` may be negative (the integral is finite because `t > 0`). Returns
/// `None` when `p` is a non-positive integer and `t < 1/2`, where the series
/// representation has a pole.
pub fn upper_incomplete_beta(p: f64, q: f64, t: f64) -> Option<f64> {
    debug_assert!(t > 0.0 && t <= 1.0 && q > 0.0);
    if t >= 0.5 {
        return Some(upper_piece(p, q, 1.0 - t));
    }
    if p <= 0.0 && (p - p.round()).abs() < 1e-9 {
        return None;
    }
    let middle = lower_antiderivative(p, q, 0.5) - lower_antiderivative(p, q, t);
    Some(middle + upper_piece(p, q, 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn binomial_tail_trivial_cases() {
        assert_relative_eq!(binomial_tail(2, 0.5, 2), 0.25, epsilon = 1e-15);
        let x: f64 = 0.37;
        assert_relative_eq!(
            binomial_tail(7, x, 1),
            1.0 - (1.0 - x).powi(7),
            max_relative = 1e-14
        );
        assert_eq!(binomial_tail(5, 0.3, 0), 1.0);
        assert_eq!(binomial_tail(5, 0.3, 6), 0.0);
    }

    #[test]
    fn binomial_tail_matches_pmf_sum() {
        // brute-force pmf summation
        let (n, x) = (10usize, 0.3f64);
        for k in 1..=n {
            let mut direct = 0.0;
            for j in k..=n {
                direct += ln_choose(n, j).exp() * x.powi(j as i32) * (1.0 - x).powi((n - j) as i32);
            }
            assert!(
                (binomial_tail(n, x, k) - direct).abs() <= 1e-12,
                "k={k}: {} vs {direct}",
                binomial_tail(n, x, k)
            );
        }
    }

    #[test]
    fn upper_incomplete_beta_positive_exponents_match_beta() {
        // p, q > 0 and t -> 0 recovers the complete Beta function
        let (p, q) = (2.5, 1.5);
        let full = ln_beta(p, q).exp();
        let tail = upper_incomplete_beta(p, q, 1e-12).unwrap();
        assert_relative_eq!(tail, full, max_relative = 1e-12);
        // complement against statrs' regularized incomplete Beta
        let t = 0.3;
        let expected = full * (1.0 - statrs::function::beta::beta_reg(p, q, t));
        assert_relative_eq!(
            upper_incomplete_beta(p, q, t).unwrap(),
            expected,
            max_relative = 1e-12
        );
    }

    #[test]
    fn upper_incomplete_beta_negative_exponent_elementary() {
        // q = 1: int_t^1 x^(p-1) dx = (1 - t^p) / p
        for &p in &[-1.5, -0.7, -1.2] {
            for &t in &[1e-4, 0.01, 0.3, 0.5, 0.8] {
                let want = (1.0 - f64::powf(t, p)) / p;
                assert_relative_eq!(
                    upper_incomplete_beta(p, 1.0, t).unwrap(),
                    want,
                    max_relative = 1e-13
                );
            }
        }
    }

    #[test]
    fn upper_incomplete_beta_pole_is_reported() {
        assert!(upper_incomplete_beta(-1.0, 1.0, 0.1).is_none());
        assert!(upper_incomplete_beta(-1.0, 1.0, 0.6).is_some());
    }
}
