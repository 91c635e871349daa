//! Adaptive Gauss–Kronrod quadrature with geometric panels at the endpoints
//! of `[0, 1]`, where the integrands of this crate carry power-law
//! singularities (`x^-2 Lambda(dx)` near 0, Beta densities near 1).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Relative and absolute targets for a single adaptive run.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-300,
            rel: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Estimate {
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

struct Segment {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est
            .error
            .partial_cmp(&other.est.error)
            .unwrap_or(Ordering::Equal)
    }
}

/// Globally adaptive G7/K15 on a finite interval.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: Tolerance) -> Estimate {
    const MAX_SEGMENTS: usize = 2000;
    if a == b {
        return Estimate {
            value: 0.0,
            error: 0.0,
        };
    }
    let first = gk15(f, a, b);
    let mut total = first;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, est: first });
    while heap.len() < MAX_SEGMENTS {
        if total.error <= tol.abs.max(tol.rel * total.value.abs()) {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let left = gk15(f, worst.a, mid);
        let right = gk15(f, mid, worst.b);
        total.value += left.value + right.value - worst.est.value;
        total.error += left.error + right.error - worst.est.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            est: left,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            est: right,
        });
    }
    // re-sum to shed the drift of the running updates
    let mut value = 0.0;
    let mut error = 0.0;
    for s in heap.iter() {
        value += s.est.value;
        error += s.est.error;
    }
    Estimate { value, error }
}

/// Integrates `f` over `[lo, hi] ⊆ [0, 1]` with geometric panels that shrink
/// toward 0 and toward 1.
///
/// Panels toward an open endpoint are added until a panel contributes less
/// than `1e-3 * rel` of the running total (and at least 40 panels deep). A
/// single Kronrod rule per panel gives a rough total; each panel is then
/// refined to an absolute error of `rel * |rough total| / panels`, so panels
/// that are negligible (or unresolvable next to 1 in floating point) do not
/// chase their own relative accuracy.
pub fn integrate_unit<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: Tolerance) -> f64 {
    debug_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi) && lo <= hi);
    if lo >= hi {
        return 0.0;
    }
    let mut panels: Vec<(f64, f64)> = Vec::new();
    let mut open_ends: Vec<(f64, bool)> = Vec::new();

    // lower half
    let mid = hi.min(0.5);
    if lo < mid {
        if lo == 0.0 {
            open_ends.push((mid, false));
        } else {
            let mut a = lo;
            while a < mid {
                let b = (2.0 * a).min(mid);
                panels.push((a, b));
                a = b;
            }
        }
    }
    // upper half
    let start = lo.max(0.5);
    if start < hi {
        if hi == 1.0 {
            open_ends.push((start, true));
        } else {
            let mut gap = 1.0 - start;
            let mut a = start;
            while a < hi {
                gap *= 0.5;
                let b = (1.0 - gap).min(hi);
                panels.push((a, b));
                a = b;
            }
        }
    }

    let mut rough: f64 = panels.iter().map(|&(a, b)| gk15(f, a, b).value).sum();
    for (edge, toward_one) in open_ends {
        let mut width = if toward_one { 1.0 - edge } else { edge };
        let mut depth = 0;
        loop {
            let (a, b) = if toward_one {
                (1.0 - width, 1.0 - 0.5 * width)
            } else {
                (0.5 * width, width)
            };
            if a >= b || b >= 1.0 {
                break;
            }
            let piece = gk15(f, a, b).value;
            panels.push((a, b));
            rough += piece;
            depth += 1;
            width *= 0.5;
            if depth >= 40 && piece.abs() <= 1e-3 * tol.rel * rough.abs() {
                break;
            }
            if width < 1e-300 {
                break;
            }
        }
    }
    let per_panel = Tolerance {
        abs: tol
            .abs
            .max(tol.rel * rough.abs() / panels.len().max(1) as f64),
        rel: tol.rel,
    };
    panels
        .iter()
        .map(|&(a, b)| integrate(f, a, b, per_panel).value)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let est = integrate(
            &|x: f64| x * x * x - 2.0 * x,
            0.0,
            2.0,
            Tolerance::default(),
        );
        assert_relative_eq!(est.value, 0.0, epsilon = 1e-14);
        let est = integrate(&|x: f64| x.powi(4), 0.0, 1.0, Tolerance::default());
        assert_relative_eq!(est.value, 0.2, max_relative = 1e-14);
    }

    #[test]
    fn power_singularity_at_zero() {
        // int_0^1 x^-0.8 dx = 5
        let v = integrate_unit(&|x: f64| x.powf(-0.8), 0.0, 1.0, Tolerance::default());
        assert_relative_eq!(v, 5.0, max_relative = 1e-10);
    }

    #[test]
    fn root_singularity_at_one() {
        // int_0^1 (1-x)^-0.5 dx = 2
        let v = integrate_unit(
            &|x: f64| (1.0 - x).powf(-0.5),
            0.0,
            1.0,
            Tolerance::default(),
        );
        assert_relative_eq!(v, 2.0, max_relative = 1e-7);
    }

    #[test]
    fn steep_lower_limit() {
        // int_t^1 x^-2.5 dx = (t^-1.5 - 1) / 1.5
        let t: f64 = 1e-6;
        let v = integrate_unit(&|x: f64| x.powf(-2.5), t, 1.0, Tolerance::default());
        assert_relative_eq!(v, (t.powf(-1.5) - 1.0) / 1.5, max_relative = 1e-11);
    }
}
