//! Shared numeric primitives: the `log-bar` normalizer, the discard
//! threshold `G`, Bernoulli KL divergence, and small helpers.

use crate::{Error, Result};

/// `log-bar m = 1/2 + sum_{k=2..m} 1/k`, the normalizing constant shared by
/// the SR and CR phase budgets. `log_bar(1) = 1/2`.
///
/// Panics if `m == 0`.
pub fn log_bar(m: usize) -> f64 {
    assert!(m >= 1, "log_bar requires m >= 1, got {m}");
    let mut acc = KahanSum::new(0.5);
    for k in 2..=m {
        acc.add(1.0 / k as f64);
    }
    acc.value()
}

/// Discard threshold `G(beta) = 1/sqrt(beta) - 1`. Negative for `beta > 1`.
///
/// Panics if `beta <= 0`.
pub fn g_threshold(beta: f64) -> f64 {
    assert!(beta > 0.0, "g_threshold requires beta > 0, got {beta}");
    1.0 / beta.sqrt() - 1.0
}

/// KL divergence between Bernoulli distributions of means `a` and `b`,
/// with the `0 log 0 = 0` convention.
///
/// `b` must lie strictly inside `(0, 1)` unless `a == b`, in which case the
/// divergence is 0 even at the boundary.
pub fn kl_bernoulli(a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::BadParameter(format!("kl_bernoulli: a = {a} outside [0, 1]")));
    }
    if a == b {
        return Ok(0.0);
    }
    if b <= 0.0 || b >= 1.0 {
        return Err(Error::DegenerateKl(b));
    }
    let left = if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    let right = if a == 1.0 { 0.0 } else { (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln() };
    Ok(left + right)
}

/// `ln(x / (1 - x))` for `x` in the open unit interval.
pub(crate) fn logit(x: f64) -> f64 {
    (x / (1.0 - x)).ln()
}

/// Inverse of [`logit`].
pub(crate) fn logistic(y: f64) -> f64 {
    1.0 / (1.0 + (-y).exp())
}

/// Quantile of the standard normal distribution (Acklam's rational
/// approximation, absolute error below 1e-9). Used for Wilson intervals.
pub(crate) fn normal_quantile(p: f64) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::BadParameter(format!("normal quantile needs p in (0, 1), got {p}")));
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    Ok(x)
}

/// Compensated (Kahan) accumulator for the pooled-mean computations.
#[derive(Debug, Clone, Copy)]
pub(crate) struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new(init: f64) -> Self {
        Self { sum: init, carry: 0.0 }
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Mean of a slice via compensated summation.
pub(crate) fn kahan_mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new(0.0);
    let mut n = 0usize;
    for x in xs {
        acc.add(x);
        n += 1;
    }
    acc.value() / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_bar_small_values() {
        assert_eq!(log_bar(1), 0.5);
        assert!((log_bar(2) - 1.0).abs() < 1e-15);
        assert!((log_bar(3) - 4.0 / 3.0).abs() < 1e-15);
        // direct summation oracle
        let direct: f64 = 0.5 + (2..=50).map(|k| 1.0 / k as f64).sum::<f64>();
        assert!((log_bar(50) - direct).abs() < 1e-12);
        assert!((log_bar(50) - 3.9992056).abs() < 1e-6);
    }

    #[test]
    fn log_bar_is_increasing_with_unit_steps() {
        for m in 3..200 {
            assert!(log_bar(m) > log_bar(m - 1));
            assert!((log_bar(m) - log_bar(m - 1) - 1.0 / m as f64).abs() < 1e-12);
        }
    }

    #[test]
    #[should_panic(expected = "m >= 1")]
    fn log_bar_rejects_zero() {
        log_bar(0);
    }

    #[test]
    fn g_threshold_values() {
        assert_eq!(g_threshold(1.0), 0.0);
        assert!((g_threshold(0.25) - 1.0).abs() < 1e-15);
        assert!((g_threshold(0.4) - 0.581139).abs() < 1e-6);
        assert!(g_threshold(4.0) < 0.0);
    }

    #[test]
    fn g_threshold_strictly_decreasing() {
        let mut prev = g_threshold(0.01);
        let mut beta = 0.02;
        while beta < 3.0 {
            let g = g_threshold(beta);
            assert!(g < prev);
            prev = g;
            beta += 0.01;
        }
    }

    #[test]
    #[should_panic(expected = "beta > 0")]
    fn g_threshold_rejects_nonpositive() {
        g_threshold(0.0);
    }

    #[test]
    fn kl_bernoulli_values() {
        assert_eq!(kl_bernoulli(0.5, 0.5).unwrap(), 0.0);
        assert!((kl_bernoulli(0.5, 0.9).unwrap() - 0.510826).abs() < 1e-6);
        // boundary second argument: allowed only when a == b
        assert_eq!(kl_bernoulli(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(kl_bernoulli(1.0, 1.0).unwrap(), 0.0);
        assert!(kl_bernoulli(0.5, 0.0).is_err());
        assert!(kl_bernoulli(0.5, 1.0).is_err());
        assert!(kl_bernoulli(1.5, 0.5).is_err());
    }

    #[test]
    fn kl_dominates_pinsker_on_grid() {
        let mut a = 0.01;
        while a <= 0.99 {
            let mut b = 0.01;
            while b <= 0.99 {
                let kl = kl_bernoulli(a, b).unwrap();
                assert!(kl >= 2.0 * (a - b) * (a - b) - 1e-12, "a={a} b={b}");
                assert!(kl >= -1e-15);
                b += 0.01;
            }
            a += 0.01;
        }
    }

    #[test]
    fn kl_zero_iff_equal() {
        assert!(kl_bernoulli(0.3, 0.300001).unwrap() > 0.0);
        assert_eq!(kl_bernoulli(0.3, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn normal_quantile_matches_reference() {
        assert!((normal_quantile(0.975).unwrap() - 1.959963984540054).abs() < 1e-8);
        assert!((normal_quantile(0.5).unwrap()).abs() < 1e-12);
        assert!((normal_quantile(0.995).unwrap() - 2.5758293035489).abs() < 1e-7);
        assert!(normal_quantile(0.0).is_err());
    }

    #[test]
    fn logit_logistic_roundtrip() {
        for &x in &[0.01, 0.25, 0.5, 0.73, 0.99] {
            assert!((logistic(logit(x)) - x).abs() < 1e-12);
        }
    }
}
