//! Instance-specific error-exponent guarantees.
//!
//! For a sorted instance `mu_1 > mu_2 >= ... >= mu_K` (and the phantom
//! `mu_{K+1} = 0`) this module evaluates, in closed form, every quantity that
//! appears in the error-probability bounds of the supported policies:
//!
//! - `xi_j` / `xi_bar_j`: constrained quadratic programs solved by KKT
//!   pooling — the optimum sets a block of coordinates equal to its mean,
//!   and the active block is found by a prefix scan;
//! - `psi_j`, `psi_bar_j`, `zeta_j`, `phi_j`: direct formulas;
//! - `alpha_j`: the crossing point of a decreasing line and an increasing
//!   hinge-square, computed by [`solve_crossing`];
//! - `Gamma_j`: the KL-divergence analogue of `xi_j`'s program, pooled at
//!   the logistic of the mean logit;
//! - the resulting rates `R` with `P[error] <= exp(-T * R)` for SR (Pinsker
//!   and KL forms), CR-C, CR-A, and the two comparison baselines.
//!
//! Every solver here has an independent brute-force twin in [`crate::oracle`].

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::Serialize;

use crate::math::{g_threshold, kahan_mean, kl_bernoulli, log_bar, logistic, logit, KahanSum};
use crate::policies::CrVariant;
use crate::{Error, Result, SortedInstance};

/// Guarantee families reported by the bound evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Algorithm {
    /// SR rate from the Pinsker relaxation: `min_j 2 xi_j / (j log_bar K)`.
    #[serde(rename = "sr")]
    SrPinsker,
    /// SR rate from the KL program: `min_j Gamma_j / (j log_bar K)`.
    #[serde(rename = "sr-kl")]
    SrKl,
    #[serde(rename = "crc")]
    CrC,
    #[serde(rename = "cra")]
    CrA,
    /// Classic squared-gap rate `min_j (mu_1 - mu_j)^2 / (j log_bar K)`.
    #[serde(rename = "audibert")]
    Audibert,
    /// Two-arm KL relaxation `min_j inf {kl(x,mu_1)+kl(x,mu_j)} / (j log_bar K)`.
    #[serde(rename = "barrier")]
    Barrier,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::SrPinsker => "sr",
            Algorithm::SrKl => "sr-kl",
            Algorithm::CrC => "crc",
            Algorithm::CrA => "cra",
            Algorithm::Audibert => "audibert",
            Algorithm::Barrier => "barrier",
        }
    }

    pub const ALL: [Algorithm; 6] = [
        Algorithm::SrPinsker,
        Algorithm::SrKl,
        Algorithm::CrC,
        Algorithm::CrA,
        Algorithm::Audibert,
        Algorithm::Barrier,
    ];
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sr" | "sr-pinsker" => Ok(Algorithm::SrPinsker),
            "sr-kl" => Ok(Algorithm::SrKl),
            "crc" | "cr-c" => Ok(Algorithm::CrC),
            "cra" | "cr-a" => Ok(Algorithm::CrA),
            "audibert" => Ok(Algorithm::Audibert),
            "barrier" => Ok(Algorithm::Barrier),
            other => Err(Error::UnknownName { what: "algorithm", got: other.to_string() }),
        }
    }
}

/// Per-`j` exponent ingredients. `alpha_*` are present only for `j < K`;
/// at `j = K` the indicator in the CR theorems zeroes the alpha term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentTerms {
    pub j: usize,
    pub xi: f64,
    pub xi_bar: f64,
    pub psi: f64,
    pub psi_bar: f64,
    pub zeta: f64,
    pub phi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_crc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_cra: Option<f64>,
}

/// A rate `R` together with its per-`j` ingredients and the bound
/// `exp(-T * R)` evaluated at the requested budgets. The bound treats the
/// asymptotic exponent as a finite-`T` guarantee, exactly as the worked
/// examples do.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuaranteeReport {
    pub algorithm: Algorithm,
    pub rate: f64,
    pub j_min: usize,
    pub per_j: Vec<ExponentTerms>,
    pub bounds: BTreeMap<u64, f64>,
}

impl GuaranteeReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

fn check_j(j: usize, lo: usize, hi: usize) -> Result<()> {
    if j < lo || j > hi {
        return Err(Error::IndexOutOfRange { j, lo, hi });
    }
    Ok(())
}

/// Value of `inf { sum_b (lambda_b - v_b)^2 : lambda_1 <= min_b lambda_b }`
/// for a head value `v[0]` strictly above the rest (sorted non-increasing).
///
/// KKT pooling: scan for the smallest `i >= 1` whose value lies strictly
/// below the mean of the pooled block `{0, i, ..., n-1}`; that block
/// collapses to its mean and the remaining coordinates stay put.
fn pooled_quadratic(values: &[f64]) -> f64 {
    let n = values.len();
    debug_assert!(n >= 2);
    debug_assert!(values.windows(2).all(|w| w[0] >= w[1]));
    debug_assert!(values[0] > values[1]);
    for i in 1..n {
        let block_mean = kahan_mean(
            std::iter::once(values[0]).chain(values[i..].iter().copied()),
        );
        if values[i] < block_mean {
            let mut acc = KahanSum::new(0.0);
            for v in std::iter::once(values[0]).chain(values[i..].iter().copied()) {
                acc.add((v - block_mean) * (v - block_mean));
            }
            return acc.value();
        }
    }
    // With values[0] strictly largest the scan always succeeds at i = n-1.
    unreachable!("pooling scan must terminate");
}

/// Same program with Bernoulli KL divergence in place of the quadratic:
/// the pooled block sits at the logistic of its mean logit.
fn pooled_kl(values: &[f64]) -> Result<f64> {
    let n = values.len();
    for &v in values {
        if v <= 0.0 || v >= 1.0 {
            return Err(Error::BoundaryMeans("the KL pooling program"));
        }
    }
    let logits: Vec<f64> = values.iter().map(|&v| logit(v)).collect();
    for i in 1..n {
        let mean_logit = kahan_mean(
            std::iter::once(logits[0]).chain(logits[i..].iter().copied()),
        );
        if logits[i] < mean_logit {
            let pooled = logistic(mean_logit);
            let mut acc = KahanSum::new(0.0);
            for v in std::iter::once(values[0]).chain(values[i..].iter().copied()) {
                acc.add(kl_bernoulli(pooled, v)?);
            }
            return Ok(acc.value());
        }
    }
    unreachable!("pooling scan must terminate");
}

/// `xi_j`: hardness of confusing the best arm with the top-`j` block,
/// `inf { sum_{k<=j} (lambda_k - mu_k)^2 : lambda_1 <= min_{k<=j} lambda_k }`.
pub fn xi_j(s: &SortedInstance, j: usize) -> Result<f64> {
    check_j(j, 2, s.k())?;
    Ok(pooled_quadratic(&s.sorted_means()[..j]))
}

/// `xi_bar_j`: the same program with arm `j` replaced by arm `j + 1` in the
/// constraint set. For `j = K` the replacement is the phantom arm with mean
/// `mu_{K+1} = 0`.
pub fn xi_bar_j(s: &SortedInstance, j: usize) -> Result<f64> {
    check_j(j, 2, s.k())?;
    let mut values: Vec<f64> = s.sorted_means()[..j - 1].to_vec();
    values.push(s.mu(j + 1));
    Ok(pooled_quadratic(&values))
}

/// The four direct-formula quantities `(psi_j, psi_bar_j, zeta_j, phi_j)`,
/// using the `mu_{K+1} = 0` convention.
pub fn psi_phi_zeta(s: &SortedInstance, j: usize) -> Result<(f64, f64, f64, f64)> {
    check_j(j, 2, s.k())?;
    let head = s.mu(1);
    let jf = j as f64;
    let tail_mean = kahan_mean((2..=j).map(|k| s.mu(k)));
    let psi = (jf - 1.0) / jf * (head - tail_mean) * (head - tail_mean);
    let bar_mean = kahan_mean((2..j).map(|k| s.mu(k)).chain(std::iter::once(s.mu(j + 1))));
    let psi_bar = (jf - 1.0) / jf * (head - bar_mean) * (head - bar_mean);
    let zeta = s.mu(j) - s.mu(j + 1);
    let phi = kahan_mean((1..=j).map(|k| s.mu(k))) - s.mu(j + 1);
    Ok((psi, psi_bar, zeta, phi))
}

/// Unique `x0 > 0` with `c1 - b1*x0 = [(c2*sqrt(x0) - b2)_+]^2`, located by
/// bisection on `[0, c1/b1]`. The residual at the returned point is at most
/// `1e-12 * max(1, c1)`.
pub fn solve_crossing(b1: f64, c1: f64, b2: f64, c2: f64) -> Result<f64> {
    if !(b1 > 0.0 && c1 > 0.0 && c2 > 0.0 && b2 >= 0.0) {
        return Err(Error::BadParameter(format!(
            "solve_crossing needs b1, c1, c2 > 0 and b2 >= 0, got ({b1}, {c1}, {b2}, {c2})"
        )));
    }
    let tol = 1e-12 * c1.max(1.0);
    let hinge_sq = |x: f64| {
        let h = (c2 * x.sqrt() - b2).max(0.0);
        h * h
    };
    let residual = |x: f64| (c1 - b1 * x) - hinge_sq(x);
    let hi = c1 / b1;
    // The line hits zero at hi; if the hinge is still zero there, the
    // crossing is exactly at hi.
    if residual(hi) >= 0.0 {
        return Ok(hi);
    }
    let mut lo = 0.0;
    let mut hi = hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = residual(mid);
        if r.abs() <= tol {
            return Ok(mid);
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The balance point `alpha_j` of the two failure modes in the CR analysis.
/// Defined for `j in 2..K`; at `j = K` the theorem's indicator removes the
/// term and alpha is undefined.
pub fn alpha_j(s: &SortedInstance, j: usize, variant: CrVariant) -> Result<f64> {
    check_j(j, 2, s.k().saturating_sub(1))?;
    let lb_j = log_bar(j);
    let lb_next = log_bar(j + 1);
    let anchor = (1.0 / ((j + 1) as f64 * lb_next)).sqrt();
    let (psi, _, zeta, phi) = psi_phi_zeta(s, j)?;
    match variant {
        CrVariant::C => {
            let line = 2.0 * xi_j(s, j)? / (j as f64 * lb_j);
            solve_crossing(line, line, anchor, 1.0 + zeta)
        }
        CrVariant::A => {
            let line = psi / (j as f64 * lb_j);
            let scale = (j as f64 / (j + 1) as f64).sqrt();
            solve_crossing(line, line, scale * anchor, scale * (1.0 + phi))
        }
    }
}

/// All per-`j` ingredients for a report.
pub fn exponent_terms(s: &SortedInstance, j: usize) -> Result<ExponentTerms> {
    let (psi, psi_bar, zeta, phi) = psi_phi_zeta(s, j)?;
    let (alpha_crc, alpha_cra) = if j < s.k() {
        (Some(alpha_j(s, j, CrVariant::C)?), Some(alpha_j(s, j, CrVariant::A)?))
    } else {
        (None, None)
    };
    Ok(ExponentTerms {
        j,
        xi: xi_j(s, j)?,
        xi_bar: xi_bar_j(s, j)?,
        psi,
        psi_bar,
        zeta,
        phi,
        alpha_crc,
        alpha_cra,
    })
}

fn min_over_j(
    s: &SortedInstance,
    mut term: impl FnMut(usize) -> Result<f64>,
) -> Result<(f64, usize)> {
    let mut best = f64::INFINITY;
    let mut best_j = 2;
    for j in 2..=s.k() {
        let value = term(j)?;
        if value < best {
            best = value;
            best_j = j;
        }
    }
    Ok((best, best_j))
}

/// SR rate via the Pinsker relaxation: `min_j 2 xi_j / (j log_bar K)`.
pub fn rate_sr_pinsker(s: &SortedInstance) -> Result<(f64, usize)> {
    let lb_k = log_bar(s.k());
    min_over_j(s, |j| Ok(2.0 * xi_j(s, j)? / (j as f64 * lb_k)))
}

/// SR rate via the exact KL programs: `min_j Gamma_j / (j log_bar K)`.
/// Requires all means strictly inside `(0, 1)`.
pub fn rate_sr_kl(s: &SortedInstance) -> Result<(f64, usize)> {
    let lb_k = log_bar(s.k());
    min_over_j(s, |j| Ok(gamma_j_kl(s, j, false)? / (j as f64 * lb_k)))
}

/// The classic squared-gap comparison rate.
pub fn rate_audibert(s: &SortedInstance) -> Result<(f64, usize)> {
    let lb_k = log_bar(s.k());
    min_over_j(s, |j| {
        let gap = s.mu(1) - s.mu(j);
        Ok(gap * gap / (j as f64 * lb_k))
    })
}

/// Two-arm KL relaxation: for each `j`, pool only arms 1 and `j`.
pub fn rate_barrier(s: &SortedInstance) -> Result<(f64, usize)> {
    let lb_k = log_bar(s.k());
    min_over_j(s, |j| {
        let inner = if s.mu(1) == s.mu(j) {
            0.0
        } else {
            pooled_kl(&[s.mu(1), s.mu(j)])?
        };
        Ok(inner / (j as f64 * lb_k))
    })
}

/// CR-C rate:
/// `2 min_j min{ max{ xi_j log_bar(j+1) (1-alpha_j) 1{j != K} / log_bar j, xi_j }, xi_bar_j } / (j log_bar K)`.
pub fn rate_crc(s: &SortedInstance) -> Result<(f64, usize)> {
    let lb_k = log_bar(s.k());
    min_over_j(s, |j| {
        let xi = xi_j(s, j)?;
        let inner = if j < s.k() {
            let alpha = alpha_j(s, j, CrVariant::C)?;
            (xi * log_bar(j + 1) * (1.0 - alpha) / log_bar(j)).max(xi)
        } else {
            xi
        };
        Ok(2.0 * inner.min(xi_bar_j(s, j)?) / (j as f64 * lb_k))
    })
}

/// CR-A rate: the CR-C expression with `psi`-quantities in place of `xi`.
pub fn rate_cra(s: &SortedInstance) -> Result<(f64, usize)> {
    let lb_k = log_bar(s.k());
    min_over_j(s, |j| {
        let (psi, psi_bar, _, _) = psi_phi_zeta(s, j)?;
        let inner = if j < s.k() {
            let alpha = alpha_j(s, j, CrVariant::A)?;
            (psi * log_bar(j + 1) * (1.0 - alpha) / log_bar(j)).max(psi)
        } else {
            psi
        };
        Ok(2.0 * inner.min(psi_bar) / (j as f64 * lb_k))
    })
}

/// Rate for any supported algorithm.
pub fn rate(algorithm: Algorithm, s: &SortedInstance) -> Result<(f64, usize)> {
    match algorithm {
        Algorithm::SrPinsker => rate_sr_pinsker(s),
        Algorithm::SrKl => rate_sr_kl(s),
        Algorithm::CrC => rate_crc(s),
        Algorithm::CrA => rate_cra(s),
        Algorithm::Audibert => rate_audibert(s),
        Algorithm::Barrier => rate_barrier(s),
    }
}

/// Build the full report: rate, minimizing `j`, per-`j` terms, and
/// `exp(-T * rate)` at each requested budget.
pub fn guarantee_report(
    algorithm: Algorithm,
    s: &SortedInstance,
    budgets: &[u64],
) -> Result<GuaranteeReport> {
    let (rate, j_min) = rate(algorithm, s)?;
    let per_j = (2..=s.k()).map(|j| exponent_terms(s, j)).collect::<Result<Vec<_>>>()?;
    let bounds = budgets.iter().map(|&t| (t, (-(t as f64) * rate).exp())).collect();
    Ok(GuaranteeReport { algorithm, rate, j_min, per_j, bounds })
}

/// CSV rows for one or more reports, one row per (algorithm, budget), with
/// header `algorithm,j_min,rate,T,bound`.
pub fn reports_to_csv(reports: &[GuaranteeReport]) -> String {
    let mut out = String::from("algorithm,j_min,rate,T,bound\n");
    for r in reports {
        if r.bounds.is_empty() {
            out.push_str(&format!("{},{},{},,\n", r.algorithm, r.j_min, fmt_sig(r.rate, 6)));
        }
        for (&t, &bound) in &r.bounds {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.algorithm,
                r.j_min,
                fmt_sig(r.rate, 6),
                t,
                fmt_sig(bound, 6)
            ));
        }
    }
    out
}

/// Format with the given number of significant digits (deterministic,
/// locale-free).
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-4..6).contains(&magnitude) {
        let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{:.*e}", digits - 1, x)
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

const ENUMERATION_LIMIT: u128 = 100_000;

/// `Gamma_j`: minimum over all `j`-subsets `J` containing the best arm of
/// `inf { sum_{k in J} kl(lambda_k, mu_k) : lambda_1 <= min_{k in J} lambda_k }`.
///
/// By divergence monotonicity the top-`j` subset attains the minimum, so the
/// default evaluates `J = [j]` only; `enumerate_j` forces the exhaustive
/// outer minimum (rejected when the subset count exceeds 1e5).
pub fn gamma_j_kl(s: &SortedInstance, j: usize, enumerate_j: bool) -> Result<f64> {
    check_j(j, 2, s.k())?;
    let top = pooled_kl(&s.sorted_means()[..j])?;
    if !enumerate_j {
        return Ok(top);
    }
    let count = binomial(s.k() - 1, j - 1);
    if count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            n: s.k() - 1,
            k: j - 1,
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut best = top;
    for subset in (2..=s.k()).combinations(j - 1) {
        let mut values = Vec::with_capacity(j);
        values.push(s.mu(1));
        values.extend(subset.iter().map(|&i| s.mu(i)));
        // subset indices ascend, so means already descend
        best = best.min(pooled_kl(&values)?);
    }
    Ok(best)
}

/// Value of the gap-constrained program behind the CR discard conditions,
/// including the `beta` factor.
///
/// Variant A has the closed form `((j-1) beta / j) (mu_1 - mean_{2..j} + G(beta))^2`;
/// variant C is solved numerically by bisecting the derivative of the
/// one-dimensional reduction (each non-anchor coordinate projects to
/// `max(mu_k, x + G)` for anchor value `x`).
pub fn gap_program_value(
    s: &SortedInstance,
    j: usize,
    beta: f64,
    variant: CrVariant,
) -> Result<f64> {
    check_j(j, 2, s.k())?;
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::BadParameter(format!("beta = {beta} outside (0, 1]")));
    }
    let g = g_threshold(beta);
    match variant {
        CrVariant::A => {
            let jf = j as f64;
            let tail_mean = kahan_mean((2..=j).map(|k| s.mu(k)));
            let d = s.mu(1) - tail_mean + g;
            Ok((jf - 1.0) * beta / jf * d * d)
        }
        CrVariant::C => {
            let head = s.mu(1);
            let tail: Vec<f64> = (2..=j).map(|k| s.mu(k)).collect();
            // derivative of (x - head)^2 + sum_k [(x + g - mu_k)_+]^2 in x
            let deriv = |x: f64| {
                let mut d = x - head;
                for &m in &tail {
                    d += (x + g - m).max(0.0);
                }
                d
            };
            let mut lo = tail.iter().cloned().fold(head, f64::min) - g.abs() - 1.0;
            let mut hi = head;
            debug_assert!(deriv(lo) < 0.0 && deriv(hi) >= 0.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if deriv(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let x = 0.5 * (lo + hi);
            let mut value = (x - head) * (x - head);
            for &m in &tail {
                let h = (x + g - m).max(0.0);
                value += h * h;
            }
            Ok(beta * value)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::sort_desc;
    use crate::Instance;

    fn sorted(means: &[f64]) -> SortedInstance {
        sort_desc(&Instance::new(means.to_vec()).unwrap())
    }

    fn example2() -> SortedInstance {
        let mut means = vec![0.95, 0.85, 0.2];
        means.extend(std::iter::repeat(0.0).take(47));
        sorted(&means)
    }

    #[test]
    fn xi_closed_forms() {
        let ex1 = sorted(&[0.9, 0.1, 0.1]);
        assert!((xi_j(&ex1, 2).unwrap() - 0.32).abs() < 1e-12);
        assert!((xi_j(&ex1, 3).unwrap() - 0.426667).abs() < 1e-6);

        let two = sorted(&[1.0, 0.0]);
        assert!((xi_j(&two, 2).unwrap() - 0.5).abs() < 1e-15);

        // first case of the pooling proposition: midpoint 0.9
        let ex2 = example2();
        assert!((xi_j(&ex2, 2).unwrap() - 0.005).abs() < 1e-12);

        assert!(xi_j(&ex1, 1).is_err());
        assert!(xi_j(&ex1, 4).is_err());
    }

    #[test]
    fn xi_bar_values() {
        let ex2 = example2();
        assert!((xi_bar_j(&ex2, 2).unwrap() - 0.28125).abs() < 1e-12);

        // mu_3 = mu_2: identical optimization
        let ex1 = sorted(&[0.9, 0.1, 0.1]);
        assert_eq!(xi_bar_j(&ex1, 2).unwrap(), xi_j(&ex1, 2).unwrap());

        // j = K pools against the phantom zero arm, so xi_bar_K >= xi_K
        let s = sorted(&[0.9, 0.5, 0.1]);
        assert!(xi_bar_j(&s, 3).unwrap() >= xi_j(&s, 3).unwrap());
    }

    #[test]
    fn psi_pack_example2() {
        let ex2 = example2();
        let (psi, psi_bar, zeta, phi) = psi_phi_zeta(&ex2, 2).unwrap();
        assert!((psi - 0.005).abs() < 1e-12);
        assert!((psi_bar - 0.28125).abs() < 1e-12);
        assert!((zeta - 0.65).abs() < 1e-12);
        assert!((phi - 0.7).abs() < 1e-12);
    }

    #[test]
    fn psi_pack_uses_phantom_mean() {
        let s = sorted(&[1.0, 0.0]);
        let (psi, _, zeta, phi) = psi_phi_zeta(&s, 2).unwrap();
        assert_eq!(zeta, 0.0);
        assert_eq!(phi, 0.5);
        assert_eq!(psi, 0.5);
        // two-point pooling case: psi_2 = xi_2 = (mu_1 - mu_2)^2 / 2
        assert_eq!(psi, xi_j(&s, 2).unwrap());
    }

    #[test]
    fn solve_crossing_cases() {
        // linear crossing c1 (1 - x) = c2^2 x
        assert!((solve_crossing(1.0, 1.0, 0.0, 1.0).unwrap() - 0.5).abs() < 1e-12);

        // CR-C, j=2, Example-2 coefficients
        let x0 = solve_crossing(0.005, 0.005, 0.5, 1.65).unwrap();
        assert!((x0 - 0.117842).abs() < 1e-5);

        // hinge still zero at the line's root: crossing exactly there
        let x0 = solve_crossing(2.0, 1.0, 10.0, 1.0).unwrap();
        assert_eq!(x0, 0.5);

        assert!(solve_crossing(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(solve_crossing(1.0, 1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn solve_crossing_residual_contract() {
        let cases = [
            (0.005, 0.005, 0.5, 1.65),
            (1.0, 1.0, 0.0, 1.0),
            (0.3, 2.7, 0.1, 0.9),
            (12.0, 0.04, 0.7, 3.0),
        ];
        for (b1, c1, b2, c2) in cases {
            let x = solve_crossing(b1, c1, b2, c2).unwrap();
            assert!(x >= 0.0 && x <= c1 / b1);
            let g = (c2 * x.sqrt() - b2).max(0.0).powi(2);
            assert!(
                ((c1 - b1 * x) - g).abs() <= 1e-12 * c1.max(1.0),
                "residual too large for ({b1}, {c1}, {b2}, {c2})"
            );
        }
    }

    #[test]
    fn alpha_example2() {
        let ex2 = example2();
        let a_c = alpha_j(&ex2, 2, CrVariant::C).unwrap();
        assert!((a_c - 0.117842).abs() < 1e-5, "alpha C = {a_c}");
        let a_a = alpha_j(&ex2, 2, CrVariant::A).unwrap();
        assert!((a_a - 0.1076791).abs() < 1e-5, "alpha A = {a_a}");
        // alpha is undefined at j = K
        assert!(alpha_j(&ex2, 50, CrVariant::C).is_err());
    }

    #[test]
    fn alpha_strictly_inside_unit_interval() {
        for means in [vec![0.9, 0.1, 0.1], vec![0.6, 0.59, 0.58, 0.2], vec![0.95, 0.5, 0.05]] {
            let s = sorted(&means);
            for j in 2..s.k() {
                for variant in [CrVariant::C, CrVariant::A] {
                    let a = alpha_j(&s, j, variant).unwrap();
                    assert!(a > 0.0 && a < 1.0, "alpha = {a} at j = {j}");
                }
            }
        }
    }

    #[test]
    fn example1_rates() {
        let ex1 = sorted(&[0.9, 0.1, 0.1]);
        let (aud, _) = rate_audibert(&ex1).unwrap();
        assert!((aud - 0.16).abs() < 5e-4);
        let (sr, j) = rate_sr_pinsker(&ex1).unwrap();
        assert!((sr - 0.2133).abs() < 1e-3);
        assert_eq!(j, 3);
    }

    #[test]
    fn example2_bounds() {
        let ex2 = example2();
        let (sr, _) = rate_sr_pinsker(&ex2).unwrap();
        let bound = (-5000.0 * sr).exp();
        assert!((bound - 1.93e-3).abs() / 1.93e-3 < 0.01, "SR bound {bound}");

        let (crc, j) = rate_crc(&ex2).unwrap();
        assert_eq!(j, 2);
        assert!((crc - 0.0014706).abs() < 1e-6);
        let bound = (-5000.0 * crc).exp();
        assert!((bound - 6.40e-4).abs() / 6.40e-4 < 0.01, "CR-C bound {bound}");

        let (cra, _) = rate_cra(&ex2).unwrap();
        let bound = (-5000.0 * cra).exp();
        assert!((5.5e-4..=6.6e-4).contains(&bound), "CR-A bound {bound}");
    }

    #[test]
    fn two_arm_rates_collapse() {
        let s = sorted(&[1.0, 0.0]);
        assert!((rate_sr_pinsker(&s).unwrap().0 - 0.5).abs() < 1e-12);
        assert!((rate_audibert(&s).unwrap().0 - 0.5).abs() < 1e-12);
        // indicator kills the alpha term at j = K = 2
        assert_eq!(rate_crc(&s).unwrap().0, xi_j(&s, 2).unwrap() / log_bar(2));
        let (psi, _, _, _) = psi_phi_zeta(&s, 2).unwrap();
        assert_eq!(rate_cra(&s).unwrap().0, psi / log_bar(2));
    }

    #[test]
    fn audibert_never_beats_pinsker() {
        for means in [
            vec![0.9, 0.1, 0.1],
            vec![0.95, 0.85, 0.2, 0.0],
            vec![0.7, 0.6, 0.5, 0.4, 0.3],
        ] {
            let s = sorted(&means);
            assert!(rate_audibert(&s).unwrap().0 <= rate_sr_pinsker(&s).unwrap().0 + 1e-12);
        }
    }

    #[test]
    fn kl_chain_orders_rates() {
        let s = sorted(&[0.9, 0.4, 0.2, 0.1]);
        let pinsker = rate_sr_pinsker(&s).unwrap().0;
        let kl = rate_sr_kl(&s).unwrap().0;
        let barrier = rate_barrier(&s).unwrap().0;
        assert!(pinsker <= kl + 1e-12);
        assert!(barrier <= kl + 1e-12);
    }

    #[test]
    fn gamma_values() {
        let ex1 = sorted(&[0.9, 0.1, 0.1]);
        let g2 = gamma_j_kl(&ex1, 2, false).unwrap();
        assert!((g2 - 1.02165).abs() < 1e-5);
        assert!(g2 >= 2.0 * xi_j(&ex1, 2).unwrap());

        // enumeration agrees with the top-j default
        let s = sorted(&[0.9, 0.5, 0.5]);
        let top = gamma_j_kl(&s, 2, false).unwrap();
        let all = gamma_j_kl(&s, 2, true).unwrap();
        assert!((top - all).abs() < 1e-12);

        // boundary means are rejected
        let z = sorted(&[1.0, 0.0]);
        assert!(gamma_j_kl(&z, 2, false).is_err());
        assert!(rate_barrier(&z).is_err());
    }

    #[test]
    fn barrier_two_point_value() {
        let ex1 = sorted(&[0.9, 0.1, 0.1]);
        // inner value at j=2 equals the two-point KL program
        let (rate, _) = rate_barrier(&ex1).unwrap();
        let inner2 = 1.0216512475319814 / (2.0 * log_bar(3));
        let inner3 = 1.0216512475319814 / (3.0 * log_bar(3));
        assert!((rate - inner2.min(inner3)).abs() < 1e-9);
    }

    #[test]
    fn gap_program_values() {
        let ex2 = example2();
        // beta = 1 recovers xi_j / psi_j exactly
        for j in [2usize, 3, 5] {
            let c = gap_program_value(&ex2, j, 1.0, CrVariant::C).unwrap();
            assert!((c - xi_j(&ex2, j).unwrap()).abs() < 1e-10, "j = {j}");
            let a = gap_program_value(&ex2, j, 1.0, CrVariant::A).unwrap();
            let (psi, _, _, _) = psi_phi_zeta(&ex2, j).unwrap();
            assert!((a - psi).abs() < 1e-12, "j = {j}");
        }
        // worked variant-A value at beta = 1/4
        let a = gap_program_value(&ex2, 2, 0.25, CrVariant::A).unwrap();
        assert!((a - 0.151250).abs() < 1e-12);

        assert!(gap_program_value(&ex2, 2, 0.0, CrVariant::A).is_err());
        assert!(gap_program_value(&ex2, 2, 1.5, CrVariant::A).is_err());
    }

    #[test]
    fn report_shape() {
        let ex1 = sorted(&[0.9, 0.1, 0.1]);
        let report = guarantee_report(Algorithm::SrPinsker, &ex1, &[100, 5000]).unwrap();
        assert_eq!(report.per_j.len(), 2);
        assert_eq!(report.j_min, 3);
        assert!(report.per_j[0].alpha_crc.is_some());
        assert!(report.per_j[1].alpha_crc.is_none(), "no alpha at j = K");
        assert_eq!(report.bounds.len(), 2);
        let json = report.to_json();
        assert!(json.contains("\"algorithm\": \"sr\""));

        let csv = reports_to_csv(std::slice::from_ref(&report));
        assert!(csv.starts_with("algorithm,j_min,rate,T,bound\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn rates_invariant_under_suboptimal_relabeling() {
        let a = sorted(&[0.2, 0.9, 0.2, 0.5]);
        let b = sorted(&[0.5, 0.2, 0.9, 0.2]);
        for algo in Algorithm::ALL {
            let ra = rate(algo, &a).unwrap().0;
            let rb = rate(algo, &b).unwrap().0;
            assert_eq!(ra, rb, "{algo}");
        }
    }

    #[test]
    fn fmt_sig_output() {
        assert_eq!(fmt_sig(0.0, 6), "0");
        assert_eq!(fmt_sig(0.16, 6), "0.160000");
        assert_eq!(fmt_sig(1.93e-3, 6), "0.00193000");
        assert_eq!(fmt_sig(123456.0, 6), "123456");
        assert_eq!(fmt_sig(6.40e-7, 6), "6.40000e-7");
    }
}
