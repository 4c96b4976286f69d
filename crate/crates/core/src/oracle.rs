//! Brute-force oracles for the closed-form solvers in [`crate::guarantees`].
//!
//! Each oracle minimizes the relevant objective by exhaustive search —
//! a dense grid with local refinement — and never touches the pooling or
//! bisection code paths it is meant to check. For the constrained quadratic
//! and KL programs the grid runs over the anchor coordinate `lambda_1 = x`;
//! the remaining coordinates have the exact per-coordinate projection
//! `lambda_k = max(mu_k, x)`, so the grid value is the true program value up
//! to the grid resolution.

use crate::math::{g_threshold, kl_bernoulli, log_bar};
use crate::policies::CrVariant;
use crate::{Error, Result, SortedInstance};

const ORACLE_ARM_LIMIT: usize = 8;
const COARSE_STEP: f64 = 1e-3;
const FINE_STEP: f64 = 1e-6;

fn grid_minimize(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut best_x = lo;
    let mut best = f(lo);
    let scan = |x: f64, best: &mut f64, best_x: &mut f64| {
        let v = f(x);
        if v < *best {
            *best = v;
            *best_x = x;
        }
    };
    let steps = ((hi - lo) / COARSE_STEP).ceil() as usize;
    for i in 0..=steps {
        scan(lo + i as f64 * COARSE_STEP, &mut best, &mut best_x);
    }
    let flo = (best_x - COARSE_STEP).max(lo);
    let fhi = (best_x + COARSE_STEP).min(hi);
    let steps = ((fhi - flo) / FINE_STEP).ceil() as usize;
    for i in 0..=steps {
        scan(flo + i as f64 * FINE_STEP, &mut best, &mut best_x);
    }
    best
}

/// Ground truth for the constrained quadratic programs behind `xi_j` and
/// `xi_bar_j`. `constraint_set` lists the 1-based sorted positions whose
/// coordinates must stay at or above `lambda_1`; position `k + 1` denotes
/// the phantom arm with mean 0. Limited to small instances.
pub fn xi_oracle(s: &SortedInstance, constraint_set: &[usize]) -> Result<f64> {
    if s.k() > ORACLE_ARM_LIMIT {
        return Err(Error::OracleTooLarge { got: s.k(), limit: ORACLE_ARM_LIMIT });
    }
    if constraint_set.is_empty() {
        return Err(Error::BadParameter("empty constraint set".into()));
    }
    for &i in constraint_set {
        if !(2..=s.k() + 1).contains(&i) {
            return Err(Error::IndexOutOfRange { j: i, lo: 2, hi: s.k() + 1 });
        }
    }
    let head = s.mu(1);
    let tail: Vec<f64> = constraint_set.iter().map(|&i| s.mu(i)).collect();
    let lo = tail.iter().cloned().fold(head, f64::min);
    Ok(grid_minimize(lo, head, |x| {
        let mut v = (x - head) * (x - head);
        for &m in &tail {
            let h = (x - m).max(0.0);
            v += h * h;
        }
        v
    }))
}

/// Convenience wrappers matching the closed-form operations.
pub fn xi_j_oracle(s: &SortedInstance, j: usize) -> Result<f64> {
    let set: Vec<usize> = (2..=j).collect();
    xi_oracle(s, &set)
}

pub fn xi_bar_j_oracle(s: &SortedInstance, j: usize) -> Result<f64> {
    let mut set: Vec<usize> = (2..j).collect();
    set.push(j + 1);
    xi_oracle(s, &set)
}

/// Ground truth for the KL pooling program of `Gamma_j` restricted to the
/// top-`j` arms.
pub fn gamma_oracle(s: &SortedInstance, j: usize) -> Result<f64> {
    if s.k() > ORACLE_ARM_LIMIT {
        return Err(Error::OracleTooLarge { got: s.k(), limit: ORACLE_ARM_LIMIT });
    }
    let head = s.mu(1);
    let tail: Vec<f64> = (2..=j).map(|k| s.mu(k)).collect();
    for &m in tail.iter().chain(std::iter::once(&head)) {
        if m <= 0.0 || m >= 1.0 {
            return Err(Error::BoundaryMeans("the KL oracle"));
        }
    }
    let lo = tail.iter().cloned().fold(head, f64::min);
    // clamp the grid strictly inside (0, 1) to keep kl finite
    let lo = lo.max(1e-9);
    let hi = head.min(1.0 - 1e-9);
    Ok(grid_minimize(lo, hi, |x| {
        let mut v = kl_bernoulli(x, head).unwrap();
        for &m in &tail {
            if x > m {
                v += kl_bernoulli(x, m).unwrap();
            }
        }
        v
    }))
}

/// Dense-grid sign-change search for the `alpha_j` fixed points, on the same
/// defining equation as the bisection solver but located exhaustively.
pub fn alpha_oracle(s: &SortedInstance, j: usize, variant: CrVariant) -> Result<f64> {
    use crate::guarantees::{psi_phi_zeta, xi_j};
    if j < 2 || j >= s.k() {
        return Err(Error::IndexOutOfRange { j, lo: 2, hi: s.k() - 1 });
    }
    let lb_j = log_bar(j);
    let lb_next = log_bar(j + 1);
    let anchor = (1.0 / ((j + 1) as f64 * lb_next)).sqrt();
    let (psi, _, zeta, phi) = psi_phi_zeta(s, j)?;
    let residual: Box<dyn Fn(f64) -> f64> = match variant {
        CrVariant::C => {
            let line = 2.0 * xi_j(s, j)? / (j as f64 * lb_j);
            Box::new(move |a: f64| {
                let h = ((1.0 + zeta) * a.sqrt() - anchor).max(0.0);
                line * (1.0 - a) - h * h
            })
        }
        CrVariant::A => {
            let line = psi / (j as f64 * lb_j);
            let ratio = j as f64 / (j + 1) as f64;
            Box::new(move |a: f64| {
                let h = ((1.0 + phi) * a.sqrt() - anchor).max(0.0);
                line * (1.0 - a) - ratio * h * h
            })
        }
    };
    // locate the sign change on a coarse grid, then refine twice
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for step in [1e-4, 1e-8, 1e-12] {
        let mut x = lo;
        while x < hi {
            let next = (x + step).min(hi);
            if residual(next) <= 0.0 {
                lo = x;
                hi = next;
                break;
            }
            x = next;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Numeric twin of the closed-form variant-A gap program (eq. value
/// including the `beta` factor), minimized by golden-section search on the
/// one-dimensional reduction.
pub fn gap_program_oracle(
    s: &SortedInstance,
    j: usize,
    beta: f64,
    variant: CrVariant,
) -> Result<f64> {
    if j < 2 || j > s.k() {
        return Err(Error::IndexOutOfRange { j, lo: 2, hi: s.k() });
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::BadParameter(format!("beta = {beta} outside (0, 1]")));
    }
    let g = g_threshold(beta);
    let head = s.mu(1);
    let tail: Vec<f64> = (2..=j).map(|k| s.mu(k)).collect();
    let tail_mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let objective: Box<dyn Fn(f64) -> f64> = match variant {
        CrVariant::A => Box::new(move |x: f64| {
            let h = (x + g - tail_mean).max(0.0);
            (x - head) * (x - head) + (j - 1) as f64 * h * h
        }),
        CrVariant::C => {
            let tail = tail.clone();
            Box::new(move |x: f64| {
                let mut v = (x - head) * (x - head);
                for &m in &tail {
                    let h = (x + g - m).max(0.0);
                    v += h * h;
                }
                v
            })
        }
    };
    let mut lo = tail.iter().cloned().fold(head, f64::min) - g - 1.0;
    let mut hi = head;
    // golden-section search on a strictly convex objective
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    for _ in 0..200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = objective(x2);
        }
    }
    Ok(beta * objective(0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guarantees::{alpha_j, gamma_j_kl, gap_program_value, xi_bar_j, xi_j};
    use crate::instance::sort_desc;
    use crate::Instance;

    fn sorted(means: &[f64]) -> SortedInstance {
        sort_desc(&Instance::new(means.to_vec()).unwrap())
    }

    #[test]
    fn oracle_matches_trivial_cases() {
        let s = sorted(&[1.0, 0.0]);
        assert!((xi_j_oracle(&s, 2).unwrap() - 0.5).abs() < 1e-9);

        let s = sorted(&[0.9, 0.1, 0.1]);
        assert!((xi_j_oracle(&s, 3).unwrap() - 0.426667).abs() < 1e-6);
    }

    #[test]
    fn oracle_matches_xi_bar_constraint_set() {
        let mut means = vec![0.95, 0.85, 0.2];
        means.extend(std::iter::repeat(0.0).take(3));
        let s = sorted(&means);
        let direct = xi_oracle(&s, &[3]).unwrap();
        assert!((direct - 0.28125).abs() < 1e-9);
        assert!((direct - xi_bar_j(&s, 2).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn oracle_rejects_large_instances() {
        let s = sorted(&(0..12).map(|i| 0.9 - 0.05 * i as f64).collect::<Vec<_>>());
        assert!(matches!(xi_j_oracle(&s, 3), Err(Error::OracleTooLarge { .. })));
    }

    #[test]
    fn closed_forms_match_oracles_on_fixed_instances() {
        for means in [
            vec![0.9, 0.1, 0.1],
            vec![0.7, 0.6, 0.5, 0.4],
            vec![0.95, 0.85, 0.2, 0.05],
            vec![0.5, 0.45, 0.45, 0.45, 0.45],
        ] {
            let s = sorted(&means);
            for j in 2..=s.k() {
                let xi = xi_j(&s, j).unwrap();
                assert!((xi - xi_j_oracle(&s, j).unwrap()).abs() < 1e-6, "xi j={j} {means:?}");
                let xb = xi_bar_j(&s, j).unwrap();
                assert!(
                    (xb - xi_bar_j_oracle(&s, j).unwrap()).abs() < 1e-6,
                    "xi_bar j={j} {means:?}"
                );
            }
        }
    }

    #[test]
    fn gamma_matches_grid() {
        let s = sorted(&[0.9, 0.1, 0.1]);
        let grid = gamma_oracle(&s, 2).unwrap();
        let pooled = gamma_j_kl(&s, 2, false).unwrap();
        assert!((grid - pooled).abs() < 1e-6);
    }

    #[test]
    fn alpha_oracle_matches_bisection() {
        let mut means = vec![0.95, 0.85, 0.2];
        means.extend(std::iter::repeat(0.0).take(47));
        let s = sorted(&means);
        for variant in [CrVariant::C, CrVariant::A] {
            let fast = alpha_j(&s, 2, variant).unwrap();
            let slow = alpha_oracle(&s, 2, variant).unwrap();
            assert!((fast - slow).abs() < 1e-9);
        }
    }

    #[test]
    fn gap_oracle_matches_closed_forms() {
        let s = sorted(&[0.95, 0.85, 0.2, 0.1]);
        for j in 2..=4 {
            for beta in [0.25, 0.5, 1.0] {
                for variant in [CrVariant::C, CrVariant::A] {
                    let direct = gap_program_value(&s, j, beta, variant).unwrap();
                    let grid = gap_program_oracle(&s, j, beta, variant).unwrap();
                    assert!(
                        (direct - grid).abs() < 1e-8,
                        "j={j} beta={beta} {variant:?}: {direct} vs {grid}"
                    );
                }
            }
        }
    }
}
