//! The release-gate battery: worked bound values, Monte Carlo reproduction
//! of the published error tables, oracle-backed property sweeps, and policy
//! invariant fuzzing. Every tolerance is pinned here.
//!
//! The battery is plain library code so that both the `acceptance`
//! integration test and the `repro` CLI subcommand run exactly the same
//! checks.

use std::fmt::Write as _;

use crate::guarantees::{
    alpha_j, fmt_sig, gamma_j_kl, gap_program_value, psi_phi_zeta, rate_cra, rate_crc,
    rate_sr_pinsker, rate_audibert, xi_bar_j, xi_j,
};
use crate::instance::sort_desc;
use crate::math::log_bar;
use crate::montecarlo::{estimate_error, generate_instance, ExperimentConfig, Family};
use crate::oracle::{alpha_oracle, gap_program_oracle, xi_bar_j_oracle, xi_j_oracle};
use crate::policies::{
    run_policy_tape, CrVariant, PolicyKind, PolicyParams, PolicyState,
};
use crate::rng::RngStream;
use crate::{Error, Instance, Result, SortedInstance};

/// Which part of the battery a criterion belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    /// Criteria 1-4: closed-form bound values.
    Bounds,
    /// Criteria 5-6: Monte Carlo table reproduction.
    MonteCarlo,
    /// Criterion 7: solver properties against oracles.
    Properties,
    /// Criterion 8: policy invariant fuzzing.
    Policies,
}

impl std::str::FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bounds" => Ok(Group::Bounds),
            "montecarlo" | "monte-carlo" => Ok(Group::MonteCarlo),
            "properties" => Ok(Group::Properties),
            "policies" => Ok(Group::Policies),
            other => Err(Error::UnknownName { what: "group", got: other.to_string() }),
        }
    }
}

/// Result of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {}: {} — {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

/// Battery configuration.
#[derive(Debug, Clone)]
pub struct AcceptanceOptions {
    /// Monte Carlo runs per cell; tolerances widen by `sqrt(40000 / runs)`.
    pub runs: u64,
    /// Restrict to these groups (`None` runs everything).
    pub groups: Option<Vec<Group>>,
    pub base_seed: u64,
    pub parallelism: Option<usize>,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        Self { runs: 40_000, groups: None, base_seed: 1, parallelism: None }
    }
}

impl AcceptanceOptions {
    fn wants(&self, group: Group) -> bool {
        self.groups.as_ref().map_or(true, |gs| gs.contains(&group))
    }
}

fn example1() -> SortedInstance {
    sort_desc(&Instance::new(vec![0.9, 0.1, 0.1]).unwrap())
}

fn example2() -> SortedInstance {
    let mut means = vec![0.95, 0.85, 0.2];
    means.extend(std::iter::repeat(0.0).take(47));
    sort_desc(&Instance::new(means).unwrap())
}

/// Run the battery and return one outcome per criterion, in order.
pub fn run_acceptance(options: &AcceptanceOptions) -> Vec<CriterionOutcome> {
    let mut outcomes = Vec::new();
    if options.wants(Group::Bounds) {
        outcomes.push(criterion_1());
        outcomes.push(criterion_2());
        outcomes.push(criterion_3());
        outcomes.push(criterion_4());
    }
    if options.wants(Group::MonteCarlo) {
        outcomes.push(criterion_5(options));
        outcomes.push(criterion_6(options));
    }
    if options.wants(Group::Properties) {
        outcomes.push(criterion_7());
    }
    if options.wants(Group::Policies) {
        outcomes.push(criterion_8());
    }
    outcomes
}

fn outcome(
    id: usize,
    name: &'static str,
    result: Result<(bool, String)>,
) -> CriterionOutcome {
    match result {
        Ok((passed, detail)) => CriterionOutcome { id, name, passed, detail },
        Err(e) => CriterionOutcome { id, name, passed: false, detail: format!("error: {e}") },
    }
}

fn criterion_1() -> CriterionOutcome {
    outcome(1, "worked 3-arm bound values", (|| {
        let s = example1();
        let (audibert, _) = rate_audibert(&s)?;
        let (sr, _) = rate_sr_pinsker(&s)?;
        let ok_a = (audibert - 0.16).abs() <= 5e-4;
        let ok_s = (sr - 0.2133).abs() <= 1e-3;
        Ok((
            ok_a && ok_s,
            format!(
                "audibert rate {} (want 0.1600±0.0005), sr rate {} (want 0.2133±0.0010)",
                fmt_sig(audibert, 6),
                fmt_sig(sr, 6)
            ),
        ))
    })())
}

fn criterion_2() -> CriterionOutcome {
    outcome(2, "50-arm SR bound at T=5000", (|| {
        let s = example2();
        let (rate, _) = rate_sr_pinsker(&s)?;
        let bound = (-5000.0 * rate).exp();
        let target = 1.93e-3;
        let rel = (bound - target).abs() / target;
        Ok((rel <= 0.01, format!("bound {} vs {} ({}% off)", fmt_sig(bound, 6), target, fmt_sig(rel * 100.0, 3))))
    })())
}

fn criterion_3() -> CriterionOutcome {
    outcome(3, "50-arm CR-C bound at T=5000", (|| {
        let s = example2();
        let (rate, _) = rate_crc(&s)?;
        let bound = (-5000.0 * rate).exp();
        let target = 6.40e-4;
        let rel = (bound - target).abs() / target;
        let alpha = alpha_j(&s, 2, CrVariant::C)?;
        let alpha_grid = alpha_oracle(&s, 2, CrVariant::C)?;
        let ok_alpha = (alpha - 0.11784).abs() <= 1e-4 && (alpha - alpha_grid).abs() <= 1e-4;
        Ok((
            rel <= 0.01 && ok_alpha,
            format!(
                "bound {} vs {} ({}% off); alpha_2 {} vs grid {}",
                fmt_sig(bound, 6),
                target,
                fmt_sig(rel * 100.0, 3),
                fmt_sig(alpha, 6),
                fmt_sig(alpha_grid, 6)
            ),
        ))
    })())
}

fn criterion_4() -> CriterionOutcome {
    outcome(4, "50-arm CR-A bound at T=5000", (|| {
        let s = example2();
        let (rate, j_min) = rate_cra(&s)?;
        let bound = (-5000.0 * rate).exp();
        // oracle route: same formula with every alpha from the grid search
        let lb_k = log_bar(s.k());
        let mut oracle_rate = f64::INFINITY;
        for j in 2..=s.k() {
            let (psi, psi_bar, _, _) = psi_phi_zeta(&s, j)?;
            let inner = if j < s.k() {
                let alpha = alpha_oracle(&s, j, CrVariant::A)?;
                (psi * log_bar(j + 1) * (1.0 - alpha) / log_bar(j)).max(psi)
            } else {
                psi
            };
            oracle_rate = oracle_rate.min(2.0 * inner.min(psi_bar) / (j as f64 * lb_k));
        }
        let oracle_bound = (-5000.0 * oracle_rate).exp();
        let rel_oracle = (bound - oracle_bound).abs() / oracle_bound;
        let in_band = (5.5e-4..=6.6e-4).contains(&bound);
        let paper = 6.36e-4;
        Ok((
            rel_oracle <= 1e-6 && in_band,
            format!(
                "bound {} (j_min {j_min}), oracle {} ({} relative); gap to published 6.36e-4: {}",
                fmt_sig(bound, 6),
                fmt_sig(oracle_bound, 6),
                fmt_sig(rel_oracle, 3),
                fmt_sig((bound - paper) / paper, 3)
            ),
        ))
    })())
}

struct McCell {
    kind: PolicyKind,
    t: u64,
    target_pct: f64,
    tol_pp: f64,
}

fn run_mc_criterion(
    instance: Instance,
    cells: &[McCell],
    options: &AcceptanceOptions,
) -> Result<(bool, String)> {
    let scale = (40_000.0 / options.runs as f64).sqrt();
    let mut budgets: Vec<u64> = cells.iter().map(|c| c.t).collect();
    budgets.sort_unstable();
    budgets.dedup();
    let mut kinds: Vec<PolicyKind> = cells.iter().map(|c| c.kind).collect();
    kinds.dedup();
    let mut config = ExperimentConfig::new(instance);
    config.algorithms = kinds.iter().map(|&k| (k, PolicyParams::default())).collect();
    config.budgets = budgets;
    config.runs = options.runs;
    config.base_seed = options.base_seed;
    config.parallelism = options.parallelism;
    let results = estimate_error(&config)?;

    let mut all_ok = true;
    let mut detail = String::new();
    for cell in cells {
        let r = results
            .iter()
            .find(|r| r.algorithm == cell.kind && r.t == cell.t)
            .expect("cell present");
        let measured_pct = r.error_rate * 100.0;
        let tol = cell.tol_pp * scale;
        let ok = (measured_pct - cell.target_pct).abs() <= tol;
        all_ok &= ok;
        let _ = write!(
            detail,
            "{}[{} T={}: {}% vs {}±{}pp]",
            if detail.is_empty() { "" } else { " " },
            cell.kind,
            cell.t,
            fmt_sig(measured_pct, 3),
            cell.target_pct,
            fmt_sig(tol, 2)
        );
    }
    Ok((all_ok, detail))
}

fn criterion_5(options: &AcceptanceOptions) -> CriterionOutcome {
    outcome(5, "stair-family error table (K=55)", (|| {
        let instance = generate_instance(Family::Stair, 10)?;
        let cells = [
            McCell { kind: PolicyKind::Sr, t: 5000, target_pct: 1.26, tol_pp: 0.25 },
            McCell { kind: PolicyKind::CrC, t: 5000, target_pct: 1.05, tol_pp: 0.25 },
            McCell { kind: PolicyKind::CrA, t: 5000, target_pct: 0.57, tol_pp: 0.25 },
            McCell { kind: PolicyKind::Sr, t: 3000, target_pct: 5.5, tol_pp: 0.5 },
            McCell { kind: PolicyKind::CrA, t: 3000, target_pct: 4.7, tol_pp: 0.5 },
        ];
        run_mc_criterion(instance, &cells, options)
    })())
}

fn criterion_6(options: &AcceptanceOptions) -> CriterionOutcome {
    outcome(6, "one-group error table (K=10, T=8000)", (|| {
        let instance = generate_instance(Family::OneGroup, 10)?;
        let cells = [
            McCell { kind: PolicyKind::Sr, t: 8000, target_pct: 4.29, tol_pp: 0.6 },
            McCell { kind: PolicyKind::CrC, t: 8000, target_pct: 4.17, tol_pp: 0.6 },
            McCell { kind: PolicyKind::CrA, t: 8000, target_pct: 4.07, tol_pp: 0.6 },
        ];
        run_mc_criterion(instance, &cells, options)
    })())
}

/// Deterministic random instance with means inside `[lo, hi]`, 2 to 8 arms,
/// and a strict best arm.
fn random_instance(rng: &mut RngStream, lo: f64, hi: f64) -> SortedInstance {
    loop {
        let k = 2 + (rng.next_f64() * 7.0) as usize; // 2..=8
        let means: Vec<f64> = (0..k).map(|_| lo + (hi - lo) * rng.next_f64()).collect();
        if let Ok(inst) = Instance::new(means) {
            let s = sort_desc(&inst);
            if s.mu(1) > s.mu(2) {
                return s;
            }
        }
    }
}

fn criterion_7() -> CriterionOutcome {
    outcome(7, "solver properties vs oracles", (|| {
        let mut rng = RngStream::new(0xACCE97, 0);
        let mut max_xi_dev = 0.0f64;
        let mut max_alpha_residual = 0.0f64;
        let mut checked = 0usize;

        for _ in 0..200 {
            let s = random_instance(&mut rng, 0.01, 0.99);
            for j in 2..=s.k() {
                let xi = xi_j(&s, j)?;
                let xb = xi_bar_j(&s, j)?;
                max_xi_dev = max_xi_dev
                    .max((xi - xi_j_oracle(&s, j)?).abs())
                    .max((xb - xi_bar_j_oracle(&s, j)?).abs());
                if max_xi_dev > 1e-6 {
                    return Ok((false, format!("pooling deviates from oracle by {max_xi_dev:e}")));
                }
                let (psi, psi_bar, _, _) = psi_phi_zeta(&s, j)?;
                if xb < xi - 1e-12 || psi_bar < psi - 1e-12 {
                    return Ok((false, format!("barred quantity below base at j={j}")));
                }
                let gap = s.mu(1) - s.mu(j);
                if 2.0 * xi < gap * gap - 1e-12 {
                    return Ok((false, format!("2 xi_{j} below squared gap")));
                }
                let gamma = gamma_j_kl(&s, j, false)?;
                if gamma < 2.0 * xi - 1e-9 {
                    return Ok((false, format!("Gamma_{j} = {gamma} below 2 xi_{j} = {}", 2.0 * xi)));
                }
                if j < s.k() {
                    for variant in [CrVariant::C, CrVariant::A] {
                        let alpha = alpha_j(&s, j, variant)?;
                        max_alpha_residual = max_alpha_residual.max(crossing_residual(&s, j, variant, alpha)?);
                    }
                }
                checked += 1;
            }
        }
        if max_alpha_residual > 1e-12 {
            return Ok((false, format!("crossing residual {max_alpha_residual:e} above 1e-12")));
        }

        // gap-constrained programs on 200 random (instance, j, beta) triples
        let mut max_gap_dev = 0.0f64;
        for _ in 0..200 {
            let s = random_instance(&mut rng, 0.01, 0.99);
            let j = 2 + (rng.next_f64() * (s.k() - 1) as f64) as usize;
            let j = j.min(s.k());
            let beta = 0.05 + 0.95 * rng.next_f64();
            let c = gap_program_value(&s, j, beta, CrVariant::C)?;
            if c < xi_j(&s, j)? - 1e-9 {
                return Ok((false, format!("gap program (C) below xi_{j}")));
            }
            let a = gap_program_value(&s, j, beta, CrVariant::A)?;
            let (psi, _, _, _) = psi_phi_zeta(&s, j)?;
            if a < psi - 1e-9 {
                return Ok((false, format!("gap program (A) below psi_{j}")));
            }
            let numeric = gap_program_oracle(&s, j, beta, CrVariant::A)?;
            max_gap_dev = max_gap_dev.max((a - numeric).abs());
            if max_gap_dev > 1e-8 {
                return Ok((false, format!("closed-form gap value deviates by {max_gap_dev:e}")));
            }
        }

        // CR-C rate dominates the SR rate
        for _ in 0..100 {
            let s = random_instance(&mut rng, 0.01, 0.99);
            let (crc, _) = rate_crc(&s)?;
            let (sr, _) = rate_sr_pinsker(&s)?;
            if crc < sr - 1e-12 {
                return Ok((false, format!("rate_crc {crc} below rate_sr {sr}")));
            }
        }

        Ok((
            true,
            format!(
                "{checked} (instance, j) pairs; max pooling dev {}, max crossing residual {}, max gap dev {}",
                fmt_sig(max_xi_dev, 3),
                fmt_sig(max_alpha_residual, 3),
                fmt_sig(max_gap_dev, 3)
            ),
        ))
    })())
}

fn crossing_residual(
    s: &SortedInstance,
    j: usize,
    variant: CrVariant,
    alpha: f64,
) -> Result<f64> {
    let lb_j = log_bar(j);
    let lb_next = log_bar(j + 1);
    let anchor = (1.0 / ((j + 1) as f64 * lb_next)).sqrt();
    let (psi, _, zeta, phi) = psi_phi_zeta(s, j)?;
    let (line, hinge) = match variant {
        CrVariant::C => {
            let line = 2.0 * xi_j(s, j)? / (j as f64 * lb_j);
            let h = ((1.0 + zeta) * alpha.sqrt() - anchor).max(0.0);
            (line, h * h)
        }
        CrVariant::A => {
            let line = psi / (j as f64 * lb_j);
            let ratio = j as f64 / (j + 1) as f64;
            let h = ((1.0 + phi) * alpha.sqrt() - anchor).max(0.0);
            (line, ratio * h * h)
        }
    };
    Ok((line * (1.0 - alpha) - hinge).abs() / line.max(1.0))
}

fn criterion_8() -> CriterionOutcome {
    outcome(8, "policy invariant fuzzing", (|| {
        let mut rng = RngStream::new(0xF0221, 1);
        let runs_per_policy = 1000usize;

        for kind in PolicyKind::ALL {
            for trial in 0..runs_per_policy {
                let s = random_instance(&mut rng, 0.0, 1.0);
                let inst = Instance::new(s.to_original_means()).unwrap();
                let k = inst.k() as u64;
                let budget = k + (rng.next_f64() * 280.0) as u64;
                let theta_limit = 1.0 / log_bar(inst.k());
                let theta0 = match trial % 3 {
                    0 => 1e-5,
                    1 => 0.3 * theta_limit,
                    _ => 0.8 * theta_limit,
                };
                let params = PolicyParams { theta0, ..PolicyParams::default() };
                let seed = rng.next_f64().to_bits();

                let is_cr = matches!(kind, PolicyKind::CrC | PolicyKind::CrA);
                let check_round_robin = matches!(kind, PolicyKind::Sr) || is_cr;

                let mut state = PolicyState::new(kind, inst.k(), budget, params)?;
                let mut reward_rng = RngStream::new(seed, 0);
                for _ in 0..budget {
                    let arm = state.select_arm()?;
                    let reward = crate::rng::sample_reward(&inst, arm, &mut reward_rng)?;
                    state.observe(arm, reward)?;
                    if check_round_robin {
                        let counts: Vec<u64> =
                            state.candidates().iter().map(|&a| state.counts()[a]).collect();
                        let spread = counts.iter().max().unwrap() - counts.iter().min().unwrap();
                        if spread > 1 {
                            return Ok((false, format!("{kind}: in-set count spread {spread} > 1")));
                        }
                    }
                }
                if state.counts().iter().sum::<u64>() != budget {
                    return Ok((false, format!("{kind}: total pulls != T")));
                }
                state.recommend()?;

                if is_cr {
                    let warmup = (theta0 * budget as f64).floor() as u64;
                    if state.discard_log().iter().any(|e| e.round <= warmup) {
                        return Ok((false, format!("{kind}: discard during warm-up")));
                    }
                    // discarded counts strictly increase
                    let counts: Vec<u64> =
                        state.discard_log().iter().map(|e| state.counts()[e.arm]).collect();
                    if counts.windows(2).any(|w| w[1] <= w[0]) {
                        return Ok((false, format!("{kind}: discard counts not increasing")));
                    }
                }
            }
        }

        // CR-A discards no later than CR-C on identical reward tapes
        for _ in 0..1000 {
            let s = random_instance(&mut rng, 0.0, 1.0);
            let inst = Instance::new(s.to_original_means()).unwrap();
            let k = inst.k();
            let budget = k as u64 + (rng.next_f64() * 280.0) as u64;
            let tape: Vec<Vec<f64>> = (0..k)
                .map(|arm| {
                    (0..budget)
                        .map(|_| if rng.next_f64() < inst.mean(arm) { 1.0 } else { 0.0 })
                        .collect()
                })
                .collect();
            let params = PolicyParams::default();
            let crc = run_policy_tape(PolicyKind::CrC, k, budget, params, &tape)?;
            let cra = run_policy_tape(PolicyKind::CrA, k, budget, params, &tape)?;
            for (a, c) in cra.discard_log.iter().zip(&crc.discard_log) {
                if a.round > c.round {
                    return Ok((
                        false,
                        format!("CR-A discarded at {} after CR-C at {}", a.round, c.round),
                    ));
                }
            }
        }

        // zero error on deterministic instances, all policies
        for kind in PolicyKind::ALL {
            for k in [2usize, 4, 7] {
                let mut means = vec![0.0; k];
                means[0] = 1.0;
                let inst = Instance::new(means).unwrap();
                let mut reward_rng = RngStream::new(99, k as u64);
                let out = crate::policies::run_policy(
                    kind,
                    &inst,
                    (3 * k) as u64,
                    PolicyParams::default(),
                    &mut reward_rng,
                )?;
                if out.recommended != 0 {
                    return Ok((false, format!("{kind}: error on deterministic instance")));
                }
            }
        }

        Ok((true, format!("{runs_per_policy} fuzzed runs per policy, all invariants held")))
    })())
}
