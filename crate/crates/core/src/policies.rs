//! Round-by-round sampling policies.
//!
//! All five policies share one interface: [`PolicyState::select_arm`] picks
//! the arm to pull this round (applying any discard due at the top of the
//! round), [`PolicyState::observe`] feeds the reward back, and
//! [`PolicyState::recommend`] returns the final answer once the budget is
//! exhausted. [`run_policy`] drives the loop against a reward stream.
//!
//! Every "tie broken arbitrarily" in the pseudocode resolves to the lowest
//! arm index so that runs are bit-reproducible.

use serde::{Deserialize, Serialize};

use crate::math::{g_threshold, log_bar};
use crate::rng::{sample_reward, RngStream};
use crate::{Error, Instance, Result};

/// The five supported sampling policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    /// Successive Rejects: fixed phase lengths, one discard per phase.
    Sr,
    /// Continuous Rejects with the conservative gap condition.
    CrC,
    /// Continuous Rejects with the aggressive (averaged) gap condition.
    CrA,
    /// Sequential Halving baseline.
    Sh,
    /// UGapE baseline with on-the-fly complexity estimation.
    UGapE,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Sr => "sr",
            PolicyKind::CrC => "crc",
            PolicyKind::CrA => "cra",
            PolicyKind::Sh => "sh",
            PolicyKind::UGapE => "ugape",
        }
    }

    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Sr,
        PolicyKind::CrC,
        PolicyKind::CrA,
        PolicyKind::Sh,
        PolicyKind::UGapE,
    ];
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sr" => Ok(PolicyKind::Sr),
            "crc" | "cr-c" => Ok(PolicyKind::CrC),
            "cra" | "cr-a" => Ok(PolicyKind::CrA),
            "sh" => Ok(PolicyKind::Sh),
            "ugape" => Ok(PolicyKind::UGapE),
            other => Err(Error::UnknownName { what: "policy", got: other.to_string() }),
        }
    }
}

/// Which of the two CR discard conditions to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrVariant {
    /// Conservative: the worst candidate must trail *every* other candidate.
    C,
    /// Aggressive: the worst candidate must trail the *average* of the rest.
    A,
}

/// Tunable policy parameters, accepted by the CLI as a flat key-value map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    /// CR warm-up fraction: no discard before round `floor(theta0 * T)`.
    pub theta0: f64,
    /// Lower clip for empirical gaps in the UGapE complexity estimate.
    pub ugape_clip: f64,
    /// Multiplier on the UGapE exploration parameter `a = (T - K) / H`.
    pub ugape_scale: f64,
}

impl Default for PolicyParams {
    fn default() -> Self {
        Self { theta0: 1e-5, ugape_clip: 1e-3, ugape_scale: 1.0 }
    }
}

/// One discard: the (1-based) round at whose top the arm left the
/// candidate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscardEvent {
    pub round: u64,
    pub arm: usize,
}

/// Outcome of a discard check. `victim` is present iff `should_discard`;
/// `beta` is the argument that was (or would be) passed to `G` and is only
/// present for CR once the count conditions are satisfied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscardDecision {
    pub should_discard: bool,
    pub victim: Option<usize>,
    pub beta: Option<f64>,
}

impl DiscardDecision {
    fn no() -> Self {
        Self { should_discard: false, victim: None, beta: None }
    }
}

/// Full sampling state of one policy run.
#[derive(Debug, Clone)]
pub struct PolicyState {
    kind: PolicyKind,
    k: usize,
    budget: u64,
    /// Pulls completed so far; the current round is `t + 1`.
    t: u64,
    candidates: Vec<usize>,
    counts: Vec<u64>,
    sums: Vec<f64>,
    params: PolicyParams,
    discard_log: Vec<DiscardEvent>,
    /// Arm returned by the pending `select_arm`, awaiting its observation.
    selected: Option<usize>,
    /// Total count over the current candidate set.
    in_set_count: u64,
    /// Largest pull count among discarded arms (0 while none).
    max_outside_count: u64,
    /// CR only: rounds before which no discard check runs.
    cr_warmup: u64,
    /// SH only: surviving set size per phase.
    sh_sizes: Vec<usize>,
    /// SH only: cumulative per-arm pull target at the end of each phase.
    sh_targets: Vec<u64>,
    /// SH only: current phase index; `sh_sizes.len()` means leftover mode.
    sh_phase: usize,
}

impl PolicyState {
    /// Create a fresh state. For CR variants the budget must cover the
    /// forced one-pull-per-arm sweep and `theta0` must lie in
    /// `(0, 1/log_bar(K))`.
    pub fn new(kind: PolicyKind, k: usize, budget: u64, params: PolicyParams) -> Result<Self> {
        if k < 2 {
            return Err(Error::TooFewArms(k));
        }
        let min_budget = match kind {
            PolicyKind::CrC | PolicyKind::CrA => k as u64,
            _ => 1,
        };
        if budget < min_budget {
            return Err(Error::BudgetTooSmall {
                kind: kind.name(),
                budget,
                min: min_budget,
                arms: k,
            });
        }
        let cr_warmup = match kind {
            PolicyKind::CrC | PolicyKind::CrA => {
                let limit = 1.0 / log_bar(k);
                if !(params.theta0 > 0.0 && params.theta0 < limit) {
                    return Err(Error::Theta0OutOfRange { value: params.theta0, limit });
                }
                (params.theta0 * budget as f64).floor() as u64
            }
            _ => 0,
        };
        let (sh_sizes, sh_targets) = if kind == PolicyKind::Sh {
            sh_schedule(k, budget)
        } else {
            (Vec::new(), Vec::new())
        };
        Ok(Self {
            kind,
            k,
            budget,
            t: 0,
            candidates: (0..k).collect(),
            counts: vec![0; k],
            sums: vec![0.0; k],
            params,
            discard_log: Vec::new(),
            selected: None,
            in_set_count: 0,
            max_outside_count: 0,
            cr_warmup,
            sh_sizes,
            sh_targets,
            sh_phase: 0,
        })
    }

    /// Create a state with each arm already observed once, in arm order.
    /// Convenient for tests that want to pin the empirical means after the
    /// initial sweep.
    pub fn with_first_observations(
        kind: PolicyKind,
        budget: u64,
        params: PolicyParams,
        first: &[f64],
    ) -> Result<Self> {
        let mut state = Self::new(kind, first.len(), budget, params)?;
        for (arm, &reward) in first.iter().enumerate() {
            let picked = state.select_arm()?;
            if picked != arm {
                return Err(Error::BadParameter(format!(
                    "policy {} does not sweep arms in order (picked {picked}, expected {arm})",
                    kind.name()
                )));
            }
            state.observe(picked, reward)?;
        }
        Ok(state)
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Pulls completed so far.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    pub fn discard_log(&self) -> &[DiscardEvent] {
        &self.discard_log
    }

    /// Empirical mean of an arm; 0 while the arm is unpulled.
    pub fn empirical_mean(&self, arm: usize) -> f64 {
        if self.counts[arm] == 0 {
            0.0
        } else {
            self.sums[arm] / self.counts[arm] as f64
        }
    }

    /// SR discard check (Algorithm 1): with `j = |C| > 2` candidates, discard
    /// once every candidate has reached `T / (j * log_bar K)` pulls. The
    /// comparison is real-valued; the victim is the empirical-worst
    /// candidate.
    pub fn sr_should_discard(&self) -> DiscardDecision {
        let j = self.candidates.len();
        if j <= 2 {
            return DiscardDecision::no();
        }
        let threshold = self.budget as f64 / (j as f64 * log_bar(self.k));
        let min_count = self.candidates.iter().map(|&a| self.counts[a]).min().unwrap();
        if (min_count as f64) < threshold {
            return DiscardDecision::no();
        }
        DiscardDecision {
            should_discard: true,
            victim: Some(self.worst_candidate()),
            beta: None,
        }
    }

    /// CR discard check (Algorithm 2). All of the following must hold:
    /// `j = |C| > 2`; every in-set count equals the worst candidate's count;
    /// that common count strictly exceeds every discarded arm's count; and
    /// the empirical gap clears `G(beta)` with
    /// `beta = (sum_{k in C} N_k * log_bar j) / (T - sum_{k notin C} N_k)`.
    pub fn cr_should_discard(&self, variant: CrVariant) -> DiscardDecision {
        let j = self.candidates.len();
        if j <= 2 {
            return DiscardDecision::no();
        }
        // Counts inside the candidate set stay within 1 of each other, so
        // equality is divisibility of their sum.
        if self.in_set_count % j as u64 != 0 {
            return DiscardDecision::no();
        }
        let common = self.in_set_count / j as u64;
        debug_assert!(self.candidates.iter().all(|&a| self.counts[a] == common));
        if common == 0 || common <= self.max_outside_count {
            return DiscardDecision::no();
        }
        let outside = self.t - self.in_set_count;
        let beta = self.in_set_count as f64 * log_bar(j) / (self.budget - outside) as f64;
        let worst = self.worst_candidate();
        let worst_mean = self.empirical_mean(worst);
        let gap = match variant {
            CrVariant::C => {
                let best_floor = self
                    .candidates
                    .iter()
                    .filter(|&&a| a != worst)
                    .map(|&a| self.empirical_mean(a))
                    .fold(f64::INFINITY, f64::min);
                best_floor - worst_mean
            }
            CrVariant::A => {
                let others: f64 = self
                    .candidates
                    .iter()
                    .filter(|&&a| a != worst)
                    .map(|&a| self.empirical_mean(a))
                    .sum();
                others / (j - 1) as f64 - worst_mean
            }
        };
        if gap >= g_threshold(beta) {
            DiscardDecision { should_discard: true, victim: Some(worst), beta: Some(beta) }
        } else {
            DiscardDecision { should_discard: false, victim: None, beta: Some(beta) }
        }
    }

    /// Pick the arm to pull this round. Applies at most one discard first
    /// (SR/CR) or a due halving (SH), exactly as the pseudocode orders it.
    pub fn select_arm(&mut self) -> Result<usize> {
        if self.t >= self.budget {
            return Err(Error::BudgetExhausted(self.budget));
        }
        if self.selected.is_some() {
            return Err(Error::BadParameter(
                "select_arm called twice without an observation".into(),
            ));
        }
        let arm = match self.kind {
            PolicyKind::Sr => {
                let decision = self.sr_should_discard();
                if let Some(victim) = decision.victim {
                    self.discard(victim);
                }
                self.min_count_candidate()
            }
            PolicyKind::CrC | PolicyKind::CrA => {
                let variant = if self.kind == PolicyKind::CrC { CrVariant::C } else { CrVariant::A };
                if self.t >= self.cr_warmup.max(self.k as u64) {
                    let decision = self.cr_should_discard(variant);
                    if let Some(victim) = decision.victim {
                        self.discard(victim);
                    }
                }
                self.min_count_candidate()
            }
            PolicyKind::Sh => {
                self.sh_advance_phase();
                self.min_count_candidate()
            }
            PolicyKind::UGapE => {
                if self.t < self.k as u64 {
                    self.t as usize
                } else {
                    self.ugape_select()
                }
            }
        };
        self.selected = Some(arm);
        Ok(arm)
    }

    /// Record the reward of the arm returned by the pending `select_arm`.
    pub fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        if self.selected != Some(arm) {
            return Err(Error::ObserveMismatch { got: arm, expected: self.selected });
        }
        self.selected = None;
        self.counts[arm] += 1;
        self.sums[arm] += reward;
        self.in_set_count += 1;
        self.t += 1;
        Ok(())
    }

    /// Final recommendation: the empirical-best arm among the survivors.
    /// Errors until the full budget is spent.
    pub fn recommend(&self) -> Result<usize> {
        if self.t < self.budget {
            return Err(Error::RecommendTooEarly { t: self.t, budget: self.budget });
        }
        Ok(self.best_candidate())
    }

    fn min_count_candidate(&self) -> usize {
        let mut best = self.candidates[0];
        for &a in &self.candidates[1..] {
            if self.counts[a] < self.counts[best] {
                best = a;
            }
        }
        best
    }

    fn worst_candidate(&self) -> usize {
        let mut worst = self.candidates[0];
        for &a in &self.candidates[1..] {
            if self.empirical_mean(a) < self.empirical_mean(worst) {
                worst = a;
            }
        }
        worst
    }

    fn best_candidate(&self) -> usize {
        let mut best = self.candidates[0];
        for &a in &self.candidates[1..] {
            if self.empirical_mean(a) > self.empirical_mean(best) {
                best = a;
            }
        }
        best
    }

    fn discard(&mut self, victim: usize) {
        debug_assert!(self.candidates.len() > 2);
        self.candidates.retain(|&a| a != victim);
        self.in_set_count -= self.counts[victim];
        self.max_outside_count = self.max_outside_count.max(self.counts[victim]);
        self.discard_log.push(DiscardEvent { round: self.t + 1, arm: victim });
    }

    /// Advance SH through any phases whose quota is already met, halving the
    /// candidate set at each boundary. The final halving (2 -> 1) is left to
    /// `recommend`.
    fn sh_advance_phase(&mut self) {
        while self.sh_phase < self.sh_sizes.len() {
            let target = self.sh_targets[self.sh_phase];
            let done = self
                .candidates
                .iter()
                .all(|&a| self.counts[a] >= target);
            if !done {
                break;
            }
            if self.sh_phase + 1 < self.sh_sizes.len() {
                let keep = self.sh_sizes[self.sh_phase + 1];
                self.sh_halve(keep);
            }
            self.sh_phase += 1;
        }
    }

    fn sh_halve(&mut self, keep: usize) {
        let mut ranked = self.candidates.clone();
        ranked.sort_by(|&a, &b| {
            self.empirical_mean(b)
                .partial_cmp(&self.empirical_mean(a))
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut dropped: Vec<usize> = ranked.split_off(keep);
        dropped.sort_unstable();
        for victim in dropped {
            self.discard(victim);
        }
    }

    /// UGapE-b selection with the exploration parameter re-estimated from
    /// clipped empirical gaps each round.
    fn ugape_select(&self) -> usize {
        let k = self.k;
        let means: Vec<f64> = (0..k).map(|a| self.empirical_mean(a)).collect();
        let best = (0..k)
            .max_by(|&a, &b| means[a].partial_cmp(&means[b]).unwrap().then(b.cmp(&a)))
            .unwrap();
        let second = (0..k)
            .filter(|&a| a != best)
            .map(|a| means[a])
            .fold(f64::NEG_INFINITY, f64::max);
        let clip = self.params.ugape_clip;
        let h: f64 = (0..k)
            .map(|a| {
                let gap = if a == best { means[best] - second } else { means[best] - means[a] };
                let gap = gap.max(clip);
                1.0 / (gap * gap)
            })
            .sum();
        let a_param = self.params.ugape_scale * (self.budget - self.k as u64) as f64 / h;
        let beta: Vec<f64> = (0..k).map(|a| (a_param / self.counts[a] as f64).sqrt()).collect();
        let upper: Vec<f64> = (0..k).map(|a| means[a] + beta[a]).collect();
        // B_a = max_{i != a} U_i - L_a
        let mut b_index = Vec::with_capacity(k);
        for a in 0..k {
            let max_other = (0..k)
                .filter(|&i| i != a)
                .map(|i| upper[i])
                .fold(f64::NEG_INFINITY, f64::max);
            b_index.push(max_other - (means[a] - beta[a]));
        }
        let j_t = (0..k)
            .min_by(|&a, &b| b_index[a].partial_cmp(&b_index[b]).unwrap().then(a.cmp(&b)))
            .unwrap();
        let u_t = (0..k)
            .filter(|&a| a != j_t)
            .max_by(|&a, &b| upper[a].partial_cmp(&upper[b]).unwrap().then(b.cmp(&a)))
            .unwrap();
        // pull the less-sampled of the two (larger confidence width)
        if beta[u_t] > beta[j_t] {
            u_t
        } else if beta[j_t] > beta[u_t] {
            j_t
        } else {
            j_t.min(u_t)
        }
    }
}

/// Result of a full policy run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub recommended: usize,
    pub discard_log: Vec<DiscardEvent>,
    pub counts: Vec<u64>,
}

fn drive(
    mut state: PolicyState,
    mut reward: impl FnMut(usize, u64) -> f64,
) -> Result<RunOutcome> {
    for _ in 0..state.budget() {
        let arm = state.select_arm()?;
        let nth = state.counts()[arm];
        let r = reward(arm, nth);
        state.observe(arm, r)?;
    }
    let recommended = state.recommend()?;
    Ok(RunOutcome { recommended, discard_log: state.discard_log, counts: state.counts })
}

/// Execute exactly `budget` pulls of the given policy on `inst`, drawing
/// rewards from `rng`. Deterministic given `(inst, kind, budget, params,
/// seed)`.
pub fn run_policy(
    kind: PolicyKind,
    inst: &Instance,
    budget: u64,
    params: PolicyParams,
    rng: &mut RngStream,
) -> Result<RunOutcome> {
    let state = PolicyState::new(kind, inst.k(), budget, params)?;
    let mut failure: Option<Error> = None;
    let outcome = drive(state, |arm, _| match sample_reward(inst, arm, rng) {
        Ok(r) => r,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    });
    match failure {
        Some(e) => Err(e),
        None => outcome,
    }
}

/// Replay a run against a fixed reward tape: the `n`-th pull of arm `a`
/// always yields `tape[a][n]`. Used to compare policies on identical
/// realizations.
pub fn run_policy_tape(
    kind: PolicyKind,
    k: usize,
    budget: u64,
    params: PolicyParams,
    tape: &[Vec<f64>],
) -> Result<RunOutcome> {
    assert_eq!(tape.len(), k, "tape must have one row per arm");
    let state = PolicyState::new(kind, k, budget, params)?;
    drive(state, |arm, nth| tape[arm][nth as usize])
}

/// Sequential Halving schedule: surviving set sizes per phase and the
/// cumulative per-arm pull target at each phase end. `ceil(log2 K)` phases;
/// each phase gives every survivor `floor(T / (|S_r| * ceil(log2 K)))`
/// pulls; sizes halve (rounding up) down to 2, with the last 2 -> 1 step
/// folded into the final recommendation.
fn sh_schedule(k: usize, budget: u64) -> (Vec<usize>, Vec<u64>) {
    let phases = (usize::BITS - (k - 1).leading_zeros()) as u64; // ceil(log2 k)
    let mut sizes = Vec::new();
    let mut targets = Vec::new();
    let mut size = k;
    let mut cumulative = 0u64;
    loop {
        sizes.push(size);
        cumulative += budget / (size as u64 * phases);
        targets.push(cumulative);
        if size == 2 {
            break;
        }
        size = size.div_ceil(2).max(2);
    }
    (sizes, targets)
}
