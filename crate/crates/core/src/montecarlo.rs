//! Seeded, parallel estimation of empirical error probabilities.
//!
//! Runs are embarrassingly parallel: run `i` of a sweep cell draws its
//! rewards from stream `i` of a cell-specific seed, and error indicators are
//! reduced by integer summation, so results are identical for any worker
//! count or scheduling. Cells (one per algorithm and budget) use disjoint
//! seeds derived from the experiment's base seed, so algorithms never share
//! random numbers and adding one never perturbs another's results.

use rayon::prelude::*;
use serde::Serialize;

use crate::math::normal_quantile;
use crate::policies::{run_policy, PolicyKind, PolicyParams};
use crate::rng::RngStream;
use crate::{Error, Instance, Result};

/// The experiment families: each maps a size parameter to a mean vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    /// `mu_1 = 0.5`, all other arms at 0.45.
    OneGroup,
    /// `mu_1 = 0.5`, first half of the suboptimal arms at 0.45, rest at 0.4.
    TwoGroup,
    /// `mu_k = 3/4 - (k-1) / (2K)`.
    Linear,
    /// `mu_1 = sin((K-1) pi / (2K))`, `mu_k = sin(9 pi (K-k+1) / (20K))`.
    Concave,
    /// `mu_k = 3 / (10 (k+1))`.
    Convex,
    /// `M` levels at `(3/4) 3^(-m/M)`, level `m` holding `m` arms; `K = M(M+1)/2`.
    Stair,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::OneGroup => "one-group",
            Family::TwoGroup => "two-group",
            Family::Linear => "linear",
            Family::Concave => "concave",
            Family::Convex => "convex",
            Family::Stair => "stair",
        }
    }

    pub const ALL: [Family; 6] = [
        Family::OneGroup,
        Family::TwoGroup,
        Family::Linear,
        Family::Concave,
        Family::Convex,
        Family::Stair,
    ];
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-group" | "onegroup" => Ok(Family::OneGroup),
            "two-group" | "twogroup" => Ok(Family::TwoGroup),
            "linear" => Ok(Family::Linear),
            "concave" => Ok(Family::Concave),
            "convex" => Ok(Family::Convex),
            "stair" => Ok(Family::Stair),
            other => Err(Error::UnknownName { what: "family", got: other.to_string() }),
        }
    }
}

/// Build an instance of the given family. `size` is the number of arms `K`,
/// except for [`Family::Stair`] where it is the number of levels `M` (so
/// `K = M (M + 1) / 2`).
pub fn generate_instance(family: Family, size: usize) -> Result<Instance> {
    let bad = |msg: String| Error::BadParameter(msg);
    let means = match family {
        Family::OneGroup => {
            if size < 2 {
                return Err(bad(format!("one-group needs K >= 2, got {size}")));
            }
            let mut m = vec![0.45; size];
            m[0] = 0.5;
            m
        }
        Family::TwoGroup => {
            if size < 2 {
                return Err(bad(format!("two-group needs K >= 2, got {size}")));
            }
            let split = (size - 1) / 2;
            (1..=size)
                .map(|k| {
                    if k == 1 {
                        0.5
                    } else if k <= split {
                        0.45
                    } else {
                        0.4
                    }
                })
                .collect()
        }
        Family::Linear => {
            if size < 2 {
                return Err(bad(format!("linear needs K >= 2, got {size}")));
            }
            (1..=size).map(|k| 0.75 - (k - 1) as f64 / (2.0 * size as f64)).collect()
        }
        Family::Concave => {
            if size < 2 {
                return Err(bad(format!("concave needs K >= 2, got {size}")));
            }
            let kf = size as f64;
            (1..=size)
                .map(|k| {
                    if k == 1 {
                        ((kf - 1.0) * std::f64::consts::PI / (2.0 * kf)).sin()
                    } else {
                        (9.0 * std::f64::consts::PI * (kf - k as f64 + 1.0) / (20.0 * kf)).sin()
                    }
                })
                .collect()
        }
        Family::Convex => {
            if size < 2 {
                return Err(bad(format!("convex needs K >= 2, got {size}")));
            }
            (1..=size).map(|k| 3.0 / (10.0 * (k + 1) as f64)).collect()
        }
        Family::Stair => {
            if size < 2 {
                return Err(bad(format!("stair needs M >= 2 levels, got {size}")));
            }
            let mut m = Vec::with_capacity(size * (size + 1) / 2);
            for level in 1..=size {
                let value = 0.75 * 3f64.powf(-(level as f64) / size as f64);
                m.extend(std::iter::repeat(value).take(level));
            }
            m
        }
    };
    Ok(Instance::new(means)?.with_label(family.name()))
}

/// One Monte Carlo sweep: every algorithm crossed with every budget.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub instance: Instance,
    /// Family tag used in the CSV; defaults to the instance label.
    pub family: String,
    pub algorithms: Vec<(PolicyKind, PolicyParams)>,
    pub budgets: Vec<u64>,
    pub runs: u64,
    pub base_seed: u64,
    /// Worker count hint; `None` uses the global thread pool.
    pub parallelism: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(instance: Instance) -> Self {
        let family = instance.label().unwrap_or("custom").to_string();
        Self {
            instance,
            family,
            algorithms: Vec::new(),
            budgets: Vec::new(),
            runs: 40_000,
            base_seed: 1,
            parallelism: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs < 1 {
            return Err(Error::BadParameter("runs must be at least 1".into()));
        }
        for &(kind, params) in &self.algorithms {
            for &t in &self.budgets {
                // surfaces budget/theta0 problems before any run starts
                crate::policies::PolicyState::new(kind, self.instance.k(), t, params)?;
            }
        }
        Ok(())
    }
}

/// Empirical error rate of one (algorithm, budget) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub family: String,
    pub k: usize,
    pub algorithm: PolicyKind,
    pub t: u64,
    pub runs: u64,
    pub errors: u64,
    pub error_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub base_seed: u64,
}

/// Wilson score interval for `errors` successes out of `runs` trials.
pub fn wilson_ci(errors: u64, runs: u64, level: f64) -> Result<(f64, f64)> {
    if runs == 0 || errors > runs {
        return Err(Error::BadParameter(format!("invalid counts: {errors} errors in {runs} runs")));
    }
    let z = normal_quantile(0.5 + level / 2.0)?;
    let n = runs as f64;
    let p = errors as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}

/// Seed of one sweep cell, mixed from the experiment seed, the algorithm,
/// and the budget (splitmix64 finalizer). Exposed so that any single run can
/// be replayed: run `i` of a cell uses `RngStream::new(cell_seed(..), i)`.
pub fn cell_seed(base_seed: u64, kind: PolicyKind, t: u64) -> u64 {
    let tag = match kind {
        PolicyKind::Sr => 1u64,
        PolicyKind::CrC => 2,
        PolicyKind::CrA => 3,
        PolicyKind::Sh => 4,
        PolicyKind::UGapE => 5,
    };
    let mut z = base_seed ^ tag.wrapping_mul(0x9e3779b97f4a7c15) ^ t.wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn run_cell(
    inst: &Instance,
    kind: PolicyKind,
    params: PolicyParams,
    t: u64,
    runs: u64,
    seed: u64,
) -> Result<u64> {
    let best = inst.best_arm();
    (0..runs)
        .into_par_iter()
        .map(|run_idx| {
            let mut rng = RngStream::new(seed, run_idx);
            let outcome = run_policy(kind, inst, t, params, &mut rng)?;
            Ok((outcome.recommended != best) as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Estimate the error probability of every (algorithm, budget) cell.
pub fn estimate_error(config: &ExperimentConfig) -> Result<Vec<SimResult>> {
    config.validate()?;
    let run = || -> Result<Vec<SimResult>> {
        let mut results = Vec::new();
        for &(kind, params) in &config.algorithms {
            for &t in &config.budgets {
                let seed = cell_seed(config.base_seed, kind, t);
                let errors = run_cell(&config.instance, kind, params, t, config.runs, seed)?;
                let (ci_low, ci_high) = wilson_ci(errors, config.runs, 0.95)?;
                results.push(SimResult {
                    family: config.family.clone(),
                    k: config.instance.k(),
                    algorithm: kind,
                    t,
                    runs: config.runs,
                    errors,
                    error_rate: errors as f64 / config.runs as f64,
                    ci_low,
                    ci_high,
                    base_seed: config.base_seed,
                });
            }
        }
        Ok(results)
    };
    match config.parallelism {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::BadParameter(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// Exact CSV schema produced (and re-parsed) by the harness.
pub const CSV_HEADER: &str =
    "family,K,algorithm,T,runs,errors,error_rate,ci_low,ci_high,base_seed";

/// Render results as CSV. Rates carry 6 significant digits.
pub fn results_to_csv(results: &[SimResult]) -> String {
    use crate::guarantees::fmt_sig;
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in results {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.family,
            r.k,
            r.algorithm,
            r.t,
            r.runs,
            r.errors,
            fmt_sig(r.error_rate, 6),
            fmt_sig(r.ci_low, 6),
            fmt_sig(r.ci_high, 6),
            r.base_seed
        ));
    }
    out
}

/// Parse the CSV produced by [`results_to_csv`].
pub fn results_from_csv(text: &str) -> Result<Vec<SimResult>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        _ => return Err(Error::Csv { line: 1, reason: "missing or wrong header".into() }),
    }
    let mut results = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(Error::Csv {
                line: idx + 1,
                reason: format!("expected 10 fields, got {}", fields.len()),
            });
        }
        let parse_err = |what: &str| Error::Csv {
            line: idx + 1,
            reason: format!("bad {what} field"),
        };
        results.push(SimResult {
            family: fields[0].to_string(),
            k: fields[1].parse().map_err(|_| parse_err("K"))?,
            algorithm: fields[2].parse()?,
            t: fields[3].parse().map_err(|_| parse_err("T"))?,
            runs: fields[4].parse().map_err(|_| parse_err("runs"))?,
            errors: fields[5].parse().map_err(|_| parse_err("errors"))?,
            error_rate: fields[6].parse().map_err(|_| parse_err("error_rate"))?,
            ci_low: fields[7].parse().map_err(|_| parse_err("ci_low"))?,
            ci_high: fields[8].parse().map_err(|_| parse_err("ci_high"))?,
            base_seed: fields[9].parse().map_err(|_| parse_err("base_seed"))?,
        });
    }
    Ok(results)
}
