//! `bestarm`: compute error-probability bounds, run Monte Carlo sweeps,
//! generate experiment instances, and reproduce the reference results.
//!
//! Exit codes: 0 on success, 1 when the acceptance battery (or an
//! execution step) fails, 2 on usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};

use bestarm_core::acceptance::{run_acceptance, AcceptanceOptions, Group};
use bestarm_core::guarantees::{guarantee_report, reports_to_csv, Algorithm, GuaranteeReport};
use bestarm_core::instance::sort_desc;
use bestarm_core::montecarlo::{
    estimate_error, generate_instance, results_to_csv, ExperimentConfig, Family,
};
use bestarm_core::policies::{PolicyKind, PolicyParams};
use bestarm_core::{guarantees::fmt_sig, Instance};

#[derive(Parser)]
#[command(
    name = "bestarm",
    version,
    about = "Fixed-budget best-arm identification: bounds, simulations, instances",
    after_help = "Exit codes: 0 success, 1 acceptance/execution failure, 2 usage error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate error-exponent guarantees for an instance.
    Bounds(BoundsArgs),
    /// Estimate empirical error rates with a seeded Monte Carlo sweep.
    Simulate(SimulateArgs),
    /// Generate an instance file for one of the experiment families.
    Gen(GenArgs),
    /// Run the acceptance battery and report pass/fail per criterion.
    Repro(ReproArgs),
}

#[derive(Args)]
#[command(group(
    ArgGroup::new("source").required(true).args(["means", "file"]),
))]
struct BoundsArgs {
    /// Comma-separated arm means, e.g. 0.9,0.1,0.1
    #[arg(long, value_delimiter = ',')]
    means: Option<Vec<f64>>,
    /// Instance JSON file ({"means": [...], "label": "..."})
    #[arg(long)]
    file: Option<PathBuf>,
    /// Algorithms: sr, sr-kl, crc, cra, audibert, barrier
    #[arg(long, value_delimiter = ',', default_value = "sr,crc,cra,audibert")]
    algos: Vec<String>,
    /// Budgets at which to evaluate exp(-T * rate)
    #[arg(long = "budget", alias = "budgets", value_delimiter = ',')]
    budget: Vec<u64>,
    /// Output format
    #[arg(long, default_value = "table", value_parser = ["table", "csv", "json"])]
    format: String,
    /// Write output to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(
    ArgGroup::new("source").required(true).args(["means", "file", "family"]),
))]
struct SimulateArgs {
    /// Comma-separated arm means
    #[arg(long, value_delimiter = ',')]
    means: Option<Vec<f64>>,
    /// Instance JSON file
    #[arg(long)]
    file: Option<PathBuf>,
    /// Experiment family: one-group, two-group, linear, concave, convex, stair
    #[arg(long)]
    family: Option<String>,
    /// Number of arms K (families other than stair)
    #[arg(long)]
    k: Option<usize>,
    /// Number of stair levels M (K = M(M+1)/2)
    #[arg(long)]
    m: Option<usize>,
    /// Policies: sr, crc, cra, sh, ugape
    #[arg(long, value_delimiter = ',', default_value = "sr,crc,cra")]
    algos: Vec<String>,
    /// Budgets T, comma separated
    #[arg(long = "budgets", alias = "budget", value_delimiter = ',', required = true)]
    budgets: Vec<u64>,
    /// Independent runs per (algorithm, budget) cell
    #[arg(long, default_value_t = 40_000)]
    runs: u64,
    /// Base seed; every cell and run derives its own stream from it
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CR warm-up fraction theta0
    #[arg(long, default_value_t = 1e-5)]
    theta0: f64,
    /// UGapE gap clip
    #[arg(long, default_value_t = 1e-3)]
    ugape_clip: f64,
    /// UGapE exploration scale
    #[arg(long, default_value_t = 1.0)]
    ugape_scale: f64,
    /// Worker threads (default: all cores)
    #[arg(long)]
    parallelism: Option<usize>,
    /// Output format
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// Write results to a file and echo a summary table
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Experiment family
    #[arg(long)]
    family: String,
    /// Number of arms K
    #[arg(long)]
    k: Option<usize>,
    /// Number of stair levels M
    #[arg(long)]
    m: Option<usize>,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproArgs {
    /// Run only these criterion groups: bounds, properties, policies, montecarlo
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<String>>,
    /// Monte Carlo runs per cell. Tolerances widen by sqrt(40000 / runs),
    /// so e.g. --runs 4000 widens them by sqrt(10).
    #[arg(long, default_value_t = 40_000)]
    runs: u64,
    /// Base seed for the Monte Carlo criteria
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (default: all cores)
    #[arg(long)]
    parallelism: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bounds(args) => cmd_bounds(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Repro(args) => return cmd_repro(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

enum CliError {
    /// Bad input: exit code 2.
    Usage(String),
    /// Execution failure (I/O and the like): exit code 1.
    Run(String),
}

impl From<bestarm_core::Error> for CliError {
    fn from(e: bestarm_core::Error) -> Self {
        match e {
            bestarm_core::Error::Io { .. } => CliError::Run(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn load_instance(means: Option<Vec<f64>>, file: Option<PathBuf>) -> Result<Instance, CliError> {
    match (means, file) {
        (Some(means), None) => Ok(Instance::new(means)?),
        (None, Some(path)) => Ok(Instance::load(path)?),
        _ => Err(CliError::Usage("exactly one instance source required".into())),
    }
}

fn family_instance(
    family: &str,
    k: Option<usize>,
    m: Option<usize>,
) -> Result<Instance, CliError> {
    let family: Family = family.parse()?;
    let size = match family {
        Family::Stair => m.ok_or_else(|| CliError::Usage("stair requires --m".into()))?,
        _ => k.ok_or_else(|| CliError::Usage(format!("family {family} requires --k")))?,
    };
    Ok(generate_instance(family, size)?)
}

fn write_or_print(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| {
            CliError::Run(format!("i/o error on {}: {e}", path.display()))
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_bounds(args: BoundsArgs) -> Result<(), CliError> {
    let instance = load_instance(args.means, args.file)?;
    let sorted = sort_desc(&instance);
    let mut reports: Vec<GuaranteeReport> = Vec::new();
    for name in &args.algos {
        let algorithm: Algorithm = name.parse()?;
        reports.push(guarantee_report(algorithm, &sorted, &args.budget)?);
    }
    match args.format.as_str() {
        "json" => {
            let text = serde_json::to_string_pretty(&reports).expect("serializable") + "\n";
            write_or_print(args.out.as_ref(), &text)?;
        }
        "csv" => write_or_print(args.out.as_ref(), &reports_to_csv(&reports))?,
        _ => {
            let mut text = format!("{:<10} {:>6} {:>12}", "algorithm", "j_min", "rate");
            for t in &args.budget {
                text += &format!(" {:>14}", format!("bound@{t}"));
            }
            text += "\n";
            for r in &reports {
                text += &format!("{:<10} {:>6} {:>12}", r.algorithm.to_string(), r.j_min, fmt_sig(r.rate, 6));
                for t in &args.budget {
                    text += &format!(" {:>14}", fmt_sig(r.bounds[t], 6));
                }
                text += "\n";
            }
            write_or_print(args.out.as_ref(), &text)?;
        }
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let instance = if args.family.is_some() {
        family_instance(args.family.as_deref().unwrap(), args.k, args.m)?
    } else {
        load_instance(args.means, args.file)?
    };
    let params = PolicyParams {
        theta0: args.theta0,
        ugape_clip: args.ugape_clip,
        ugape_scale: args.ugape_scale,
    };
    let mut config = ExperimentConfig::new(instance);
    config.algorithms = args
        .algos
        .iter()
        .map(|name| Ok::<_, CliError>((name.parse::<PolicyKind>()?, params)))
        .collect::<Result<_, _>>()?;
    config.budgets = args.budgets;
    config.runs = args.runs;
    config.base_seed = args.seed;
    config.parallelism = args.parallelism;

    let results = estimate_error(&config)?;
    let rendered = match args.format.as_str() {
        "json" => serde_json::to_string_pretty(&results).expect("serializable") + "\n",
        _ => results_to_csv(&results),
    };
    write_or_print(args.out.as_ref(), &rendered)?;
    if args.out.is_some() {
        // echo a summary when the full output went to a file
        println!("{:<10} {:>8} {:>12} {:>22}", "algorithm", "T", "error_rate", "95% CI");
        for r in &results {
            println!(
                "{:<10} {:>8} {:>11}% [{:>9}%, {:>9}%]",
                r.algorithm.to_string(),
                r.t,
                fmt_sig(r.error_rate * 100.0, 4),
                fmt_sig(r.ci_low * 100.0, 4),
                fmt_sig(r.ci_high * 100.0, 4)
            );
        }
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    let instance = family_instance(&args.family, args.k, args.m)?;
    let text = instance.to_json() + "\n";
    write_or_print(args.out.as_ref(), &text)?;
    Ok(())
}

fn cmd_repro(args: ReproArgs) -> ExitCode {
    let groups = match args.only {
        None => None,
        Some(names) => {
            let mut groups = Vec::new();
            for name in names {
                match name.parse::<Group>() {
                    Ok(g) => groups.push(g),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
            }
            Some(groups)
        }
    };
    if args.runs == 0 {
        eprintln!("error: --runs must be at least 1");
        return ExitCode::from(2);
    }
    let options = AcceptanceOptions {
        runs: args.runs,
        groups,
        base_seed: args.seed,
        parallelism: args.parallelism,
    };
    let outcomes = run_acceptance(&options);
    let mut all_passed = true;
    for outcome in &outcomes {
        println!("{}", outcome.line());
        all_passed &= outcome.passed;
    }
    if all_passed {
        println!("all {} criteria passed", outcomes.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance failure");
        ExitCode::from(1)
    }
}
