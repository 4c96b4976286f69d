use bestarm_core::montecarlo::{estimate_error, generate_instance, ExperimentConfig, Family};
use bestarm_core::policies::{PolicyKind, PolicyParams};

fn main() {
    let runs: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(40000);
    let start = std::time::Instant::now();

    let inst = generate_instance(Family::Stair, 10).unwrap();
    let mut config = ExperimentConfig::new(inst);
    config.algorithms = vec![
        (PolicyKind::Sr, PolicyParams::default()),
        (PolicyKind::CrC, PolicyParams::default()),
        (PolicyKind::CrA, PolicyParams::default()),
    ];
    config.budgets = vec![3000, 5000];
    config.runs = runs;
    for r in estimate_error(&config).unwrap() {
        println!("stair {} T={}: {:.3}% [{:.3}, {:.3}]", r.algorithm, r.t, r.error_rate * 100.0, r.ci_low*100.0, r.ci_high*100.0);
    }
    println!("stair elapsed: {:?}", start.elapsed());

    let start2 = std::time::Instant::now();
    let inst = generate_instance(Family::OneGroup, 10).unwrap();
    let mut config = ExperimentConfig::new(inst);
    config.algorithms = vec![
        (PolicyKind::Sr, PolicyParams::default()),
        (PolicyKind::CrC, PolicyParams::default()),
        (PolicyKind::CrA, PolicyParams::default()),
    ];
    config.budgets = vec![8000];
    config.runs = runs;
    for r in estimate_error(&config).unwrap() {
        println!("one-group {} T={}: {:.3}% [{:.3}, {:.3}]", r.algorithm, r.t, r.error_rate * 100.0, r.ci_low*100.0, r.ci_high*100.0);
    }
    println!("one-group elapsed: {:?}", start2.elapsed());
}
