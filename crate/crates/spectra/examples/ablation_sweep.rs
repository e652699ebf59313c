//! In-process parameter sweep: vary parts, tau_rep, and tau_max over a
//! small grid and tabulate support/confidence per reference. The
//! `spectra ablate` subcommand does the same against log files, with
//! resumable CSV output.
//!
//! ```bash
//! cargo run --example ablation_sweep
//! ```

use spectra::metrics::evaluate;
use spectra::model::{Interval, MinerConfig};
use spectra::references::{
    generate_planted, PlantedConfig, PlantedReferenceConfig, PlantedRuleConfig,
};
use spectra::synthesis::{interesting_table, mine};

fn main() -> spectra::Result<()> {
    let config = PlantedConfig {
        bounds: vec![Interval::new(0.0, 1.0), Interval::new(0.0, 1.0)],
        alphabet: vec!["a".into(), "b".into(), "c".into()],
        references: ["r1", "r2"]
            .iter()
            .map(|id| PlantedReferenceConfig {
                id: id.to_string(),
                rules: vec![
                    PlantedRuleConfig {
                        rect: vec![Interval::new(0.1, 0.45), Interval::new(0.1, 0.45)],
                        allowed: vec!["a".into()],
                        priority: 1,
                    },
                    PlantedRuleConfig {
                        rect: vec![Interval::new(0.55, 0.9), Interval::new(0.55, 0.9)],
                        allowed: vec!["b".into()],
                        priority: 1,
                    },
                ],
            })
            .collect(),
        noise_rate: 0.02,
    };
    let train = generate_planted(&config, 8_000, 21)?;
    let test = generate_planted(&config, 8_000, 22)?;

    println!(
        "{:>5} {:>8} {:>7} | {:>5} {:>9} | {:>12} {:>12}",
        "parts", "tau_rep", "tau_max", "specs", "volume", "sup/conf r1", "sup/conf r2"
    );
    for parts in [10u32, 20] {
        for tau_rep in [0.01, 0.05] {
            for tau_max in [1usize, 2] {
                let miner = MinerConfig {
                    tau_cov: 1.0,
                    tau_rep,
                    tau_max,
                    parts,
                    grid_bounds: Some(vec![
                        Interval::new(0.0, 1.0),
                        Interval::new(0.0, 1.0),
                    ]),
                    ..MinerConfig::default()
                };
                let outcome = mine(&train, &miner)?;
                let table = interesting_table(&test, &miner, &outcome.set.grid);
                let report = evaluate(&outcome.set, &test, Some(&table));
                let fmt = |v: Option<f64>| match v {
                    Some(v) => format!("{v:.2}"),
                    None => "—".into(),
                };
                let cell = |i: usize| {
                    let r = &report.per_reference[i];
                    format!("{}/{}", fmt(r.support), fmt(r.confidence))
                };
                println!(
                    "{parts:>5} {tau_rep:>8} {tau_max:>7} | {:>5} {:>9.4} | {:>12} {:>12}",
                    outcome.set.len(),
                    report.total_volume,
                    cell(0),
                    cell(1)
                );
            }
        }
    }
    Ok(())
}
