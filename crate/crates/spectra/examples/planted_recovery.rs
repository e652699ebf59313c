//! Mine specifications from two synthetic references with planted
//! ground-truth rules, then check the recovered boxes against a fresh
//! draw.
//!
//! ```bash
//! cargo run --example planted_recovery
//! ```

use spectra::export::render_report;
use spectra::metrics::evaluate;
use spectra::model::{Interval, MinerConfig};
use spectra::references::{
    generate_planted, PlantedConfig, PlantedReferenceConfig, PlantedRuleConfig,
};
use spectra::synthesis::{interesting_table, mine};

fn main() -> spectra::Result<()> {
    // Two references agree on two boxes and diverge on a third, so the
    // third box's combined output set has two labels.
    let rect = |x: (f64, f64), y: (f64, f64)| vec![Interval::new(x.0, x.1), Interval::new(y.0, y.1)];
    let rules = |third: &str| {
        vec![
            PlantedRuleConfig {
                rect: rect((0.05, 0.30), (0.05, 0.30)),
                allowed: vec!["low".into()],
                priority: 1,
            },
            PlantedRuleConfig {
                rect: rect((0.40, 0.60), (0.40, 0.70)),
                allowed: vec!["mid".into()],
                priority: 1,
            },
            PlantedRuleConfig {
                rect: rect((0.70, 0.95), (0.10, 0.35)),
                allowed: vec![third.into()],
                priority: 1,
            },
        ]
    };
    let config = PlantedConfig {
        bounds: rect((0.0, 1.0), (0.0, 1.0)),
        alphabet: vec!["low".into(), "mid".into(), "high".into(), "top".into()],
        references: vec![
            PlantedReferenceConfig {
                id: "ref_a".into(),
                rules: rules("high"),
            },
            PlantedReferenceConfig {
                id: "ref_b".into(),
                rules: rules("top"),
            },
        ],
        noise_rate: 0.0,
    };

    let train = generate_planted(&config, 10_000, 7)?;
    let miner = MinerConfig {
        tau_cov: 1.0,
        tau_rep: 0.02,
        tau_max: 2,
        parts: 20,
        grid_bounds: Some(rect((0.0, 1.0), (0.0, 1.0))),
        ..MinerConfig::default()
    };
    let outcome = mine(&train, &miner)?;
    println!(
        "mined {} specifications from {} interesting regions (coverage {:?})\n",
        outcome.set.len(),
        outcome.report.gamma_size,
        outcome.report.coverage
    );
    print!("{}", render_report(&outcome.set));

    // Evaluate against a draw the miner never saw.
    let fresh = generate_planted(&config, 10_000, 8)?;
    let table = interesting_table(&fresh, &miner, &outcome.set.grid);
    let report = evaluate(&outcome.set, &fresh, Some(&table));
    println!("\nfresh-draw metrics:");
    for r in &report.per_reference {
        println!(
            "  {}: support {:.3}, confidence {:?}",
            r.id,
            r.support.unwrap_or(f64::NAN),
            r.confidence
        );
    }
    Ok(())
}
