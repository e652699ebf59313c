//! Full bitrate-selection pipeline: simulate a buffer-based controller
//! over bandwidth traces, write logs to disk, ingest them through a
//! schema with a 3-step download-time history, and mine specifications.
//!
//! ```bash
//! cargo run --example abr_pipeline
//! ```

use std::collections::BTreeMap;

use spectra::export::render_report;
use spectra::ingest::{load_logs, AffineTransform, LogSchema, LogSource};
use spectra::model::{Discretizer, MinerConfig};
use spectra::references::{
    simulate_abr, BandwidthTrace, BufferBasedConfig, RateLadder, SimParams,
};
use spectra::synthesis::mine;

fn main() -> spectra::Result<()> {
    let dir = std::env::temp_dir().join("spectra_abr_example");
    std::fs::create_dir_all(&dir).map_err(|e| spectra::Error::io(&dir, e))?;

    let ladder = RateLadder::standard();
    let params = SimParams::default();

    // Two differently-tuned buffer-based controllers act as the two
    // references; both run over the same bandwidth profiles (Mbps).
    let controllers = [
        ("bb_conservative", BufferBasedConfig { reservoir: 6.0, cushion: 12.0 }),
        ("bb_aggressive", BufferBasedConfig { reservoir: 4.0, cushion: 8.0 }),
    ];
    let profiles: Vec<(&str, Vec<(f64, f64)>)> = vec![
        ("steady_2m", vec![(0.0, 2.0), (1e5, 2.0)]),
        ("steady_6m", vec![(0.0, 6.0), (1e5, 6.0)]),
        ("drop", vec![(0.0, 8.0), (300.0, 1.2), (1e5, 1.2)]),
        ("ramp", vec![(0.0, 0.9), (200.0, 3.0), (500.0, 9.0), (1e5, 9.0)]),
    ];
    let mut sources = Vec::new();
    for (reference, bb) in &controllers {
        for (name, points) in &profiles {
            let trace = BandwidthTrace::new(points.clone())?;
            let rows = simulate_abr(&trace, bb, &ladder, &params, 300)?;
            let mut csv = String::from("trace,step,buffer,dt,bitrate\n");
            for row in &rows {
                csv.push_str(&format!(
                    "{name},{},{},{},{}\n",
                    row.step,
                    row.buffer,
                    row.download_time,
                    ladder.alphabet.name(row.rate)
                ));
            }
            let path = dir.join(format!("{reference}_{name}.csv"));
            std::fs::write(&path, csv).map_err(|e| spectra::Error::io(&path, e))?;
            println!("simulated {reference} on {name}: {} rows", rows.len());
            sources.push(LogSource {
                reference: reference.to_string(),
                path,
            });
        }
    }

    // Buffer plus the last three download times, everything scaled by 0.1.
    let scale = AffineTransform {
        scale: 0.1,
        offset: 0.0,
    };
    let schema = LogSchema {
        feature_columns: vec!["buffer".into(), "dt".into()],
        history_columns: vec!["dt".into()],
        history: 3,
        output_column: "bitrate".into(),
        trace_column: "trace".into(),
        step_column: Some("step".into()),
        transforms: BTreeMap::from([("buffer".into(), scale), ("dt".into(), scale)]),
        alphabet: Some(ladder.alphabet.labels().to_vec()),
        discretizer: Discretizer::Identity,
        sign_deadband: 0.0,
    };
    let (obs, stats) = load_logs(&sources, &schema)?;
    println!(
        "\nloaded {} windowed observations across {} references",
        stats.observations,
        obs.references.len()
    );

    let miner = MinerConfig {
        tau_cov: 1.0,
        tau_rep: 0.05,
        tau_max: 5,
        parts: 30,
        history: 3,
        ..MinerConfig::default()
    };
    let outcome = mine(&obs, &miner)?;
    println!(
        "mined {} specifications from {} interesting regions\n",
        outcome.set.len(),
        outcome.report.gamma_size
    );
    print!("{}", render_report(&outcome.set));
    Ok(())
}
