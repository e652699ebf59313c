//! Sign-discretized outputs for congestion-control-style references whose
//! raw output is a real-valued sending-rate change.
//!
//! ```bash
//! cargo run --example sign_outputs
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectra::export::render_report;
use spectra::ingest::discretize_sign;
use spectra::model::{
    Discretizer, Interval, MinerConfig, Observation, ObservationSet, OutputAlphabet, ReferenceLog,
};
use spectra::synthesis::mine;

/// A toy rate controller: back off when the latency gradient is positive,
/// speed up when it is negative, and dither around zero in between.
fn rate_change(latency_gradient: f64, dither: f64) -> f64 {
    if latency_gradient > 0.1 {
        -0.8 - dither
    } else if latency_gradient < -0.1 {
        0.6 + dither
    } else {
        dither - 0.005
    }
}

fn main() -> spectra::Result<()> {
    let alphabet = OutputAlphabet::sign();
    let deadband = 0.0;
    let mut references = Vec::new();
    for (j, id) in ["bbr_like", "cubic_like"].iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(40 + j as u64);
        let mut observations = Vec::new();
        for step in 0..30_000u64 {
            // Latency gradient concentrates near zero; ratio near one.
            let lg: f64 = rng.random_range(-1.0..1.0f64).powi(3);
            let lr: f64 = 1.0 + rng.random_range(0.0..1.0f64).powi(2) * 2.0;
            let dither = rng.random_range(0.0..0.01);
            let delta = rate_change(lg, dither);
            observations.push(Observation {
                features: vec![lg, lr],
                output: discretize_sign(delta, deadband)?,
                trace: "t0".into(),
                step,
            });
        }
        references.push(ReferenceLog {
            id: id.to_string(),
            observations,
        });
    }
    let obs = ObservationSet::new(
        references,
        alphabet,
        vec!["lg[-1]".into(), "lr[-1]".into()],
        "rate_change".into(),
    )?;

    let miner = MinerConfig {
        tau_cov: 1.0,
        tau_rep: 0.01,
        tau_max: 2,
        parts: 25,
        discretizer: Discretizer::Sign,
        sign_deadband: deadband,
        grid_bounds: Some(vec![Interval::new(-1.0, 1.0), Interval::new(1.0, 3.0)]),
        ..MinerConfig::default()
    };
    let outcome = mine(&obs, &miner)?;
    println!(
        "mined {} specifications from {} interesting regions (coverage {:?})\n",
        outcome.set.len(),
        outcome.report.gamma_size,
        outcome.report.coverage
    );
    // The listing is long; show the first few boxes.
    let mut preview = outcome.set.clone();
    preview.specs.truncate(4);
    print!("{}", render_report(&preview));
    if outcome.set.len() > preview.len() {
        println!("... plus {} more", outcome.set.len() - preview.len());
    }
    Ok(())
}
