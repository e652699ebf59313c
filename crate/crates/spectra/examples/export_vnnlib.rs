//! Export a mined specification set as VNN-Lib counterexample queries for
//! a neural-network verifier, with a feature-to-input map that leaves
//! room for model inputs the specifications do not constrain.
//!
//! ```bash
//! cargo run --example export_vnnlib
//! ```

use std::collections::BTreeMap;

use spectra::export::{check_vnnlib, export_set, ExportMode, ModelInterfaceMap};
use spectra::jsonio::spec_set_to_canonical_json;
use spectra::model::{Interval, MinerConfig};
use spectra::references::{
    generate_planted, PlantedConfig, PlantedReferenceConfig, PlantedRuleConfig,
};
use spectra::synthesis::mine;

fn main() -> spectra::Result<()> {
    // A quick mined set over two planted references (see planted_recovery
    // for the pattern).
    let config = PlantedConfig {
        bounds: vec![Interval::new(0.0, 1.0), Interval::new(0.0, 1.0)],
        alphabet: vec!["300".into(), "750".into(), "1200".into(), "1850".into()],
        references: ["r1", "r2"]
            .iter()
            .map(|id| PlantedReferenceConfig {
                id: id.to_string(),
                rules: vec![
                    PlantedRuleConfig {
                        rect: vec![Interval::new(0.0, 0.25), Interval::new(0.0, 0.5)],
                        allowed: vec!["300".into(), "750".into()],
                        priority: 1,
                    },
                    PlantedRuleConfig {
                        rect: vec![Interval::new(0.5, 1.0), Interval::new(0.5, 1.0)],
                        allowed: vec!["1850".into()],
                        priority: 1,
                    },
                ],
            })
            .collect(),
        noise_rate: 0.0,
    };
    let obs = generate_planted(&config, 8_000, 3)?;
    let outcome = mine(
        &obs,
        &MinerConfig {
            tau_max: 2,
            tau_rep: 0.02,
            parts: 16,
            grid_bounds: Some(vec![Interval::new(0.0, 1.0), Interval::new(0.0, 1.0)]),
            ..MinerConfig::default()
        },
    )?;
    println!("mined {} specifications", outcome.set.len());

    // Suppose the model takes four inputs: our two features at indices 0
    // and 2, plus two extra inputs that get their observed ranges.
    let map = ModelInterfaceMap {
        input_count: 4,
        output_count: 4,
        feature_to_input: BTreeMap::from([
            ("x0".to_string(), vec![0]),
            ("x1".to_string(), vec![2]),
        ]),
        fill_ranges: BTreeMap::from([
            (1usize, Interval::new(0.0, 1.0)),
            (3usize, Interval::new(-1.0, 1.0)),
        ]),
        epsilon: 1e-4,
    };

    let out_dir = std::env::temp_dir().join("spectra_vnnlib_example");
    let manifest = export_set(&outcome.set, &map, ExportMode::Classification, &out_dir)?;
    println!(
        "wrote {} property files + manifest.json under {}",
        manifest.files.len(),
        out_dir.display()
    );

    let first = out_dir.join(&manifest.files[0].file);
    let text = std::fs::read_to_string(&first).map_err(|e| spectra::Error::io(&first, e))?;
    check_vnnlib(&text)?;
    println!("\n--- {} ---\n{text}", manifest.files[0].file);

    // The canonical JSON is the interchange form consumed by `eval` and
    // `export-vnnlib`.
    let json = spec_set_to_canonical_json(&outcome.set);
    println!("canonical specification JSON: {} bytes", json.len());
    Ok(())
}
