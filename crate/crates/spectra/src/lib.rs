//! Mine interval pre/postcondition specifications for neural networks in
//! systems from observation logs of trusted reference algorithms.
//!
//! The pipeline: load reference logs into a windowed feature space
//! ([`ingest`]), partition the space into a uniform grid and extract the
//! interesting-behavior regions where the references jointly rule out some
//! outputs ([`regions`]), cluster compatible regions per candidate output
//! subset ([`cluster`], [`synthesis`]), and score the resulting
//! conjunctive specification set ([`metrics`]). Sets serialize to
//! canonical JSON ([`jsonio`]) and export as VNN-Lib counterexample
//! queries for neural-network verifiers ([`export`]). Built-in synthetic
//! references for desk-scale experiments live in [`references`].
//!
//! ## Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --example planted_recovery   # mine + evaluate on synthetic ground truth
//! cargo run --example abr_pipeline       # simulate a bitrate controller, then mine
//! cargo run --example sign_outputs       # sign-discretized regression outputs
//! cargo run --example export_vnnlib      # specification set -> property files
//! cargo run --example ablation_sweep     # parameter grid -> metric table
//! ```
//!
//! The `spectra` binary wires the same capabilities into subcommands
//! (`simulate`, `mine`, `eval`, `export-vnnlib`, `ablate`).

pub mod canon;
pub mod cli;
pub mod cluster;
pub mod error;
pub mod export;
pub mod ingest;
pub mod jsonio;
pub mod metrics;
pub mod model;
pub mod references;
pub mod regions;
pub mod synthesis;

pub use error::{Error, Result};
