//! Command-line wiring for the `spectra` binary: data generation, mining,
//! evaluation, VNN-Lib export, and the parameter-sweep harness.
//!
//! Config precedence is flags > config file > schema defaults. Every
//! command honors `--seed` (only data generation consumes it) and the
//! `SPECTRA_THREADS` environment variable caps the worker pool. Identical
//! invocations produce byte-identical artifacts; the only non-deterministic
//! output is the ablation timing sidecar.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::export::{export_set, render_report, ExportMode, ModelInterfaceMap};
use crate::ingest::{load_logs, LogSchema, LogSource};
use crate::jsonio;
use crate::metrics::evaluate;
use crate::model::{
    ClusterMetric, EvalReport, Interval, MinerConfig, ObservationSet, SpecificationSet,
};
use crate::references::{
    generate_planted, simulate_abr, BandwidthTrace, BufferBasedConfig, PlantedConfig, RateLadder,
    SimParams,
};
use crate::synthesis::{interesting_table, mine};

#[derive(Parser, Debug)]
#[command(
    name = "spectra",
    version,
    about = "Mine interval pre/postcondition specifications from reference-algorithm logs"
)]
pub struct Cli {
    /// Seed for data-generating commands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate observation logs from built-in references.
    Simulate(SimulateArgs),
    /// Mine a specification set from observation logs.
    Mine(MineArgs),
    /// Evaluate a specification set against observation logs.
    Eval(EvalArgs),
    /// Export a specification set as VNN-Lib property files.
    ExportVnnlib(ExportArgs),
    /// Sweep mining parameters over a grid and tabulate the metrics.
    Ablate(AblateArgs),
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Planted-rule experiment description (JSON).
    #[arg(long, conflicts_with = "abr")]
    pub planted: Option<PathBuf>,
    /// Observations per planted reference.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Trace-driven ABR controller; currently `bb` (buffer-based).
    #[arg(long)]
    pub abr: Option<String>,
    /// Directory of bandwidth trace files (two columns: seconds, Mbps).
    #[arg(long)]
    pub traces: Option<PathBuf>,
    /// Chunks to simulate per trace.
    #[arg(long, default_value_t = 100)]
    pub horizon: usize,
    #[arg(long, default_value_t = 5.0)]
    pub reservoir: f64,
    #[arg(long, default_value_t = 10.0)]
    pub cushion: f64,
    #[arg(long, default_value_t = 4.0)]
    pub chunk_seconds: f64,
    /// Feature normalization written into the emitted schema.
    #[arg(long, default_value_t = 0.1)]
    pub scale: f64,
    /// History window written into the emitted ABR schema.
    #[arg(long, default_value_t = 3)]
    pub history: usize,
    /// Output directory for logs plus schema.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct MinerFlags {
    /// Miner configuration file (JSON); flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub tau_cov: Option<f64>,
    #[arg(long)]
    pub tau_rep: Option<f64>,
    #[arg(long)]
    pub tau_max: Option<usize>,
    #[arg(long)]
    pub parts: Option<u32>,
    /// Fractional importance floor (theta).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Absolute importance floor.
    #[arg(long)]
    pub min_count: Option<u64>,
    /// Clustering metric: chebyshev or euclidean.
    #[arg(long)]
    pub metric: Option<String>,
    /// Fixed clustering radius, overriding the packing bound.
    #[arg(long)]
    pub radius: Option<f64>,
    /// History window override (re-windows the logs).
    #[arg(long)]
    pub history: Option<usize>,
}

#[derive(Args, Debug)]
pub struct MineArgs {
    /// Log schema (JSON).
    #[arg(long)]
    pub schema: PathBuf,
    /// Observation logs: `REF=PATH`, bare files (reference = file stem), or
    /// directories. A named directory groups all its files under one
    /// reference; a bare directory makes each file its own reference.
    #[arg(long = "logs", required = true)]
    pub logs: Vec<String>,
    #[command(flatten)]
    pub miner: MinerFlags,
    /// Output path for the specification set (canonical JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the human-readable listing here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also dump the interesting-region table as CSV here.
    #[arg(long)]
    pub dump_regions: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Specification set to evaluate (JSON from `mine`).
    #[arg(long)]
    pub specs: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// Training-split logs (same syntax as `mine --logs`).
    #[arg(long = "logs", required = true)]
    pub logs: Vec<String>,
    /// Optional test-split logs.
    #[arg(long = "test-logs")]
    pub test_logs: Vec<String>,
    /// Output path for the evaluation report (canonical JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the plain-text table here.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[arg(long)]
    pub specs: PathBuf,
    /// Model interface map (JSON): feature-to-input indices plus fill
    /// ranges for unmapped inputs.
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, value_enum)]
    pub mode: ExportMode,
    /// Output directory for property files plus manifest.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct AblateArgs {
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long = "logs", required = true)]
    pub logs: Vec<String>,
    #[arg(long = "test-logs")]
    pub test_logs: Vec<String>,
    /// Parameter grid (JSON): lists under history, tau_rep, parts, tau_max.
    #[arg(long)]
    pub grid: PathBuf,
    #[command(flatten)]
    pub miner: MinerFlags,
    /// Output CSV; rows are flushed incrementally and keyed so an
    /// interrupted sweep resumes where it stopped.
    #[arg(long)]
    pub out: PathBuf,
}

/// All-`Option` mirror of `MinerConfig` for layered configuration.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MinerConfigPatch {
    tau_cov: Option<f64>,
    tau_rep: Option<f64>,
    tau_max: Option<usize>,
    parts: Option<u32>,
    importance_fraction: Option<f64>,
    importance_min_count: Option<u64>,
    cluster_metric: Option<ClusterMetric>,
    cluster_radius_override: Option<f64>,
    history: Option<usize>,
    discretizer: Option<crate::model::Discretizer>,
    sign_deadband: Option<f64>,
    grid_bounds: Option<Vec<Interval>>,
}

impl MinerConfigPatch {
    fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    fn apply(&self, config: &mut MinerConfig) {
        if let Some(v) = self.tau_cov {
            config.tau_cov = v;
        }
        if let Some(v) = self.tau_rep {
            config.tau_rep = v;
        }
        if let Some(v) = self.tau_max {
            config.tau_max = v;
        }
        if let Some(v) = self.parts {
            config.parts = v;
        }
        if let Some(v) = self.importance_fraction {
            config.importance_fraction = v;
        }
        if let Some(v) = self.importance_min_count {
            config.importance_min_count = v;
        }
        if let Some(v) = self.cluster_metric {
            config.cluster_metric = v;
        }
        if let Some(v) = self.cluster_radius_override {
            config.cluster_radius_override = Some(v);
        }
        if let Some(v) = self.history {
            config.history = v;
        }
        if let Some(v) = self.grid_bounds.clone() {
            config.grid_bounds = Some(v);
        }
    }
}

fn parse_metric(name: &str) -> Result<ClusterMetric> {
    match name {
        "chebyshev" => Ok(ClusterMetric::Chebyshev),
        "euclidean" => Ok(ClusterMetric::Euclidean),
        other => Err(Error::Config {
            field: "cluster_metric",
            message: format!("unknown metric {other:?} (chebyshev or euclidean)"),
        }),
    }
}

impl MinerFlags {
    /// Layer flags over the config file over defaults; history additionally
    /// falls back to the schema.
    fn effective(&self, schema: &LogSchema) -> Result<(MinerConfig, usize)> {
        let mut config = MinerConfig::default();
        let file_patch = match &self.config {
            Some(path) => MinerConfigPatch::from_file(path)?,
            None => MinerConfigPatch::default(),
        };
        file_patch.apply(&mut config);
        if let Some(v) = self.tau_cov {
            config.tau_cov = v;
        }
        if let Some(v) = self.tau_rep {
            config.tau_rep = v;
        }
        if let Some(v) = self.tau_max {
            config.tau_max = v;
        }
        if let Some(v) = self.parts {
            config.parts = v;
        }
        if let Some(v) = self.theta {
            config.importance_fraction = v;
        }
        if let Some(v) = self.min_count {
            config.importance_min_count = v;
        }
        if let Some(m) = &self.metric {
            config.cluster_metric = parse_metric(m)?;
        }
        if let Some(v) = self.radius {
            config.cluster_radius_override = Some(v);
        }
        let history = self
            .history
            .or(file_patch.history)
            .unwrap_or(schema.history);
        config.history = history;
        // Ingestion facts come from the schema, whatever the file said.
        config.discretizer = schema.discretizer;
        config.sign_deadband = schema.sign_deadband;
        Ok((config, history))
    }
}

/// Expand `--logs` values into concrete log sources.
pub fn parse_log_args(values: &[String]) -> Result<Vec<LogSource>> {
    let mut sources = Vec::new();
    for value in values {
        let (reference, raw_path) = match value.split_once('=') {
            Some((r, p)) => (Some(r.to_string()), PathBuf::from(p)),
            None => (None, PathBuf::from(value)),
        };
        if raw_path.is_dir() {
            // Directory expansion picks up data files only, so sidecars
            // like schema.json can live next to the logs.
            let data_ext = ["csv", "tsv", "txt", "jsonl", "ndjson"];
            let mut files: Vec<PathBuf> = std::fs::read_dir(&raw_path)
                .map_err(|e| Error::io(&raw_path, e))?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| {
                    p.is_file()
                        && p.extension()
                            .and_then(|e| e.to_str())
                            .is_some_and(|e| data_ext.contains(&e))
                })
                .collect();
            files.sort();
            if files.is_empty() {
                return Err(Error::Empty(format!(
                    "directory {} has no log files",
                    raw_path.display()
                )));
            }
            for file in files {
                let reference = reference.clone().unwrap_or_else(|| stem_of(&file));
                sources.push(LogSource {
                    reference,
                    path: file,
                });
            }
        } else if raw_path.is_file() {
            let reference = reference.unwrap_or_else(|| stem_of(&raw_path));
            sources.push(LogSource {
                reference,
                path: raw_path,
            });
        } else {
            return Err(Error::io(
                &raw_path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
            ));
        }
    }
    Ok(sources)
}

fn stem_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Cap the rayon pool from SPECTRA_THREADS when set.
fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var("SPECTRA_THREADS") {
        let n: usize = value.parse().map_err(|_| Error::Config {
            field: "SPECTRA_THREADS",
            message: format!("{value:?} is not a thread count"),
        })?;
        if n == 0 {
            return Err(Error::Config {
                field: "SPECTRA_THREADS",
                message: "must be at least 1".into(),
            });
        }
        // Ignore the error if a pool already exists (e.g. under tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args, cli.seed),
        Command::Mine(args) => cmd_mine(args),
        Command::Eval(args) => cmd_eval(args),
        Command::ExportVnnlib(args) => cmd_export(args),
        Command::Ablate(args) => cmd_ablate(args),
    }
}

fn cmd_simulate(args: SimulateArgs, seed: u64) -> Result<()> {
    match (&args.planted, &args.abr) {
        (Some(rules), None) => simulate_planted(rules, &args, seed),
        (None, Some(controller)) => simulate_abr_logs(controller, &args),
        _ => Err(Error::Config {
            field: "simulate",
            message: "pass exactly one of --planted or --abr".into(),
        }),
    }
}

fn simulate_planted(rules: &Path, args: &SimulateArgs, seed: u64) -> Result<()> {
    let config = PlantedConfig::from_json_file(rules)?;
    let set = generate_planted(&config, args.n, seed)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    for reference in &set.references {
        let mut text = String::from("trace,step");
        for name in &set.feature_names {
            text.push(',');
            text.push_str(name);
        }
        text.push_str(",label\n");
        for obs in &reference.observations {
            text.push_str(&obs.trace);
            text.push_str(&format!(",{}", obs.step));
            for v in &obs.features {
                text.push_str(&format!(",{v}"));
            }
            text.push_str(&format!(",{}\n", set.alphabet.name(obs.output)));
        }
        let path = args.out.join(format!("{}.csv", reference.id));
        write_file(&path, &text)?;
        println!(
            "{}: {} rows",
            path.display(),
            reference.observations.len()
        );
    }
    let schema = LogSchema {
        feature_columns: set.feature_names.clone(),
        history_columns: vec![],
        history: 1,
        output_column: "label".into(),
        trace_column: "trace".into(),
        step_column: Some("step".into()),
        transforms: BTreeMap::new(),
        alphabet: Some(set.alphabet.labels().to_vec()),
        discretizer: crate::model::Discretizer::Identity,
        sign_deadband: 0.0,
    };
    let schema_path = args.out.join("schema.json");
    let value = serde_json::to_value(&schema).expect("schema serializes");
    write_file(&schema_path, &crate::canon::to_canonical_string(&value))?;
    println!("{}", schema_path.display());
    Ok(())
}

fn simulate_abr_logs(controller: &str, args: &SimulateArgs) -> Result<()> {
    if controller != "bb" {
        return Err(Error::Config {
            field: "abr",
            message: format!("unknown controller {controller:?} (supported: bb)"),
        });
    }
    let traces_dir = args.traces.as_ref().ok_or_else(|| Error::Config {
        field: "traces",
        message: "--abr needs --traces".into(),
    })?;
    let mut trace_files: Vec<PathBuf> = std::fs::read_dir(traces_dir)
        .map_err(|e| Error::io(traces_dir, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    trace_files.sort();
    if trace_files.is_empty() {
        return Err(Error::Empty(format!(
            "no trace files in {}",
            traces_dir.display()
        )));
    }
    let ladder = RateLadder::standard();
    let bb = BufferBasedConfig {
        reservoir: args.reservoir,
        cushion: args.cushion,
    };
    let params = SimParams {
        chunk_seconds: args.chunk_seconds,
        ..SimParams::default()
    };
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    for file in &trace_files {
        let trace = BandwidthTrace::from_file(file)?;
        let rows = simulate_abr(&trace, &bb, &ladder, &params, args.horizon)?;
        let stem = stem_of(file);
        let mut text = String::from("trace,step,buffer,dt,bitrate\n");
        for row in &rows {
            text.push_str(&format!(
                "{stem},{},{},{},{}\n",
                row.step,
                row.buffer,
                row.download_time,
                ladder.alphabet.name(row.rate)
            ));
        }
        let path = args.out.join(format!("{stem}.csv"));
        write_file(&path, &text)?;
        println!("{}: {} rows", path.display(), rows.len());
    }
    let transform = crate::ingest::AffineTransform {
        scale: args.scale,
        offset: 0.0,
    };
    let mut transforms = BTreeMap::new();
    transforms.insert("buffer".to_string(), transform);
    transforms.insert("dt".to_string(), transform);
    let schema = LogSchema {
        feature_columns: vec!["buffer".into(), "dt".into()],
        history_columns: vec!["dt".into()],
        history: args.history,
        output_column: "bitrate".into(),
        trace_column: "trace".into(),
        step_column: Some("step".into()),
        transforms,
        alphabet: Some(ladder.alphabet.labels().to_vec()),
        discretizer: crate::model::Discretizer::Identity,
        sign_deadband: 0.0,
    };
    let schema_path = args.out.join("schema.json");
    let value = serde_json::to_value(&schema).expect("schema serializes");
    write_file(&schema_path, &crate::canon::to_canonical_string(&value))?;
    println!("{}", schema_path.display());
    Ok(())
}

fn load_for_mining(
    schema_path: &Path,
    logs: &[String],
    history: usize,
) -> Result<(LogSchema, ObservationSet)> {
    let mut schema = LogSchema::from_json_file(schema_path)?;
    schema.history = history;
    schema.validate()?;
    let sources = parse_log_args(logs)?;
    let (obs, stats) = load_logs(&sources, &schema)?;
    log::info!(
        "loaded {} observations ({} rows, {} dropped non-finite, {} missing outputs)",
        stats.observations,
        stats.rows_read,
        stats.dropped_nonfinite,
        stats.dropped_missing_output
    );
    Ok((schema, obs))
}

fn cmd_mine(args: MineArgs) -> Result<()> {
    let schema = LogSchema::from_json_file(&args.schema)?;
    let (config, history) = args.miner.effective(&schema)?;
    let (_, obs) = load_for_mining(&args.schema, &args.logs, history)?;

    let start = Instant::now();
    let outcome = mine(&obs, &config)?;
    let elapsed = start.elapsed();

    write_file(&args.out, &jsonio::spec_set_to_canonical_json(&outcome.set))?;
    if let Some(report_path) = &args.report {
        write_file(report_path, &render_report(&outcome.set))?;
    }
    if let Some(dump_path) = &args.dump_regions {
        let table = interesting_table(&obs, &config, &outcome.set.grid);
        let mut buf = Vec::new();
        crate::regions::write_regions_csv(&table, &obs, &mut buf)
            .map_err(|e| Error::io(dump_path, e))?;
        write_file(dump_path, &String::from_utf8_lossy(&buf))?;
    }

    println!("interesting regions: {}", outcome.report.gamma_size);
    println!("specifications: {}", outcome.set.len());
    match outcome.report.coverage {
        Some(c) => println!("relaxed coverage: {c:.4}"),
        None => println!("relaxed coverage: undefined (empty region table)"),
    }
    println!("volume: {}", outcome.report.volume);
    println!(
        "early exit: {}",
        if outcome.report.early_exit.is_some() {
            "yes"
        } else {
            "no (all output subsets visited)"
        }
    );
    println!("wall time: {:.3}s", elapsed.as_secs_f64());
    println!("{}", args.out.display());
    Ok(())
}

fn check_feature_space(set: &SpecificationSet, obs: &ObservationSet) -> Result<()> {
    if set.feature_names != obs.feature_names {
        return Err(Error::Schema(format!(
            "specification features {:?} do not match log features {:?}",
            set.feature_names, obs.feature_names
        )));
    }
    if set.alphabet != obs.alphabet {
        return Err(Error::Schema(
            "specification alphabet does not match the log alphabet".into(),
        ));
    }
    Ok(())
}

fn eval_split(set: &SpecificationSet, obs: &ObservationSet) -> EvalReport {
    let table = interesting_table(obs, &set.config, &set.grid);
    evaluate(set, obs, Some(&table))
}

fn metrics_table(reports: &[(&str, &EvalReport)]) -> String {
    let fmt = |v: Option<f64>| match v {
        Some(v) => format!("{v:.4}"),
        None => "—".to_string(),
    };
    let mut out = String::new();
    out.push_str(&format!(
        "{:<16} {:<6} {:>9} {:>11}\n",
        "reference", "split", "support", "confidence"
    ));
    for (split, report) in reports {
        for r in &report.per_reference {
            out.push_str(&format!(
                "{:<16} {:<6} {:>9} {:>11}\n",
                r.id,
                split,
                fmt(r.support),
                fmt(r.confidence)
            ));
        }
    }
    out
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let set = jsonio::load_spec_set(&args.specs)?;
    let (_, obs) = load_for_mining(&args.schema, &args.logs, set.config.history)?;
    check_feature_space(&set, &obs)?;
    let train = eval_split(&set, &obs);

    let test = if args.test_logs.is_empty() {
        None
    } else {
        let (_, test_obs) = load_for_mining(&args.schema, &args.test_logs, set.config.history)?;
        check_feature_space(&set, &test_obs)?;
        Some(eval_split(&set, &test_obs))
    };

    let mut reports: Vec<(&str, &EvalReport)> = vec![("train", &train)];
    if let Some(t) = &test {
        reports.push(("test", t));
    }
    let table_text = metrics_table(&reports);
    print!("{table_text}");
    println!("volume: {}", train.total_volume);
    if let Some(r) = &train.relaxed {
        println!("relaxed coverage (train regions): {:.4}", r.coverage);
    }

    if let Some(out) = &args.out {
        let value = serde_json::json!({
            "config": serde_json::to_value(&set.config).expect("config serializes"),
            "train": jsonio::eval_report_to_value(&train),
            "test": test.as_ref().map(jsonio::eval_report_to_value),
        });
        write_file(out, &crate::canon::to_canonical_string(&value))?;
        println!("{}", out.display());
    }
    if let Some(path) = &args.table {
        write_file(path, &table_text)?;
    }
    Ok(())
}

fn cmd_export(args: ExportArgs) -> Result<()> {
    let set = jsonio::load_spec_set(&args.specs)?;
    let map = ModelInterfaceMap::from_json_file(&args.map)?;
    let manifest = export_set(&set, &map, args.mode, &args.out)?;
    println!(
        "{}: {} property files + manifest.json",
        args.out.display(),
        manifest.files.len()
    );
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct AblationGrid {
    history: Option<Vec<usize>>,
    tau_rep: Option<Vec<f64>>,
    parts: Option<Vec<u32>>,
    tau_max: Option<Vec<usize>>,
}

impl Default for AblationGrid {
    fn default() -> Self {
        AblationGrid {
            history: None,
            tau_rep: None,
            parts: None,
            tau_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct AblationKey {
    history: usize,
    tau_rep: f64,
    parts: u32,
    tau_max: usize,
}

impl AblationKey {
    fn id(&self) -> String {
        format!(
            "h={};tau_rep={};p={};tau_max={}",
            self.history, self.tau_rep, self.parts, self.tau_max
        )
    }
}

fn cmd_ablate(args: AblateArgs) -> Result<()> {
    let schema = LogSchema::from_json_file(&args.schema)?;
    let (base_config, base_history) = args.miner.effective(&schema)?;
    let grid_text = std::fs::read_to_string(&args.grid).map_err(|e| Error::io(&args.grid, e))?;
    let grid: AblationGrid = serde_json::from_str(&grid_text).map_err(|e| Error::Json {
        path: args.grid.clone(),
        message: e.to_string(),
    })?;

    let histories = grid.history.unwrap_or_else(|| vec![base_history]);
    let tau_reps = grid.tau_rep.unwrap_or_else(|| vec![base_config.tau_rep]);
    let parts_list = grid.parts.unwrap_or_else(|| vec![base_config.parts]);
    let tau_maxes = grid.tau_max.unwrap_or_else(|| vec![base_config.tau_max]);
    for list_empty in [
        histories.is_empty(),
        tau_reps.is_empty(),
        parts_list.is_empty(),
        tau_maxes.is_empty(),
    ] {
        if list_empty {
            return Err(Error::Config {
                field: "grid",
                message: "grid lists must be non-empty".into(),
            });
        }
    }

    let mut keys = Vec::new();
    for &history in &histories {
        for &tau_rep in &tau_reps {
            for &parts in &parts_list {
                for &tau_max in &tau_maxes {
                    keys.push(AblationKey {
                        history,
                        tau_rep,
                        parts,
                        tau_max,
                    });
                }
            }
        }
    }
    keys.sort_by(|a, b| {
        (a.history, a.tau_rep, a.parts, a.tau_max)
            .partial_cmp(&(b.history, b.tau_rep, b.parts, b.tau_max))
            .expect("grid values are finite")
    });

    // Reference ids are known from the sources, so the header is stable.
    let sources = parse_log_args(&args.logs)?;
    let mut ref_ids: Vec<String> = sources.iter().map(|s| s.reference.clone()).collect();
    ref_ids.sort();
    ref_ids.dedup();
    let with_test = !args.test_logs.is_empty();

    let mut header = String::from("key,history,tau_rep,parts,tau_max,gamma,specs,coverage,volume");
    for id in &ref_ids {
        header.push_str(&format!(",support_{id},confidence_{id}"));
    }
    if with_test {
        for id in &ref_ids {
            header.push_str(&format!(",test_support_{id},test_confidence_{id}"));
        }
    }
    header.push('\n');

    // Resume: skip keys already present in the output file.
    let mut done: Vec<String> = Vec::new();
    let mut out_file = if args.out.exists() {
        let existing = std::fs::read_to_string(&args.out).map_err(|e| Error::io(&args.out, e))?;
        for line in existing.lines().skip(1) {
            if let Some(key) = line.split(',').next() {
                done.push(key.to_string());
            }
        }
        std::fs::OpenOptions::new()
            .append(true)
            .open(&args.out)
            .map_err(|e| Error::io(&args.out, e))?
    } else {
        if let Some(parent) = args.out.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
        }
        let mut f = std::fs::File::create(&args.out).map_err(|e| Error::io(&args.out, e))?;
        f.write_all(header.as_bytes())
            .map_err(|e| Error::io(&args.out, e))?;
        f
    };
    let timing_path = args.out.with_extension("timing.csv");
    let mut timing_file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&timing_path)
        .map_err(|e| Error::io(&timing_path, e))?;

    let pending: Vec<AblationKey> = keys
        .iter()
        .filter(|k| !done.contains(&k.id()))
        .cloned()
        .collect();
    let skipped = keys.len() - pending.len();
    if skipped > 0 {
        println!("resuming: {skipped} completed rows skipped");
    }

    // Observation sets per history value are shared across rows.
    let mut obs_cache: BTreeMap<usize, Arc<(ObservationSet, Option<ObservationSet>)>> =
        BTreeMap::new();
    for key in &pending {
        if !obs_cache.contains_key(&key.history) {
            let (_, obs) = load_for_mining(&args.schema, &args.logs, key.history)?;
            let test_obs = if with_test {
                Some(load_for_mining(&args.schema, &args.test_logs, key.history)?.1)
            } else {
                None
            };
            obs_cache.insert(key.history, Arc::new((obs, test_obs)));
        }
    }

    let fmt_opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let run_row = |key: &AblationKey| -> Result<(String, u128)> {
        let started = Instant::now();
        let bundle = obs_cache[&key.history].clone();
        let (obs, test_obs) = (&bundle.0, &bundle.1);
        let mut config = base_config.clone();
        config.history = key.history;
        config.tau_rep = key.tau_rep;
        config.parts = key.parts;
        config.tau_max = key.tau_max;
        let outcome = mine(obs, &config)?;
        let train_report = eval_split(&outcome.set, obs);
        let test_report = test_obs.as_ref().map(|t| eval_split(&outcome.set, t));
        let mut row = format!(
            "{},{},{},{},{},{},{},{},{}",
            key.id(),
            key.history,
            key.tau_rep,
            key.parts,
            key.tau_max,
            outcome.report.gamma_size,
            outcome.set.len(),
            fmt_opt(outcome.report.coverage),
            outcome.report.volume,
        );
        for id in &ref_ids {
            let m = train_report.per_reference.iter().find(|r| &r.id == id);
            row.push_str(&format!(
                ",{},{}",
                fmt_opt(m.and_then(|m| m.support)),
                fmt_opt(m.and_then(|m| m.confidence))
            ));
        }
        if let Some(test_report) = &test_report {
            for id in &ref_ids {
                let m = test_report.per_reference.iter().find(|r| &r.id == id);
                row.push_str(&format!(
                    ",{},{}",
                    fmt_opt(m.and_then(|m| m.support)),
                    fmt_opt(m.and_then(|m| m.confidence))
                ));
            }
        }
        row.push('\n');
        Ok((row, started.elapsed().as_millis()))
    };

    // Rows run in a worker pool chunk by chunk; results are committed in
    // key order so interrupted sweeps resume cleanly.
    use rayon::prelude::*;
    let chunk = rayon::current_num_threads().max(1);
    for batch in pending.chunks(chunk) {
        let results: Vec<Result<(String, u128)>> = batch.par_iter().map(run_row).collect();
        for (key, result) in batch.iter().zip(results) {
            let (row, millis) = result?;
            out_file
                .write_all(row.as_bytes())
                .map_err(|e| Error::io(&args.out, e))?;
            out_file.flush().map_err(|e| Error::io(&args.out, e))?;
            timing_file
                .write_all(format!("{},{millis}\n", key.id()).as_bytes())
                .map_err(|e| Error::io(&timing_path, e))?;
            println!("{} done ({millis} ms)", key.id());
        }
    }
    println!("{}", args.out.display());
    Ok(())
}
