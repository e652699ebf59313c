//! Log ingestion: load delimited (or JSON-lines) observation logs, expand
//! history windows over lagged feature columns, apply per-feature affine
//! normalization, and discretize continuous outputs into the label
//! alphabet.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Discretizer, Label, Observation, ObservationSet, OutputAlphabet, ReferenceLog,
};

/// Invertible per-feature normalization `x' = (x + offset) * scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AffineTransform {
    pub scale: f64,
    pub offset: f64,
}

impl Default for AffineTransform {
    fn default() -> Self {
        AffineTransform {
            scale: 1.0,
            offset: 0.0,
        }
    }
}

pub fn apply_affine(x: f64, t: &AffineTransform) -> f64 {
    (x + t.offset) * t.scale
}

pub fn invert_affine(y: f64, t: &AffineTransform) -> f64 {
    y / t.scale - t.offset
}

/// Sign discretization of a real-valued output: `+` above the deadband,
/// `-` below its negation, `0` inside. Labels index [`OutputAlphabet::sign`].
pub fn discretize_sign(value: f64, deadband: f64) -> Result<Label> {
    if !value.is_finite() {
        return Err(Error::Invariant(format!(
            "cannot discretize non-finite output {value}"
        )));
    }
    Ok(if value > deadband {
        0
    } else if value < -deadband {
        1
    } else {
        2
    })
}

/// Maps raw log columns onto the mining feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogSchema {
    /// Base feature columns, in feature order.
    pub feature_columns: Vec<String>,
    /// Subset of `feature_columns` expanded into `history` lagged copies.
    #[serde(default)]
    pub history_columns: Vec<String>,
    /// History window length; lag 1 is the current row's value.
    #[serde(default = "default_history")]
    pub history: usize,
    pub output_column: String,
    pub trace_column: String,
    #[serde(default)]
    pub step_column: Option<String>,
    /// Per-column normalization; columns not listed stay untouched.
    #[serde(default)]
    pub transforms: BTreeMap<String, AffineTransform>,
    /// Explicit label list for classification outputs.
    #[serde(default)]
    pub alphabet: Option<Vec<String>>,
    /// `sign` for real-valued outputs; requires no alphabet.
    #[serde(default)]
    pub discretizer: Discretizer,
    #[serde(default)]
    pub sign_deadband: f64,
}

fn default_history() -> usize {
    1
}

impl LogSchema {
    pub fn validate(&self) -> Result<()> {
        if self.feature_columns.is_empty() {
            return Err(Error::Schema("feature_columns is empty".into()));
        }
        if self.history == 0 {
            return Err(Error::Schema("history must be at least 1".into()));
        }
        for c in &self.history_columns {
            if !self.feature_columns.contains(c) {
                return Err(Error::Schema(format!(
                    "history column {c:?} is not a feature column"
                )));
            }
        }
        for (c, t) in &self.transforms {
            if t.scale == 0.0 || !t.scale.is_finite() || !t.offset.is_finite() {
                return Err(Error::Schema(format!(
                    "transform for {c:?} has invalid scale/offset"
                )));
            }
        }
        match (self.discretizer, &self.alphabet) {
            (Discretizer::Identity, None) => Err(Error::Schema(
                "classification output needs an explicit alphabet".into(),
            )),
            (Discretizer::Sign, Some(_)) => Err(Error::Schema(
                "sign discretizer and explicit alphabet are mutually exclusive".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn output_alphabet(&self) -> Result<OutputAlphabet> {
        match self.discretizer {
            Discretizer::Sign => Ok(OutputAlphabet::sign()),
            Discretizer::Identity => OutputAlphabet::new(
                self.alphabet
                    .clone()
                    .ok_or_else(|| Error::Schema("missing alphabet".into()))?,
            ),
        }
    }

    /// Names of the windowed feature space: plain columns keep their name,
    /// history columns expand to `name[-1]..name[-h]`.
    pub fn windowed_feature_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for c in &self.feature_columns {
            if self.history_columns.contains(c) {
                for lag in 1..=self.history {
                    names.push(format!("{c}[-{lag}]"));
                }
            } else {
                names.push(c.clone());
            }
        }
        names
    }

    /// Dimension of the windowed feature space.
    pub fn windowed_dimension(&self) -> usize {
        self.feature_columns
            .iter()
            .map(|c| {
                if self.history_columns.contains(c) {
                    self.history
                } else {
                    1
                }
            })
            .sum()
    }

    pub fn from_json_file(path: &Path) -> Result<LogSchema> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let schema: LogSchema = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        schema.validate()?;
        Ok(schema)
    }
}

/// Expand one trace's base-feature rows into windowed vectors.
///
/// `rows[t]` holds the base columns in `feature_columns` order. With
/// history `h`, one vector is emitted per row with index `>= h - 1`; the
/// lag-`j` copy of a history column at row `t` takes the raw value at row
/// `t - j + 1`, so lag 1 is the current row. A trace shorter than `h`
/// yields nothing.
pub fn window_history(rows: &[Vec<f64>], schema: &LogSchema) -> Vec<Vec<f64>> {
    let h = schema.history;
    if rows.len() < h {
        return vec![];
    }
    let lagged: Vec<bool> = schema
        .feature_columns
        .iter()
        .map(|c| schema.history_columns.contains(c))
        .collect();
    let mut out = Vec::with_capacity(rows.len() - h + 1);
    for t in (h - 1)..rows.len() {
        let mut v = Vec::with_capacity(schema.windowed_dimension());
        for (i, &is_lagged) in lagged.iter().enumerate() {
            if is_lagged {
                for lag in 1..=h {
                    v.push(rows[t + 1 - lag][i]);
                }
            } else {
                v.push(rows[t][i]);
            }
        }
        out.push(v);
    }
    out
}

/// One observation log file and the reference it belongs to. Several
/// files may share a reference id (e.g. one log per trace).
#[derive(Debug, Clone)]
pub struct LogSource {
    pub reference: String,
    pub path: PathBuf,
}

/// Row-drop accounting from a load.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub rows_read: u64,
    pub dropped_nonfinite: u64,
    pub dropped_missing_output: u64,
    pub observations: u64,
}

struct RawTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_raw(path: &Path) -> Result<RawTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let is_jsonl = matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("jsonl") | Some("ndjson")
    );
    if is_jsonl {
        read_jsonl(path, &text)
    } else {
        read_delimited(path, &text)
    }
}

fn read_delimited(path: &Path, text: &str) -> Result<RawTable> {
    let first_line = text.lines().next().unwrap_or("");
    let delimiter = if first_line.contains('\t') { b'\t' } else { b',' };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(false)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        rows.push(record.iter().map(|s| s.trim().to_string()).collect());
    }
    Ok(RawTable { header, rows })
}

fn read_jsonl(path: &Path, text: &str) -> Result<RawTable> {
    let mut header: Vec<String> = Vec::new();
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| Error::Json {
                path: path.to_path_buf(),
                message: format!("line {}: {e}", lineno + 1),
            })?;
        let obj = value.as_object().ok_or_else(|| Error::Json {
            path: path.to_path_buf(),
            message: format!("line {}: expected an object", lineno + 1),
        })?;
        for key in obj.keys() {
            if !header.contains(key) {
                header.push(key.clone());
            }
        }
        let row = header
            .iter()
            .map(|k| match obj.get(k) {
                None | Some(serde_json::Value::Null) => String::new(),
                Some(serde_json::Value::String(s)) => s.clone(),
                Some(v) => v.to_string(),
            })
            .collect();
        rows.push(row);
    }
    Ok(RawTable { header, rows })
}

fn column_index(table: &RawTable, name: &str, path: &Path) -> Result<usize> {
    table
        .header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::MissingColumn {
            file: path.display().to_string(),
            column: name.to_string(),
        })
}

fn parse_cell(path: &Path, line: u64, column: &str, cell: &str) -> Result<f64> {
    cell.parse::<f64>().map_err(|_| Error::Parse {
        file: path.display().to_string(),
        line,
        column: column.to_string(),
        value: cell.to_string(),
    })
}

/// Load observation logs into a shared feature space.
///
/// Per-trace, per-step ordering is preserved; rows carrying any
/// non-finite feature (or non-finite sign output) are dropped and
/// counted; rows with an empty output cell are dropped with a warning.
/// Files merge deterministically in sorted (reference, path) order.
pub fn load_logs(sources: &[LogSource], schema: &LogSchema) -> Result<(ObservationSet, LoadStats)> {
    schema.validate()?;
    if sources.is_empty() {
        return Err(Error::Empty("no log files".into()));
    }
    let alphabet = schema.output_alphabet()?;
    let mut sorted: Vec<&LogSource> = sources.iter().collect();
    sorted.sort_by(|a, b| (&a.reference, &a.path).cmp(&(&b.reference, &b.path)));

    let mut stats = LoadStats::default();
    let mut references: Vec<ReferenceLog> = Vec::new();
    for source in sorted {
        let (rows, mut st) = load_one_file(source, schema, &alphabet)?;
        stats.rows_read += st.rows_read;
        stats.dropped_nonfinite += st.dropped_nonfinite;
        stats.dropped_missing_output += st.dropped_missing_output;
        st.observations = rows.len() as u64;
        stats.observations += st.observations;
        match references.iter_mut().find(|r| r.id == source.reference) {
            Some(r) => r.observations.extend(rows),
            None => references.push(ReferenceLog {
                id: source.reference.clone(),
                observations: rows,
            }),
        }
    }
    if stats.observations == 0 {
        return Err(Error::Empty(
            "no observations survived loading and windowing".into(),
        ));
    }
    let set = ObservationSet::new(
        references,
        alphabet,
        schema.windowed_feature_names(),
        schema.output_column.clone(),
    )?;
    Ok((set, stats))
}

fn load_one_file(
    source: &LogSource,
    schema: &LogSchema,
    alphabet: &OutputAlphabet,
) -> Result<(Vec<Observation>, LoadStats)> {
    let path = &source.path;
    let table = read_raw(path)?;
    let feature_idx: Vec<usize> = schema
        .feature_columns
        .iter()
        .map(|c| column_index(&table, c, path))
        .collect::<Result<_>>()?;
    let output_idx = column_index(&table, &schema.output_column, path)?;
    let trace_idx = column_index(&table, &schema.trace_column, path)?;
    let step_idx = match &schema.step_column {
        Some(c) => Some(column_index(&table, c, path)?),
        None => None,
    };

    let mut stats = LoadStats::default();

    // Parsed rows grouped per trace, in file order of first appearance.
    struct TraceRows {
        name: String,
        rows: Vec<(u64, Vec<f64>, Label)>,
    }
    let mut traces: Vec<TraceRows> = Vec::new();
    let mut per_trace_counter: BTreeMap<String, u64> = BTreeMap::new();

    for (i, row) in table.rows.iter().enumerate() {
        let line = i as u64 + 2; // header is line 1
        stats.rows_read += 1;

        let output_cell = &row[output_idx];
        if output_cell.is_empty() {
            stats.dropped_missing_output += 1;
            continue;
        }
        let output: Label = match schema.discretizer {
            Discretizer::Identity => match alphabet.index_of(output_cell) {
                Some(l) => l,
                None => {
                    return Err(Error::Parse {
                        file: path.display().to_string(),
                        line,
                        column: schema.output_column.clone(),
                        value: format!("{output_cell} (not in alphabet)"),
                    })
                }
            },
            Discretizer::Sign => {
                let v = parse_cell(path, line, &schema.output_column, output_cell)?;
                if !v.is_finite() {
                    stats.dropped_nonfinite += 1;
                    continue;
                }
                discretize_sign(v, schema.sign_deadband)?
            }
        };

        let mut features = Vec::with_capacity(feature_idx.len());
        let mut finite = true;
        for (c, &idx) in schema.feature_columns.iter().zip(&feature_idx) {
            let raw = parse_cell(path, line, c, &row[idx])?;
            if !raw.is_finite() {
                finite = false;
                break;
            }
            let t = schema.transforms.get(c).copied().unwrap_or_default();
            features.push(apply_affine(raw, &t));
        }
        if !finite {
            stats.dropped_nonfinite += 1;
            continue;
        }

        let trace_name = row[trace_idx].clone();
        let step = match step_idx {
            Some(idx) => {
                let v = parse_cell(path, line, schema.step_column.as_ref().unwrap(), &row[idx])?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Parse {
                        file: path.display().to_string(),
                        line,
                        column: schema.step_column.clone().unwrap(),
                        value: row[idx].clone(),
                    });
                }
                v as u64
            }
            None => {
                let counter = per_trace_counter.entry(trace_name.clone()).or_insert(0);
                let s = *counter;
                *counter += 1;
                s
            }
        };

        match traces.iter_mut().find(|t| t.name == trace_name) {
            Some(t) => t.rows.push((step, features, output)),
            None => traces.push(TraceRows {
                name: trace_name,
                rows: vec![(step, features, output)],
            }),
        }
    }

    if stats.dropped_nonfinite > 0 || stats.dropped_missing_output > 0 {
        log::warn!(
            "{}: dropped {} rows with non-finite values, {} with missing outputs",
            path.display(),
            stats.dropped_nonfinite,
            stats.dropped_missing_output
        );
    }

    let mut observations = Vec::new();
    for trace in &mut traces {
        trace.rows.sort_by_key(|(step, _, _)| *step);
        let base: Vec<Vec<f64>> = trace.rows.iter().map(|(_, f, _)| f.clone()).collect();
        let windows = window_history(&base, schema);
        let offset = schema.history - 1;
        for (w, features) in windows.into_iter().enumerate() {
            let (step, _, output) = &trace.rows[offset + w];
            observations.push(Observation {
                features,
                output: *output,
                trace: trace.name.clone(),
                step: *step,
            });
        }
    }
    Ok((observations, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abr_schema() -> LogSchema {
        LogSchema {
            feature_columns: vec!["buffer".into(), "dt".into()],
            history_columns: vec!["dt".into()],
            history: 3,
            output_column: "bitrate".into(),
            trace_column: "trace".into(),
            step_column: Some("step".into()),
            transforms: BTreeMap::new(),
            alphabet: Some(vec!["300".into(), "750".into()]),
            discretizer: Discretizer::Identity,
            sign_deadband: 0.0,
        }
    }

    #[test]
    fn window_exact_length_trace() {
        let schema = LogSchema {
            feature_columns: vec!["v".into()],
            history_columns: vec!["v".into()],
            history: 3,
            ..abr_schema()
        };
        let rows = vec![vec![1.0], vec![2.0], vec![3.0]];
        let w = window_history(&rows, &schema);
        assert_eq!(w, vec![vec![3.0, 2.0, 1.0]]);
    }

    #[test]
    fn window_slides_by_one() {
        let schema = LogSchema {
            feature_columns: vec!["v".into()],
            history_columns: vec!["v".into()],
            history: 3,
            ..abr_schema()
        };
        let rows = vec![vec![1.0], vec![2.0], vec![3.0], vec![5.0]];
        let w = window_history(&rows, &schema);
        assert_eq!(w, vec![vec![3.0, 2.0, 1.0], vec![5.0, 3.0, 2.0]]);
    }

    #[test]
    fn short_trace_yields_nothing() {
        let schema = LogSchema {
            feature_columns: vec!["v".into()],
            history_columns: vec!["v".into()],
            history: 3,
            ..abr_schema()
        };
        assert!(window_history(&[vec![1.0], vec![2.0]], &schema).is_empty());
    }

    #[test]
    fn windowed_names_follow_lag_convention() {
        assert_eq!(
            abr_schema().windowed_feature_names(),
            vec!["buffer", "dt[-1]", "dt[-2]", "dt[-3]"]
        );
    }

    #[test]
    fn three_features_with_four_lags_span_twelve_dimensions() {
        let schema = LogSchema {
            feature_columns: vec!["lg".into(), "lr".into(), "sr".into()],
            history_columns: vec!["lg".into(), "lr".into(), "sr".into()],
            history: 4,
            alphabet: None,
            discretizer: Discretizer::Sign,
            ..abr_schema()
        };
        schema.validate().unwrap();
        assert_eq!(schema.windowed_dimension(), 12);
        let names = schema.windowed_feature_names();
        assert_eq!(names.len(), 12);
        assert_eq!(names[0], "lg[-1]");
        assert_eq!(names[11], "sr[-4]");
    }

    #[test]
    fn sign_discretization() {
        assert_eq!(discretize_sign(0.5, 0.0).unwrap(), 0);
        assert_eq!(discretize_sign(-0.3, 0.0).unwrap(), 1);
        assert_eq!(discretize_sign(0.0, 0.0).unwrap(), 2);
        assert_eq!(discretize_sign(0.05, 0.1).unwrap(), 2);
        assert!(discretize_sign(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn affine_matches_expected_scaling() {
        let t = AffineTransform {
            scale: 0.1,
            offset: 0.0,
        };
        assert!((apply_affine(4.0, &t) - 0.4).abs() < 1e-15);
        assert!((apply_affine(6.6, &t) - 0.66).abs() < 1e-15);
        let identity = AffineTransform::default();
        assert_eq!(apply_affine(3.25, &identity), 3.25);
        assert!((invert_affine(apply_affine(7.3, &t), &t) - 7.3).abs() < 1e-12);
    }

    #[test]
    fn load_csv_with_identity_windowing() {
        let dir = std::env::temp_dir().join(format!("spectra-ingest-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("r1.csv");
        std::fs::write(
            &path,
            "trace,step,buffer,dt,bitrate\nt0,0,1.5,0.2,300\nt0,1,2.5,0.3,750\n",
        )
        .unwrap();
        let schema = LogSchema {
            history: 1,
            history_columns: vec![],
            ..abr_schema()
        };
        let (set, stats) = load_logs(
            &[LogSource {
                reference: "r1".into(),
                path: path.clone(),
            }],
            &schema,
        )
        .unwrap();
        assert_eq!(set.dimension, 2);
        assert_eq!(set.total_observations(), 2);
        assert_eq!(stats.observations, 2);
        assert_eq!(set.references[0].observations[1].output, 1);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn missing_column_is_reported() {
        let dir = std::env::temp_dir().join(format!("spectra-ingest2-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("r1.csv");
        std::fs::write(&path, "trace,step,buffer,bitrate\nt0,0,1.5,300\n").unwrap();
        let schema = LogSchema {
            history: 1,
            history_columns: vec![],
            ..abr_schema()
        };
        let err = load_logs(
            &[LogSource {
                reference: "r1".into(),
                path: path.clone(),
            }],
            &schema,
        )
        .unwrap_err();
        match err {
            Error::MissingColumn { column, .. } => assert_eq!(column, "dt"),
            other => panic!("unexpected {other:?}"),
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn nonfinite_rows_are_dropped_and_counted() {
        let dir = std::env::temp_dir().join(format!("spectra-ingest3-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("r1.csv");
        std::fs::write(
            &path,
            "trace,step,buffer,dt,bitrate\nt0,0,nan,0.2,300\nt0,1,2.5,0.3,750\nt0,2,2.6,0.4,\n",
        )
        .unwrap();
        let schema = LogSchema {
            history: 1,
            history_columns: vec![],
            ..abr_schema()
        };
        let (set, stats) = load_logs(
            &[LogSource {
                reference: "r1".into(),
                path,
            }],
            &schema,
        )
        .unwrap();
        assert_eq!(stats.dropped_nonfinite, 1);
        assert_eq!(stats.dropped_missing_output, 1);
        assert_eq!(set.total_observations(), 1);
        std::fs::remove_dir_all(&dir).ok();
    }
}
