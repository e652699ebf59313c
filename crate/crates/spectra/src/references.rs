//! Built-in observation generators for desk-scale experiments: planted-rule
//! synthetic references with known ground-truth specifications, and a
//! trace-driven buffer-based bitrate controller with a minimal streaming
//! simulator.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Interval, Label, LabelSet, Observation, ObservationSet, OutputAlphabet, ReferenceLog,
};

/// One rule of a planted reference: inputs inside `rect` may produce any
/// label from `allowed`. Higher priority wins where rules overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedRule {
    pub rect: Vec<Interval>,
    pub allowed: LabelSet,
    pub priority: i32,
}

impl PlantedRule {
    pub fn contains(&self, x: &[f64]) -> bool {
        self.rect.iter().zip(x).all(|(iv, &v)| iv.contains(v))
    }
}

/// A deterministic synthetic reference: the label of an input is drawn
/// (seeded) from the highest-priority covering rule's allowed set, flipped
/// to a uniform alphabet label with probability `noise_rate`. A full-space
/// rule allowing every label closes coverage gaps.
pub struct PlantedReference {
    rules: Vec<PlantedRule>,
    alphabet_len: usize,
    noise_rate: f64,
    rng: ChaCha8Rng,
}

impl PlantedReference {
    pub fn new(
        mut rules: Vec<PlantedRule>,
        bounds: &[Interval],
        alphabet: &OutputAlphabet,
        noise_rate: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(0.0..0.5).contains(&noise_rate) {
            return Err(Error::Config {
                field: "noise_rate",
                message: format!("{noise_rate} not in [0, 0.5)"),
            });
        }
        for rule in &rules {
            if rule.rect.len() != bounds.len() {
                return Err(Error::DimensionMismatch {
                    expected: bounds.len(),
                    actual: rule.rect.len(),
                });
            }
            if rule.allowed.is_empty() {
                return Err(Error::Invariant("planted rule allows no labels".into()));
            }
        }
        // Default rule: full space, full alphabet, lowest priority.
        rules.push(PlantedRule {
            rect: bounds.to_vec(),
            allowed: alphabet.full_set(),
            priority: i32::MIN,
        });
        rules.sort_by_key(|r| std::cmp::Reverse(r.priority));
        Ok(PlantedReference {
            rules,
            alphabet_len: alphabet.len(),
            noise_rate,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Label for one input. Depends on the seed and on evaluation order.
    pub fn label(&mut self, x: &[f64]) -> Label {
        let rule = self
            .rules
            .iter()
            .find(|r| r.contains(x))
            .expect("default rule covers the space");
        let picks: Vec<Label> = rule.allowed.iter().collect();
        let mut label = picks[self.rng.random_range(0..picks.len())];
        if self.noise_rate > 0.0 && self.rng.random::<f64>() < self.noise_rate {
            label = self.rng.random_range(0..self.alphabet_len);
        }
        label
    }
}

/// Serializable planted-experiment description (the `rules.json` format).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantedConfig {
    pub bounds: Vec<Interval>,
    pub alphabet: Vec<String>,
    pub references: Vec<PlantedReferenceConfig>,
    #[serde(default)]
    pub noise_rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantedReferenceConfig {
    pub id: String,
    pub rules: Vec<PlantedRuleConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantedRuleConfig {
    pub rect: Vec<Interval>,
    pub allowed: Vec<String>,
    #[serde(default)]
    pub priority: i32,
}

impl PlantedConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn output_alphabet(&self) -> Result<OutputAlphabet> {
        OutputAlphabet::new(self.alphabet.clone())
    }

    fn rules_for(&self, reference: &PlantedReferenceConfig) -> Result<Vec<PlantedRule>> {
        let alphabet = self.output_alphabet()?;
        reference
            .rules
            .iter()
            .map(|r| {
                let mut allowed = LabelSet::EMPTY;
                for name in &r.allowed {
                    let label = alphabet.index_of(name).ok_or_else(|| {
                        Error::Schema(format!("rule label {name:?} not in alphabet"))
                    })?;
                    allowed.insert(label);
                }
                Ok(PlantedRule {
                    rect: r.rect.clone(),
                    allowed,
                    priority: r.priority,
                })
            })
            .collect()
    }
}

/// Sample `n` uniform inputs per reference (each reference draws its own
/// stream) and label them with the planted rules. Deterministic for a
/// fixed seed.
pub fn generate_planted(config: &PlantedConfig, n: usize, seed: u64) -> Result<ObservationSet> {
    let alphabet = config.output_alphabet()?;
    let d = config.bounds.len();
    if d == 0 {
        return Err(Error::Empty("planted config has no dimensions".into()));
    }
    let mut references = Vec::with_capacity(config.references.len());
    for (j, reference) in config.references.iter().enumerate() {
        let stream_seed = seed.wrapping_add(j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut sampler = ChaCha8Rng::seed_from_u64(stream_seed);
        let mut planted = PlantedReference::new(
            config.rules_for(reference)?,
            &config.bounds,
            &alphabet,
            config.noise_rate,
            stream_seed ^ 0x5DEE_CE66,
        )?;
        let mut observations = Vec::with_capacity(n);
        for step in 0..n {
            let x: Vec<f64> = config
                .bounds
                .iter()
                .map(|iv| sampler.random_range(iv.lo..iv.hi))
                .collect();
            let output = planted.label(&x);
            observations.push(Observation {
                features: x,
                output,
                trace: "t0".into(),
                step: step as u64,
            });
        }
        references.push(ReferenceLog {
            id: reference.id.clone(),
            observations,
        });
    }
    let feature_names = (0..d).map(|i| format!("x{i}")).collect();
    ObservationSet::new(references, alphabet, feature_names, "label".into())
}

/// A piecewise-constant bandwidth trace: (timestamp seconds, Mbps).
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthTrace {
    points: Vec<(f64, f64)>,
}

impl BandwidthTrace {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("bandwidth trace has no samples".into()));
        }
        if points
            .iter()
            .any(|&(ts, mbps)| !ts.is_finite() || !mbps.is_finite() || mbps <= 0.0)
        {
            return Err(Error::Invariant(
                "trace samples must be finite with positive throughput".into(),
            ));
        }
        for w in points.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::Invariant(
                    "trace timestamps must be strictly increasing".into(),
                ));
            }
        }
        Ok(BandwidthTrace { points })
    }

    pub fn constant(mbps: f64, duration: f64) -> Result<Self> {
        BandwidthTrace::new(vec![(0.0, mbps), (duration, mbps)])
    }

    /// Throughput at time `t`; errors once `t` runs past the trace.
    pub fn throughput_at(&self, t: f64) -> Result<f64> {
        if t > self.points.last().unwrap().0 {
            return Err(Error::Simulation(format!(
                "trace ends at {:.3}s but the simulation reached {t:.3}s",
                self.points.last().unwrap().0
            )));
        }
        let idx = self.points.partition_point(|&(ts, _)| ts <= t);
        Ok(self.points[idx.saturating_sub(1)].1)
    }

    /// Two-column delimited text: seconds then Mbps.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cells = line.split([',', '\t', ' ']).filter(|c| !c.is_empty());
            let parse = |cell: Option<&str>, col: &str| -> Result<f64> {
                let cell = cell.ok_or_else(|| Error::Parse {
                    file: path.display().to_string(),
                    line: i as u64 + 1,
                    column: col.to_string(),
                    value: line.to_string(),
                })?;
                cell.parse().map_err(|_| Error::Parse {
                    file: path.display().to_string(),
                    line: i as u64 + 1,
                    column: col.to_string(),
                    value: cell.to_string(),
                })
            };
            let ts = parse(cells.next(), "timestamp")?;
            let mbps = parse(cells.next(), "throughput")?;
            points.push((ts, mbps));
        }
        BandwidthTrace::new(points)
    }
}

/// The bitrate ladder: display labels plus their kbps values, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct RateLadder {
    pub alphabet: OutputAlphabet,
    pub kbps: Vec<f64>,
}

impl RateLadder {
    pub fn new(kbps: Vec<f64>) -> Result<Self> {
        if kbps.windows(2).any(|w| !(w[0] < w[1])) || kbps.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::Invariant(
                "rate ladder must be positive and ascending".into(),
            ));
        }
        let labels = kbps
            .iter()
            .map(|r| crate::canon::display_f64(*r).trim_end_matches(".0").to_string())
            .collect();
        Ok(RateLadder {
            alphabet: OutputAlphabet::new(labels)?,
            kbps,
        })
    }

    /// The six-rate ladder used by common ABR setups.
    pub fn standard() -> Self {
        RateLadder::new(vec![300.0, 750.0, 1200.0, 1850.0, 2850.0, 4300.0])
            .expect("standard ladder is valid")
    }
}

/// Buffer-based bitrate selection with a reservoir/cushion profile.
#[derive(Debug, Clone, PartialEq)]
pub struct BufferBasedConfig {
    pub reservoir: f64,
    pub cushion: f64,
}

impl Default for BufferBasedConfig {
    fn default() -> Self {
        BufferBasedConfig {
            reservoir: 5.0,
            cushion: 10.0,
        }
    }
}

/// Pick a ladder index from the buffer level: lowest rate at or below the
/// reservoir, highest at or above reservoir + cushion, and in between a
/// linear ramp rounded down to a ladder step. Monotone in the buffer.
pub fn buffer_based_abr(buffer: f64, config: &BufferBasedConfig, ladder: &RateLadder) -> usize {
    debug_assert!(buffer >= 0.0);
    debug_assert!(config.reservoir < config.reservoir + config.cushion);
    let rates = &ladder.kbps;
    if buffer <= config.reservoir {
        return 0;
    }
    if buffer >= config.reservoir + config.cushion {
        return rates.len() - 1;
    }
    let f = (buffer - config.reservoir) / config.cushion;
    let target = rates[0] + f * (rates[rates.len() - 1] - rates[0]);
    rates
        .iter()
        .rposition(|&r| r <= target)
        .unwrap_or(0)
}

/// Streaming simulator parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub chunk_seconds: f64,
    pub buffer_cap: f64,
    /// Per-rate chunk sizes in bits; default is ideal CBR
    /// (kbps * 1000 * chunk_seconds).
    pub chunk_bits: Option<Vec<f64>>,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            chunk_seconds: 4.0,
            buffer_cap: 60.0,
            chunk_bits: None,
        }
    }
}

/// One emitted log row: the buffer at decision time, the download time of
/// the chunk completed just before the decision, and the chosen rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AbrRow {
    pub step: u64,
    pub buffer: f64,
    pub download_time: f64,
    pub rate: Label,
}

/// Discrete-event playback of `horizon` chunks against a bandwidth trace.
///
/// Per chunk: the controller picks a rate from the current buffer, the
/// chunk downloads at the trace throughput (draining the buffer), then
/// the chunk's seconds are appended, capped at `buffer_cap` with an idle
/// wait. The first decision has no completed download behind it and emits
/// no row, so every emitted row carries real values only.
pub fn simulate_abr(
    trace: &BandwidthTrace,
    controller: &BufferBasedConfig,
    ladder: &RateLadder,
    params: &SimParams,
    horizon: usize,
) -> Result<Vec<AbrRow>> {
    let mut rows = Vec::with_capacity(horizon.saturating_sub(1));
    let mut buffer = 0.0f64;
    let mut clock = 0.0f64;
    let mut prev_dt: Option<f64> = None;
    for step in 0..horizon {
        let rate = buffer_based_abr(buffer, controller, ladder);
        let mbps = trace.throughput_at(clock)?;
        if !(mbps > 0.0) {
            return Err(Error::Simulation(format!(
                "non-positive throughput {mbps} at {clock:.3}s"
            )));
        }
        let bits = match &params.chunk_bits {
            Some(table) => *table.get(rate).ok_or_else(|| {
                Error::Simulation("chunk size table shorter than the ladder".into())
            })?,
            None => ladder.kbps[rate] * 1000.0 * params.chunk_seconds,
        };
        let dt = bits / (mbps * 1e6);
        if let Some(prev) = prev_dt {
            rows.push(AbrRow {
                step: step as u64,
                buffer,
                download_time: prev,
                rate,
            });
        }
        let filled = (buffer - dt).max(0.0) + params.chunk_seconds;
        let idle = (filled - params.buffer_cap).max(0.0);
        buffer = filled - idle;
        clock += dt + idle;
        prev_dt = Some(dt);
    }
    Ok(rows)
}
