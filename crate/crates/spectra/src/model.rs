//! Core domain types shared by every stage of the mining pipeline:
//! observations, grids, region tables, specifications, the miner
//! configuration, and evaluation reports.
//!
//! All types here are immutable after construction and safe to share
//! read-only across threads.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index into an [`OutputAlphabet`].
pub type Label = usize;

/// Hard cap on alphabet size so label sets fit in a u64 bitmask.
pub const MAX_LABELS: usize = 64;

/// The finite, ordered set of discrete output labels (e.g. the bitrate
/// ladder "300".."4300", or the signs "+", "-", "0").
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputAlphabet {
    labels: Vec<String>,
}

impl OutputAlphabet {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::Schema(format!(
                "output alphabet needs at least 2 labels, got {}",
                labels.len()
            )));
        }
        if labels.len() > MAX_LABELS {
            return Err(Error::Schema(format!(
                "output alphabet is limited to {MAX_LABELS} labels, got {}",
                labels.len()
            )));
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::Schema(format!("duplicate output label {a:?}")));
            }
        }
        Ok(OutputAlphabet { labels })
    }

    /// The three-way sign alphabet used when a real-valued output is
    /// discretized by sign.
    pub fn sign() -> Self {
        OutputAlphabet {
            labels: vec!["+".into(), "-".into(), "0".into()],
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn name(&self, label: Label) -> &str {
        &self.labels[label]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, name: &str) -> Option<Label> {
        self.labels.iter().position(|l| l == name)
    }

    /// The set containing every label.
    pub fn full_set(&self) -> LabelSet {
        LabelSet::full(self.len())
    }
}

/// A set of output labels, stored as a bitmask over alphabet indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LabelSet(u64);

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);

    pub fn full(k: usize) -> Self {
        debug_assert!(k <= MAX_LABELS);
        if k == 64 {
            LabelSet(u64::MAX)
        } else {
            LabelSet((1u64 << k) - 1)
        }
    }

    pub fn singleton(label: Label) -> Self {
        LabelSet(1u64 << label)
    }

    pub fn from_labels(labels: impl IntoIterator<Item = Label>) -> Self {
        let mut s = LabelSet::EMPTY;
        for l in labels {
            s.insert(l);
        }
        s
    }

    pub fn insert(&mut self, label: Label) {
        debug_assert!(label < MAX_LABELS);
        self.0 |= 1u64 << label;
    }

    pub fn contains(&self, label: Label) -> bool {
        label < MAX_LABELS && self.0 & (1u64 << label) != 0
    }

    pub fn union(&self, other: LabelSet) -> LabelSet {
        LabelSet(self.0 | other.0)
    }

    pub fn is_subset(&self, other: &LabelSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_strict_subset(&self, other: &LabelSet) -> bool {
        self.is_subset(other) && self.0 != other.0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    /// Labels in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = Label> + '_ {
        (0..MAX_LABELS).filter(|l| self.contains(*l))
    }

    pub fn names(&self, alphabet: &OutputAlphabet) -> Vec<String> {
        self.iter().map(|l| alphabet.name(l).to_string()).collect()
    }
}

/// The integer index vector of one grid cell, each coordinate in
/// `[0, parts)`. Ordering is lexicographic, which is the canonical order
/// used everywhere determinism matters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegionIndex(pub Vec<u32>);

impl RegionIndex {
    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }
}

/// A closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// A uniform partition of an axis-aligned box into `parts` equal cells per
/// dimension. Cells are half-open `[l, u)` except the last cell of each
/// dimension, which is closed so the upper boundary folds in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub parts: u32,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, parts: u32) -> Result<Self> {
        Self::with_names(lower, upper, parts, None)
    }

    /// Like [`GridSpec::new`] but names the offending dimension in errors.
    pub fn with_names(
        lower: Vec<f64>,
        upper: Vec<f64>,
        parts: u32,
        names: Option<&[String]>,
    ) -> Result<Self> {
        if parts == 0 {
            return Err(Error::Config {
                field: "parts",
                message: "must be positive".into(),
            });
        }
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                let name = names
                    .and_then(|n| n.get(i))
                    .cloned()
                    .unwrap_or_else(|| format!("x{i}"));
                return Err(Error::DegenerateDimension {
                    dim: i,
                    name,
                    value: lo,
                });
            }
        }
        Ok(GridSpec {
            lower,
            upper,
            parts,
        })
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    /// Cell width along dimension `i`.
    pub fn width(&self, i: usize) -> f64 {
        (self.upper[i] - self.lower[i]) / self.parts as f64
    }

    /// Map a point to its cell, or `None` if any coordinate is out of range.
    /// The upper boundary of the box folds into the last cell.
    pub fn cell_of(&self, x: &[f64]) -> Option<RegionIndex> {
        debug_assert_eq!(x.len(), self.dimension());
        let mut idx = Vec::with_capacity(x.len());
        for (i, &v) in x.iter().enumerate() {
            if !(self.lower[i] <= v && v <= self.upper[i]) {
                return None;
            }
            let raw = ((v - self.lower[i]) / self.width(i)).floor() as i64;
            idx.push(raw.clamp(0, self.parts as i64 - 1) as u32);
        }
        Some(RegionIndex(idx))
    }

    pub fn cell_lo(&self, dim: usize, cell: u32) -> f64 {
        self.lower[dim] + cell as f64 * self.width(dim)
    }

    pub fn cell_hi(&self, dim: usize, cell: u32) -> f64 {
        self.lower[dim] + (cell + 1) as f64 * self.width(dim)
    }

    /// The closed box of a cell.
    pub fn cell_box(&self, idx: &RegionIndex) -> Vec<Interval> {
        idx.as_slice()
            .iter()
            .enumerate()
            .map(|(d, &c)| Interval::new(self.cell_lo(d, c), self.cell_hi(d, c)))
            .collect()
    }

    /// The full range of dimension `i`.
    pub fn range(&self, i: usize) -> Interval {
        Interval::new(self.lower[i], self.upper[i])
    }

    /// True when `x` lies on a cell boundary of dimension `dim`
    /// (within floating-point slack).
    pub fn on_boundary(&self, dim: usize, x: f64) -> bool {
        let t = (x - self.lower[dim]) / self.width(dim);
        let r = t.round();
        (0.0..=self.parts as f64).contains(&r) && (t - r).abs() <= 1e-6
    }
}

/// One logged decision of a reference algorithm: the (windowed, normalized)
/// feature vector and the discrete output label, with trace provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub features: Vec<f64>,
    pub output: Label,
    pub trace: String,
    pub step: u64,
}

/// All observations of a single reference algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceLog {
    pub id: String,
    pub observations: Vec<Observation>,
}

/// Observations of every reference, sharing one feature space and one
/// output alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    pub references: Vec<ReferenceLog>,
    pub dimension: usize,
    pub alphabet: OutputAlphabet,
    pub feature_names: Vec<String>,
    pub output_name: String,
    pub observed_lo: Vec<f64>,
    pub observed_hi: Vec<f64>,
}

impl ObservationSet {
    pub fn new(
        references: Vec<ReferenceLog>,
        alphabet: OutputAlphabet,
        feature_names: Vec<String>,
        output_name: String,
    ) -> Result<Self> {
        if references.is_empty() {
            return Err(Error::Empty("no references".into()));
        }
        let dimension = feature_names.len();
        if dimension == 0 {
            return Err(Error::Empty("no feature columns".into()));
        }
        let mut lo = vec![f64::INFINITY; dimension];
        let mut hi = vec![f64::NEG_INFINITY; dimension];
        for r in &references {
            for obs in &r.observations {
                if obs.features.len() != dimension {
                    return Err(Error::DimensionMismatch {
                        expected: dimension,
                        actual: obs.features.len(),
                    });
                }
                if obs.output >= alphabet.len() {
                    return Err(Error::Invariant(format!(
                        "label index {} out of range for {}-label alphabet",
                        obs.output,
                        alphabet.len()
                    )));
                }
                for (d, &v) in obs.features.iter().enumerate() {
                    if !v.is_finite() {
                        return Err(Error::Invariant(format!(
                            "non-finite feature in reference {}",
                            r.id
                        )));
                    }
                    lo[d] = lo[d].min(v);
                    hi[d] = hi[d].max(v);
                }
            }
        }
        Ok(ObservationSet {
            references,
            dimension,
            alphabet,
            feature_names,
            output_name,
            observed_lo: lo,
            observed_hi: hi,
        })
    }

    pub fn total_observations(&self) -> usize {
        self.references.iter().map(|r| r.observations.len()).sum()
    }
}

/// Per-region tallies: observation counts and label sets per reference,
/// plus the combined label set.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionEntry {
    pub counts: Vec<u64>,
    pub outputs: Vec<LabelSet>,
    pub combined: LabelSet,
}

/// Raw tally of occupied grid cells (before importance or interestingness
/// filtering). Sparse: only cells containing at least one in-range
/// observation appear.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionTable {
    pub entries: BTreeMap<RegionIndex, RegionEntry>,
    /// Observations that fell outside the grid, counted but not tallied.
    pub out_of_range: u64,
}

impl RegionTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The interesting-behavior regions: cells that passed the importance
/// filter and whose combined output set is a strict subset of the
/// alphabet, with their per-reference counts and output sets attached.
#[derive(Debug, Clone, PartialEq)]
pub struct InterestingRegionTable {
    pub entries: BTreeMap<RegionIndex, RegionEntry>,
}

impl InterestingRegionTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Distance metric used when clustering region index vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ClusterMetric {
    #[default]
    Chebyshev,
    Euclidean,
}

/// How raw output values become labels during ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Discretizer {
    /// Output column already holds label names from the alphabet.
    #[default]
    Identity,
    /// Real-valued output mapped to {+, -, 0} by sign.
    Sign,
}

/// Every threshold and parameter of the mining algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinerConfig {
    /// Relaxed coverage target in (0, 1]; mining stops early once reached.
    pub tau_cov: f64,
    /// Relaxed per-specification representation threshold in (0, 1].
    pub tau_rep: f64,
    /// Maximum number of labels a postcondition may allow; must stay
    /// below the alphabet size.
    pub tau_max: usize,
    /// Number of grid parts per dimension.
    pub parts: u32,
    /// Fractional importance floor: a region must hold at least
    /// `ceil(importance_fraction * |D_j|)` observations of every reference.
    pub importance_fraction: f64,
    /// Absolute importance floor per reference.
    pub importance_min_count: u64,
    pub cluster_metric: ClusterMetric,
    /// Fixed clustering radius; default derives it from the packing bound.
    pub cluster_radius_override: Option<f64>,
    /// History window length used when expanding lagged features.
    pub history: usize,
    pub discretizer: Discretizer,
    /// Half-width of the zero band for the sign discretizer.
    pub sign_deadband: f64,
    /// Explicit grid bounds; default is the observed min/max per dimension.
    pub grid_bounds: Option<Vec<Interval>>,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            tau_cov: 1.0,
            tau_rep: 0.01,
            tau_max: 5,
            parts: 100,
            importance_fraction: 1e-4,
            importance_min_count: 2,
            cluster_metric: ClusterMetric::Chebyshev,
            cluster_radius_override: None,
            history: 3,
            discretizer: Discretizer::Identity,
            sign_deadband: 0.0,
            grid_bounds: None,
        }
    }
}

/// Check every `MinerConfig` invariant against an alphabet. The error
/// names the first violated field in declaration order.
pub fn validate_config(config: &MinerConfig, alphabet: &OutputAlphabet) -> Result<()> {
    fn bad(field: &'static str, message: impl Into<String>) -> Error {
        Error::Config {
            field,
            message: message.into(),
        }
    }
    if !(config.tau_cov > 0.0 && config.tau_cov <= 1.0) {
        return Err(bad("tau_cov", format!("{} not in (0, 1]", config.tau_cov)));
    }
    if !(config.tau_rep > 0.0 && config.tau_rep <= 1.0) {
        return Err(bad("tau_rep", format!("{} not in (0, 1]", config.tau_rep)));
    }
    let k = alphabet.len();
    if config.tau_max < 1 || config.tau_max >= k {
        return Err(bad(
            "tau_max",
            format!(
                "{} not in [1, {}] for a {k}-label alphabet",
                config.tau_max,
                k - 1
            ),
        ));
    }
    if config.parts == 0 {
        return Err(bad("parts", "must be positive"));
    }
    if !(config.importance_fraction >= 0.0 && config.importance_fraction.is_finite()) {
        return Err(bad(
            "importance_fraction",
            format!("{} must be a finite non-negative real", config.importance_fraction),
        ));
    }
    if config.importance_min_count < 1 {
        return Err(bad("importance_min_count", "must be at least 1"));
    }
    if let Some(r) = config.cluster_radius_override {
        if !(r > 0.0 && r.is_finite()) {
            return Err(bad(
                "cluster_radius_override",
                format!("{r} must be a positive real"),
            ));
        }
    }
    if config.history < 1 {
        return Err(bad("history", "must be at least 1"));
    }
    if !(config.sign_deadband >= 0.0 && config.sign_deadband.is_finite()) {
        return Err(bad(
            "sign_deadband",
            format!("{} must be a finite non-negative real", config.sign_deadband),
        ));
    }
    if let Some(bounds) = &config.grid_bounds {
        for (i, iv) in bounds.iter().enumerate() {
            if !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo < iv.hi) {
                return Err(bad(
                    "grid_bounds",
                    format!("dimension {i}: [{}, {}] is not a proper interval", iv.lo, iv.hi),
                ));
            }
        }
    }
    Ok(())
}

/// One interval pre/postcondition specification.
///
/// The precondition constrains a subset of dimensions to closed intervals;
/// `None` marks a free dimension (unconstrained, as opposed to constrained
/// to the full grid range). The postcondition is the set of allowed
/// labels. `omega` records the candidate output subset the generating
/// cluster was mined under, and `members` the generating cells
/// (empty for hand-entered sets with unknown provenance).
#[derive(Debug, Clone, PartialEq)]
pub struct Specification {
    pub precondition: Vec<Option<Interval>>,
    pub postcondition: LabelSet,
    pub omega: LabelSet,
    pub members: Vec<RegionIndex>,
}

impl Specification {
    /// Pointwise precondition test: closed-interval membership on every
    /// constrained dimension.
    pub fn matches(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.precondition.len());
        self.precondition
            .iter()
            .zip(x)
            .all(|(iv, &v)| iv.map_or(true, |iv| iv.contains(v)))
    }

    /// Region-level precondition test: the whole cell box must lie inside
    /// the precondition.
    pub fn contains_cell(&self, grid: &GridSpec, idx: &RegionIndex) -> bool {
        self.precondition
            .iter()
            .enumerate()
            .all(|(d, iv)| match iv {
                None => true,
                Some(iv) => {
                    iv.lo <= grid.cell_lo(d, idx.as_slice()[d])
                        && grid.cell_hi(d, idx.as_slice()[d]) <= iv.hi
                }
            })
    }

    /// Number of allowed outputs.
    pub fn postcondition_size(&self) -> usize {
        self.postcondition.len()
    }
}

/// An ordered, deduplicated set of specifications understood as a
/// conjunction, together with everything needed to interpret it.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecificationSet {
    pub specs: Vec<Specification>,
    pub config: MinerConfig,
    pub grid: GridSpec,
    pub alphabet: OutputAlphabet,
    pub feature_names: Vec<String>,
    pub output_name: String,
}

impl SpecificationSet {
    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    /// Check every structural invariant: well-formed intervals snapped to
    /// grid boundaries, postcondition sizes within `tau_max`,
    /// postcondition within omega, preconditions bounding their member
    /// cells tightly, and pairwise (precondition, postcondition)
    /// distinctness.
    pub fn validate(&self) -> Result<()> {
        let d = self.grid.dimension();
        if self.feature_names.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: self.feature_names.len(),
            });
        }
        validate_config(&self.config, &self.alphabet)?;
        for (i, spec) in self.specs.iter().enumerate() {
            let at = |msg: String| Error::Invariant(format!("spec {}: {msg}", i + 1));
            if spec.precondition.len() != d {
                return Err(at(format!(
                    "precondition has {} dimensions, grid has {d}",
                    spec.precondition.len()
                )));
            }
            for (dim, iv) in spec.precondition.iter().enumerate() {
                if let Some(iv) = iv {
                    if !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo <= iv.hi) {
                        return Err(at(format!(
                            "dimension {dim}: [{}, {}] is not a proper interval",
                            iv.lo, iv.hi
                        )));
                    }
                    if !self.grid.on_boundary(dim, iv.lo) || !self.grid.on_boundary(dim, iv.hi) {
                        return Err(at(format!(
                            "dimension {dim}: endpoints [{}, {}] are not on grid-cell boundaries",
                            iv.lo, iv.hi
                        )));
                    }
                }
            }
            let eta = spec.postcondition_size();
            if eta == 0 || eta > self.config.tau_max {
                return Err(at(format!(
                    "postcondition size {eta} outside [1, tau_max = {}]",
                    self.config.tau_max
                )));
            }
            if !spec
                .postcondition
                .is_subset(&self.alphabet.full_set())
            {
                return Err(at("postcondition uses labels outside the alphabet".into()));
            }
            if !spec.postcondition.is_subset(&spec.omega) {
                return Err(at("postcondition is not a subset of omega".into()));
            }
            if !spec.members.is_empty() {
                let tight = tight_bounding_box(&self.grid, &spec.members)?;
                for (dim, (iv, t)) in spec.precondition.iter().zip(&tight).enumerate() {
                    let iv = iv.ok_or_else(|| {
                        at(format!("dimension {dim} free but members constrain it"))
                    })?;
                    if iv.lo != t.lo || iv.hi != t.hi {
                        return Err(at(format!(
                            "dimension {dim}: precondition [{}, {}] is not the tight member box [{}, {}]",
                            iv.lo, iv.hi, t.lo, t.hi
                        )));
                    }
                }
            }
            for earlier in &self.specs[..i] {
                if earlier.precondition == spec.precondition
                    && earlier.postcondition == spec.postcondition
                {
                    return Err(at("duplicate (precondition, postcondition)".into()));
                }
            }
        }
        Ok(())
    }

    /// Apply a per-dimension affine display transform `x -> (x + offset) * scale`
    /// to every interval and to the grid, e.g. to undo ingestion
    /// normalization before rendering. Scales must be positive.
    pub fn denormalized(&self, scales: &[f64], offsets: &[f64]) -> Result<SpecificationSet> {
        let d = self.grid.dimension();
        if scales.len() != d || offsets.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: scales.len(),
            });
        }
        if scales.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::Invariant("display scales must be positive".into()));
        }
        let map = |dim: usize, v: f64| (v + offsets[dim]) * scales[dim];
        let grid = GridSpec {
            lower: (0..d).map(|i| map(i, self.grid.lower[i])).collect(),
            upper: (0..d).map(|i| map(i, self.grid.upper[i])).collect(),
            parts: self.grid.parts,
        };
        let specs = self
            .specs
            .iter()
            .map(|s| Specification {
                precondition: s
                    .precondition
                    .iter()
                    .enumerate()
                    .map(|(dim, iv)| {
                        iv.map(|iv| Interval::new(map(dim, iv.lo), map(dim, iv.hi)))
                    })
                    .collect(),
                postcondition: s.postcondition,
                omega: s.omega,
                members: s.members.clone(),
            })
            .collect();
        Ok(SpecificationSet {
            specs,
            config: self.config.clone(),
            grid,
            alphabet: self.alphabet.clone(),
            feature_names: self.feature_names.clone(),
            output_name: self.output_name.clone(),
        })
    }
}

/// The tightest axis-aligned box (snapped to cell boundaries) containing
/// every given cell.
pub fn tight_bounding_box(grid: &GridSpec, members: &[RegionIndex]) -> Result<Vec<Interval>> {
    if members.is_empty() {
        return Err(Error::Empty("bounding box of zero cells".into()));
    }
    let d = grid.dimension();
    let mut out = Vec::with_capacity(d);
    for dim in 0..d {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for m in members {
            if m.dimension() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: m.dimension(),
                });
            }
            lo = lo.min(grid.cell_lo(dim, m.as_slice()[dim]));
            hi = hi.max(grid.cell_hi(dim, m.as_slice()[dim]));
        }
        out.push(Interval::new(lo, hi));
    }
    Ok(out)
}

/// Support/confidence counts for one reference's dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceMetrics {
    pub id: String,
    pub total: u64,
    pub covered: u64,
    pub satisfying: u64,
    /// `covered / total`; undefined on an empty dataset.
    pub support: Option<f64>,
    /// `satisfying / covered`; undefined when nothing is covered.
    pub confidence: Option<f64>,
}

/// Region-level metrics, available when an interesting-region table is
/// supplied alongside the evaluation dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedMetrics {
    pub gamma_size: usize,
    pub coverage: f64,
    pub per_spec_representation: Vec<f64>,
}

/// The result of evaluating a specification set against a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_reference: Vec<ReferenceMetrics>,
    pub relaxed: Option<RelaxedMetrics>,
    pub total_volume: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn six_label_alphabet() -> OutputAlphabet {
        OutputAlphabet::new(
            ["300", "750", "1200", "1850", "2850", "4300"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn default_config_is_valid_for_six_labels() {
        let cfg = MinerConfig {
            tau_cov: 1.0,
            tau_rep: 0.01,
            tau_max: 5,
            parts: 100,
            ..MinerConfig::default()
        };
        validate_config(&cfg, &six_label_alphabet()).unwrap();
    }

    #[test]
    fn tau_max_must_stay_below_alphabet_size() {
        let cfg = MinerConfig {
            tau_max: 6,
            ..MinerConfig::default()
        };
        let err = validate_config(&cfg, &six_label_alphabet()).unwrap_err();
        match err {
            Error::Config { field, .. } => assert_eq!(field, "tau_max"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn tau_rep_zero_is_rejected() {
        let cfg = MinerConfig {
            tau_rep: 0.0,
            ..MinerConfig::default()
        };
        let err = validate_config(&cfg, &six_label_alphabet()).unwrap_err();
        match err {
            Error::Config { field, .. } => assert_eq!(field, "tau_rep"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn zero_parts_is_rejected() {
        let cfg = MinerConfig {
            parts: 0,
            ..MinerConfig::default()
        };
        let err = validate_config(&cfg, &six_label_alphabet()).unwrap_err();
        match err {
            Error::Config { field, .. } => assert_eq!(field, "parts"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn upper_boundary_folds_into_last_cell() {
        let grid = GridSpec::new(vec![0.0, 0.0], vec![1.0, 1.0], 2).unwrap();
        assert_eq!(grid.cell_of(&[1.0, 1.0]), Some(RegionIndex(vec![1, 1])));
        assert_eq!(grid.cell_of(&[0.0, 0.49]), Some(RegionIndex(vec![0, 0])));
        assert_eq!(grid.cell_of(&[0.5, 0.0]), Some(RegionIndex(vec![1, 0])));
        assert_eq!(grid.cell_of(&[1.0000001, 0.5]), None);
    }

    #[test]
    fn degenerate_dimension_is_named() {
        let err = GridSpec::with_names(
            vec![0.0, 3.0],
            vec![1.0, 3.0],
            4,
            Some(&["a".into(), "b".into()]),
        )
        .unwrap_err();
        match err {
            Error::DegenerateDimension { dim, name, .. } => {
                assert_eq!(dim, 1);
                assert_eq!(name, "b");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn label_set_subset_and_order() {
        let a = LabelSet::from_labels([0, 1]);
        let b = LabelSet::from_labels([0, 1, 3]);
        assert!(a.is_subset(&b));
        assert!(a.is_strict_subset(&b));
        assert!(!b.is_subset(&a));
        assert_eq!(b.iter().collect::<Vec<_>>(), vec![0, 1, 3]);
        assert_eq!(b.len(), 3);
    }

    #[test]
    fn specification_membership_uses_closed_intervals() {
        let spec = Specification {
            precondition: vec![Some(Interval::new(0.0, 0.5)), None],
            postcondition: LabelSet::from_labels([0]),
            omega: LabelSet::from_labels([0]),
            members: vec![],
        };
        assert!(spec.matches(&[0.5, 99.0]));
        assert!(spec.matches(&[0.0, -3.0]));
        assert!(!spec.matches(&[0.50001, 0.0]));
    }
}
