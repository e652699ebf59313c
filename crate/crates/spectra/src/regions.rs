//! Grid partitioning and interesting-behavior region extraction:
//! partition the input space into a uniform grid, tally observations per
//! cell, keep the cells that are important for every reference, and keep
//! those whose combined output set is non-trivial.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use crate::error::{Error, Result};
use crate::model::{
    GridSpec, InterestingRegionTable, MinerConfig, ObservationSet, OutputAlphabet, RegionEntry,
    RegionIndex, RegionTable,
};

/// Build the uniform grid over explicit bounds.
pub fn partition(lower: &[f64], upper: &[f64], parts: u32) -> Result<GridSpec> {
    GridSpec::new(lower.to_vec(), upper.to_vec(), parts)
}

/// Build the grid for an observation set: explicit bounds from the config
/// when given, otherwise the observed min/max over all references.
pub fn partition_for(obs: &ObservationSet, config: &MinerConfig) -> Result<GridSpec> {
    let (lower, upper) = match &config.grid_bounds {
        Some(bounds) => {
            if bounds.len() != obs.dimension {
                return Err(Error::DimensionMismatch {
                    expected: obs.dimension,
                    actual: bounds.len(),
                });
            }
            (
                bounds.iter().map(|iv| iv.lo).collect::<Vec<_>>(),
                bounds.iter().map(|iv| iv.hi).collect::<Vec<_>>(),
            )
        }
        None => (obs.observed_lo.clone(), obs.observed_hi.clone()),
    };
    GridSpec::with_names(lower, upper, config.parts, Some(&obs.feature_names))
}

/// Tally every in-range observation into its grid cell. Out-of-range
/// observations are counted but tallied nowhere; they still belong to the
/// dataset for support/confidence purposes.
pub fn tally_regions(obs: &ObservationSet, grid: &GridSpec) -> RegionTable {
    let q = obs.references.len();
    let mut map: HashMap<RegionIndex, RegionEntry> = HashMap::new();
    let mut out_of_range = 0u64;
    for (j, reference) in obs.references.iter().enumerate() {
        for o in &reference.observations {
            match grid.cell_of(&o.features) {
                Some(idx) => {
                    let entry = map.entry(idx).or_insert_with(|| RegionEntry {
                        counts: vec![0; q],
                        outputs: vec![crate::model::LabelSet::EMPTY; q],
                        combined: crate::model::LabelSet::EMPTY,
                    });
                    entry.counts[j] += 1;
                    entry.outputs[j].insert(o.output);
                    entry.combined.insert(o.output);
                }
                None => out_of_range += 1,
            }
        }
    }
    let entries: BTreeMap<RegionIndex, RegionEntry> = map.into_iter().collect();
    RegionTable {
        entries,
        out_of_range,
    }
}

/// Per-reference importance thresholds: `max(min_count, ceil(theta * |D_j|))`.
pub fn importance_thresholds(obs: &ObservationSet, theta: f64, min_count: u64) -> Vec<u64> {
    obs.references
        .iter()
        .map(|r| {
            let fractional = (theta * r.observations.len() as f64).ceil() as u64;
            fractional.max(min_count)
        })
        .collect()
}

/// Keep the regions holding at least the importance threshold of
/// observations for EVERY reference.
pub fn important(
    table: RegionTable,
    obs: &ObservationSet,
    theta: f64,
    min_count: u64,
) -> RegionTable {
    let thresholds = importance_thresholds(obs, theta, min_count);
    let entries = table
        .entries
        .into_iter()
        .filter(|(_, e)| {
            e.counts
                .iter()
                .zip(&thresholds)
                .all(|(count, threshold)| count >= threshold)
        })
        .collect();
    RegionTable {
        entries,
        out_of_range: table.out_of_range,
    }
}

/// Keep the regions whose combined output set is a strict subset of the
/// alphabet. The result is the interesting-behavior table.
pub fn interesting(table: RegionTable, alphabet: &OutputAlphabet) -> InterestingRegionTable {
    let full = alphabet.full_set();
    let entries = table
        .entries
        .into_iter()
        .filter(|(_, e)| e.combined.is_strict_subset(&full))
        .collect();
    InterestingRegionTable { entries }
}

/// Debug dump of an interesting-region table as CSV: index vector,
/// per-reference counts, combined output set.
pub fn write_regions_csv<W: Write>(
    table: &InterestingRegionTable,
    obs: &ObservationSet,
    mut out: W,
) -> std::io::Result<()> {
    write!(out, "region")?;
    for r in &obs.references {
        write!(out, ",count_{}", r.id)?;
    }
    writeln!(out, ",outputs")?;
    for (idx, entry) in &table.entries {
        let cells: Vec<String> = idx.as_slice().iter().map(|c| c.to_string()).collect();
        write!(out, "{}", cells.join(" "))?;
        for c in &entry.counts {
            write!(out, ",{c}")?;
        }
        writeln!(out, ",{}", entry.combined.names(&obs.alphabet).join(" "))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LabelSet, Observation, ReferenceLog};

    fn two_ref_set(points: &[(&str, Vec<f64>, usize)]) -> ObservationSet {
        let alphabet = OutputAlphabet::new(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let mut refs: Vec<ReferenceLog> = vec![
            ReferenceLog {
                id: "r1".into(),
                observations: vec![],
            },
            ReferenceLog {
                id: "r2".into(),
                observations: vec![],
            },
        ];
        for (i, (r, feats, label)) in points.iter().enumerate() {
            let slot = if *r == "r1" { 0 } else { 1 };
            refs[slot].observations.push(Observation {
                features: feats.clone(),
                output: *label,
                trace: "t".into(),
                step: i as u64,
            });
        }
        ObservationSet::new(
            refs,
            alphabet,
            vec!["x0".into(), "x1".into()],
            "y".into(),
        )
        .unwrap()
    }

    #[test]
    fn tally_counts_and_unions_outputs() {
        let obs = two_ref_set(&[
            ("r1", vec![0.1, 0.1], 0),
            ("r2", vec![0.15, 0.12], 1),
            ("r1", vec![0.9, 0.9], 0),
        ]);
        let grid = GridSpec::new(vec![0.0, 0.0], vec![1.0, 1.0], 2).unwrap();
        let table = tally_regions(&obs, &grid);
        assert_eq!(table.len(), 2);
        let cell = &table.entries[&RegionIndex(vec![0, 0])];
        assert_eq!(cell.counts, vec![1, 1]);
        assert_eq!(cell.combined, LabelSet::from_labels([0, 1]));
        assert_eq!(table.out_of_range, 0);
    }

    #[test]
    fn empty_observations_yield_empty_table() {
        let alphabet = OutputAlphabet::new(vec!["a".into(), "b".into()]).unwrap();
        let obs = ObservationSet::new(
            vec![ReferenceLog {
                id: "r1".into(),
                observations: vec![],
            }],
            alphabet,
            vec!["x0".into()],
            "y".into(),
        )
        .unwrap();
        let grid = GridSpec::new(vec![0.0], vec![1.0], 4).unwrap();
        assert!(tally_regions(&obs, &grid).is_empty());
    }

    #[test]
    fn important_requires_every_reference() {
        let obs = two_ref_set(&[
            // cell (0,0): two observations of each reference
            ("r1", vec![0.1, 0.1], 0),
            ("r1", vec![0.2, 0.2], 0),
            ("r2", vec![0.1, 0.2], 0),
            ("r2", vec![0.2, 0.1], 0),
            // cell (1,1): five of r1, none of r2
            ("r1", vec![0.9, 0.9], 1),
            ("r1", vec![0.8, 0.8], 1),
            ("r1", vec![0.7, 0.7], 1),
            ("r1", vec![0.95, 0.95], 1),
            ("r1", vec![0.85, 0.85], 1),
        ]);
        let grid = GridSpec::new(vec![0.0, 0.0], vec![1.0, 1.0], 2).unwrap();
        let table = tally_regions(&obs, &grid);
        let kept = important(table, &obs, 0.0, 2);
        assert_eq!(kept.len(), 1);
        assert!(kept.entries.contains_key(&RegionIndex(vec![0, 0])));
    }

    #[test]
    fn fractional_importance_threshold() {
        // theta = 0.5 with |D_j| = 10 demands 5 per reference.
        let mut points = vec![];
        for i in 0..5 {
            points.push(("r1", vec![0.1 + i as f64 * 0.01, 0.1], 0));
        }
        for i in 0..5 {
            points.push(("r1", vec![0.9, 0.1 + i as f64 * 0.01], 0));
        }
        for i in 0..5 {
            points.push(("r2", vec![0.2 + i as f64 * 0.01, 0.2], 0));
        }
        for i in 0..5 {
            points.push(("r2", vec![0.9, 0.2 + i as f64 * 0.01], 0));
        }
        let obs = two_ref_set(&points);
        let grid = GridSpec::new(vec![0.0, 0.0], vec![1.0, 1.0], 2).unwrap();
        let table = tally_regions(&obs, &grid);
        // cell (0,0) has 5 of each; cell (1,0) has 5 of each as well.
        let kept = important(table.clone(), &obs, 0.5, 1);
        assert_eq!(kept.len(), 2);
        // counts (4, 5) would be dropped: remove one r1 point from (0,0).
        let mut fewer = points.clone();
        fewer.remove(0);
        let obs2 = two_ref_set(&fewer);
        let table2 = tally_regions(&obs2, &grid);
        let kept2 = important(table2, &obs2, 0.5, 1);
        assert_eq!(kept2.len(), 1);
        assert!(kept2.entries.contains_key(&RegionIndex(vec![1, 0])));
    }

    #[test]
    fn interesting_drops_full_alphabet_regions() {
        let obs = two_ref_set(&[
            // cell (0,0): outputs {a, b} -> strict subset, kept
            ("r1", vec![0.1, 0.1], 0),
            ("r2", vec![0.2, 0.2], 1),
            // cell (1,1): outputs {a, b, c} -> full alphabet, dropped
            ("r1", vec![0.9, 0.9], 0),
            ("r1", vec![0.8, 0.8], 1),
            ("r2", vec![0.7, 0.7], 2),
        ]);
        let grid = GridSpec::new(vec![0.0, 0.0], vec![1.0, 1.0], 2).unwrap();
        let table = tally_regions(&obs, &grid);
        let kept = interesting(table, &obs.alphabet);
        assert_eq!(kept.len(), 1);
        assert!(kept.entries.contains_key(&RegionIndex(vec![0, 0])));
    }

    #[test]
    fn single_label_region_is_interesting() {
        let obs = two_ref_set(&[("r1", vec![0.1, 0.1], 0), ("r2", vec![0.2, 0.2], 0)]);
        let grid = GridSpec::new(vec![0.0, 0.0], vec![1.0, 1.0], 2).unwrap();
        let kept = interesting(tally_regions(&obs, &grid), &obs.alphabet);
        assert_eq!(kept.len(), 1);
    }

    #[test]
    fn out_of_range_observations_are_counted_not_tallied() {
        let obs = two_ref_set(&[("r1", vec![0.5, 0.5], 0), ("r2", vec![0.5, 0.5], 0)]);
        let grid = GridSpec::new(vec![0.0, 0.0], vec![0.25, 0.25], 2).unwrap();
        let table = tally_regions(&obs, &grid);
        assert!(table.is_empty());
        assert_eq!(table.out_of_range, 2);
    }
}
