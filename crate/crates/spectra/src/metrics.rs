//! Specification-quality metrics: summed precondition volume, relaxed
//! region-level coverage and representation, and observation-level
//! support and confidence.

use crate::model::{
    EvalReport, InterestingRegionTable, Observation, ObservationSet, ReferenceMetrics,
    RelaxedMetrics, Specification, SpecificationSet,
};

/// Sum over specifications of the product of interval widths; free
/// dimensions contribute the full grid range. Overlapping specifications
/// are not deduplicated: the definition is a plain sum.
pub fn volume(set: &SpecificationSet) -> f64 {
    set.specs
        .iter()
        .map(|s| spec_volume(s, set))
        .sum()
}

fn spec_volume(spec: &Specification, set: &SpecificationSet) -> f64 {
    spec.precondition
        .iter()
        .enumerate()
        .map(|(d, iv)| match iv {
            Some(iv) => iv.width(),
            None => set.grid.range(d).width(),
        })
        .product()
}

/// Fraction of interesting regions whose whole cell box lies inside the
/// specification's precondition. Undefined (None) on an empty table.
pub fn relaxed_representation(
    spec: &Specification,
    set: &SpecificationSet,
    table: &InterestingRegionTable,
) -> Option<f64> {
    if table.is_empty() {
        return None;
    }
    let captured = table
        .entries
        .keys()
        .filter(|idx| spec.contains_cell(&set.grid, idx))
        .count();
    Some(captured as f64 / table.len() as f64)
}

/// Fraction of interesting regions captured by at least one
/// specification (union semantics). Undefined (None) on an empty table.
pub fn relaxed_coverage(specs: &[Specification], set: &SpecificationSet, table: &InterestingRegionTable) -> Option<f64> {
    if table.is_empty() {
        return None;
    }
    let captured = table
        .entries
        .keys()
        .filter(|idx| specs.iter().any(|s| s.contains_cell(&set.grid, idx)))
        .count();
    Some(captured as f64 / table.len() as f64)
}

/// Coverage/satisfaction counts over one reference's dataset.
///
/// An observation is covered when some precondition accepts it, and
/// satisfying when additionally every specification whose precondition
/// accepts it allows its label (one violated specification disqualifies
/// the observation even if another is satisfied).
pub fn coverage_counts(set: &SpecificationSet, dataset: &[Observation]) -> (u64, u64, u64) {
    let mut covered = 0u64;
    let mut satisfying = 0u64;
    for obs in dataset {
        let mut matched = false;
        let mut ok = true;
        for spec in &set.specs {
            if spec.matches(&obs.features) {
                matched = true;
                if !spec.postcondition.contains(obs.output) {
                    ok = false;
                }
            }
        }
        if matched {
            covered += 1;
            if ok {
                satisfying += 1;
            }
        }
    }
    (dataset.len() as u64, covered, satisfying)
}

/// Fraction of the dataset accepted by some precondition. Undefined on
/// an empty dataset.
pub fn support(set: &SpecificationSet, dataset: &[Observation]) -> Option<f64> {
    let (total, covered, _) = coverage_counts(set, dataset);
    if total == 0 {
        None
    } else {
        Some(covered as f64 / total as f64)
    }
}

/// Fraction of covered observations that satisfy every applicable
/// postcondition. Undefined when nothing is covered.
pub fn confidence(set: &SpecificationSet, dataset: &[Observation]) -> Option<f64> {
    let (_, covered, satisfying) = coverage_counts(set, dataset);
    if covered == 0 {
        None
    } else {
        Some(satisfying as f64 / covered as f64)
    }
}

/// Per-reference support and confidence, plus total volume, plus
/// region-level metrics when an interesting-region table is supplied.
pub fn evaluate(
    set: &SpecificationSet,
    obs: &ObservationSet,
    table: Option<&InterestingRegionTable>,
) -> EvalReport {
    let per_reference = obs
        .references
        .iter()
        .map(|r| {
            let (total, covered, satisfying) = coverage_counts(set, &r.observations);
            ReferenceMetrics {
                id: r.id.clone(),
                total,
                covered,
                satisfying,
                support: (total > 0).then(|| covered as f64 / total as f64),
                confidence: (covered > 0).then(|| satisfying as f64 / covered as f64),
            }
        })
        .collect();
    let relaxed = table.and_then(|t| {
        let coverage = relaxed_coverage(&set.specs, set, t)?;
        let per_spec_representation = set
            .specs
            .iter()
            .map(|s| relaxed_representation(s, set, t).expect("non-empty table"))
            .collect();
        Some(RelaxedMetrics {
            gamma_size: t.len(),
            coverage,
            per_spec_representation,
        })
    });
    EvalReport {
        per_reference,
        relaxed,
        total_volume: volume(set),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        GridSpec, Interval, LabelSet, MinerConfig, OutputAlphabet, RegionEntry, RegionIndex,
    };
    use std::collections::BTreeMap;

    fn make_set(specs: Vec<Specification>) -> SpecificationSet {
        SpecificationSet {
            specs,
            config: MinerConfig {
                tau_max: 2,
                ..MinerConfig::default()
            },
            grid: GridSpec::new(vec![0.0, 0.0], vec![1.0, 1.0], 2).unwrap(),
            alphabet: OutputAlphabet::new(vec!["a".into(), "b".into(), "c".into()]).unwrap(),
            feature_names: vec!["x0".into(), "x1".into()],
            output_name: "y".into(),
        }
    }

    fn box_spec(lo: (f64, f64), hi: (f64, f64), labels: &[usize]) -> Specification {
        Specification {
            precondition: vec![
                Some(Interval::new(lo.0, hi.0)),
                Some(Interval::new(lo.1, hi.1)),
            ],
            postcondition: LabelSet::from_labels(labels.iter().copied()),
            omega: LabelSet::from_labels(labels.iter().copied()),
            members: vec![],
        }
    }

    fn obs(x: f64, y: f64, label: usize) -> Observation {
        Observation {
            features: vec![x, y],
            output: label,
            trace: "t".into(),
            step: 0,
        }
    }

    #[test]
    fn volume_is_a_plain_sum() {
        let s = box_spec((0.0, 0.0), (0.5, 0.5), &[0]);
        let one = make_set(vec![s.clone()]);
        assert!((volume(&one) - 0.25).abs() < 1e-15);
        let mut two = make_set(vec![s.clone(), s]);
        // duplicates are invalid in a mined set but Vol is still a sum
        two.specs[1].postcondition = LabelSet::from_labels([1]);
        assert!((volume(&two) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn free_dimensions_contribute_grid_range() {
        let mut s = box_spec((0.0, 0.0), (0.5, 0.5), &[0]);
        s.precondition[1] = None;
        let set = make_set(vec![s]);
        assert!((volume(&set) - 0.5).abs() < 1e-15);
    }

    fn table_of(cells: &[[u32; 2]]) -> InterestingRegionTable {
        let mut entries = BTreeMap::new();
        for c in cells {
            entries.insert(
                RegionIndex(c.to_vec()),
                RegionEntry {
                    counts: vec![1],
                    outputs: vec![LabelSet::from_labels([0])],
                    combined: LabelSet::from_labels([0]),
                },
            );
        }
        InterestingRegionTable { entries }
    }

    #[test]
    fn relaxed_metrics_count_contained_cells() {
        let table = table_of(&[[0, 0], [0, 1], [1, 0], [1, 1]]);
        let all = box_spec((0.0, 0.0), (1.0, 1.0), &[0]);
        let one_cell = box_spec((0.0, 0.0), (0.5, 0.5), &[0]);
        let set = make_set(vec![all.clone(), one_cell.clone()]);
        assert_eq!(relaxed_representation(&all, &set, &table), Some(1.0));
        assert_eq!(relaxed_representation(&one_cell, &set, &table), Some(0.25));
        assert_eq!(relaxed_coverage(&set.specs, &set, &table), Some(1.0));
    }

    #[test]
    fn relaxed_coverage_uses_union_semantics() {
        let table = table_of(&[[0, 0], [0, 1], [1, 0], [1, 1]]);
        let half = box_spec((0.0, 0.0), (0.5, 1.0), &[0]);
        let set = make_set(vec![half.clone(), half]);
        assert_eq!(relaxed_coverage(&set.specs, &set, &table), Some(0.5));
    }

    #[test]
    fn representation_of_three_cells_in_250() {
        // 250 one-dimensional regions; a box capturing exactly cells
        // 10..=12 represents 3/250 = 0.012 of them.
        let grid = GridSpec::new(vec![0.0], vec![1.0], 250).unwrap();
        let mut entries = BTreeMap::new();
        for c in 0..250u32 {
            entries.insert(
                RegionIndex(vec![c]),
                RegionEntry {
                    counts: vec![1],
                    outputs: vec![LabelSet::from_labels([0])],
                    combined: LabelSet::from_labels([0]),
                },
            );
        }
        let table = InterestingRegionTable { entries };
        let spec = Specification {
            precondition: vec![Some(Interval::new(grid.cell_lo(0, 10), grid.cell_hi(0, 12)))],
            postcondition: LabelSet::from_labels([0]),
            omega: LabelSet::from_labels([0]),
            members: vec![],
        };
        let set = SpecificationSet {
            specs: vec![spec.clone()],
            config: MinerConfig {
                tau_max: 2,
                parts: 250,
                ..MinerConfig::default()
            },
            grid,
            alphabet: OutputAlphabet::new(vec!["a".into(), "b".into(), "c".into()]).unwrap(),
            feature_names: vec!["x".into()],
            output_name: "y".into(),
        };
        assert_eq!(relaxed_representation(&spec, &set, &table), Some(0.012));
    }

    #[test]
    fn disjoint_specs_cover_seven_of_ten() {
        let grid = GridSpec::new(vec![0.0], vec![1.0], 10).unwrap();
        let mut entries = BTreeMap::new();
        for c in 0..10u32 {
            entries.insert(
                RegionIndex(vec![c]),
                RegionEntry {
                    counts: vec![1],
                    outputs: vec![LabelSet::from_labels([0])],
                    combined: LabelSet::from_labels([0]),
                },
            );
        }
        let table = InterestingRegionTable { entries };
        let boxed = |lo: u32, hi: u32| Specification {
            precondition: vec![Some(Interval::new(grid.cell_lo(0, lo), grid.cell_hi(0, hi)))],
            postcondition: LabelSet::from_labels([0]),
            omega: LabelSet::from_labels([0]),
            members: vec![],
        };
        let set = SpecificationSet {
            specs: vec![boxed(0, 2), boxed(6, 9)],
            config: MinerConfig {
                tau_max: 2,
                parts: 10,
                ..MinerConfig::default()
            },
            grid,
            alphabet: OutputAlphabet::new(vec!["a".into(), "b".into(), "c".into()]).unwrap(),
            feature_names: vec!["x".into()],
            output_name: "y".into(),
        };
        assert_eq!(relaxed_coverage(&set.specs, &set, &table), Some(0.7));
    }

    #[test]
    fn empty_table_flags_undefined() {
        let set = make_set(vec![box_spec((0.0, 0.0), (1.0, 1.0), &[0])]);
        let empty = InterestingRegionTable {
            entries: BTreeMap::new(),
        };
        assert_eq!(relaxed_coverage(&set.specs, &set, &empty), None);
        assert_eq!(
            relaxed_representation(&set.specs[0], &set, &empty),
            None
        );
    }

    #[test]
    fn support_fraction() {
        let set = make_set(vec![box_spec((0.0, 0.0), (0.5, 0.5), &[0])]);
        let data: Vec<Observation> = (0..10)
            .map(|i| {
                let inside = i < 4;
                let x = if inside { 0.25 } else { 0.75 };
                obs(x, x, 0)
            })
            .collect();
        assert_eq!(support(&set, &data), Some(0.4));
    }

    #[test]
    fn full_space_precondition_has_support_one() {
        let mut s = box_spec((0.0, 0.0), (0.0, 0.0), &[0]);
        s.precondition = vec![None, None];
        let set = make_set(vec![s]);
        let data = vec![obs(3.0, -7.0, 1), obs(0.0, 0.0, 0)];
        assert_eq!(support(&set, &data), Some(1.0));
    }

    #[test]
    fn confidence_uses_the_universal_quantifier() {
        // One observation matched by two specs; its label is allowed by
        // one and rejected by the other -> counts as violating.
        let allow = box_spec((0.0, 0.0), (1.0, 1.0), &[0, 1]);
        let reject = box_spec((0.0, 0.0), (0.5, 0.5), &[1]);
        let set = make_set(vec![allow, reject]);
        let data = vec![obs(0.25, 0.25, 0)];
        assert_eq!(confidence(&set, &data), Some(0.0));
        // An observation outside the rejecting box is fine.
        let data2 = vec![obs(0.75, 0.75, 0)];
        assert_eq!(confidence(&set, &data2), Some(1.0));
    }

    #[test]
    fn confidence_undefined_when_nothing_covered() {
        let set = make_set(vec![box_spec((0.0, 0.0), (0.1, 0.1), &[0])]);
        let data = vec![obs(0.9, 0.9, 0)];
        assert_eq!(confidence(&set, &data), None);
        assert_eq!(support(&set, &data), Some(0.0));
    }
}
