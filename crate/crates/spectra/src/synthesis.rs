//! The mining driver: enumerate candidate output subsets, filter the
//! interesting-region table to compatible regions, cluster them, convert
//! clusters to specifications, and stop once the relaxed coverage target
//! is met.

use itertools::Itertools;

use crate::cluster::{dbscan, min_samples, packing_radius, ClusterResult};
use crate::error::{Error, Result};
use crate::metrics;
use crate::model::{
    validate_config, GridSpec, InterestingRegionTable, LabelSet, MinerConfig, ObservationSet,
    RegionIndex, Specification, SpecificationSet,
};
use crate::regions::{important, interesting, partition_for, tally_regions};

/// All label subsets of size `1..=tau_max`, outer loop on size ascending,
/// inner order lexicographic on sorted label indices.
pub fn enumerate_omegas(k: usize, tau_max: usize) -> impl Iterator<Item = LabelSet> {
    (1..=tau_max).flat_map(move |size| (0..k).combinations(size).map(LabelSet::from_labels))
}

/// Regions whose combined output set is a subset of `omega`, in canonical
/// order.
pub fn filter_omega(table: &InterestingRegionTable, omega: LabelSet) -> Vec<&RegionIndex> {
    table
        .entries
        .iter()
        .filter(|(_, e)| e.combined.is_subset(&omega))
        .map(|(idx, _)| idx)
        .collect()
}

/// Turn each cluster into a specification: the precondition is the
/// tightest cell-aligned box around the member cells (which may cover
/// interior cells that are not members — the documented
/// overapproximation), and the postcondition is the union of the members'
/// output sets. Noise points yield nothing.
pub fn cluster_to_specs(
    result: &ClusterResult,
    table: &InterestingRegionTable,
    grid: &GridSpec,
    omega: LabelSet,
) -> Vec<Specification> {
    let mut specs = Vec::with_capacity(result.clusters);
    for cluster in 1..=result.clusters {
        let members = result.members(cluster);
        debug_assert!(!members.is_empty());
        let bounds = crate::model::tight_bounding_box(grid, &members)
            .expect("cluster members are non-empty");
        let mut postcondition = LabelSet::EMPTY;
        for m in &members {
            postcondition = postcondition.union(table.entries[m].combined);
        }
        debug_assert!(postcondition.is_subset(&omega));
        specs.push(Specification {
            precondition: bounds.into_iter().map(Some).collect(),
            postcondition,
            omega,
            members,
        });
    }
    specs
}

/// Diagnostics from one mining run.
#[derive(Debug, Clone, PartialEq)]
pub struct MineReport {
    /// Number of interesting regions (|Gamma_X|).
    pub gamma_size: usize,
    /// Observations outside the grid, excluded from mining.
    pub out_of_range: u64,
    pub min_samples: usize,
    pub radius: f64,
    pub omegas_visited: usize,
    /// The output subset after which coverage crossed the threshold, when
    /// mining exited early.
    pub early_exit: Option<LabelSet>,
    /// Final relaxed coverage; undefined when there were no interesting
    /// regions.
    pub coverage: Option<f64>,
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MineOutcome {
    pub set: SpecificationSet,
    pub report: MineReport,
}

/// Run the full mining pipeline on an observation set. Deterministic for
/// fixed inputs and configuration; an empty interesting-region table
/// yields an empty specification set with a warning rather than an error.
pub fn mine(obs: &ObservationSet, config: &MinerConfig) -> Result<MineOutcome> {
    validate_config(config, &obs.alphabet)?;
    if obs.total_observations() == 0 {
        return Err(Error::Empty("observation set has no observations".into()));
    }

    let grid = partition_for(obs, config)?;
    let raw = tally_regions(obs, &grid);
    let out_of_range = raw.out_of_range;
    let kept = important(
        raw,
        obs,
        config.importance_fraction,
        config.importance_min_count,
    );
    let table = interesting(kept, &obs.alphabet);
    let gamma_size = table.len();

    let mut set = SpecificationSet {
        specs: Vec::new(),
        config: config.clone(),
        grid,
        alphabet: obs.alphabet.clone(),
        feature_names: obs.feature_names.clone(),
        output_name: obs.output_name.clone(),
    };

    if gamma_size == 0 {
        log::warn!("no interesting regions found; returning an empty specification set");
        return Ok(MineOutcome {
            set,
            report: MineReport {
                gamma_size: 0,
                out_of_range,
                min_samples: 0,
                radius: 0.0,
                omegas_visited: 0,
                early_exit: None,
                coverage: None,
                volume: 0.0,
            },
        });
    }

    let min_s = min_samples(config.tau_rep, gamma_size);
    let radius = config
        .cluster_radius_override
        .unwrap_or_else(|| packing_radius(min_s, obs.dimension, config.cluster_metric));

    let keys: Vec<&RegionIndex> = table.entries.keys().collect();
    let mut covered = vec![false; gamma_size];
    let mut covered_count = 0usize;
    let mut early_exit = None;
    let mut omegas_visited = 0usize;

    for omega in enumerate_omegas(obs.alphabet.len(), config.tau_max) {
        omegas_visited += 1;
        let filtered = filter_omega(&table, omega);
        if !filtered.is_empty() {
            let points: Vec<RegionIndex> = filtered.into_iter().cloned().collect();
            let clusters = dbscan(&points, radius, min_s, config.cluster_metric);
            for spec in cluster_to_specs(&clusters, &table, &set.grid, omega) {
                // Exact duplicates are vacuous under conjunction.
                let duplicate = set.specs.iter().any(|s| {
                    s.precondition == spec.precondition && s.postcondition == spec.postcondition
                });
                if duplicate {
                    continue;
                }
                for (i, key) in keys.iter().enumerate() {
                    if !covered[i] && spec.contains_cell(&set.grid, key) {
                        covered[i] = true;
                        covered_count += 1;
                    }
                }
                set.specs.push(spec);
            }
        }
        if covered_count as f64 / gamma_size as f64 >= config.tau_cov {
            early_exit = Some(omega);
            break;
        }
    }

    let volume = metrics::volume(&set);
    Ok(MineOutcome {
        set,
        report: MineReport {
            gamma_size,
            out_of_range,
            min_samples: min_s,
            radius,
            omegas_visited,
            early_exit,
            coverage: Some(covered_count as f64 / gamma_size as f64),
            volume,
        },
    })
}

/// Recompute the interesting-region table exactly as `mine` does, for
/// evaluation against a dataset.
pub fn interesting_table(
    obs: &ObservationSet,
    config: &MinerConfig,
    grid: &GridSpec,
) -> InterestingRegionTable {
    let raw = tally_regions(obs, grid);
    let kept = important(
        raw,
        obs,
        config.importance_fraction,
        config.importance_min_count,
    );
    interesting(kept, &obs.alphabet)
}
