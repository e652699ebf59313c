//! Canonical JSON interchange for specification sets and evaluation
//! reports. These files are the contract between `mine`, `eval`, and
//! `export-vnnlib`: keys sorted, floats at 17 significant digits, arrays
//! in deterministic order. Loading validates every structural invariant.

use std::path::Path;

use serde_json::{json, Map, Value};

use crate::canon;
use crate::error::{Error, Result};
use crate::model::{
    EvalReport, GridSpec, Interval, LabelSet, MinerConfig, OutputAlphabet, ReferenceMetrics,
    RegionIndex, RelaxedMetrics, Specification, SpecificationSet,
};

pub fn spec_set_to_value(set: &SpecificationSet) -> Value {
    let specs: Vec<Value> = set
        .specs
        .iter()
        .map(|s| {
            let precondition: Vec<Value> = s
                .precondition
                .iter()
                .map(|iv| match iv {
                    Some(iv) => json!({ "lo": iv.lo, "hi": iv.hi }),
                    None => Value::Null,
                })
                .collect();
            let members: Vec<Value> = s
                .members
                .iter()
                .map(|m| Value::Array(m.as_slice().iter().map(|&c| json!(c)).collect()))
                .collect();
            json!({
                "precondition": precondition,
                "postcondition": s.postcondition.names(&set.alphabet),
                "omega": s.omega.names(&set.alphabet),
                "members": members,
            })
        })
        .collect();
    json!({
        "alphabet": set.alphabet.labels(),
        "config": serde_json::to_value(&set.config).expect("config serializes"),
        "feature_names": set.feature_names,
        "grid": serde_json::to_value(&set.grid).expect("grid serializes"),
        "output_name": set.output_name,
        "specs": specs,
    })
}

pub fn spec_set_to_canonical_json(set: &SpecificationSet) -> String {
    canon::to_canonical_string(&spec_set_to_value(set))
}

fn field<'v>(obj: &'v Map<String, Value>, key: &str) -> Result<&'v Value> {
    obj.get(key)
        .ok_or_else(|| Error::Schema(format!("specification set json: missing field {key:?}")))
}

fn as_object(v: &Value, what: &str) -> Result<Map<String, Value>> {
    v.as_object()
        .cloned()
        .ok_or_else(|| Error::Schema(format!("{what}: expected an object")))
}

fn string_list(v: &Value, what: &str) -> Result<Vec<String>> {
    v.as_array()
        .ok_or_else(|| Error::Schema(format!("{what}: expected an array")))?
        .iter()
        .map(|s| {
            s.as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::Schema(format!("{what}: expected strings")))
        })
        .collect()
}

fn label_set(v: &Value, alphabet: &OutputAlphabet, what: &str) -> Result<LabelSet> {
    let names = string_list(v, what)?;
    let mut set = LabelSet::EMPTY;
    for name in names {
        let label = alphabet
            .index_of(&name)
            .ok_or_else(|| Error::Schema(format!("{what}: label {name:?} not in alphabet")))?;
        set.insert(label);
    }
    Ok(set)
}

pub fn spec_set_from_value(v: &Value) -> Result<SpecificationSet> {
    let obj = as_object(v, "specification set")?;
    let alphabet = OutputAlphabet::new(string_list(field(&obj, "alphabet")?, "alphabet")?)?;
    let config: MinerConfig = serde_json::from_value(field(&obj, "config")?.clone())
        .map_err(|e| Error::Schema(format!("config: {e}")))?;
    let feature_names = string_list(field(&obj, "feature_names")?, "feature_names")?;
    let grid: GridSpec = serde_json::from_value(field(&obj, "grid")?.clone())
        .map_err(|e| Error::Schema(format!("grid: {e}")))?;
    let output_name = field(&obj, "output_name")?
        .as_str()
        .ok_or_else(|| Error::Schema("output_name: expected a string".into()))?
        .to_string();

    let mut specs = Vec::new();
    for (i, sv) in field(&obj, "specs")?
        .as_array()
        .ok_or_else(|| Error::Schema("specs: expected an array".into()))?
        .iter()
        .enumerate()
    {
        let sobj = as_object(sv, &format!("spec {}", i + 1))?;
        let precondition = field(&sobj, "precondition")?
            .as_array()
            .ok_or_else(|| Error::Schema("precondition: expected an array".into()))?
            .iter()
            .map(|iv| -> Result<Option<Interval>> {
                if iv.is_null() {
                    return Ok(None);
                }
                let interval: Interval = serde_json::from_value(iv.clone())
                    .map_err(|e| Error::Schema(format!("precondition interval: {e}")))?;
                Ok(Some(interval))
            })
            .collect::<Result<Vec<_>>>()?;
        let postcondition = label_set(field(&sobj, "postcondition")?, &alphabet, "postcondition")?;
        let omega = label_set(field(&sobj, "omega")?, &alphabet, "omega")?;
        let members = field(&sobj, "members")?
            .as_array()
            .ok_or_else(|| Error::Schema("members: expected an array".into()))?
            .iter()
            .map(|m| -> Result<RegionIndex> {
                let cells = m
                    .as_array()
                    .ok_or_else(|| Error::Schema("member: expected an index array".into()))?
                    .iter()
                    .map(|c| {
                        c.as_u64()
                            .map(|c| c as u32)
                            .ok_or_else(|| Error::Schema("member: expected integers".into()))
                    })
                    .collect::<Result<Vec<u32>>>()?;
                Ok(RegionIndex(cells))
            })
            .collect::<Result<Vec<_>>>()?;
        specs.push(Specification {
            precondition,
            postcondition,
            omega,
            members,
        });
    }

    let set = SpecificationSet {
        specs,
        config,
        grid,
        alphabet,
        feature_names,
        output_name,
    };
    set.validate()?;
    Ok(set)
}

pub fn load_spec_set(path: &Path) -> Result<SpecificationSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    spec_set_from_value(&value)
}

pub fn save_spec_set(set: &SpecificationSet, path: &Path) -> Result<()> {
    std::fs::write(path, spec_set_to_canonical_json(set)).map_err(|e| Error::io(path, e))
}

pub fn eval_report_to_value(report: &EvalReport) -> Value {
    let per_reference: Vec<Value> = report
        .per_reference
        .iter()
        .map(|r| {
            json!({
                "id": r.id,
                "total": r.total,
                "covered": r.covered,
                "satisfying": r.satisfying,
                "support": r.support,
                "confidence": r.confidence,
            })
        })
        .collect();
    let relaxed = match &report.relaxed {
        Some(r) => json!({
            "gamma_size": r.gamma_size,
            "coverage": r.coverage,
            "per_spec_representation": r.per_spec_representation,
        }),
        None => Value::Null,
    };
    json!({
        "per_reference": per_reference,
        "relaxed": relaxed,
        "total_volume": report.total_volume,
    })
}

pub fn eval_report_from_value(v: &Value) -> Result<EvalReport> {
    let obj = as_object(v, "eval report")?;
    let per_reference = field(&obj, "per_reference")?
        .as_array()
        .ok_or_else(|| Error::Schema("per_reference: expected an array".into()))?
        .iter()
        .map(|rv| -> Result<ReferenceMetrics> {
            let robj = as_object(rv, "reference metrics")?;
            let num = |k: &str| -> Result<u64> {
                field(&robj, k)?
                    .as_u64()
                    .ok_or_else(|| Error::Schema(format!("{k}: expected an integer")))
            };
            let opt = |k: &str| -> Result<Option<f64>> {
                let v = field(&robj, k)?;
                if v.is_null() {
                    Ok(None)
                } else {
                    v.as_f64()
                        .map(Some)
                        .ok_or_else(|| Error::Schema(format!("{k}: expected a number")))
                }
            };
            Ok(ReferenceMetrics {
                id: field(&robj, "id")?
                    .as_str()
                    .ok_or_else(|| Error::Schema("id: expected a string".into()))?
                    .to_string(),
                total: num("total")?,
                covered: num("covered")?,
                satisfying: num("satisfying")?,
                support: opt("support")?,
                confidence: opt("confidence")?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let relaxed_value = field(&obj, "relaxed")?;
    let relaxed = if relaxed_value.is_null() {
        None
    } else {
        let robj = as_object(relaxed_value, "relaxed metrics")?;
        Some(RelaxedMetrics {
            gamma_size: field(&robj, "gamma_size")?
                .as_u64()
                .ok_or_else(|| Error::Schema("gamma_size: expected an integer".into()))?
                as usize,
            coverage: field(&robj, "coverage")?
                .as_f64()
                .ok_or_else(|| Error::Schema("coverage: expected a number".into()))?,
            per_spec_representation: field(&robj, "per_spec_representation")?
                .as_array()
                .ok_or_else(|| Error::Schema("per_spec_representation: expected an array".into()))?
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| Error::Schema("representation: expected numbers".into()))
                })
                .collect::<Result<Vec<_>>>()?,
        })
    };
    Ok(EvalReport {
        per_reference,
        relaxed,
        total_volume: field(&obj, "total_volume")?
            .as_f64()
            .ok_or_else(|| Error::Schema("total_volume: expected a number".into()))?,
    })
}

pub fn eval_report_to_canonical_json(report: &EvalReport) -> String {
    canon::to_canonical_string(&eval_report_to_value(report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_set() -> SpecificationSet {
        let alphabet = OutputAlphabet::new(vec!["300".into(), "750".into(), "1200".into()]).unwrap();
        let grid = GridSpec::new(vec![0.0, 0.0], vec![1.0, 1.0], 10).unwrap();
        SpecificationSet {
            specs: vec![Specification {
                precondition: vec![Some(Interval::new(0.2, 0.5)), None],
                postcondition: LabelSet::from_labels([0, 1]),
                omega: LabelSet::from_labels([0, 1]),
                members: vec![RegionIndex(vec![2, 3]), RegionIndex(vec![4, 9])],
            }],
            config: MinerConfig {
                tau_max: 2,
                parts: 10,
                ..MinerConfig::default()
            },
            grid,
            alphabet,
            feature_names: vec!["a".into(), "b".into()],
            output_name: "y".into(),
        }
    }

    #[test]
    fn spec_set_round_trips_structurally() {
        // The sample's precondition is not the tight box of its members on
        // dimension 1 (free), so drop members to keep it a legal set.
        let mut set = sample_set();
        set.specs[0].members.clear();
        let value = spec_set_to_value(&set);
        let back = spec_set_from_value(&value).unwrap();
        assert_eq!(set, back);
    }

    #[test]
    fn canonical_json_is_stable() {
        let mut set = sample_set();
        set.specs[0].members.clear();
        let a = spec_set_to_canonical_json(&set);
        let b = spec_set_to_canonical_json(&spec_set_from_value(&spec_set_to_value(&set)).unwrap());
        assert_eq!(a, b);
        assert!(a.contains("\"postcondition\""));
        assert!(a.contains("0.20000000000000001"));
    }

    #[test]
    fn loading_runs_invariant_checks() {
        let mut set = sample_set();
        set.specs[0].members.clear();
        let mut value = spec_set_to_value(&set);
        // Corrupt an endpoint so it falls off the grid boundaries.
        value["specs"][0]["precondition"][0]["lo"] = serde_json::json!(0.2034);
        let err = spec_set_from_value(&value).unwrap_err();
        assert!(matches!(err, Error::Invariant(_)));
    }

    #[test]
    fn eval_report_round_trips() {
        let report = EvalReport {
            per_reference: vec![ReferenceMetrics {
                id: "bb".into(),
                total: 10,
                covered: 4,
                satisfying: 4,
                support: Some(0.4),
                confidence: Some(1.0),
            }],
            relaxed: Some(RelaxedMetrics {
                gamma_size: 7,
                coverage: 1.0,
                per_spec_representation: vec![0.5, 0.25],
            }),
            total_volume: 0.125,
        };
        let back = eval_report_from_value(&eval_report_to_value(&report)).unwrap();
        assert_eq!(report, back);
        let undefined = EvalReport {
            per_reference: vec![ReferenceMetrics {
                id: "mpc".into(),
                total: 0,
                covered: 0,
                satisfying: 0,
                support: None,
                confidence: None,
            }],
            relaxed: None,
            total_volume: 0.0,
        };
        let back = eval_report_from_value(&eval_report_to_value(&undefined)).unwrap();
        assert_eq!(undefined, back);
    }
}
