//! Exporters: VNN-Lib property files (counterexample convention), the
//! export manifest, and the human-readable specification listing.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::canon::{display_f64, format_f64, to_canonical_string};
use crate::error::{Error, Result};
use crate::model::{Interval, SpecificationSet};

/// How specification feature names map onto a model's flat input vector,
/// and what ranges to assert for inputs the specification does not
/// constrain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelInterfaceMap {
    pub input_count: usize,
    pub output_count: usize,
    /// Feature name -> model input indices (several for stacked or
    /// repeated features).
    pub feature_to_input: BTreeMap<String, Vec<usize>>,
    /// Closed range asserted for every input not claimed by a feature.
    pub fill_ranges: BTreeMap<usize, Interval>,
    /// Zero-band half-width for regression-sign queries.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    1e-4
}

impl ModelInterfaceMap {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn validate(&self, feature_names: &[String]) -> Result<()> {
        let mut claimed = BTreeSet::new();
        for (feature, indices) in &self.feature_to_input {
            if indices.is_empty() {
                return Err(Error::Export(format!(
                    "feature {feature:?} maps to no input indices"
                )));
            }
            for &i in indices {
                if i >= self.input_count {
                    return Err(Error::Export(format!(
                        "feature {feature:?} maps to input {i} >= input_count {}",
                        self.input_count
                    )));
                }
                if !claimed.insert(i) {
                    return Err(Error::Export(format!("input {i} mapped more than once")));
                }
            }
        }
        for name in feature_names {
            if !self.feature_to_input.contains_key(name) {
                return Err(Error::Export(format!("unmapped feature {name:?}")));
            }
        }
        for i in 0..self.input_count {
            if !claimed.contains(&i) && !self.fill_ranges.contains_key(&i) {
                return Err(Error::Export(format!(
                    "input {i} is neither mapped nor given a fill range"
                )));
            }
        }
        for (i, iv) in &self.fill_ranges {
            if !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo <= iv.hi) {
                return Err(Error::Export(format!(
                    "fill range for input {i} is not a proper interval"
                )));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Export("epsilon must be a positive real".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[clap(rename_all = "kebab-case")]
pub enum ExportMode {
    Classification,
    RegressionSign,
}

/// Encode one specification as a VNN-Lib counterexample query: input
/// bounds from the precondition (grid ranges for free dimensions, fill
/// ranges for unmapped inputs) and the negation of the postcondition as
/// the satisfiable assertion.
pub fn export_vnnlib(
    set: &SpecificationSet,
    spec_index: usize,
    map: &ModelInterfaceMap,
    mode: ExportMode,
) -> Result<String> {
    map.validate(&set.feature_names)?;
    let spec = set
        .specs
        .get(spec_index)
        .ok_or_else(|| Error::Export(format!("no specification at index {spec_index}")))?;

    // Per-input bounds.
    let mut bounds: Vec<Option<Interval>> = vec![None; map.input_count];
    for (d, feature) in set.feature_names.iter().enumerate() {
        let interval = match spec.precondition[d] {
            Some(iv) => iv,
            None => set.grid.range(d),
        };
        for &i in &map.feature_to_input[feature] {
            bounds[i] = Some(interval);
        }
    }
    for (&i, iv) in &map.fill_ranges {
        if bounds[i].is_none() {
            bounds[i] = Some(*iv);
        }
    }

    let k = set.alphabet.len();
    let allowed: Vec<usize> = spec.postcondition.iter().collect();
    let disallowed: Vec<usize> = (0..k).filter(|l| !spec.postcondition.contains(*l)).collect();
    if disallowed.is_empty() {
        return Err(Error::Export(
            "postcondition allows every label; nothing to verify".into(),
        ));
    }

    let mut out = String::new();
    out.push_str(&format!(
        "; property {} of {}: {} in {{{}}} over the stated input box\n",
        spec_index + 1,
        set.specs.len(),
        set.output_name,
        spec.postcondition.names(&set.alphabet).join(", ")
    ));
    for i in 0..map.input_count {
        out.push_str(&format!("(declare-const X_{i} Real)\n"));
    }
    let output_vars = match mode {
        ExportMode::Classification => {
            if map.output_count != k {
                return Err(Error::Export(format!(
                    "classification mode needs output_count == {k}, got {}",
                    map.output_count
                )));
            }
            k
        }
        ExportMode::RegressionSign => {
            if map.output_count != 1 {
                return Err(Error::Export(format!(
                    "regression-sign mode needs output_count == 1, got {}",
                    map.output_count
                )));
            }
            let names = set.alphabet.labels();
            if names != ["+", "-", "0"] {
                return Err(Error::Export(
                    "regression-sign mode needs the sign alphabet {+, -, 0}".into(),
                ));
            }
            1
        }
    };
    for j in 0..output_vars {
        out.push_str(&format!("(declare-const Y_{j} Real)\n"));
    }
    out.push('\n');
    for (i, iv) in bounds.iter().enumerate() {
        let iv = iv.expect("validated map leaves no input unbounded");
        out.push_str(&format!("(assert (>= X_{i} {}))\n", format_f64(iv.lo)));
        out.push_str(&format!("(assert (<= X_{i} {}))\n", format_f64(iv.hi)));
    }
    out.push('\n');

    let query = match mode {
        ExportMode::Classification => {
            // Some disallowed label scores at least as high as every
            // allowed label.
            let terms: Vec<String> = disallowed
                .iter()
                .map(|&c| {
                    let comparisons: Vec<String> = allowed
                        .iter()
                        .map(|&a| format!("(>= Y_{c} Y_{a})"))
                        .collect();
                    wrap("and", comparisons)
                })
                .collect();
            wrap("or", terms)
        }
        ExportMode::RegressionSign => {
            let eps = map.epsilon;
            let terms: Vec<String> = disallowed
                .iter()
                .map(|&label| match set.alphabet.name(label) {
                    "+" => format!("(>= Y_0 {})", format_f64(eps)),
                    "-" => format!("(<= Y_0 {})", format_f64(-eps)),
                    "0" => format!(
                        "(and (>= Y_0 {}) (<= Y_0 {}))",
                        format_f64(-eps),
                        format_f64(eps)
                    ),
                    other => unreachable!("sign alphabet has no label {other}"),
                })
                .collect();
            wrap("or", terms)
        }
    };
    out.push_str(&format!("(assert {query})\n"));
    Ok(out)
}

fn wrap(op: &str, terms: Vec<String>) -> String {
    match terms.len() {
        1 => terms.into_iter().next().unwrap(),
        _ => format!("({op} {})", terms.join(" ")),
    }
}

/// Manifest entry describing one emitted property file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub ordinal: usize,
    pub postcondition: Vec<String>,
    pub omega: Vec<String>,
    pub member_count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExportManifest {
    pub files: Vec<ManifestEntry>,
    pub mode: ExportMode,
    /// Queries are counterexample searches: a satisfying assignment
    /// violates the specification.
    pub convention: String,
    pub epsilon: f64,
    pub input_count: usize,
    pub output_count: usize,
}

/// Write one `spec_<ordinal>.vnnlib` per specification plus
/// `manifest.json`. Emission order and bytes are deterministic.
pub fn export_set(
    set: &SpecificationSet,
    map: &ModelInterfaceMap,
    mode: ExportMode,
    out_dir: &Path,
) -> Result<ExportManifest> {
    map.validate(&set.feature_names)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = Vec::with_capacity(set.specs.len());
    for (i, spec) in set.specs.iter().enumerate() {
        let text = export_vnnlib(set, i, map, mode)?;
        let name = format!("spec_{}.vnnlib", i + 1);
        let path = out_dir.join(&name);
        std::fs::write(&path, &text).map_err(|e| Error::io(&path, e))?;
        files.push(ManifestEntry {
            file: name,
            ordinal: i + 1,
            postcondition: spec.postcondition.names(&set.alphabet),
            omega: spec.omega.names(&set.alphabet),
            member_count: spec.members.len(),
        });
    }
    let manifest = ExportManifest {
        files,
        mode,
        convention: "counterexample".into(),
        epsilon: map.epsilon,
        input_count: map.input_count,
        output_count: map.output_count,
    };
    let value: Value = serde_json::to_value(&manifest).expect("manifest serializes");
    let manifest_value = json!({ "encoding": value, "specs": set.specs.len() });
    let path = out_dir.join("manifest.json");
    std::fs::write(&path, to_canonical_string(&manifest_value)).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

/// Human-readable listing: one box per specification with named feature
/// intervals and the allowed output labels.
pub fn render_report(set: &SpecificationSet) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "Conjunctive specification set: {} specification{}\n",
        set.specs.len(),
        if set.specs.len() == 1 { "" } else { "s" }
    ));
    if set.specs.is_empty() {
        out.push_str("\nno specifications\n");
        return out;
    }
    for (i, spec) in set.specs.iter().enumerate() {
        out.push_str(&format!("\nSpecification {}\n", i + 1));
        out.push_str("  Precondition\n");
        for (name, iv) in set.feature_names.iter().zip(&spec.precondition) {
            match iv {
                Some(iv) => out.push_str(&format!(
                    "    {name} in [{}, {}]\n",
                    display_f64(iv.lo),
                    display_f64(iv.hi)
                )),
                None => out.push_str(&format!("    {name} unconstrained\n")),
            }
        }
        out.push_str("  Postcondition\n");
        out.push_str(&format!(
            "    {} in {{{}}}\n",
            set.output_name,
            spec.postcondition.names(&set.alphabet).join(", ")
        ));
    }
    out
}

/// Grammar check for emitted VNN-Lib text: balanced s-expressions,
/// `declare-const` before use, only the expected operators, and finite
/// numeric literals.
pub fn check_vnnlib(text: &str) -> Result<()> {
    let forms = parse_sexprs(text)?;
    let mut declared: BTreeSet<String> = BTreeSet::new();
    for form in &forms {
        let items = match form {
            Sexpr::List(items) => items,
            Sexpr::Atom(a) => {
                return Err(Error::Export(format!("stray atom {a:?} at top level")))
            }
        };
        match items.first() {
            Some(Sexpr::Atom(head)) if head == "declare-const" => {
                let [_, Sexpr::Atom(name), Sexpr::Atom(sort)] = items.as_slice() else {
                    return Err(Error::Export("malformed declare-const".into()));
                };
                if sort != "Real" {
                    return Err(Error::Export(format!("unexpected sort {sort:?}")));
                }
                if !is_io_var(name) {
                    return Err(Error::Export(format!("unexpected variable name {name:?}")));
                }
                if !declared.insert(name.clone()) {
                    return Err(Error::Export(format!("{name} declared twice")));
                }
            }
            Some(Sexpr::Atom(head)) if head == "assert" => {
                if items.len() != 2 {
                    return Err(Error::Export("assert takes one expression".into()));
                }
                check_expr(&items[1], &declared)?;
            }
            _ => return Err(Error::Export("top-level form must be declare-const or assert".into())),
        }
    }
    Ok(())
}

fn is_io_var(name: &str) -> bool {
    let rest = name
        .strip_prefix("X_")
        .or_else(|| name.strip_prefix("Y_"));
    matches!(rest, Some(digits) if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()))
}

fn check_expr(expr: &Sexpr, declared: &BTreeSet<String>) -> Result<()> {
    match expr {
        Sexpr::Atom(a) => check_atom(a, declared),
        Sexpr::List(items) => {
            let Some(Sexpr::Atom(head)) = items.first() else {
                return Err(Error::Export("expression head must be an operator".into()));
            };
            match head.as_str() {
                "<=" | ">=" => {
                    if items.len() != 3 {
                        return Err(Error::Export(format!("{head} takes two operands")));
                    }
                }
                "and" | "or" => {
                    if items.len() < 2 {
                        return Err(Error::Export(format!("{head} needs operands")));
                    }
                }
                other => return Err(Error::Export(format!("unexpected operator {other:?}"))),
            }
            for item in &items[1..] {
                check_expr(item, declared)?;
            }
            Ok(())
        }
    }
}

fn check_atom(atom: &str, declared: &BTreeSet<String>) -> Result<()> {
    if matches!(atom, "<=" | ">=" | "and" | "or") {
        return Ok(());
    }
    if is_io_var(atom) {
        if !declared.contains(atom) {
            return Err(Error::Export(format!("{atom} used before declaration")));
        }
        return Ok(());
    }
    match atom.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(()),
        Ok(v) => Err(Error::Export(format!("non-finite literal {v}"))),
        Err(_) => Err(Error::Export(format!("unexpected token {atom:?}"))),
    }
}

#[derive(Debug)]
enum Sexpr {
    Atom(String),
    List(Vec<Sexpr>),
}

fn parse_sexprs(text: &str) -> Result<Vec<Sexpr>> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut in_comment = false;
    for c in text.chars() {
        if in_comment {
            if c == '\n' {
                in_comment = false;
            }
            continue;
        }
        match c {
            ';' => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                in_comment = true;
            }
            '(' | ')' => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            c => current.push(c),
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }

    let mut stack: Vec<Vec<Sexpr>> = vec![Vec::new()];
    for token in tokens {
        match token.as_str() {
            "(" => stack.push(Vec::new()),
            ")" => {
                let list = stack
                    .pop()
                    .ok_or_else(|| Error::Export("unbalanced ')'".into()))?;
                if stack.is_empty() {
                    return Err(Error::Export("unbalanced ')'".into()));
                }
                stack.last_mut().unwrap().push(Sexpr::List(list));
            }
            _ => stack.last_mut().unwrap().push(Sexpr::Atom(token)),
        }
    }
    if stack.len() != 1 {
        return Err(Error::Export("unbalanced '('".into()));
    }
    Ok(stack.pop().unwrap())
}
