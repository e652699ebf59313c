//! Canonical JSON rendering.
//!
//! The interchange files written by `mine`, `eval`, and `export-vnnlib` must
//! be byte-identical across reruns and thread counts. serde_json's default
//! float formatting is already deterministic, but the interchange contract
//! here pins the representation harder: object keys sorted, two-space
//! indentation, LF line endings, and every float printed as a plain decimal
//! with exactly 17 significant digits (enough to round-trip any f64).

use serde_json::Value;

/// Render a JSON value in canonical form (trailing newline included).
pub fn to_canonical_string(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(value: &Value, depth: usize, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&format_f64(n.as_f64().expect("finite json number")));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string encodes"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                indent(depth + 1, out);
                write_value(item, depth + 1, out);
            }
            out.push('\n');
            indent(depth, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            // serde_json's Map is a BTreeMap unless the preserve_order
            // feature is on; sort explicitly so we never depend on that.
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort_unstable();
            out.push('{');
            for (i, key) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                indent(depth + 1, out);
                out.push_str(&serde_json::to_string(key).expect("string encodes"));
                out.push_str(": ");
                write_value(&map[key.as_str()], depth + 1, out);
            }
            out.push('\n');
            indent(depth, out);
            out.push('}');
        }
    }
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

/// Plain-decimal rendering of a finite f64 with exactly 17 significant
/// digits. 17 digits uniquely identify every f64, so parsing the result
/// reproduces the input bit-for-bit.
pub fn format_f64(x: f64) -> String {
    assert!(x.is_finite(), "cannot canonically format {x}");
    if x == 0.0 {
        return "0.0".to_string();
    }
    let neg = x < 0.0;
    let sci = format!("{:.16e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("exponent parses");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    debug_assert_eq!(digits.len(), 17);

    let mut body = String::new();
    if exp >= 16 {
        body.push_str(&digits);
        for _ in 0..(exp - 16) {
            body.push('0');
        }
        body.push_str(".0");
    } else if exp >= 0 {
        let split = (exp + 1) as usize;
        body.push_str(&digits[..split]);
        body.push('.');
        body.push_str(&digits[split..]);
    } else {
        body.push_str("0.");
        for _ in 0..(-exp - 1) {
            body.push('0');
        }
        body.push_str(&digits);
    }

    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Display formatting for reports: rounded to 12 significant digits so
/// denormalized grid arithmetic reads cleanly, with integers keeping one
/// decimal place ("4.0"). Interchange files use [`format_f64`] instead.
pub fn display_f64(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("rounded float parses");
    if rounded.fract() == 0.0 && rounded.abs() < 1e15 {
        format!("{rounded:.1}")
    } else {
        format!("{rounded}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digit_floats_round_trip() {
        for &x in &[
            0.4,
            6.6,
            -0.78,
            4300.0,
            1.0 / 3.0,
            1e-12,
            2.5e17,
            f64::MIN_POSITIVE,
            -0.0,
            0.0,
        ] {
            let s = format_f64(x);
            let back: f64 = s.parse().unwrap();
            if x == 0.0 {
                assert_eq!(back, 0.0);
            } else {
                assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {s} -> {back}");
            }
        }
    }

    #[test]
    fn plain_decimal_forms() {
        assert_eq!(format_f64(0.4), "0.40000000000000002");
        assert_eq!(format_f64(6.6), "6.5999999999999996");
        assert_eq!(format_f64(4300.0), "4300.0000000000000");
        assert_eq!(format_f64(0.0), "0.0");
        assert_eq!(format_f64(-0.5), "-0.50000000000000000");
    }

    #[test]
    fn canonical_object_keys_sorted() {
        let v: Value = serde_json::from_str(r#"{"b":1,"a":[1.5,2],"c":{}}"#).unwrap();
        let s = to_canonical_string(&v);
        let a = s.find("\"a\"").unwrap();
        let b = s.find("\"b\"").unwrap();
        let c = s.find("\"c\"").unwrap();
        assert!(a < b && b < c);
        assert!(s.contains("1.5000000000000000"));
        assert!(s.ends_with('\n'));
    }

    #[test]
    fn display_form_keeps_trailing_decimal() {
        assert_eq!(display_f64(4.0), "4.0");
        assert_eq!(display_f64(2.8), "2.8");
        assert_eq!(display_f64(0.66), "0.66");
    }
}
