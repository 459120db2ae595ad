//! JSON and CSV formatting shared by the subcommands.

use num_complex::Complex64 as C64;
use serde_json::{json, Map, Value};

/// Version of the report layout.
pub const SCHEMA: u64 = 1;

/// Rounds a float to 15 significant digits.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// Rounds every float in a JSON tree; non-finite numbers become strings.
pub fn normalise(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => {
                let r = round15(f);
                serde_json::Number::from_f64(r).map_or_else(|| Value::String(f.to_string()), Value::Number)
            }
            _ => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(normalise).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalise(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

/// Floats that may be infinite, as JSON.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(x.to_string()), Value::Number)
}

pub fn complex(z: C64) -> Value {
    json!([num(z.re), num(z.im)])
}

pub fn complex_list(v: &[C64]) -> Value {
    Value::Array(v.iter().copied().map(complex).collect())
}

/// Pretty JSON with rounded numbers and a trailing newline.
pub fn render(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&normalise(v)).expect("JSON renders");
    s.push('\n');
    s
}

/// Shortest round-trip decimal for CSV cells.
pub fn csv_float(x: f64) -> String {
    let r = round15(x);
    if r.is_finite() {
        format!("{r:?}")
    } else {
        r.to_string()
    }
}
