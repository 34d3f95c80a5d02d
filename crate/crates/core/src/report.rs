//! Deterministic JSON output: floats are rounded to a fixed number of
//! decimals before serialization so that repeated runs are byte-identical.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub const REPORT_DECIMALS: usize = 10;

/// Rounds every non-integer number in place. Negative zero becomes zero.
pub fn round_floats(v: &mut Value, decimals: usize) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or_default();
            let r: f64 = format!("{x:.decimals$}").parse().unwrap_or(x);
            let r = if r == 0.0 { 0.0 } else { r };
            if let Some(num) = serde_json::Number::from_f64(r) {
                *n = num;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|i| round_floats(i, decimals)),
        Value::Object(map) => map.values_mut().for_each(|i| round_floats(i, decimals)),
        _ => {}
    }
}

pub fn to_value<T: Serialize>(value: &T) -> Result<Value> {
    serde_json::to_value(value).map_err(|e| Error::validation(format!("report serialization: {e}")))
}

/// Pretty JSON with floats at `REPORT_DECIMALS`, newline terminated.
pub fn to_report_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = to_value(value)?;
    round_floats(&mut v, REPORT_DECIMALS);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::validation(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
