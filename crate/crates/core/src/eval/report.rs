use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One evaluation result, serialized as a single JSON line.
///
/// `mora_per_s` is `null` when no mora count is known for the input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalReport {
    pub mcd_db: f64,
    pub rtf: f64,
    pub generation_s: f64,
    pub conversion_s: f64,
    pub mora_per_s: Option<f64>,
    pub factor: f64,
    pub insertion: String,
    pub method: String,
}

pub const REPORT_KEYS: [&str; 8] = [
    "mcd_db",
    "rtf",
    "generation_s",
    "conversion_s",
    "mora_per_s",
    "factor",
    "insertion",
    "method",
];

impl EvalReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Checks that `line` is a JSON object with exactly the report keys and the
/// right value types.
pub fn validate_report_line(line: &str) -> Result<EvalReport> {
    let value: serde_json::Value = serde_json::from_str(line)
        .map_err(|e| Error::InvalidArgument(format!("report line is not JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::InvalidArgument("report line is not a JSON object".into()))?;
    if obj.len() != REPORT_KEYS.len() {
        return Err(Error::InvalidArgument(format!(
            "report has {} keys, expected {}",
            obj.len(),
            REPORT_KEYS.len()
        )));
    }
    for key in REPORT_KEYS {
        let v = obj
            .get(key)
            .ok_or_else(|| Error::InvalidArgument(format!("report is missing `{key}`")))?;
        let ok = match key {
            "insertion" | "method" => v.is_string(),
            "mora_per_s" => v.is_null() || v.as_f64().is_some_and(f64::is_finite),
            _ => v.as_f64().is_some_and(f64::is_finite),
        };
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "report field `{key}` has wrong type: {v}"
            )));
        }
    }
    serde_json::from_value(value).map_err(|e| Error::InvalidArgument(e.to_string()))
}
