use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Number, Value};
use sha2::{Digest, Sha256};

use qcorr::QuantumState;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "qcorr";

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn fmt12(x: f64) -> String {
    let r = round12(x);
    if r != 0.0 && (r.abs() < 1e-4 || r.abs() >= 1e12) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| Number::from_f64(round12(x)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(items) => Value::Array(items.into_iter().map(normalize).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, normalize(v))).collect())
        }
        other => other,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InputId {
    pub id: String,
    pub num_parties: usize,
    pub sha256: String,
}

impl InputId {
    pub fn of_state(id: &str, s: &QuantumState) -> qcorr::Result<Self> {
        let canonical = qcorr::io::state_to_json(s)?;
        Ok(Self {
            id: id.to_string(),
            num_parties: s.num_parties(),
            sha256: hex::encode(Sha256::digest(canonical.as_bytes())),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub input: Option<InputId>,
    pub result: Value,
}

impl ReportDocument {
    pub fn new<T: Serialize>(
        command: Vec<String>,
        input: Option<InputId>,
        result: &T,
    ) -> serde_json::Result<Self> {
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            input,
            result: normalize(serde_json::to_value(result)?),
        })
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    /// `key,value` rows with dotted paths into the result.
    pub fn to_csv(&self) -> String {
        let mut rows = Vec::new();
        flatten("", &self.result, &mut rows);
        let mut out = String::from("key,value\n");
        for (k, v) in rows {
            let _ = writeln!(out, "{},{}", csv_field(&k), csv_field(&v));
        }
        out
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => flatten_map(map, &join, rows),
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), item, rows);
            }
        }
        Value::Number(n) => rows.push((
            prefix.into(),
            n.as_f64().map(fmt12).unwrap_or_else(|| n.to_string()),
        )),
        Value::String(s) => rows.push((prefix.into(), s.clone())),
        Value::Bool(b) => rows.push((prefix.into(), b.to_string())),
        Value::Null => rows.push((prefix.into(), String::new())),
    }
}

fn flatten_map(
    map: &Map<String, Value>,
    join: &dyn Fn(&str) -> String,
    rows: &mut Vec<(String, String)>,
) {
    for (k, v) in map {
        flatten(&join(k), v, rows);
    }
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(-16.0 / 27.0), "-0.592592592593");
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(2.5e-7), "2.5e-7");
        assert_eq!(round12(0.1 + 0.2), 0.3);
    }

    #[test]
    fn csv_flattening() {
        let doc = ReportDocument::new(
            vec![],
            None,
            &serde_json::json!({"a": [1.0, 2.5], "b": {"c": "x,y"}}),
        )
        .unwrap();
        assert_eq!(doc.to_csv(), "key,value\na.0,1\na.1,2.5\nb.c,\"x,y\"\n");
    }
}
