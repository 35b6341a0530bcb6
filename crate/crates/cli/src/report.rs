//! Machine-readable experiment reports.
//!
//! A report serializes to a single JSON line and to a flat CSV
//! (header + row) with the same numeric content: nested keys are joined
//! with dots, arrays with semicolons. Exact values are carried as
//! integers or `p/q` fraction strings; floats print in shortest
//! round-trip form. `wall_time_ms` is a sidecar field: it rides along in
//! both formats but is excluded from determinism comparisons.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub schema_version: u64,
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub results: Value,
    pub seed: u64,
    pub wall_time_ms: u64,
}

impl ExperimentReport {
    pub fn new(command: &str, params: BTreeMap<String, Value>, results: Value, seed: u64) -> Self {
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            params,
            results,
            seed,
            wall_time_ms: 0,
        }
    }

    fn to_value(&self) -> Value {
        json!({
            "schema_version": self.schema_version,
            "command": self.command,
            "params": Value::Object(self.params.clone().into_iter().collect::<Map<_, _>>()),
            "results": self.results,
            "seed": self.seed,
            "wall_time_ms": self.wall_time_ms,
        })
    }

    /// One JSON object on one line; keys are sorted at every level, so
    /// equal reports serialize to equal bytes.
    pub fn to_json_line(&self) -> String {
        self.to_value().to_string()
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(line.trim()).context("invalid report JSON")?;
        let obj = v.as_object().ok_or_else(|| anyhow!("report is not an object"))?;
        let get = |k: &str| obj.get(k).ok_or_else(|| anyhow!("missing field {k}"));
        Ok(ExperimentReport {
            schema_version: get("schema_version")?
                .as_u64()
                .ok_or_else(|| anyhow!("bad schema_version"))?,
            command: get("command")?
                .as_str()
                .ok_or_else(|| anyhow!("bad command"))?
                .to_string(),
            params: get("params")?
                .as_object()
                .ok_or_else(|| anyhow!("bad params"))?
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            results: get("results")?.clone(),
            seed: get("seed")?.as_u64().ok_or_else(|| anyhow!("bad seed"))?,
            wall_time_ms: get("wall_time_ms")?
                .as_u64()
                .ok_or_else(|| anyhow!("bad wall_time_ms"))?,
        })
    }

    /// Serialized form with the sidecar timing removed; two runs of the
    /// same experiment with the same seed must agree on this string byte
    /// for byte.
    pub fn determinism_key(&self) -> String {
        let mut v = self.to_value();
        v.as_object_mut().unwrap().remove("wall_time_ms");
        v.to_string()
    }

    /// Flat CSV: a header line and a value line.
    pub fn to_csv(&self) -> String {
        let mut columns: Vec<(String, String)> = Vec::new();
        columns.push(("schema_version".into(), self.schema_version.to_string()));
        columns.push(("command".into(), self.command.clone()));
        columns.push(("seed".into(), self.seed.to_string()));
        for (k, v) in &self.params {
            flatten_into(&format!("params.{k}"), v, &mut columns);
        }
        flatten_into("results", &self.results, &mut columns);
        columns.push(("wall_time_ms".into(), self.wall_time_ms.to_string()));

        let header: Vec<String> = columns.iter().map(|(k, _)| csv_escape(k)).collect();
        let row: Vec<String> = columns.iter().map(|(_, v)| csv_escape(v)).collect();
        format!("{}\n{}\n", header.join(","), row.join(","))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| anyhow!("empty CSV"))?;
        let row = lines.next().ok_or_else(|| anyhow!("CSV missing value row"))?;
        let keys = split_csv(header)?;
        let vals = split_csv(row)?;
        if keys.len() != vals.len() {
            bail!("CSV header/value arity mismatch");
        }

        let mut schema_version = None;
        let mut command = None;
        let mut seed = None;
        let mut wall = None;
        let mut params: BTreeMap<String, Value> = BTreeMap::new();
        let mut results = Value::Object(Map::new());
        for (k, raw) in keys.iter().zip(&vals) {
            match k.as_str() {
                "schema_version" => schema_version = Some(raw.parse::<u64>()?),
                "command" => command = Some(raw.clone()),
                "seed" => seed = Some(raw.parse::<u64>()?),
                "wall_time_ms" => wall = Some(raw.parse::<u64>()?),
                _ if k.starts_with("params.") => {
                    let path: Vec<&str> = k["params.".len()..].split('.').collect();
                    insert_path_map(&mut params, &path, infer_value(raw));
                }
                _ if k == "results" || k.starts_with("results.") => {
                    let path: Vec<&str> =
                        if k == "results" { Vec::new() } else { k["results.".len()..].split('.').collect() };
                    if path.is_empty() {
                        results = infer_value(raw);
                    } else {
                        insert_path(&mut results, &path, infer_value(raw));
                    }
                }
                other => bail!("unknown CSV column {other}"),
            }
        }
        Ok(ExperimentReport {
            schema_version: schema_version.ok_or_else(|| anyhow!("missing schema_version"))?,
            command: command.ok_or_else(|| anyhow!("missing command"))?,
            params,
            results,
            seed: seed.ok_or_else(|| anyhow!("missing seed"))?,
            wall_time_ms: wall.ok_or_else(|| anyhow!("missing wall_time_ms"))?,
        })
    }
}

fn flatten_into(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, inner) in map {
                flatten_into(&format!("{prefix}.{k}"), inner, out);
            }
        }
        Value::Array(items) => {
            let joined: Vec<String> = items.iter().map(scalar_to_string).collect();
            out.push((prefix.to_string(), joined.join(";")));
        }
        other => out.push((prefix.to_string(), scalar_to_string(other))),
    }
}

fn scalar_to_string(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Recover types from flat text: integers, then floats (a dot or an
/// exponent), booleans, fraction strings and everything else stay strings.
fn infer_value(raw: &str) -> Value {
    if raw.contains(';') {
        return Value::Array(raw.split(';').map(infer_scalar).collect());
    }
    infer_scalar(raw)
}

fn infer_scalar(raw: &str) -> Value {
    if raw == "true" {
        return Value::Bool(true);
    }
    if raw == "false" {
        return Value::Bool(false);
    }
    let looks_int = !raw.is_empty()
        && raw.bytes().enumerate().all(|(i, b)| b.is_ascii_digit() || (i == 0 && b == b'-'))
        && raw != "-";
    if looks_int {
        if let Ok(u) = raw.parse::<u64>() {
            return Value::Number(u.into());
        }
        if let Ok(i) = raw.parse::<i64>() {
            return Value::Number(i.into());
        }
    }
    let looks_float = raw.parse::<f64>().is_ok() && (raw.contains('.') || raw.contains('e'));
    if looks_float {
        if let Some(n) = serde_json::Number::from_f64(raw.parse::<f64>().unwrap()) {
            return Value::Number(n);
        }
    }
    Value::String(raw.to_string())
}

fn insert_path(root: &mut Value, path: &[&str], value: Value) {
    if !root.is_object() {
        *root = Value::Object(Map::new());
    }
    let map = root.as_object_mut().unwrap();
    if path.len() == 1 {
        map.insert(path[0].to_string(), value);
        return;
    }
    let entry = map.entry(path[0].to_string()).or_insert_with(|| Value::Object(Map::new()));
    insert_path(entry, &path[1..], value);
}

fn insert_path_map(map: &mut BTreeMap<String, Value>, path: &[&str], value: Value) {
    if path.len() == 1 {
        map.insert(path[0].to_string(), value);
        return;
    }
    let entry = map.entry(path[0].to_string()).or_insert_with(|| Value::Object(Map::new()));
    insert_path(entry, &path[1..], value);
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn split_csv(line: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut field = String::new();
    let mut chars = line.chars().peekable();
    let mut quoted = false;
    while let Some(c) = chars.next() {
        if quoted {
            if c == '"' {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    field.push('"');
                } else {
                    quoted = false;
                }
            } else {
                field.push(c);
            }
        } else {
            match c {
                '"' if field.is_empty() => quoted = true,
                ',' => out.push(std::mem::take(&mut field)),
                _ => field.push(c),
            }
        }
    }
    if quoted {
        bail!("unterminated quote in CSV line");
    }
    out.push(field);
    Ok(out)
}
