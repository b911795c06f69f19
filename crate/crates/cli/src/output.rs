//! Artifact emission: significant-digit rounding, JSON, and flattened CSV.

use std::io::Write;

use serde_json::Value;

/// Round to 12 significant digits; emitted numbers go through this so
/// artifacts are stable across runs and platforms.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Round every number inside a JSON value to 12 significant digits.
pub fn round_value(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    if let Some(rounded) = serde_json::Number::from_f64(sig12(f)) {
                        *value = Value::Number(rounded);
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

fn flatten_into(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_into(&key, v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten_into(&format!("{prefix}.{i}"), v, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        Value::Number(n) => out.push((prefix.to_string(), n.to_string())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
    }
}

/// Flatten a JSON record into dotted-key/value pairs (sorted keys come for
/// free from the underlying map ordering).
pub fn flatten(value: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    flatten_into("", value, &mut out);
    out
}

/// Render one or more records as CSV with a fixed header: the union of the
/// rows' dotted keys in first-seen order, blank cells for missing values.
pub fn to_csv(rows: &[Value]) -> Result<String, csv::Error> {
    let flats: Vec<Vec<(String, String)>> = rows.iter().map(flatten).collect();
    let mut header: Vec<String> = Vec::new();
    for row in &flats {
        for (k, _) in row {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(&header)?;
    for row in &flats {
        let record: Vec<&str> = header
            .iter()
            .map(|key| {
                row.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str()).unwrap_or("")
            })
            .collect();
        writer.write_record(&record)?;
    }
    let bytes = writer.into_inner().expect("csv buffer");
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// Serialize the artifact in the requested format, rounded to 12
/// significant digits.
pub fn render(mut record: Value, rows_for_csv: Option<Vec<Value>>, csv_format: bool) -> String {
    round_value(&mut record);
    if csv_format {
        let rows = match rows_for_csv {
            Some(mut rows) => {
                rows.iter_mut().for_each(round_value);
                rows
            }
            None => vec![record],
        };
        to_csv(&rows).expect("csv rendering")
    } else {
        let mut text = serde_json::to_string_pretty(&record).expect("json rendering");
        text.push('\n');
        text
    }
}

/// Write to the given path, or stdout when absent.
pub fn emit(text: &str, out: Option<&std::path::Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}
