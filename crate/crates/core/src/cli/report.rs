//! Deterministic JSON reports: sorted keys, floats with 17 significant
//! digits, exact values as `"num/den"` strings.

use std::fmt::Write as _;

use serde_json::{Map, Value};

use crate::rational::{divergence, fmt_rational, parse_rational, Rational};

pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn q(x: &Rational) -> Value {
    Value::String(fmt_rational(x))
}

pub fn qs(xs: &[Rational]) -> Value {
    Value::Array(xs.iter().map(q).collect())
}

/// Serializes `value` with two-space indentation.
pub fn to_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, value: &Value, indent: usize) {
    match value {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&value.to_string()),
        Value::Number(n) => {
            if n.is_f64() {
                let _ = write!(out, "{:.16e}", n.as_f64().unwrap());
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            for (i, key) in keys.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*key], indent + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// Largest relative divergence between matching float and exact entries,
/// per top-level key. Keys present in only one record, or holding
/// non-numeric strings, are skipped.
pub fn divergences(float: &Map<String, Value>, exact: &Map<String, Value>) -> Map<String, Value> {
    let mut out = Map::new();
    for (key, fv) in float {
        if let Some(d) = exact.get(key).and_then(|ev| max_divergence(fv, ev)) {
            out.insert(key.clone(), num(d));
        }
    }
    out
}

fn max_divergence(float: &Value, exact: &Value) -> Option<f64> {
    match (float, exact) {
        (Value::Number(x), Value::String(s)) => {
            let e = parse_rational(s).ok()?;
            Some(divergence(x.as_f64()?, &e))
        }
        (Value::Array(xs), Value::Array(es)) if xs.len() == es.len() => xs
            .iter()
            .zip(es)
            .filter_map(|(x, e)| max_divergence(x, e))
            .reduce(f64::max),
        (Value::Object(xs), Value::Object(es)) => xs
            .iter()
            .filter_map(|(k, x)| max_divergence(x, es.get(k)?))
            .reduce(f64::max),
        _ => None,
    }
}

/// Header plus rows, written with the `csv` crate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(&self.header)?;
        for r in &self.rows {
            wtr.write_record(r)?;
        }
        let bytes = wtr.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("utf-8"))
    }
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}
