//! Canonical JSON: sorted keys, floats with 17 significant digits, no NaN.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_value::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

fn key_of(k: &Value, path: &str) -> Result<String, CliError> {
    Ok(match k {
        Value::String(s) => s.clone(),
        Value::Char(c) => c.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::U8(n) => n.to_string(),
        Value::U16(n) => n.to_string(),
        Value::U32(n) => n.to_string(),
        Value::U64(n) => n.to_string(),
        Value::I8(n) => n.to_string(),
        Value::I16(n) => n.to_string(),
        Value::I32(n) => n.to_string(),
        Value::I64(n) => n.to_string(),
        _ => return Err(CliError::internal(format!("non-scalar map key at {path}"))),
    })
}

fn float(x: f64, path: &str, out: &mut String) -> Result<(), CliError> {
    if !x.is_finite() {
        return Err(CliError::non_finite(path));
    }
    if x == 0.0 {
        // Drop the sign of negative zero so equal reports hash equally.
        out.push_str("0.0000000000000000e0");
    } else {
        write!(out, "{x:.16e}").expect("write to string");
    }
    Ok(())
}

fn write_value(v: &Value, path: &str, indent: usize, out: &mut String) -> Result<(), CliError> {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::U8(n) => write!(out, "{n}").unwrap(),
        Value::U16(n) => write!(out, "{n}").unwrap(),
        Value::U32(n) => write!(out, "{n}").unwrap(),
        Value::U64(n) => write!(out, "{n}").unwrap(),
        Value::I8(n) => write!(out, "{n}").unwrap(),
        Value::I16(n) => write!(out, "{n}").unwrap(),
        Value::I32(n) => write!(out, "{n}").unwrap(),
        Value::I64(n) => write!(out, "{n}").unwrap(),
        Value::F32(x) => float(f64::from(*x), path, out)?,
        Value::F64(x) => float(*x, path, out)?,
        Value::Char(c) => out.push_str(&serde_json::to_string(&c.to_string()).unwrap()),
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Unit | Value::Option(None) => out.push_str("null"),
        Value::Option(Some(inner)) | Value::Newtype(inner) => write_value(inner, path, indent, out)?,
        Value::Bytes(b) => {
            let items: Vec<Value> = b.iter().map(|&x| Value::U8(x)).collect();
            write_value(&Value::Seq(items), path, indent, out)?;
        }
        Value::Seq(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return Ok(());
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(item, &format!("{path}/{k}"), indent + 1, out)?;
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Map(map) => {
            let mut sorted = BTreeMap::new();
            for (k, v) in map {
                sorted.insert(key_of(k, path)?, v);
            }
            if sorted.is_empty() {
                out.push_str("{}");
                return Ok(());
            }
            out.push_str("{\n");
            let n = sorted.len();
            for (k, (key, v)) in sorted.into_iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(&key).unwrap());
                out.push_str(": ");
                write_value(v, &format!("{path}/{key}"), indent + 1, out)?;
                out.push_str(if k + 1 < n { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
    Ok(())
}

/// Renders any serializable value canonically. Fails with the JSON pointer
/// of the first non-finite float.
pub fn canonical<T: Serialize>(value: &T) -> Result<String, CliError> {
    let v = serde_value::to_value(value).map_err(|e| CliError::internal(e.to_string()))?;
    let mut out = String::new();
    write_value(&v, "", 0, &mut out)?;
    out.push('\n');
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes the canonical rendering of `value` to `path`.
pub fn emit_report<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    let text = canonical(value)?;
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
