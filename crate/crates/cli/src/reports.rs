//! Report emission: versioned JSON (`"schema": 1`) and fixed-header CSV
//! (`parameter,value,est_err`). Reports carry no timestamps, so identical
//! configurations produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use focklab_core::{Error, Result};
use num_complex::Complex64;
use serde_json::{json, Value};

pub fn complex_pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn symbol_pairs(g: &focklab_core::PolynomialSymbol64) -> Value {
    Value::Array(g.coeffs().iter().map(|&c| complex_pair(c)).collect())
}

/// Wraps a result payload in the versioned report envelope.
pub fn envelope(command: &str, config: Value, result: Value) -> Value {
    json!({
        "schema": 1,
        "command": command,
        "config": config,
        "result": result,
    })
}

pub fn report_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.report.json"))
}

pub fn curve_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.curve.csv"))
}

pub fn write_report(dir: &Path, name: &str, value: &Value) -> Result<PathBuf> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Config(format!("cannot create output dir {}: {e}", dir.display())))?;
    let path = report_path(dir, name);
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serialize report: {e}")))?;
    fs::write(&path, body + "\n")
        .map_err(|e| Error::Config(format!("write {}: {e}", path.display())))?;
    Ok(path)
}

/// Writes `(parameter, value, est_err)` rows under the fixed header.
pub fn write_curve(dir: &Path, name: &str, rows: &[(f64, f64, f64)]) -> Result<PathBuf> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Config(format!("cannot create output dir {}: {e}", dir.display())))?;
    let path = curve_path(dir, name);
    let mut w = csv::Writer::from_path(&path)
        .map_err(|e| Error::Config(format!("open {}: {e}", path.display())))?;
    w.write_record(["parameter", "value", "est_err"])
        .and_then(|_| {
            for &(p, v, e) in rows {
                w.write_record(&[p.to_string(), v.to_string(), e.to_string()])?;
            }
            w.flush()?;
            Ok(())
        })
        .map_err(|e| Error::Config(format!("write {}: {e}", path.display())))?;
    Ok(path)
}

/// Serializes any `Serialize` value into the report tree.
pub fn to_value<S: serde::Serialize>(s: &S) -> Value {
    serde_json::to_value(s).expect("report types serialize")
}
