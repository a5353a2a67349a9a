use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};

use crate::ConfigError;

/// Rounds to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// CSV cell for a scalar: 12 significant digits, scientific outside `[1e-5, 1e15)`.
pub fn cell(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = sig12(x);
    let a = r.abs();
    if r == 0.0 {
        "0".into()
    } else if !(1e-5..1e15).contains(&a) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

pub fn opt_cell(x: Option<f64>) -> String {
    x.map(cell).unwrap_or_default()
}

/// JSON number with 12 significant digits; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(sig12(x))
    } else {
        Value::Null
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Artifact sink: a directory when `--out` is given, nothing otherwise.
pub struct Sink {
    dir: Option<PathBuf>,
    pub format: Format,
}

impl Sink {
    pub fn new(dir: Option<&Path>, format: Format) -> Result<Self> {
        if let Some(d) = dir {
            fs::create_dir_all(d)
                .map_err(|e| ConfigError(format!("cannot create output directory {}: {e}", d.display())))?;
        }
        Ok(Self {
            dir: dir.map(Path::to_path_buf),
            format,
        })
    }

    fn path(&self, name: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(name))
    }

    pub fn json(&self, name: &str, value: &Value) -> Result<()> {
        if let Some(p) = self.path(name) {
            let mut text = serde_json::to_string_pretty(value)?;
            text.push('\n');
            fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
        }
        Ok(())
    }

    /// Writes a table as `<stem>.csv` or `<stem>.json` (array of row objects).
    pub fn table(&self, stem: &str, header: &[String], rows: &[Vec<String>], json_rows: Vec<Value>) -> Result<()> {
        match self.format {
            Format::Csv => {
                let Some(p) = self.path(&format!("{stem}.csv")) else {
                    return Ok(());
                };
                let mut w = csv::Writer::from_path(&p).with_context(|| format!("writing {}", p.display()))?;
                w.write_record(header)?;
                for r in rows {
                    w.write_record(r)?;
                }
                w.flush()?;
                Ok(())
            }
            Format::Json => self.json(&format!("{stem}.json"), &Value::Array(json_rows)),
        }
    }
}

/// Prints `value` as one compact JSON line on stdout.
pub fn print_json(value: &Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string(value)?)?;
    Ok(())
}

pub fn indexed(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (1..=count).map(move |i| format!("{prefix}_{i}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(cell(0.1529), "0.1529");
        assert_eq!(cell(1.0 / 3.0), "0.333333333333");
        assert_eq!(cell(2.0 / 3.0 * 1e-7), "6.66666666667e-8");
        assert_eq!(cell(0.0), "0");
        assert_eq!(cell(f64::INFINITY), "inf");
        assert_eq!(num(f64::NAN), Value::Null);
    }
}
