//! JSON and CSV report writers.

use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

use super::config::{Format, RunConfig};
use crate::error::{Error, Result};

/// Rounds to 10 significant digits.
pub fn sig10(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.9e}").parse().unwrap_or(x)
}

fn round_all(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            n.as_f64().map(|x| serde_json::json!(sig10(x))).unwrap_or(Value::Number(n))
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_all).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_all(v))).collect()),
        other => other,
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

fn write_csv<W: Write>(obj: &Map<String, Value>, w: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    let to_io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    writer.write_record(obj.keys()).map_err(to_io)?;
    writer.write_record(obj.values().map(cell)).map_err(to_io)?;
    writer.flush()?;
    Ok(())
}

/// Writes `report` in the configured format to the configured path, or to `out`.
pub fn emit<T: Serialize, O: Write>(cfg: &RunConfig, report: &T, out: &mut O) -> Result<()> {
    let value = round_all(serde_json::to_value(report).map_err(|e| Error::Numeric(e.to_string()))?);
    let format = cfg.output.format.unwrap_or(Format::Json);
    let mut file;
    let sink: &mut dyn Write = match &cfg.output.path {
        Some(path) => {
            file = std::io::BufWriter::new(std::fs::File::create(path)?);
            &mut file
        }
        None => out,
    };
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *sink, &value).map_err(|e| Error::Io(e.into()))?;
            writeln!(sink)?;
        }
        Format::Csv => {
            let Value::Object(obj) = &value else {
                return Err(Error::Numeric("report is not a record".into()));
            };
            write_csv(obj, &mut *sink)?;
        }
    }
    sink.flush()?;
    Ok(())
}
