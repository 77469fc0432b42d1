//! Deterministic CSV/JSON emission and run manifests.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SIGNIFICANT_DIGITS: usize = 9;

/// Formats with nine significant digits, plain decimals for moderate
/// exponents and `e` notation otherwise; trailing zeros are trimmed.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("e notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn trim(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// JSON number rounded like the CSV output.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = fmt_num(x).parse().expect("formatted number parses");
    json!(rounded)
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => num(*x),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub schema: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `# ` lines in CSV, a `notes` array in JSON.
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(schema: &'static str, columns: &[&'static str]) -> Self {
        Self { schema, columns: columns.to_vec(), rows: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone)]
pub enum Output {
    Table(Table),
    Record { schema: &'static str, value: Map<String, Value> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Output {
    pub fn default_format(&self) -> Format {
        match self {
            Output::Table(_) => Format::Csv,
            Output::Record { .. } => Format::Json,
        }
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match (self, format) {
            (Output::Table(t), Format::Csv) => {
                let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
                w.write_record(&t.columns).map_err(CliError::io)?;
                for row in &t.rows {
                    w.write_record(row.iter().map(Cell::csv)).map_err(CliError::io)?;
                }
                let body = String::from_utf8(w.into_inner().map_err(|e| CliError::io(e.into_error()))?)
                    .expect("csv output is utf-8");
                let mut out = format!("# schema: {}\n", t.schema);
                for n in &t.notes {
                    out.push_str(&format!("# {n}\n"));
                }
                out.push_str(&body);
                Ok(out)
            }
            (Output::Table(t), Format::Json) => {
                let rows: Vec<Value> = t
                    .rows
                    .iter()
                    .map(|r| Value::Object(t.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect()))
                    .collect();
                let mut v = Map::new();
                v.insert("schema".into(), json!(t.schema));
                if !t.notes.is_empty() {
                    v.insert("notes".into(), json!(t.notes));
                }
                v.insert("columns".into(), json!(t.columns));
                v.insert("rows".into(), Value::Array(rows));
                Ok(pretty(&Value::Object(v)))
            }
            (Output::Record { schema, value }, Format::Json) => {
                let mut v = Map::new();
                v.insert("schema".into(), json!(schema));
                v.extend(value.clone());
                Ok(pretty(&Value::Object(v)))
            }
            (Output::Record { schema, value }, Format::Csv) => {
                let mut flat = Vec::new();
                flatten("", &Value::Object(value.clone()), &mut flat);
                let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
                w.write_record(["field", "value"]).map_err(CliError::io)?;
                for (k, v) in flat {
                    w.write_record([k, v]).map_err(CliError::io)?;
                }
                let body = String::from_utf8(w.into_inner().map_err(|e| CliError::io(e.into_error()))?)
                    .expect("csv output is utf-8");
                Ok(format!("# schema: {schema}\n{body}"))
            }
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Number(n) => out.push((prefix.to_string(), n.as_f64().map_or_else(|| n.to_string(), fmt_num))),
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Seconds since the epoch; `SOURCE_DATE_EPOCH` pins it for reproducible manifests.
fn timestamp() -> String {
    let secs = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse::<i64>().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs() as i64));
    let days = secs.div_euclid(86_400);
    let rem = secs.rem_euclid(86_400);
    // civil-from-days, proleptic Gregorian
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = yoe + era * 400 + i64::from(m <= 2);
    format!("{y:04}-{m:02}-{d:02}T{:02}:{:02}:{:02}Z", rem / 3600, rem % 3600 / 60, rem % 60)
}

pub struct Input {
    pub name: String,
    pub bytes: Vec<u8>,
}

pub fn manifest(subcommand: &str, parameters: Value, inputs: &[Input]) -> Value {
    json!({
        "schema": "dapkit.manifest/1",
        "subcommand": subcommand,
        "parameters": parameters,
        "inputs": inputs.iter().map(|i| json!({"name": i.name, "sha256": sha256_hex(&i.bytes)})).collect::<Vec<_>>(),
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": timestamp(),
    })
}

/// Writes the payload to `out` plus `<out>.manifest.json`, or the payload to stdout.
pub fn emit(payload: &str, out: Option<&Path>, manifest: &Value) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, payload).map_err(|e| CliError::file(path, e))?;
            let mut sidecar = path.as_os_str().to_owned();
            sidecar.push(".manifest.json");
            let sidecar = std::path::PathBuf::from(sidecar);
            std::fs::write(&sidecar, pretty(manifest)).map_err(|e| CliError::file(&sidecar, e))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(payload.as_bytes()).and_then(|()| stdout.flush()) {
                // a closed reader (`| head`) is not an error
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(CliError::io(e)),
                _ => {}
            }
        }
    }
    Ok(())
}
