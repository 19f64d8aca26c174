//! Flat records rendered as CSV or JSON.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use serde_json::{Map, Number, Value as Json};

use crate::config::{Format, Settings};
use crate::error::CliError;

pub const DECIMALS: usize = 6;
pub const TABLE_DECIMALS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Missing,
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Self::Num(v)
    }
}

impl From<Option<f64>> for Value {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Self::Missing, Self::Num)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Self::Int(v as u64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Self::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Self::Text(v)
    }
}

pub fn round(v: f64, decimals: usize) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (v * scale).round() / scale
}

impl Value {
    fn csv(&self, decimals: usize) -> String {
        match self {
            Self::Num(v) if v.is_finite() => format!("{v:.decimals$}"),
            Self::Num(v) => v.to_string(),
            Self::Int(v) => v.to_string(),
            Self::Text(s) => s.clone(),
            Self::Bool(b) => b.to_string(),
            Self::Missing => String::new(),
        }
    }

    fn json(&self, decimals: usize) -> Json {
        match self {
            Self::Num(v) => match Number::from_f64(round(*v, decimals)) {
                Some(n) => Json::Number(n),
                None => Json::String(v.to_string()),
            },
            Self::Int(v) => Json::from(*v),
            Self::Text(s) => Json::String(s.clone()),
            Self::Bool(b) => Json::Bool(*b),
            Self::Missing => Json::Null,
        }
    }
}

/// One output row: ordered `(column, value)` pairs.
#[derive(Debug, Clone, Default)]
pub struct Record(pub Vec<(&'static str, Value)>);

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &'static str, v: impl Into<Value>) -> Self {
        self.0.push((key, v.into()));
        self
    }

    fn json(&self, decimals: usize) -> Json {
        let mut m = Map::new();
        for (k, v) in &self.0 {
            m.insert((*k).to_string(), v.json(decimals));
        }
        Json::Object(m)
    }
}

pub fn writer(settings: &Settings) -> Result<Box<dyn Write>, CliError> {
    Ok(match &settings.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes `rows` in the configured format; a single row becomes a JSON object.
pub fn emit(settings: &Settings, rows: &[Record]) -> Result<(), CliError> {
    let mut out = writer(settings)?;
    match settings.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            if let Some(first) = rows.first() {
                w.write_record(first.0.iter().map(|(k, _)| *k))?;
            }
            for r in rows {
                w.write_record(r.0.iter().map(|(_, v)| v.csv(DECIMALS)))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let doc = match rows {
                [one] => one.json(DECIMALS),
                _ => Json::Array(rows.iter().map(|r| r.json(DECIMALS)).collect()),
            };
            write_json(&mut out, &doc)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_json(out: &mut dyn Write, doc: &Json) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, doc).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}
