//! Flat key/value report documents.
//!
//! One line per entry, keys sorted, floats printed with 17 significant
//! digits so the document parses back to bit-identical values. Identical
//! runs produce byte-identical files, which makes acceptance runs diffable.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{bail, Context};

const HEADER: &str = "# adlab report v1";

#[derive(Debug, Clone, PartialEq)]
pub enum ReportValue {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

/// A report is an ordered map from dotted keys to scalar values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportDoc {
    entries: BTreeMap<String, ReportValue>,
}

impl ReportDoc {
    pub fn new() -> Self {
        ReportDoc::default()
    }

    pub fn put_f64(&mut self, key: impl Into<String>, value: f64) {
        self.entries.insert(key.into(), ReportValue::Float(value));
    }

    pub fn put_int(&mut self, key: impl Into<String>, value: i64) {
        self.entries.insert(key.into(), ReportValue::Int(value));
    }

    pub fn put_bool(&mut self, key: impl Into<String>, value: bool) {
        self.entries.insert(key.into(), ReportValue::Bool(value));
    }

    pub fn put_text(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.insert(key.into(), ReportValue::Text(value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&ReportValue> {
        self.entries.get(key)
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        match self.entries.get(key) {
            Some(ReportValue::Float(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn get_int(&self, key: &str) -> Option<i64> {
        match self.entries.get(key) {
            Some(ReportValue::Int(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn get_bool(&self, key: &str) -> Option<bool> {
        match self.entries.get(key) {
            Some(ReportValue::Bool(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(HEADER);
        out.push('\n');
        for (key, value) in &self.entries {
            match value {
                ReportValue::Float(v) => {
                    let _ = writeln!(out, "{key} = {v:.16e}");
                }
                ReportValue::Int(v) => {
                    let _ = writeln!(out, "{key} = {v}");
                }
                ReportValue::Bool(v) => {
                    let _ = writeln!(out, "{key} = {v}");
                }
                ReportValue::Text(v) => {
                    let _ = writeln!(out, "{key} = \"{}\"", escape(v));
                }
            }
        }
        out
    }

    pub fn parse(text: &str) -> anyhow::Result<ReportDoc> {
        let mut doc = ReportDoc::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, raw) = line
                .split_once(" = ")
                .with_context(|| format!("line {}: missing ' = '", idx + 1))?;
            let value = parse_value(raw)
                .with_context(|| format!("line {}: bad value {raw:?}", idx + 1))?;
            if doc.entries.insert(key.to_owned(), value).is_some() {
                bail!("line {}: duplicate key {key:?}", idx + 1);
            }
        }
        Ok(doc)
    }
}

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}

fn unescape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(ch) = chars.next() {
        if ch != '\\' {
            out.push(ch);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

fn parse_value(raw: &str) -> anyhow::Result<ReportValue> {
    if let Some(stripped) = raw.strip_prefix('"') {
        let Some(inner) = stripped.strip_suffix('"') else {
            bail!("unterminated string");
        };
        return Ok(ReportValue::Text(unescape(inner)));
    }
    match raw {
        "true" => return Ok(ReportValue::Bool(true)),
        "false" => return Ok(ReportValue::Bool(false)),
        _ => {}
    }
    if let Ok(v) = raw.parse::<i64>() {
        return Ok(ReportValue::Int(v));
    }
    Ok(ReportValue::Float(raw.parse::<f64>()?))
}
