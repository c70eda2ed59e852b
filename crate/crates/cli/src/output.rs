use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::input::SCHEMA;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
    Svg,
}

/// How a finished command should exit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Verdict,
    HypothesisFailure,
    Undecided,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Verdict => 0,
            Status::HypothesisFailure => 2,
            Status::Undecided => 3,
        }
    }
}

#[derive(Debug, Default)]
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

    pub fn push<S: ToString>(&mut self, row: impl IntoIterator<Item = S>) {
        self.rows
            .push(row.into_iter().map(|s| s.to_string()).collect());
    }
}

/// Everything a subcommand produces, rendered afterwards in the requested format.
pub struct Artifact {
    pub command: &'static str,
    pub input: Value,
    pub result: Value,
    pub summary: Vec<String>,
    pub table: Table,
    pub svg: Option<String>,
    pub status: Status,
    pub verdicts: Vec<String>,
}

impl Artifact {
    pub fn new(command: &'static str, input: Value, result: impl Serialize) -> Self {
        Artifact {
            command,
            input,
            result: serde_json::to_value(result).expect("results serialize"),
            summary: Vec::new(),
            table: Table::default(),
            svg: None,
            status: Status::Verdict,
            verdicts: Vec::new(),
        }
    }

    pub fn line(&mut self, s: impl Into<String>) -> &mut Self {
        self.summary.push(s.into());
        self
    }

    pub fn verdict(&mut self, s: impl Into<String>) -> &mut Self {
        self.verdicts.push(s.into());
        self
    }

    pub fn json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "command": self.command,
            "input": self.input,
            "status": self.status,
            "result": self.result,
        })
    }

    pub fn render(&self, format: Format) -> Result<String, String> {
        match format {
            Format::Text => {
                let mut s = self.summary.join("\n");
                s.push('\n');
                Ok(s)
            }
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json()).expect("valid JSON");
                s.push('\n');
                Ok(s)
            }
            Format::Csv => {
                if self.table.header.is_empty() {
                    return Err(format!("{} has no tabular output", self.command));
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.table.header)
                    .map_err(|e| e.to_string())?;
                for r in &self.table.rows {
                    w.write_record(r).map_err(|e| e.to_string())?;
                }
                String::from_utf8(w.into_inner().map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())
            }
            Format::Svg => self
                .svg
                .clone()
                .ok_or_else(|| format!("{} has no SVG output; use the plot command", self.command)),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub schema: &'static str,
    pub command: &'a str,
    pub input_sha256: String,
    pub output_sha256: String,
    pub seed: u64,
    pub depth: Option<u32>,
    pub precision_bits: u32,
    pub mode: &'a str,
    pub wall_time_ms: u128,
    pub verdicts: &'a [String],
}

/// Writes the artifact to `out` (or stdout) and, for files, a sibling manifest.
pub fn emit(
    text: &str,
    out: Option<&Path>,
    manifest: impl FnOnce(String) -> Value,
) -> std::io::Result<()> {
    match out {
        None => std::io::stdout().write_all(text.as_bytes()),
        Some(p) => {
            fs::write(p, text)?;
            let m = manifest(sha256_hex(text.as_bytes()));
            let mut name = p.as_os_str().to_owned();
            name.push(".manifest.json");
            let mut body = serde_json::to_string_pretty(&m).expect("valid JSON");
            body.push('\n');
            fs::write(name, body)
        }
    }
}
