//! Deterministic result emission: 17-significant-digit floats and embedded run manifests.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

/// Every float is written as `d.dddddddddddddddde±x`, which round-trips bit-exactly.
struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SeventeenDigits);
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Who produced a result file, and from what.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new<P: Serialize>(subcommand: &'static str, parameters: &P, seed: Option<u64>, outputs: Vec<String>) -> Self {
        Self {
            tool: "hal",
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            parameters: serde_json::to_value(parameters).expect("parameters serialize"),
            seed,
            outputs,
        }
    }

    /// Leading comment line for CSV outputs.
    pub fn csv_comment(&self) -> String {
        format!("# manifest: {}\n", to_json(self))
    }
}

/// JSON document with the manifest alongside the flattened payload.
#[derive(Serialize)]
pub struct Document<'a, T: Serialize> {
    pub manifest: &'a RunManifest,
    #[serde(flatten)]
    pub result: &'a T,
}

pub fn display_path(p: &Path) -> String {
    p.display().to_string()
}

/// Writes to `path`, or to standard output when absent.
pub fn emit(path: Option<&PathBuf>, contents: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, contents),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(contents.as_bytes())?;
            out.flush()
        }
    }
}

pub fn opt_f64(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

/// CSV body from pre-formatted fields.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV fields are UTF-8"))
}
