//! CSV/JSON artifacts and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bzl_core::C64;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliResult;

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Int(i64),
    Text(&'static str),
    Empty,
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Num(x)
    }
}

impl From<i64> for Field {
    fn from(x: i64) -> Self {
        Field::Int(x)
    }
}

impl From<Option<f64>> for Field {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Field::Empty, Field::Num)
    }
}

/// 17 significant digits in scientific notation; bit-exact round trip.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// In-memory CSV with a header row and LF line endings.
#[derive(Debug, Clone)]
pub struct Csv {
    columns: usize,
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self {
            columns: header.len(),
            text,
        }
    }

    pub fn row<const N: usize>(&mut self, fields: [Field; N]) {
        debug_assert_eq!(N, self.columns);
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match f {
                Field::Num(x) => self.text.push_str(&fmt_num(*x)),
                Field::Int(n) => write!(self.text, "{n}").unwrap(),
                Field::Text(s) => self.text.push_str(s),
                Field::Empty => {}
            }
        }
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// `{"re": …, "im": …}`.
pub fn complex(z: C64) -> Value {
    // `+ 0.0` turns −0 into 0 for readability.
    json!({ "re": z.re + 0.0, "im": z.im + 0.0 })
}

/// A file to emit, relative to the output directory.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn csv(name: impl Into<String>, csv: Csv) -> Self {
        Self {
            name: name.into(),
            contents: csv.into_string(),
        }
    }
}

/// Result of one command before anything touches the disk.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    /// Every resolved parameter, defaults included.
    pub params: Map<String, Value>,
    pub summary: Map<String, Value>,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.params
            .insert(key.into(), serde_json::to_value(value).expect("serializable"));
    }

    pub fn report(&mut self, key: &str, value: impl Serialize) {
        self.summary
            .insert(key.into(), serde_json::to_value(value).expect("serializable"));
    }

    /// Nest several outcomes under labels, prefixing their file names.
    pub fn combine(parts: Vec<(String, Outcome)>) -> Self {
        let mut out = Outcome::default();
        for (label, part) in parts {
            out.params.insert(label.clone(), Value::Object(part.params));
            out.summary.insert(label.clone(), Value::Object(part.summary));
            out.artifacts.extend(part.artifacts.into_iter().map(|a| Artifact {
                name: format!("{label}_{}", a.name),
                contents: a.contents,
            }));
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub params: Map<String, Value>,
    pub version: String,
    pub outputs: Vec<OutputEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            write!(s, "{b:02x}").unwrap();
            s
        })
}

/// Writes the artifacts, `summary.json` and `manifest.json` into `dir`.
/// Returns the manifest path.
pub fn write_outcome(dir: &Path, command: &str, outcome: &Outcome) -> CliResult<PathBuf> {
    fs::create_dir_all(dir)?;
    let summary = serde_json::to_string_pretty(&json!({ "command": command, "summary": outcome.summary }))
        .expect("serializable")
        + "\n";
    let mut outputs = Vec::new();
    for (name, contents) in outcome
        .artifacts
        .iter()
        .map(|a| (a.name.as_str(), a.contents.as_str()))
        .chain([("summary.json", summary.as_str())])
    {
        fs::write(dir.join(name), contents)?;
        outputs.push(OutputEntry {
            path: name.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
        });
    }
    let manifest = Manifest {
        command: command.to_string(),
        params: outcome.params.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        outputs,
    };
    let path = dir.join("manifest.json");
    fs::write(
        &path,
        serde_json::to_string_pretty(&manifest).expect("serializable") + "\n",
    )?;
    Ok(path)
}
