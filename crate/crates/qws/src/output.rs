//! Result serialization. Every artifact is written atomically (temp file
//! in the target directory, then rename) and carries the same metadata:
//! version, subcommand, config hash, and resolved tolerance values.

use std::io::Write;
use std::path::Path;

use crate::errors::{CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Metadata stamped into every output file: `#`-prefixed lines in CSV,
/// a `meta` object in JSON, an XML comment in SVG.
#[derive(Debug, Clone)]
pub struct Meta {
    pub subcommand: &'static str,
    pub config_sha256: String,
    /// Extra key = value pairs (resolved boundary, tolerances, seeds).
    pub lines: Vec<(String, String)>,
}

impl Meta {
    pub fn new(subcommand: &'static str, config_sha256: &str) -> Self {
        Meta {
            subcommand,
            config_sha256: config_sha256.to_string(),
            lines: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn with(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        self.push(key, value);
        self
    }

    pub fn comment_block(&self) -> String {
        let mut s = format!(
            "# qws {} {}\n# config_sha256 = {}\n",
            VERSION, self.subcommand, self.config_sha256
        );
        for (k, v) in &self.lines {
            s.push_str(&format!("# {k} = {v}\n"));
        }
        s
    }

    pub fn json_object(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        map.insert("version".into(), VERSION.into());
        map.insert("subcommand".into(), self.subcommand.into());
        map.insert("config_sha256".into(), self.config_sha256.clone().into());
        for (k, v) in &self.lines {
            map.insert(k.clone(), v.clone().into());
        }
        serde_json::Value::Object(map)
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path)
        .map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// CSV dialect: `#` metadata lines, then a header row, then comma/LF rows.
pub fn write_csv<I>(path: &Path, meta: &Meta, header: &str, rows: I) -> Result<()>
where
    I: IntoIterator<Item = String>,
{
    let mut body = meta.comment_block();
    body.push_str(header);
    body.push('\n');
    for row in rows {
        body.push_str(&row);
        body.push('\n');
    }
    write_atomic(path, body.as_bytes())
}

/// JSON documents are pure JSON; the metadata rides in a `meta` member
/// injected into the top-level object.
pub fn write_json(path: &Path, meta: &Meta, value: serde_json::Value) -> Result<()> {
    let mut value = value;
    if let serde_json::Value::Object(map) = &mut value {
        map.insert("meta".into(), meta.json_object());
    }
    let mut body = serde_json::to_string_pretty(&value).expect("value serializes");
    body.push('\n');
    write_atomic(path, body.as_bytes())
}

/// Scientific notation with 17 significant digits: enough to round-trip
/// any f64, so reruns are byte-identical.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}
