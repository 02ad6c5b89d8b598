//! File writers. Every file carries the tool version, master seed and config
//! hash: CSV files as leading `# key=value` lines, JSON files in a
//! `metadata` object.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const TOOL: &str = "hrc-risk";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub master_seed: u64,
    pub config_hash: String,
}

impl Metadata {
    pub fn new(command: &str, master_seed: u64, config_hash: String) -> Self {
        Self {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            command: command.to_string(),
            master_seed,
            config_hash,
        }
    }
}

#[derive(Serialize)]
struct Document<'a, T> {
    metadata: &'a Metadata,
    #[serde(flatten)]
    body: &'a T,
}

/// Output directory plus the metadata stamped on every file.
pub struct Output {
    dir: PathBuf,
    metadata: Metadata,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn create(dir: &Path, metadata: Metadata) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            metadata,
            written: Vec::new(),
        })
    }

    pub fn metadata(&self) -> &Metadata {
        &self.metadata
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    /// JSON object `{"metadata": ..., <fields of body>}`. `body` must serialize to an object.
    pub fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<(), CliError> {
        let doc = Document {
            metadata: &self.metadata,
            body,
        };
        let mut text = serde_json::to_string_pretty(&doc)
            .map_err(|e| CliError::Io(format!("encoding {name}: {e}")))?;
        text.push('\n');
        self.put(name, text.as_bytes())
    }

    pub fn csv<R, I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let mut bytes = self.comment_block().into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut bytes);
            let io = |e: csv::Error| CliError::Io(format!("encoding {name}: {e}"));
            w.write_record(header).map_err(io)?;
            for row in rows {
                w.write_record(row).map_err(io)?;
            }
            w.flush()?;
        }
        self.put(name, &bytes)
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let text = format!("{}{body}", self.comment_block());
        self.put(name, text.as_bytes())
    }

    fn comment_block(&self) -> String {
        let m = &self.metadata;
        format!(
            "# tool={} {}\n# command={}\n# master_seed={}\n# config_hash={}\n",
            m.tool, m.version, m.command, m.master_seed, m.config_hash
        )
    }
}

/// Formats an optional number; empty for `None`.
pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Reads the data rows of a CSV written by [`Output::csv`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    let io = |e: csv::Error| CliError::Io(format!("reading {}: {e}", path.display()));
    let header = reader.headers().map_err(io)?.iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.map(|r| r.iter().map(String::from).collect()).map_err(io))
        .collect::<Result<_, _>>()?;
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_metadata_and_rfc4180_quoting() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Output::create(dir.path(), Metadata::new("test", 7, "abc".into())).unwrap();
        out.csv("t.csv", &["a", "b"], [vec!["1".to_string(), "x,y".to_string()]]).unwrap();
        let text = fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert!(text.starts_with("# tool=hrc-risk"));
        assert!(text.contains("# master_seed=7\n# config_hash=abc\n"));
        assert!(text.ends_with("a,b\n1,\"x,y\"\n"));
        let (header, rows) = read_csv(&dir.path().join("t.csv")).unwrap();
        assert_eq!(header, vec!["a", "b"]);
        assert_eq!(rows, vec![vec!["1".to_string(), "x,y".to_string()]]);
    }

    #[test]
    fn json_embeds_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Output::create(dir.path(), Metadata::new("test", 7, "abc".into())).unwrap();
        #[derive(Serialize)]
        struct Body {
            value: f64,
        }
        out.json("t.json", &Body { value: 0.5 }).unwrap();
        let v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
        assert_eq!(v["metadata"]["master_seed"], 7);
        assert_eq!(v["metadata"]["version"], VERSION);
        assert_eq!(v["value"], 0.5);
    }
}
