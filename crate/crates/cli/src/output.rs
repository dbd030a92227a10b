//! Artifact writing: `<out>/<command>/<name>.<ext>` plus `<out>/manifest.json`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use rfcoh::correlations::{CSV_SCHEMA, JSON_SCHEMA_VERSION};

use crate::config::Format;
use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";

/// Column table written as CSV (versioned comment line, then header) or as
/// JSON with `schema_version`. Non-finite numbers become empty cells / null.
#[derive(Clone, Debug)]
pub struct Table {
    pub kind: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

impl Table {
    pub fn new(kind: &str, columns: &[&str]) -> Self {
        Table {
            kind: kind.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&x| num(x)).collect());
    }

    pub fn to_csv(&self) -> String {
        let cell = |v: &Value| match v {
            Value::Null => String::new(),
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        let mut out = format!("# {CSV_SCHEMA} {}\n{}\n", self.kind, self.columns.join(","));
        for row in &self.rows {
            out.push_str(&row.iter().map(cell).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let v = serde_json::json!({
            "schema_version": JSON_SCHEMA_VERSION,
            "kind": self.kind,
            "columns": self.columns,
            "rows": self.rows,
        });
        serde_json::to_string_pretty(&v).expect("table serializes") + "\n"
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the output root, `/`-separated.
    pub path: String,
    pub command: String,
    pub config_hash: String,
    pub sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    schema_version: u32,
    artifacts: Vec<Artifact>,
}

/// Writer for one command run.
pub struct Output {
    root: PathBuf,
    command: String,
    config_hash: String,
    pub format: Format,
    artifacts: Vec<Artifact>,
}

impl Output {
    pub fn create(root: &Path, command: &str, config_hash: String, format: Format) -> CliResult<Self> {
        let dir = root.join(command);
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Output {
            root: root.to_path_buf(),
            command: command.into(),
            config_hash,
            format,
            artifacts: Vec::new(),
        })
    }

    pub fn dir(&self) -> PathBuf {
        self.root.join(&self.command)
    }

    pub fn path_of(&self, file: &str) -> PathBuf {
        self.dir().join(file)
    }

    /// Writes `bytes` as `file` inside the command directory.
    pub fn write(&mut self, file: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.path_of(file);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.record(file)?;
        Ok(path)
    }

    /// Registers a file already written into the command directory.
    pub fn record(&mut self, file: &str) -> CliResult<()> {
        let path = self.path_of(file);
        let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        self.artifacts.retain(|a| a.path != format!("{}/{file}", self.command));
        self.artifacts.push(Artifact {
            path: format!("{}/{file}", self.command),
            command: self.command.clone(),
            config_hash: self.config_hash.clone(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(())
    }

    /// Writes `table` as `<name>.csv` or `<name>.json` per the run format.
    pub fn table(&mut self, name: &str, table: &Table) -> CliResult<PathBuf> {
        let text = match self.format {
            Format::Csv => table.to_csv(),
            Format::Json => table.to_json(),
        };
        self.write(&format!("{name}.{}", self.format.ext()), text.as_bytes())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<PathBuf> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numeric(e.to_string()))? + "\n";
        self.write(&format!("{name}.json"), text.as_bytes())
    }

    /// Merges this run into the manifest, replacing earlier entries of the
    /// same command.
    pub fn finish(self) -> CliResult<Vec<Artifact>> {
        let path = self.root.join(MANIFEST);
        let mut entries: BTreeMap<String, Artifact> = BTreeMap::new();
        if path.exists() {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let old: Manifest = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            for a in old.artifacts.into_iter().filter(|a| a.command != self.command) {
                entries.insert(a.path.clone(), a);
            }
        }
        for a in &self.artifacts {
            entries.insert(a.path.clone(), a.clone());
        }
        let manifest = Manifest {
            schema_version: JSON_SCHEMA_VERSION,
            artifacts: entries.into_values().collect(),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(self.artifacts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_versioned_header_and_blank_nan() {
        let mut t = Table::new("demo", &["a", "b"]);
        t.push_numbers(&[1.5, f64::NAN]);
        assert_eq!(t.to_csv(), "# rfcoh-csv v1 demo\na,b\n1.5,\n");
        assert!(t.to_json().contains("\"schema_version\": 1"));
    }

    #[test]
    fn manifest_merges_commands() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Output::create(dir.path(), "one", "h1".into(), Format::Csv).unwrap();
        a.write("x.csv", b"1").unwrap();
        a.finish().unwrap();
        let mut b = Output::create(dir.path(), "two", "h2".into(), Format::Csv).unwrap();
        b.write("y.csv", b"2").unwrap();
        b.finish().unwrap();
        let mut a = Output::create(dir.path(), "one", "h3".into(), Format::Csv).unwrap();
        a.write("z.csv", b"3").unwrap();
        a.finish().unwrap();
        let m: Manifest = serde_json::from_str(&std::fs::read_to_string(dir.path().join(MANIFEST)).unwrap()).unwrap();
        let paths: Vec<_> = m.artifacts.iter().map(|a| a.path.as_str()).collect();
        assert_eq!(paths, ["one/z.csv", "two/y.csv"]);
        assert_eq!(m.artifacts[0].config_hash, "h3");
    }
}
