//! CSV tables and JSON metadata files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

/// Fixed formatting for every floating point cell.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.12e}")
}

/// Output directory that must already exist.
pub fn out_dir(path: Option<&Path>) -> Result<PathBuf> {
    let dir = path.ok_or_else(|| Error::Config("--out DIR is required".into()))?;
    if !dir.is_dir() {
        return Err(Error::Config(format!(
            "output directory {} does not exist",
            dir.display()
        )));
    }
    Ok(dir.to_path_buf())
}

/// Buffered CSV table: `#` comment lines, a header, then rows.
pub struct Csv {
    out: BufWriter<File>,
    columns: usize,
}

impl Csv {
    pub fn create(path: &Path, comments: &[&str], header: &[&str]) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "{}", header.join(","))?;
        Ok(Self {
            out,
            columns: header.len(),
        })
    }

    pub fn row(&mut self, cells: &[String]) -> Result<()> {
        debug_assert_eq!(cells.len(), self.columns);
        writeln!(self.out, "{}", cells.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Collects the metadata written next to the CSV files.
pub struct Metadata {
    started: Instant,
    fields: Map<String, Value>,
}

impl Metadata {
    pub fn new(command: &str) -> Self {
        let mut fields = Map::new();
        fields.insert("command".into(), json!(command));
        fields.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        Self {
            started: Instant::now(),
            fields,
        }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.fields.insert(key.into(), value);
    }

    pub fn write(mut self, path: &Path) -> Result<()> {
        self.fields.insert(
            "wall_time_s".into(),
            json!(self.started.elapsed().as_secs_f64()),
        );
        let text = serde_json::to_string_pretty(&Value::Object(self.fields))
            .map_err(|e| Error::Config(format!("metadata serialization: {e}")))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut csv = Csv::create(&path, &["units: E0"], &["a", "b"]).unwrap();
        csv.row(&["1".into(), fmt_f64(0.5)]).unwrap();
        csv.finish().unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "# units: E0\na,b\n1,5.000000000000e-1\n");
    }

    #[test]
    fn missing_directory_is_a_config_error() {
        let err = out_dir(Some(Path::new("/nonexistent/dir"))).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(matches!(out_dir(None).unwrap_err(), Error::Config(_)));
    }
}
