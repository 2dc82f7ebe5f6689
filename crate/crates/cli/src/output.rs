//! Deterministic file emission: CSVs with a config preamble, LF endings and
//! '.' decimals; JSON with the resolved config embedded.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub struct OutputDir {
    dir: PathBuf,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// CSV with `# config: {...}` and `# seed: n` comment lines ahead of the
    /// header row.
    pub fn write_csv<I>(
        &self,
        name: &str,
        config_json: &str,
        seed: u64,
        header: &str,
        rows: I,
    ) -> Result<PathBuf>
    where
        I: IntoIterator<Item = String>,
    {
        let mut text = String::new();
        writeln!(text, "# config: {config_json}").unwrap();
        writeln!(text, "# seed: {seed}").unwrap();
        writeln!(text, "{header}").unwrap();
        for row in rows {
            writeln!(text, "{row}").unwrap();
        }
        let path = self.path(name);
        std::fs::write(&path, text)
            .with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).context("serialize output")?;
        text.push('\n');
        let path = self.path(name);
        std::fs::write(&path, text)
            .with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}

/// Join floats for a single CSV cell without colliding with the separator.
pub fn join_cell(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}
