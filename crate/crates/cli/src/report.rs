use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::Resolved;
use crate::error::CliError;
use crate::suites::CheckResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Serialize)]
pub struct ReportConfig<'a> {
    pub suite: &'static str,
    #[serde(flatten)]
    pub resolved: &'a Resolved,
}

/// Wall-clock seconds per suite; present only when requested, so default
/// reports stay byte-identical across runs.
pub type Timing = Option<BTreeMap<&'static str, f64>>;

#[derive(Serialize)]
pub struct Report<'a> {
    pub config: ReportConfig<'a>,
    pub results: Vec<CheckResult>,
    pub details: BTreeMap<String, Value>,
    pub timing: Timing,
}

impl Report<'_> {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let mut v = serde_json::to_vec_pretty(self).map_err(|e| CliError::Output(e.to_string()))?;
        v.push(b'\n');
        Ok(v)
    }

    /// One row per check, then one `frame` row per plane vector.
    pub fn to_csv(&self, frame: &[(usize, f64, f64)]) -> Result<Vec<u8>, CliError> {
        #[derive(Serialize)]
        struct Row<'a> {
            record: &'a str,
            suite: &'a str,
            name: &'a str,
            value: Option<f64>,
            expected: Option<f64>,
            tolerance: Option<f64>,
            pass: Option<bool>,
            x: Option<f64>,
            y: Option<f64>,
        }
        let out = |e: csv::Error| CliError::Output(e.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.results {
            w.serialize(Row {
                record: "check",
                suite: r.suite,
                name: &r.name,
                value: Some(r.value),
                expected: r.expected,
                tolerance: r.tolerance,
                pass: Some(r.pass),
                x: None,
                y: None,
            })
            .map_err(out)?;
        }
        for (i, x, y) in frame {
            let name = format!("Z_{i}");
            w.serialize(Row {
                record: "frame",
                suite: "plane",
                name: &name,
                value: None,
                expected: None,
                tolerance: None,
                pass: None,
                x: Some(*x),
                y: Some(*y),
            })
            .map_err(out)?;
        }
        w.into_inner().map_err(|e| CliError::Output(e.to_string()))
    }
}

/// Write through a sibling temporary file and rename, so a failed write
/// leaves nothing behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::Output(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => std::env::current_dir().map_err(fail)?,
    };
    if path.is_dir() {
        return Err(CliError::Output(format!("{} is a directory", path.display())));
    }
    let file_name = path.file_name().ok_or_else(|| CliError::Output(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", file_name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(fail(e));
    }
    Ok(())
}
