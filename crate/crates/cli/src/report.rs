use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// One table cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

/// Shortest round-trip float text.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        ryu::Buffer::new().format_finite(v).to_owned()
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(v) => format_float(*v),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
        }
    }
}

/// A checked quantity: passes when `value <= tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Invariant {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl Invariant {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        // non-finite values fail and are stored as the largest float so JSON stays numeric
        let finite = value.is_finite();
        let value = if finite { value } else { f64::MAX };
        Self { name: name.into(), pass: finite && value <= tolerance, value, tolerance }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub version: String,
}

impl Manifest {
    pub fn for_config(cfg: &RunConfig) -> Result<Self> {
        let canonical = serde_json::to_string(cfg)?;
        let digest = Sha256::digest(canonical.as_bytes());
        let mut hash = String::with_capacity(64);
        for b in digest {
            let _ = write!(hash, "{b:02x}");
        }
        Ok(Self { config_hash: hash, version: env!("CARGO_PKG_VERSION").into() })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub experiment: String,
    pub config: RunConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub invariants: Vec<Invariant>,
    pub manifest: Manifest,
}

impl ReportRecord {
    pub fn passed(&self) -> bool {
        self.invariants.iter().all(|i| i.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Invariant> {
        self.invariants.iter().filter(|i| !i.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Run metadata written next to the report. Unlike the report it holds
/// wall-clock data, so it differs between identical runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub report: String,
    pub config_hash: String,
    pub version: String,
    pub passed: bool,
    pub timestamp_unix: u64,
    pub duration_seconds: f64,
}

/// Write the report and its run manifest into `dir`; returns both paths.
pub fn emit(report: &ReportRecord, format: Format, dir: &Path, duration: Duration) -> Result<(PathBuf, PathBuf)> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let report_path = dir.join(format!("{}.{}", report.experiment, format.extension()));
    let body = match format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json()?,
    };
    fs::write(&report_path, body).map_err(io(&report_path))?;

    let run = RunManifest {
        experiment: report.experiment.clone(),
        report: report_path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        config_hash: report.manifest.config_hash.clone(),
        version: report.manifest.version.clone(),
        passed: report.passed(),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        duration_seconds: duration.as_secs_f64(),
    };
    let manifest_path = dir.join(format!("{}.manifest.json", report.experiment));
    let mut text = serde_json::to_string_pretty(&run)?;
    text.push('\n');
    fs::write(&manifest_path, text).map_err(io(&manifest_path))?;
    Ok((report_path, manifest_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn sample() -> ReportRecord {
        let config = parse_config("[[momenta]]\nlabel = 0\nomega = 1.0\nepsilon = 0.3\n").unwrap();
        ReportRecord {
            experiment: "sample".into(),
            manifest: Manifest::for_config(&config).unwrap(),
            config,
            columns: vec!["check".into(), "value".into(), "pass".into()],
            rows: vec![
                vec!["a,b".into(), 0.1.into(), true.into()],
                vec!["plain".into(), 1e-300.into(), false.into()],
                vec![Cell::Int(3), 2.0.into(), true.into()],
            ],
            invariants: vec![Invariant::at_most("x", 0.5, 1.0), Invariant::at_most("y", f64::NAN, 1.0)],
        }
    }

    #[test]
    fn floats_use_shortest_round_trip() {
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(1e-10), "1e-10");
        assert_eq!(format_float(2.0), "2.0");
        let x = 0.1 + 0.2;
        assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        assert_eq!(csv, "check,value,pass\n\"a,b\",0.1,true\nplain,1e-300,false\n3,2.0,true\n");
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        assert_eq!(ReportRecord::from_json(&r.to_json().unwrap()).unwrap(), r);
    }

    #[test]
    fn invariant_verdicts() {
        let r = sample();
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
        assert_eq!(r.invariants[1].value, f64::MAX);
        assert!(Invariant::at_most("exact", 0.0, 0.0).pass);
    }

    #[test]
    fn config_hash_is_stable() {
        let a = sample().manifest;
        assert_eq!(a, sample().manifest);
        assert_eq!(a.config_hash.len(), 64);
    }

    #[test]
    fn unwritable_destination_is_an_io_error() {
        let file = std::env::temp_dir().join(format!("qvac-report-blocker-{}", std::process::id()));
        fs::write(&file, "").unwrap();
        let err = emit(&sample(), Format::Csv, &file.join("sub"), Duration::ZERO).unwrap_err();
        assert!(matches!(err, CliError::Io { .. }));
        fs::remove_file(file).unwrap();
    }
}
