use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

/// Which variant of an entry to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Classical,
    Quantum,
    Both,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub entry: EntrySection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub trajectory: TrajectorySection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntrySection {
    pub id: Option<String>,
    #[serde(default)]
    pub ids: Vec<String>,
    pub mode: Option<Mode>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub x: Option<(f64, f64)>,
    pub y: Option<(f64, f64)>,
    pub margin: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySection {
    pub state: Option<[f64; 4]>,
    pub t_end: Option<f64>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else { return Ok(FileConfig::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// A decimal number or a ratio such as `-1/18`.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let bad = || format!("`{s}` is not a number");
    if let Some((n, d)) = s.split_once('/') {
        let n: f64 = n.trim().parse().map_err(|_| bad())?;
        let d: f64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0.0 {
            return Err(format!("`{s}` divides by zero"));
        }
        return Ok(n / d);
    }
    s.parse().map_err(|_| bad())
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(parse_number).collect()
}

pub fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    match parse_list(s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        v => Err(format!("expected two comma-separated numbers, got {}", v.len())),
    }
}

pub fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    parse_list(s)?.try_into().map_err(|v: Vec<f64>| format!("expected three comma-separated numbers, got {}", v.len()))
}

pub fn parse_state(s: &str) -> Result<[f64; 4], String> {
    parse_list(s)?.try_into().map_err(|v: Vec<f64>| format!("expected x,y,px,py, got {} numbers", v.len()))
}

/// `name=value`
pub fn parse_assignment(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("`{s}` is not of the form name=value"))?;
    Ok((k.trim().to_string(), parse_number(v)?))
}
