use std::path::PathBuf;

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, EXIT_FAILED, EXIT_OK};
use crate::json;
use crate::verify::SCHEMA;

#[derive(Debug, clap::Args)]
pub struct MergeArgs {
    /// Verification reports to combine
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct Merged {
    schema: u32,
    entries: usize,
    passed: usize,
    failed: usize,
    status: &'static str,
    reports: Vec<Value>,
}

fn read_report(path: &PathBuf) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if v.get("schema").and_then(Value::as_u64) != Some(SCHEMA as u64) || v.get("entry_id").is_none() || v.get("status").is_none() {
        return Err(CliError::Config(format!("{}: not a schema-{SCHEMA} verification report", path.display())));
    }
    Ok(v)
}

pub fn run(args: &MergeArgs) -> Result<i32, CliError> {
    let mut reports = args.reports.iter().map(read_report).collect::<Result<Vec<_>, _>>()?;
    reports.sort_by(|a, b| a["entry_id"].as_str().cmp(&b["entry_id"].as_str()));
    let passed = reports.iter().filter(|r| r["status"] == "pass").count();
    let failed = reports.len() - passed;
    let merged = Merged {
        schema: SCHEMA,
        entries: reports.len(),
        passed,
        failed,
        status: if failed == 0 { "pass" } else { "fail" },
        reports,
    };
    json::write_file(&args.out, &merged)?;
    println!("{passed}/{} reports pass -> {}", merged.entries, args.out.display());
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILED })
}
