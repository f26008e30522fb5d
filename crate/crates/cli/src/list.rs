use std::path::PathBuf;

use superint::catalog::{self, EntrySummary};

use crate::error::{CliError, EXIT_OK};
use crate::json;

#[derive(Debug, clap::Args)]
pub struct ListArgs {
    /// Entry id or Table-1 label; a trailing `*` or `.` matches a prefix
    #[arg(long)]
    pub filter: Option<String>,
    /// Print the rows as JSON
    #[arg(long)]
    pub json: bool,
    /// Write the markdown catalog reference to this path
    #[arg(long, num_args = 0..=1, default_missing_value = "docs/catalog-reference.md")]
    pub reference: Option<PathBuf>,
}

pub fn matches(e: &EntrySummary, filter: &str) -> bool {
    let f = filter.trim().to_ascii_lowercase();
    let id = e.id.to_ascii_lowercase();
    let label = e.table1_label.map(str::to_ascii_lowercase);
    if let Some(prefix) = f.strip_suffix('*') {
        return id.starts_with(prefix) || label.as_deref().is_some_and(|l| l.starts_with(prefix));
    }
    if f.ends_with('.') {
        return id.starts_with(&f);
    }
    id == f || label.as_deref() == Some(f.as_str())
}

fn schema(e: &EntrySummary) -> String {
    e.params
        .iter()
        .map(|p| match p.default {
            Some(d) => format!("{}={d}", p.name),
            None => format!("{}?", p.name),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn run(args: &ListArgs) -> Result<i32, CliError> {
    if let Some(path) = &args.reference {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, catalog::reference_document())?;
        eprintln!("wrote {}", path.display());
    }
    let rows: Vec<EntrySummary> = catalog::list_entries()
        .into_iter()
        .filter(|e| args.filter.as_deref().is_none_or(|f| matches(e, f)))
        .collect();
    if args.json {
        print!("{}", json::to_string(&rows)?);
        return Ok(EXIT_OK);
    }
    if args.reference.is_some() && args.filter.is_none() {
        return Ok(EXIT_OK);
    }
    for e in &rows {
        println!(
            "{:<5} {:<4} {:<40} {}",
            e.id,
            e.table1_label.unwrap_or("-"),
            schema(e),
            e.integral_labels.join("; ")
        );
    }
    Ok(EXIT_OK)
}
