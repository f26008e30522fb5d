use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use superint::catalog::{self, Instance, Regime};
use superint::dynamics::{self, DriftReport, Event, SINGULARITY_MARGIN};
use superint::implicit::{self, ImplicitRelation};
use superint::{ParamSet, PhaseState};

use crate::config::{self, Mode};
use crate::error::{CliError, EXIT_FAILED, EXIT_OK, EXIT_SINGULAR};
use crate::json;
use crate::verify::SCHEMA;

pub const DEFAULT_T_END: f64 = 100.0;
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Debug, clap::Args)]
pub struct TrajectoryArgs {
    pub entry: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "param", short = 'p')]
    pub params: Vec<String>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Initial state `x,y,px,py`
    #[arg(long, allow_hyphen_values = true)]
    pub state: Option<String>,
    /// Final time
    #[arg(long = "t")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Number of random initial states drawn from the entry's sampling box
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// List the real roots at the seed abscissa and which branches trace
    #[arg(long)]
    pub seed_scan: bool,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct BranchInfo {
    pub branch: usize,
    pub v1_at_seed: f64,
    pub traceable: bool,
    pub trace_max_residual: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct SeedScan {
    pub seed_x: f64,
    pub selected: usize,
    pub branches: Vec<BranchInfo>,
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub state0: [f64; 4],
    pub samples: usize,
    pub completed: bool,
    pub events: Vec<Event>,
    pub drift: DriftReport,
    pub max_relative_drift: f64,
    pub passed: bool,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct TrajectorySummary {
    pub schema: u32,
    pub entry_id: String,
    pub params: BTreeMap<String, f64>,
    pub t_end: f64,
    pub tol: f64,
    pub seed: u64,
    pub drift_threshold: f64,
    pub runs: Vec<RunSummary>,
    pub metadata: BTreeMap<String, f64>,
    pub seed_scan: Option<SeedScan>,
    pub status: &'static str,
}

fn seed_scan(id: &str, ps: &ParamSet) -> Result<SeedScan, CliError> {
    if id != "C.6" {
        return Err(CliError::Config(format!("--seed-scan applies to the multi-branch entry C.6, not {id}")));
    }
    let resolved = catalog::instantiate(id, &ParamSet::new())?.params;
    let get = |k: &str| ps.get(k).or(resolved.get(k)).unwrap_or(0.0);
    let rel = ImplicitRelation::CaseI { a: get("a"), c: get("c"), d: get("d") };
    let seed_x = get("seed_x");
    let roots = rel.scan_roots(seed_x, (-20.0, 20.0), implicit::SCAN_STEP);
    let branches = roots
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let mut trial = ps.clone();
            let built = trial.set("branch", k as f64).map_err(CliError::from).and_then(|_| Ok(catalog::instantiate(id, &trial)?));
            match built {
                Ok(inst) => BranchInfo {
                    branch: k,
                    v1_at_seed: v,
                    traceable: true,
                    trace_max_residual: inst.metadata.get("trace_max_residual").copied(),
                    error: None,
                },
                Err(e) => BranchInfo { branch: k, v1_at_seed: v, traceable: false, trace_max_residual: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    Ok(SeedScan { seed_x, selected: get("branch") as usize, branches })
}

fn csv_path(base: &Path, k: usize, n: usize) -> PathBuf {
    if n == 1 {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("trajectory");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}-{k}.{ext}"))
}

fn instance(id: &str, params: &BTreeMap<String, f64>, mode: Mode) -> Result<Instance, CliError> {
    let entry = catalog::find(id)?;
    let mut ps = ParamSet::try_from(params.clone())?;
    match (entry.regime, mode) {
        (_, Mode::Quantum | Mode::Both) => {
            return Err(CliError::Mode(format!("{id}: trajectories are classical; quantum mode is not integrable here")))
        }
        (Regime::Quantum, Mode::Classical) => {
            if entry.params.iter().any(|p| p.name == "hbar") {
                ps.set("hbar", 0.0)?;
            }
        }
        (Regime::Classical, Mode::Classical) => {}
    }
    Ok(catalog::instantiate(id, &ps)?)
}

pub fn run(args: &TrajectoryArgs) -> Result<i32, CliError> {
    let file = config::load(args.config.as_deref())?;
    let cfg = |e: String| CliError::Config(e);
    let id = args.entry.clone().or(file.entry.id.clone()).ok_or_else(|| CliError::Config("no entry given".into()))?;
    let entry = catalog::find(&id)?;
    let mut params = file.entry.params.clone();
    for a in &args.params {
        let (k, v) = config::parse_assignment(a).map_err(cfg)?;
        params.insert(k, v);
    }
    let mode = args.mode.or(file.entry.mode).unwrap_or(match entry.regime {
        Regime::Quantum => Mode::Quantum,
        Regime::Classical => Mode::Classical,
    });
    let inst = instance(&id, &params, mode)?;
    let t_end = args.t_end.or(file.trajectory.t_end).unwrap_or(DEFAULT_T_END);
    let tol = args.tol.or(file.trajectory.tol).unwrap_or(DEFAULT_TOL);
    let seed = args.seed.or(file.trajectory.seed).unwrap_or(0);
    if !(t_end.is_finite() && t_end > 0.0) || !(tol > 0.0 && tol < 1.0) {
        return Err(CliError::Config("--t must be positive and --tol in (0, 1)".into()));
    }
    let scan = if args.seed_scan { Some(seed_scan(&id, &ParamSet::try_from(params.clone())?)?) } else { None };

    let state = args.state.as_deref().map(config::parse_state).transpose().map_err(cfg)?.or(file.trajectory.state);
    let states = match state {
        Some(s) => vec![PhaseState::from_array(s)],
        None => {
            let bx = inst
                .dynamics_box
                .ok_or_else(|| CliError::Config(format!("{id} has no sampling box; pass --state x,y,px,py")))?;
            dynamics::random_states(&bx, &inst.potential, &inst.integrals, args.random.unwrap_or(1).max(1), seed)?
        }
    };
    for s in &states {
        if inst.potential.distance_to_singularity(s.x, s.y) < SINGULARITY_MARGIN {
            return Err(CliError::Core(superint::Error::SingularPoint { x: s.x, y: s.y }));
        }
    }

    let csv_base = args.csv.clone().or(file.output.csv).unwrap_or_else(|| PathBuf::from(format!("trajectory-{id}.csv")));
    let summary_path = args.summary.clone().or(file.output.summary).unwrap_or_else(|| PathBuf::from(format!("trajectory-{id}.json")));
    if let Some(dir) = csv_base.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }

    let threshold = inst.drift_tolerance();
    let n = states.len();
    let runs = states
        .par_iter()
        .enumerate()
        .map(|(k, s)| -> Result<RunSummary, CliError> {
            let traj = dynamics::integrate(&inst.potential, *s, t_end, tol)?;
            let drift = dynamics::conservation_report(&traj, &inst.potential, &inst.integrals)?;
            let path = csv_path(&csv_base, k, n);
            dynamics::write_csv(std::fs::File::create(&path)?, &traj, &inst.potential, &inst.integrals)?;
            let max_relative_drift = drift.max_relative_drift();
            Ok(RunSummary {
                state0: s.to_array(),
                samples: traj.len(),
                completed: traj.completed,
                events: traj.events.clone(),
                passed: traj.completed && max_relative_drift <= threshold,
                max_relative_drift,
                drift,
                csv: Some(path),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let singular = runs.iter().any(|r| !r.completed);
    let passed = runs.iter().all(|r| r.passed);
    let summary = TrajectorySummary {
        schema: SCHEMA,
        entry_id: id.clone(),
        params: inst.params.clone().into(),
        t_end,
        tol,
        seed,
        drift_threshold: threshold,
        metadata: inst.metadata.clone(),
        seed_scan: scan,
        status: if singular {
            "singular"
        } else if passed {
            "pass"
        } else {
            "fail"
        },
        runs,
    };
    json::write_file(&summary_path, &summary)?;
    for (k, r) in summary.runs.iter().enumerate() {
        println!(
            "{id} run {k}: {} samples, max relative drift {:.3e} (threshold {threshold:.0e}){}",
            r.samples,
            r.max_relative_drift,
            if r.completed { "" } else { ", stopped near a singularity" }
        );
    }
    println!("summary -> {}", summary_path.display());
    Ok(if singular {
        EXIT_SINGULAR
    } else if passed {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}
