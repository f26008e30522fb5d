use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use superint::catalog::{self, Instance, Regime};
use superint::detsolve::{self, EquationResidual, GridSpec, ResidualReport, Status};
use superint::{poisson_bracket_residual, ParamSet, PhaseState};

use crate::config::{self, Mode};
use crate::error::{CliError, EXIT_FAILED, EXIT_OK};
use crate::json;

pub const SCHEMA: u32 = 1;
pub const PB_SAMPLES: usize = 100;
/// Momentum range of the pointwise bracket samples.
const PB_MOMENTUM: f64 = 1.0;

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    /// Catalog ids, e.g. Q.14 C.1
    pub entries: Vec<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Parameter override `name=value`, repeatable
    #[arg(long = "param", short = 'p')]
    pub params: Vec<String>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Grid nodes per axis, `nx,ny` or a single count
    #[arg(long)]
    pub nodes: Option<String>,
    /// Grid x range `lo,hi`
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Grid y range `lo,hi`
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<String>,
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report file (one entry) or directory (several entries)
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

/// Fully resolved settings shared by every entry of one invocation.
#[derive(Debug, Clone)]
struct Plan {
    ids: Vec<String>,
    params: BTreeMap<String, f64>,
    mode: Option<Mode>,
    nodes: Option<(usize, usize)>,
    x: Option<(f64, f64)>,
    y: Option<(f64, f64)>,
    margin: Option<f64>,
    seed: u64,
    out: Option<PathBuf>,
}

fn plan(args: &VerifyArgs) -> Result<Plan, CliError> {
    let file = config::load(args.config.as_deref())?;
    let cfg = |e: String| CliError::Config(e);
    let mut ids = args.entries.clone();
    if ids.is_empty() {
        ids.extend(file.entry.id.clone());
        ids.extend(file.entry.ids.iter().cloned());
    }
    if ids.is_empty() {
        return Err(CliError::Config("no entry given".into()));
    }
    let mut params = file.entry.params.clone();
    for a in &args.params {
        let (k, v) = config::parse_assignment(a).map_err(cfg)?;
        params.insert(k, v);
    }
    let nodes = match &args.nodes {
        Some(s) => Some(match config::parse_list(s).map_err(cfg)?.as_slice() {
            [n] => (*n as usize, *n as usize),
            [a, b] => (*a as usize, *b as usize),
            _ => return Err(CliError::Config("--nodes takes n or nx,ny".into())),
        }),
        None => match (file.grid.nx, file.grid.ny) {
            (None, None) => None,
            (nx, ny) => {
                let d = catalog::DEFAULT_NODES;
                Some((nx.unwrap_or(d), ny.or(nx).unwrap_or(d)))
            }
        },
    };
    if let Some((nx, ny)) = nodes {
        if nx < 2 || ny < 2 {
            return Err(CliError::Config("a grid needs at least two nodes per axis".into()));
        }
    }
    Ok(Plan {
        ids,
        params,
        mode: args.mode.or(file.entry.mode),
        nodes,
        x: args.x.as_deref().map(config::parse_pair).transpose().map_err(cfg)?.or(file.grid.x),
        y: args.y.as_deref().map(config::parse_pair).transpose().map_err(cfg)?.or(file.grid.y),
        margin: args.margin.or(file.grid.margin),
        seed: args.seed.or(file.grid.seed).unwrap_or(0),
        out: args.out.clone().or(file.output.report),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EquationSummary {
    pub max_abs: f64,
    pub rms: f64,
    pub worst_at: (f64, f64),
}

impl From<&EquationResidual> for EquationSummary {
    fn from(e: &EquationResidual) -> Self {
        Self { max_abs: e.max_abs, rms: e.rms, worst_at: e.worst_at }
    }
}

/// Largest residual of each equation; `eq6` is the linear compatibility condition.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Residuals {
    pub eq6: f64,
    pub eq7: f64,
    pub eq8: f64,
    pub eq9: f64,
    pub eq10: f64,
}

impl Residuals {
    fn absorb(&mut self, eqs: &BTreeMap<String, EquationSummary>) {
        for (name, e) in eqs {
            let slot = match name.as_str() {
                "eq6" => &mut self.eq6,
                "eq7" => &mut self.eq7,
                "eq8" => &mut self.eq8,
                "eq9" => &mut self.eq9,
                "eq10" => &mut self.eq10,
                _ => continue,
            };
            *slot = slot.max(e.max_abs);
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegralResult {
    pub index: usize,
    pub label: String,
    pub mode: Mode,
    pub hbar: f64,
    pub equations: BTreeMap<String, EquationSummary>,
    pub status: Status,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointwiseBracket {
    pub samples: usize,
    pub max_abs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub determining: f64,
    pub pointwise_pb: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridOut {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub margin: f64,
    pub nodes: usize,
    pub normalization: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub entry_id: String,
    pub mode: Mode,
    pub params: BTreeMap<String, f64>,
    pub grid: GridOut,
    pub residuals: Residuals,
    pub integrals: Vec<IntegralResult>,
    pub pointwise_pb: Option<PointwiseBracket>,
    pub status: Status,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub metadata: BTreeMap<String, f64>,
    pub error: Option<String>,
    #[serde(skip)]
    exit_code: i32,
}

fn merge_equations(out: &mut BTreeMap<String, EquationSummary>, r: &ResidualReport) {
    for e in &r.equations {
        out.insert(e.equation.to_string(), e.into());
    }
}

fn grid_for(inst: &Instance, plan: &Plan) -> GridSpec {
    let mut g = inst.default_grid();
    if let Some(x) = plan.x {
        g.x = x;
    }
    if let Some(y) = plan.y {
        g.y = y;
    }
    if let Some((nx, ny)) = plan.nodes {
        g.nx = nx;
        g.ny = ny;
    }
    if let Some(m) = plan.margin {
        g = g.with_margin(m);
    }
    g
}

/// Parameter sets for each variant to run.
fn variants(id: &str, regime: Regime, mode: Mode, params: &BTreeMap<String, f64>) -> Result<Vec<(Mode, ParamSet)>, CliError> {
    let base = ParamSet::try_from(params.clone())?;
    let has_hbar = catalog::find(id)?.params.iter().any(|p| p.name == "hbar");
    let classical = || -> Result<ParamSet, CliError> {
        let mut ps = base.clone();
        if has_hbar {
            ps.set("hbar", 0.0)?;
        }
        Ok(ps)
    };
    let quantum = || -> Result<ParamSet, CliError> {
        if regime == Regime::Classical {
            return Err(CliError::Mode(format!("{id} is a classical entry; quantum mode needs hbar > 0")));
        }
        if let Some(h) = base.get("hbar") {
            if h <= 0.0 {
                return Err(CliError::Mode(format!("quantum mode requires hbar > 0, got {h}")));
            }
        }
        Ok(base.clone())
    };
    Ok(match mode {
        Mode::Classical => vec![(Mode::Classical, classical()?)],
        Mode::Quantum => vec![(Mode::Quantum, quantum()?)],
        Mode::Both => vec![(Mode::Quantum, quantum()?), (Mode::Classical, classical()?)],
    })
}

fn pointwise_bracket(inst: &Instance, grid: &GridSpec, seed: u64) -> Result<PointwiseBracket, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shrink = |r: (f64, f64)| {
        let pad = grid.margin * (r.1 - r.0);
        (r.0 + pad, r.1 - pad)
    };
    let (xr, yr) = (shrink(grid.x), shrink(grid.y));
    let mut max_abs = 0.0f64;
    let mut taken = 0;
    let mut attempts = 0;
    while taken < PB_SAMPLES {
        attempts += 1;
        if attempts > 1000 * PB_SAMPLES {
            return Err(CliError::Core(superint::Error::GridSingularity { x: xr.0, y: yr.0, margin: grid.margin }));
        }
        let s = PhaseState::new(
            rng.gen_range(xr.0..=xr.1),
            rng.gen_range(yr.0..=yr.1),
            rng.gen_range(-PB_MOMENTUM..=PB_MOMENTUM),
            rng.gen_range(-PB_MOMENTUM..=PB_MOMENTUM),
        );
        let near = inst.potential.distance_to_singularity(s.x, s.y) < grid.margin
            || inst.integrals.iter().any(|i| i.corrections.distance_to_singularity(s.x, s.y) < grid.margin);
        if near {
            continue;
        }
        for integral in &inst.integrals {
            let r = poisson_bracket_residual(integral, &inst.potential, &s)?;
            max_abs = max_abs.max(if r.is_nan() { f64::INFINITY } else { r.abs() });
        }
        taken += 1;
    }
    Ok(PointwiseBracket { samples: taken, max_abs })
}

fn check_instance(inst: &Instance, mode: Mode, grid: &GridSpec, seed: u64) -> Result<(Vec<IntegralResult>, Option<PointwiseBracket>), CliError> {
    let tol = inst.tolerance();
    let mut results = Vec::new();
    for (index, integral) in inst.integrals.iter().enumerate() {
        let det = detsolve::residual_determining(&inst.potential, integral, grid)?.judged(tol);
        let compat = detsolve::residual_linear_compat(&inst.potential, &integral.coeffs, grid)?.judged(tol);
        let mut equations = BTreeMap::new();
        merge_equations(&mut equations, &compat);
        merge_equations(&mut equations, &det);
        let status = if det.passed() && compat.passed() { Status::Pass } else { Status::Fail };
        results.push(IntegralResult {
            index: index + 1,
            label: integral.label.clone(),
            mode,
            hbar: inst.potential.hbar,
            equations,
            status,
        });
    }
    let pb = if mode == Mode::Classical { Some(pointwise_bracket(inst, grid, seed)?) } else { None };
    Ok((results, pb))
}

/// Verification of one entry. `Err` means no report can be written.
fn verify_entry(id: &str, plan: &Plan) -> Result<VerifyReport, CliError> {
    let entry = catalog::find(id)?;
    let mode = plan.mode.unwrap_or(match entry.regime {
        Regime::Quantum => Mode::Quantum,
        Regime::Classical => Mode::Classical,
    });
    let runs = variants(id, entry.regime, mode, &plan.params)?;
    let mut instances = Vec::new();
    for (m, ps) in &runs {
        instances.push((*m, catalog::instantiate(id, ps)?));
    }
    let first = &instances[0].1;
    let grid = grid_for(first, plan);
    let tolerances = Tolerances { determining: first.tolerance(), pointwise_pb: first.tolerance() };
    let mut report = VerifyReport {
        schema: SCHEMA,
        entry_id: id.to_string(),
        mode,
        params: first.params.clone().into(),
        grid: GridOut {
            x: grid.x,
            y: grid.y,
            nx: grid.nx,
            ny: grid.ny,
            margin: grid.margin,
            nodes: grid.nx * grid.ny,
            normalization: "|sum of terms| / (1 + max |term|) per node".into(),
        },
        residuals: Residuals::default(),
        integrals: Vec::new(),
        pointwise_pb: None,
        status: Status::Pass,
        tolerances,
        seed: plan.seed,
        metadata: first.metadata.clone(),
        error: None,
        exit_code: EXIT_OK,
    };
    for (m, inst) in &instances {
        match check_instance(inst, *m, &grid, plan.seed) {
            Ok((results, pb)) => {
                for r in &results {
                    report.residuals.absorb(&r.equations);
                    if r.status == Status::Fail {
                        report.status = Status::Fail;
                    }
                }
                report.integrals.extend(results);
                if let Some(pb) = pb {
                    if pb.max_abs > report.tolerances.pointwise_pb {
                        report.status = Status::Fail;
                    }
                    report.pointwise_pb = Some(pb);
                }
            }
            Err(e) => {
                report.status = Status::Fail;
                report.error = Some(e.to_string());
                report.exit_code = e.exit_code();
                return Ok(report);
            }
        }
    }
    Ok(report)
}

fn report_path(out: Option<&Path>, id: &str, batch: bool) -> PathBuf {
    let name = format!("verify-{id}.json");
    match out {
        Some(p) if batch => p.join(name),
        Some(p) => p.to_path_buf(),
        None => PathBuf::from(name),
    }
}

/// Exit code of one finished report.
fn report_code(r: &VerifyReport) -> i32 {
    match (&r.error, r.status) {
        (Some(_), _) => r.exit_code,
        (None, Status::Pass) => EXIT_OK,
        (None, Status::Fail) => EXIT_FAILED,
    }
}

pub fn run(args: &VerifyArgs) -> Result<i32, CliError> {
    let plan = plan(args)?;
    let batch = plan.ids.len() > 1;
    let outcomes: Vec<(String, Result<VerifyReport, CliError>)> = plan
        .ids
        .par_iter()
        .map(|id| (id.clone(), verify_entry(id, &plan)))
        .collect();
    let mut code = EXIT_OK;
    for (id, outcome) in outcomes {
        let c = match outcome {
            Ok(report) => {
                let path = report_path(plan.out.as_deref(), &id, batch);
                json::write_file(&path, &report)?;
                let worst = report.integrals.iter().flat_map(|i| i.equations.values()).map(|e| e.max_abs).fold(0.0, f64::max);
                println!(
                    "{id}: {} (max residual {worst:.3e}, tolerance {:.0e}) -> {}",
                    if report.status == Status::Pass { "PASS" } else { "FAIL" },
                    report.tolerances.determining,
                    path.display()
                );
                if let Some(e) = &report.error {
                    eprintln!("{id}: {e}");
                }
                report_code(&report)
            }
            Err(e) => {
                eprintln!("{id}: {e}");
                e.exit_code()
            }
        };
        code = code.max(c);
    }
    Ok(code)
}
