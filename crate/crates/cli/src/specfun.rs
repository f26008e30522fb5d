use std::io::Write;
use std::path::PathBuf;

use superint::specfun::{self, PainleveIC, SpecFunKind, SpecFunSolution};
use superint::Error as CoreError;

use crate::config;
use crate::error::{CliError, EXIT_OK, EXIT_SINGULAR};

pub const DEFAULT_SAMPLES: usize = 181;

#[derive(Debug, clap::Args)]
pub struct SpecfunArgs {
    /// wp, p1, p2 or p4
    pub kind: String,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long = "K1", allow_hyphen_values = true)]
    pub k1: Option<String>,
    #[arg(long = "K2", allow_hyphen_values = true)]
    pub k2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub g2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub g3: Option<String>,
    /// `x0,y0,y'0` for the Painlevé kinds
    #[arg(long, allow_hyphen_values = true)]
    pub ic: Option<String>,
    /// `lo,hi`
    #[arg(long, allow_hyphen_values = true)]
    pub interval: String,
    /// Evenly spaced sample count across the interval
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    /// CSV destination; standard output when absent
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn num(name: &str, v: &Option<String>) -> Result<Option<f64>, CliError> {
    v.as_deref().map(|s| config::parse_number(s).map_err(|e| CliError::Config(format!("--{name}: {e}")))).transpose()
}

fn forbid(kind: SpecFunKind, names: &[(&str, bool)]) -> Result<(), CliError> {
    match names.iter().find(|(_, given)| *given) {
        Some((n, _)) => Err(CliError::Config(format!("--{n} does not apply to {kind}"))),
        None => Ok(()),
    }
}

fn solve(args: &SpecfunArgs) -> Result<SpecFunSolution, CliError> {
    let kind: SpecFunKind = args.kind.parse()?;
    let interval = config::parse_pair(&args.interval).map_err(|e| CliError::Config(format!("--interval: {e}")))?;
    let ic = args
        .ic
        .as_deref()
        .map(config::parse_triple)
        .transpose()
        .map_err(|e| CliError::Config(format!("--ic: {e}")))?
        .map(|[x0, y0, yp0]| PainleveIC::new(x0, y0, yp0));
    let need_ic = || ic.ok_or_else(|| CliError::Config(format!("{kind} needs --ic x0,y0,yp0")));
    let (alpha, k1, k2, g2, g3) =
        (num("alpha", &args.alpha)?, num("K1", &args.k1)?, num("K2", &args.k2)?, num("g2", &args.g2)?, num("g3", &args.g3)?);
    let sol = match kind {
        SpecFunKind::Weierstrass => {
            forbid(kind, &[("alpha", alpha.is_some()), ("K1", k1.is_some()), ("K2", k2.is_some()), ("ic", ic.is_some())])?;
            specfun::weierstrass_p(interval, g2.unwrap_or(0.0), g3.unwrap_or(0.0))?
        }
        SpecFunKind::P1 => {
            forbid(kind, &[("alpha", alpha.is_some()), ("K1", k1.is_some()), ("K2", k2.is_some()), ("g2", g2.is_some()), ("g3", g3.is_some())])?;
            specfun::painleve1(interval, need_ic()?)?
        }
        SpecFunKind::P2 => {
            forbid(kind, &[("K1", k1.is_some()), ("K2", k2.is_some()), ("g2", g2.is_some()), ("g3", g3.is_some())])?;
            specfun::painleve2(interval, alpha.unwrap_or(0.0), need_ic()?)?
        }
        SpecFunKind::P4 => {
            forbid(kind, &[("g2", g2.is_some()), ("g3", g3.is_some())])?;
            let alpha = alpha.ok_or_else(|| CliError::Config("p4 needs --alpha".into()))?;
            specfun::painleve4(interval, alpha, k1.unwrap_or(0.0), k2.unwrap_or(0.0), need_ic()?)?
        }
    };
    Ok(sol)
}

fn write_rows<W: Write>(out: W, sol: Option<&SpecFunSolution>, requested: (f64, f64), n: usize, poles: &[f64]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().from_writer(out);
    w.write_record(["x", "value", "d1"]).map_err(|e| CliError::Io(e.to_string()))?;
    if let Some(sol) = sol {
        let (lo, hi) = sol.interval();
        for i in 0..n {
            let x = if n == 1 { requested.0 } else { requested.0 + (requested.1 - requested.0) * i as f64 / (n - 1) as f64 };
            if x < lo || x > hi {
                continue;
            }
            let (v, d1) = sol.eval(x)?;
            w.write_record([format!("{x:.16e}"), format!("{v:.16e}"), format!("{d1:.16e}")])
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    let mut inner = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    let marks = if poles.is_empty() {
        "none".to_string()
    } else {
        poles.iter().map(|p| format!("{p:.16e}")).collect::<Vec<_>>().join(",")
    };
    match sol {
        Some(s) => writeln!(inner, "# poles: {marks}; valid {:.16e},{:.16e}", s.interval().0, s.interval().1)?,
        None => writeln!(inner, "# poles: {marks}")?,
    }
    inner.flush()?;
    Ok(())
}

pub fn run(args: &SpecfunArgs) -> Result<i32, CliError> {
    if args.samples == 0 {
        return Err(CliError::Config("--samples must be positive".into()));
    }
    let requested = config::parse_pair(&args.interval).map_err(|e| CliError::Config(format!("--interval: {e}")))?;
    let (sol, poles, code) = match solve(args) {
        Ok(sol) => {
            let poles = sol.poles().to_vec();
            let code = if sol.is_truncated() { EXIT_SINGULAR } else { EXIT_OK };
            (Some(sol), poles, code)
        }
        Err(CliError::Core(CoreError::PoleCollision { at } | CoreError::ImmediatePole { at, .. })) => {
            eprintln!("pole at x = {at} inside the interval");
            (None, vec![at], EXIT_SINGULAR)
        }
        Err(e) => return Err(e),
    };
    match &args.out {
        Some(path) => write_rows(std::fs::File::create(path)?, sol.as_ref(), requested, args.samples, &poles)?,
        None => write_rows(std::io::stdout().lock(), sol.as_ref(), requested, args.samples, &poles)?,
    }
    if code == EXIT_SINGULAR {
        eprintln!("solution truncated at a pole; partial output written");
    }
    Ok(code)
}
