//! Command-line driver: `ridge`, `ggm` and `boundcheck` subcommands.
//!
//! Every value-taking flag can also be set in a flat `key = value` file
//! passed with `--config`; keys are the long flag names. Flags win over the
//! file, the file wins over built-in defaults. `ULNML_THREADS` sets the
//! worker count.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::baselines::GridSpec;
use crate::data::load_csv;
use crate::error::{Error, Result};
use crate::experiments::{
    median_metric, parse_methods, run_ggm, run_ridge, write_results, ExperimentResult, GgmConfig, GgmMethod,
    RidgeConfig, RidgeMethod, RidgeSource,
};
use crate::mdlrs::StopRule;
use crate::oracle::{gap_check, log_grid, ulnml_log_normalizer, Scalar1DModel};

pub const THREADS_ENV: &str = "ULNML_THREADS";

/// Relative slack allowed on `Z̄(λ) >= Z(λ)` and on `Z(λ) >= lower bound`.
const BOUND_SLACK: f64 = 1e-8;
/// Relative tolerance on uLNML − LNML = 0 for the unbounded domain.
const TIGHT_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "ulnml", version, about = "Penalty selection by uLNML minimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ridge regression sweep over sample sizes and seeds.
    Ridge(RidgeArgs),
    /// Double-ring graphical model sweep.
    Ggm(GgmArgs),
    /// Normalizer bound checks on the 1-D Gaussian location model.
    Boundcheck(BoundArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Flat key = value file supplying defaults for any long flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional JSON summary with per-cell medians.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Comma-separated sample sizes.
    #[arg(long)]
    n: Option<String>,
    /// Number of seeds, run as 0..seeds.
    #[arg(long)]
    seeds: Option<u64>,
    /// Comma-separated method ids.
    #[arg(long)]
    methods: Option<String>,
    /// Record wall time per cell (output is then not reproducible).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    timing: Option<bool>,
    #[arg(long)]
    cv_folds: Option<usize>,
    #[arg(long)]
    grid_min: Option<f64>,
    #[arg(long)]
    grid_max: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    /// MDL-RS iteration cap.
    #[arg(long)]
    max_iter: Option<usize>,
    /// MDL-RS relative stopping tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args)]
struct RidgeArgs {
    #[command(flatten)]
    common: Common,
    /// Synthetic design: uncorrelated or correlated.
    #[arg(long)]
    synthetic: Option<String>,
    #[arg(long)]
    noise_sd: Option<f64>,
    /// Regression data file; overrides --synthetic.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Target column of --csv.
    #[arg(long)]
    target: Option<String>,
    /// Standardize --csv features and center the target.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    standardize: Option<bool>,
    #[arg(long)]
    outer_folds: Option<usize>,
}

#[derive(Debug, Args)]
struct GgmArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated variable counts (each >= 5).
    #[arg(long)]
    m: Option<String>,
    /// Radius bounding diag Θ⁻¹; data-dependent when absent.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    ebic_gamma: Option<f64>,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// bounded or unbounded.
    #[arg(long)]
    domain: Option<String>,
    /// Half-width of the bounded parameter interval.
    #[arg(long = "B")]
    b: Option<f64>,
    /// Comma-separated weights; replaces the log grid.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    lambda_min: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

/// Parsed `key = value` configuration. Blank lines and `#` comments are
/// skipped; `-` and `_` in keys are interchangeable.
#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("config line {}: expected key = value", i + 1)))?;
            values.insert(normalize_key(k.trim()), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::parse(&std::fs::read_to_string(p)?),
            None => Ok(Self::default()),
        }
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.values
            .get(&normalize_key(key))
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::InvalidInput(format!("config key '{key}': {e}")))
            })
            .transpose()
    }

    /// Flag value, else config value, else `default`.
    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(match flag {
            Some(v) => v,
            None => self.get(key)?.unwrap_or(default),
        })
    }

    fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}

fn normalize_key(k: &str) -> String {
    k.trim_start_matches("--").replace('-', "_")
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let out: Vec<T> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<T>()
                .map_err(|e| Error::InvalidInput(format!("bad {what} value '{t}': {e}")))
        })
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::InvalidInput(format!("{what} list is empty")));
    }
    Ok(out)
}

struct Shared {
    ns: Vec<usize>,
    seeds: Vec<u64>,
    timing: bool,
    cv_folds: usize,
    grid: GridSpec,
    stop: StopRule,
    out: Option<PathBuf>,
    summary: Option<PathBuf>,
}

fn resolve_common(c: &Common, cfg: &ConfigFile, default_ns: &str) -> Result<Shared> {
    let ns = parse_list(&cfg.pick(c.n.clone(), "n", default_ns.to_string())?, "n")?;
    if let Some(bad) = ns.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidInput(format!(
            "sample size must be >= 2, got {bad}"
        )));
    }
    let seeds: u64 = cfg.pick(c.seeds, "seeds", 10)?;
    if seeds == 0 {
        return Err(Error::InvalidInput("--seeds must be >= 1".into()));
    }
    let def = GridSpec::default();
    let grid = GridSpec::new(
        cfg.pick(c.grid_min, "grid_min", def.lo)?,
        cfg.pick(c.grid_max, "grid_max", def.hi)?,
        cfg.pick(c.grid_points, "grid_points", def.count)?,
    )?;
    let sd = StopRule::default();
    Ok(Shared {
        ns,
        seeds: (0..seeds).collect(),
        timing: cfg.pick(c.timing, "timing", false)?,
        cv_folds: cfg.pick(c.cv_folds, "cv_folds", 10)?,
        grid,
        stop: StopRule::new(
            cfg.pick(c.max_iter, "max_iter", sd.max_iter)?,
            cfg.pick(c.tol, "tol", sd.rel_tol)?,
        )?,
        out: cfg.pick_opt(c.out.clone(), "out")?,
        summary: cfg.pick_opt(c.summary.clone(), "summary")?,
    })
}

fn sort_rows(rows: &mut [ExperimentResult]) {
    rows.sort_by(|a, b| {
        (a.method.as_str(), a.dim, a.n, a.seed).cmp(&(b.method.as_str(), b.dim, b.n, b.seed))
    });
}

fn emit(rows: &[ExperimentResult], out: Option<&Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_results(&mut buf, rows)?;
    match out {
        Some(p) => std::fs::write(p, buf)?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}

fn write_summary(
    path: &Path,
    command: &str,
    settings: serde_json::Value,
    rows: &[ExperimentResult],
) -> Result<()> {
    let mut cells: BTreeMap<(String, usize, usize), ()> = BTreeMap::new();
    for r in rows {
        cells.insert((r.method.clone(), r.dim, r.n), ());
    }
    let medians: Vec<_> = cells
        .keys()
        .map(|(m, d, n)| {
            json!({
                "method": m,
                "dim": d,
                "n": n,
                "median_metric": median_metric(rows, m, *n, *d),
            })
        })
        .collect();
    let doc = json!({ "command": command, "settings": settings, "rows": rows.len(), "medians": medians });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Data(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn cmd_ridge(args: &RidgeArgs) -> Result<i32> {
    let cfg = ConfigFile::load(args.common.config.as_deref())?;
    let shared = resolve_common(&args.common, &cfg, "30,60,120,240")?;
    let methods = match cfg.pick_opt(args.common.methods.clone(), "methods")? {
        Some(list) => parse_methods(&list, RidgeMethod::parse)?,
        None => RidgeMethod::ALL.to_vec(),
    };
    let csv: Option<PathBuf> = cfg.pick_opt(args.csv.clone(), "csv")?;
    let (source, source_desc) = match csv {
        Some(path) => {
            let target: String = cfg
                .pick_opt(args.target.clone(), "target")?
                .ok_or_else(|| Error::InvalidInput("--csv requires --target".into()))?;
            let standardize = cfg.pick(args.standardize, "standardize", true)?;
            let data = load_csv(&path, &target, standardize)?;
            let desc =
                json!({ "csv": path.display().to_string(), "target": target, "standardize": standardize });
            (RidgeSource::Dataset(data), desc)
        }
        None => {
            let kind = cfg.pick(args.synthetic.clone(), "synthetic", "uncorrelated".to_string())?;
            let correlated = match kind.as_str() {
                "uncorrelated" => false,
                "correlated" => true,
                other => {
                    return Err(Error::InvalidInput(format!(
                        "--synthetic must be 'uncorrelated' or 'correlated', got '{other}'"
                    )))
                }
            };
            let noise_sd = cfg.pick(args.noise_sd, "noise_sd", 1.0)?;
            if !(noise_sd.is_finite() && noise_sd >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "--noise-sd must be >= 0, got {noise_sd}"
                )));
            }
            let desc = json!({ "synthetic": kind, "noise_sd": noise_sd });
            (RidgeSource::Synthetic { correlated, noise_sd }, desc)
        }
    };
    let config = RidgeConfig {
        methods,
        grid: shared.grid,
        outer_folds: cfg.pick(args.outer_folds, "outer_folds", 10)?,
        cv_folds: shared.cv_folds,
        stop: shared.stop,
        timing: shared.timing,
    };
    let mut rows = run_ridge(&source, &shared.ns, &shared.seeds, &config)?;
    sort_rows(&mut rows);
    emit(&rows, shared.out.as_deref())?;
    if let Some(path) = &shared.summary {
        let settings =
            json!({ "source": source_desc, "n": shared.ns, "seeds": shared.seeds.len(), "config": config });
        write_summary(path, "ridge", settings, &rows)?;
    }
    Ok(0)
}

fn cmd_ggm(args: &GgmArgs) -> Result<i32> {
    let cfg = ConfigFile::load(args.common.config.as_deref())?;
    let shared = resolve_common(&args.common, &cfg, "100,400,1600")?;
    let ms: Vec<usize> = parse_list(&cfg.pick(args.m.clone(), "m", "10,20".to_string())?, "m")?;
    if let Some(bad) = ms.iter().find(|&&m| m < 5) {
        return Err(Error::InvalidInput(format!(
            "double ring needs m >= 5, got {bad}"
        )));
    }
    let methods = match cfg.pick_opt(args.common.methods.clone(), "methods")? {
        Some(list) => parse_methods(&list, GgmMethod::parse)?,
        None => GgmMethod::ALL.to_vec(),
    };
    let config = GgmConfig {
        methods,
        grid: shared.grid,
        cv_folds: shared.cv_folds,
        ebic_gamma: cfg.pick(args.ebic_gamma, "ebic_gamma", 0.5)?,
        radius: cfg.pick_opt(args.radius, "radius")?,
        stop: shared.stop,
        timing: shared.timing,
    };
    let mut rows = run_ggm(&ms, &shared.ns, &shared.seeds, &config)?;
    sort_rows(&mut rows);
    emit(&rows, shared.out.as_deref())?;
    if let Some(path) = &shared.summary {
        let settings = json!({ "m": ms, "n": shared.ns, "seeds": shared.seeds.len(), "config": config });
        write_summary(path, "ggm", settings, &rows)?;
    }
    Ok(0)
}

fn cmd_boundcheck(args: &BoundArgs) -> Result<i32> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let domain = cfg.pick(args.domain.clone(), "domain", "bounded".to_string())?;
    let model = match domain.as_str() {
        "bounded" => Scalar1DModel::bounded(cfg.pick(args.b, "B", 1.0)?)?,
        "unbounded" => Scalar1DModel::unbounded(),
        other => {
            return Err(Error::InvalidInput(format!(
                "--domain must be 'bounded' or 'unbounded', got '{other}'"
            )))
        }
    };
    let lambdas = match cfg.pick_opt(args.lambda.clone(), "lambda")? {
        Some(list) => parse_list::<f64>(&list, "lambda")?,
        None => {
            let lo = cfg.pick(args.lambda_min, "lambda_min", 1e-2)?;
            let hi = cfg.pick(args.lambda_max, "lambda_max", 1e2)?;
            let count = cfg.pick(args.points, "points", 20)?;
            if !(lo > 0.0 && hi >= lo && count >= 1) {
                return Err(Error::InvalidInput(format!(
                    "need 0 < lambda-min <= lambda-max and points >= 1, got [{lo}, {hi}] x {count}"
                )));
            }
            log_grid(lo, hi, count)
        }
    };
    if let Some(bad) = lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "lambda must be positive and finite, got {bad}"
        )));
    }

    let report = gap_check(&model, &lambdas)?;
    let bounded = domain == "bounded";
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "domain {domain} gap_bound {:.6e} u {:.6}",
        report.bound, report.u
    )?;
    let mut failures = 0;
    for r in &report.rows {
        let upper = r.ulnml_gap >= -BOUND_SLACK * r.log_z.abs().max(1.0);
        let lower = r.log_lower <= r.log_z + BOUND_SLACK * r.log_z.abs().max(1.0);
        let gap_ok = r.gap <= report.bound + BOUND_SLACK;
        let tight =
            bounded || r.ulnml_gap.abs() <= TIGHT_TOL * ulnml_log_normalizer(r.lambda)?.abs().max(1.0);
        let ok = upper && lower && gap_ok && tight;
        if !ok {
            failures += 1;
        }
        writeln!(
            out,
            "{} lambda {:.6e} log_z {:.12e} ulnml_gap {:.3e} gap {:.3e} log_lower {:.12e}",
            if ok { "PASS" } else { "FAIL" },
            r.lambda,
            r.log_z,
            r.ulnml_gap,
            r.gap,
            r.log_lower
        )?;
    }
    writeln!(out, "{} of {} weights failed", failures, report.rows.len())?;
    Ok(if failures == 0 { 0 } else { 1 })
}

fn thread_count() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(Some(k)),
            _ => Err(Error::InvalidInput(format!(
                "{THREADS_ENV} must be a positive integer, got '{v}'"
            ))),
        },
        Err(_) => Ok(None),
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let run = || match &cli.command {
        Command::Ridge(a) => cmd_ridge(a),
        Command::Ggm(a) => cmd_ggm(a),
        Command::Boundcheck(a) => cmd_boundcheck(a),
    };
    match thread_count()? {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code:
/// 0 on success, 1 when a bound check fails, 2 on usage or runtime errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
