//! The `frechet-skew` command line: argument types, dispatch and the error
//! to exit-code mapping.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use frechet_skew::dominance::{dominance_report_at, DEFAULT_GRID};
use frechet_skew::io::{curve_csv, fmt_f64, read_samples_csv, trajectory_csv};
use frechet_skew::oracle::run_oracle_suite;
use frechet_skew::pmean::{pmean_curve, solve_pmean, with_derivative};
use frechet_skew::skewness::classify;
use frechet_skew::tailbone::{tailbone_trajectory, SampleSet};
use frechet_skew::{Classification, Distribution, DistributionSpec, DominanceReport, ErrorClass, GridSpec, PMeanCurve};
use serde_json::json;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "FRECHET_SKEW_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "frechet-skew",
    version,
    about = "Fréchet p-means and true skewness of distributions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for ν_p at one p.
    Pmean(PmeanArgs),
    /// ν_p and dν_p/dp along a grid.
    Curve(CurveArgs),
    /// Classify true (mode) skewness over a grid.
    Classify(ClassifyArgs),
    /// Tail dominance criteria at one p or along a grid.
    Dominance(DominanceArgs),
    /// Sample p-means in ℝᵈ along a grid and the direction ζ.
    Tailbone(TailboneArgs),
    /// Run the closed-form oracle suite.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct DistArg {
    /// Distribution spec as JSON; `-` reads standard input.
    #[arg(long = "dist", value_name = "PATH")]
    pub dist: PathBuf,
}

#[derive(Debug, Args)]
pub struct PmeanArgs {
    #[command(flatten)]
    pub dist: DistArg,
    #[arg(long)]
    pub p: f64,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// `geometric:a..b:n` or `linear:a..b:n`; defaults to 16 geometric points
    /// over the admissible domain.
    #[arg(long, value_name = "SPEC")]
    pub grid: Option<String>,
    /// Use `(0, 1) ∪ 𝒟` instead of `𝒟`.
    #[arg(long)]
    pub full_domain: bool,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub dist: DistArg,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub dist: DistArg,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Report JSON.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Curve CSV; defaults to the report path with a `.curve.csv` suffix.
    #[arg(long, value_name = "PATH")]
    pub curve_output: Option<PathBuf>,
    /// Exit with status 3 if the classification is indeterminate.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct DominanceArgs {
    #[command(flatten)]
    pub dist: DistArg,
    #[arg(long, conflicts_with = "grid")]
    pub p: Option<f64>,
    #[arg(long, value_name = "SPEC")]
    pub grid: Option<String>,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid_size: usize,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TailboneArgs {
    /// Points as CSV, one per row.
    #[arg(long, value_name = "PATH", conflicts_with = "dist")]
    pub samples: Option<PathBuf>,
    /// Marginal distribution spec; repeat once per coordinate to sample a
    /// product distribution (requires --n and --seed).
    #[arg(long, value_name = "PATH")]
    pub dist: Vec<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "SPEC")]
    pub grid: String,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_name = "DIR", default_value = "oracle-check")]
    pub output_dir: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] frechet_skew::Error),
    #[error("invalid distribution spec in {source_name}: {message}")]
    Spec { source_name: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("classification is indeterminate (first failure at p = {offending_p:?})")]
    Inconclusive { offending_p: Option<f64> },
    #[error("{failed} of {total} oracle checks failed")]
    OracleFailed { failed: usize, total: usize },
}

impl CliError {
    /// 1: bad input, 2: numerical failure, 3: inconclusive under `--strict`.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Input => 1,
                ErrorClass::Numerical => 2,
            },
            CliError::Spec { .. } | CliError::Io { .. } | CliError::Usage(_) => 1,
            CliError::OracleFailed { .. } => 2,
            CliError::Inconclusive { .. } => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Spec { .. } => "InvalidSpec",
            CliError::Io { .. } => "Io",
            CliError::Usage(_) => "Usage",
            CliError::Inconclusive { .. } => "Inconclusive",
            CliError::OracleFailed { .. } => "OracleFailed",
        }
    }

    /// The machine-readable form printed on standard error.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        })
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Read a spec from a file or from standard input (`-`).
pub fn parse_spec(path: &Path) -> CliResult<DistributionSpec> {
    let (text, name) = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io_err(path))?;
        (s, "<stdin>".to_string())
    } else {
        (
            fs::read_to_string(path).map_err(io_err(path))?,
            path.display().to_string(),
        )
    };
    parse_spec_text(&text, &name)
}

pub fn parse_spec_text(text: &str, source_name: &str) -> CliResult<DistributionSpec> {
    DistributionSpec::from_json(text).map_err(|e| CliError::Spec {
        source_name: source_name.to_string(),
        message: e.to_string(),
    })
}

fn load_dist(path: &Path) -> CliResult<Distribution> {
    Ok(Distribution::new(parse_spec(path)?)?)
}

fn write_artifact(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

fn to_json_text<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn resolve_grid(arg: Option<&str>, dist: &Distribution, full_domain: bool) -> CliResult<GridSpec> {
    Ok(match arg {
        Some(s) => s.parse()?,
        None => GridSpec::default_for(dist, full_domain)?,
    })
}

/// Run one command. Returns the one-line summary for standard output.
pub fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Pmean(a) => run_pmean(a),
        Command::Curve(a) => run_curve(a),
        Command::Classify(a) => run_classify(a),
        Command::Dominance(a) => run_dominance(a),
        Command::Tailbone(a) => run_tailbone(a),
        Command::OracleCheck(a) => run_oracle(a),
    }
}

fn run_pmean(a: PmeanArgs) -> CliResult<String> {
    let dist = load_dist(&a.dist.dist)?;
    let pt = solve_pmean(&dist, a.p)?;
    // The derivative is a convenience here; a failure does not sink the solve.
    let pt = with_derivative(&dist, pt.clone()).unwrap_or(pt);
    if let Some(out) = &a.output {
        let text = match a.format {
            Format::Json => to_json_text(&pt),
            Format::Csv => curve_csv(&PMeanCurve {
                points: vec![pt.clone()],
                domain_used: frechet_skew::DomainUsed::Standard,
                dropped: vec![],
            }),
        };
        write_artifact(out, &text)?;
    }
    Ok(format!("νp = {} (p = {})", pt.nu_p, a.p))
}

fn run_curve(a: CurveArgs) -> CliResult<String> {
    let dist = load_dist(&a.dist.dist)?;
    let grid = resolve_grid(a.grid.grid.as_deref(), &dist, a.grid.full_domain)?;
    let curve = pmean_curve(&dist, &grid.values(), a.grid.full_domain)?;
    if let Some(out) = &a.output {
        let text = match a.format {
            Format::Csv => curve_csv(&curve),
            Format::Json => to_json_text(&json!({ "grid": grid.to_string(), "curve": curve })),
        };
        write_artifact(out, &text)?;
    }
    Ok(format!(
        "curve: {} points on {grid}, {} dropped",
        curve.points.len(),
        curve.dropped.len()
    ))
}

fn curve_path_for(report: &Path) -> PathBuf {
    let stem = report
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    report.with_file_name(format!("{stem}.curve.csv"))
}

fn run_classify(a: ClassifyArgs) -> CliResult<String> {
    let dist = load_dist(&a.dist.dist)?;
    let grid = resolve_grid(a.grid.grid.as_deref(), &dist, a.grid.full_domain)?;
    let report = classify(&dist, &grid.values(), a.grid.full_domain)?;
    let curve_path = a
        .curve_output
        .clone()
        .or_else(|| a.output.as_deref().map(curve_path_for));
    if let Some(path) = &curve_path {
        write_artifact(path, &curve_csv(&report.curve))?;
    }
    if let Some(out) = &a.output {
        let shown = curve_path.as_ref().map(|p| p.display().to_string());
        let mut value = report.to_json(shown.as_deref().unwrap_or(""));
        if shown.is_none() {
            value["curve_csv_path"] = serde_json::Value::Null;
        }
        write_artifact(out, &to_json_text(&value))?;
    }
    if a.strict && report.classification == Classification::Indeterminate {
        return Err(CliError::Inconclusive {
            offending_p: report.offending_p,
        });
    }
    Ok(match report.offending_p {
        Some(p) => format!("{} (first failure at p = {p})", report.classification),
        None => report.classification.to_string(),
    })
}

fn dominance_csv(reports: &[DominanceReport]) -> String {
    let mut out = String::from("p,verdict,cdf_gap,single_crossing,decreasing_pdf,log_concave,c,min_cdf_gap\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt_f64(r.p),
            r.verdict.as_str(),
            r.criteria.cdf_gap.as_str(),
            r.criteria.single_crossing.as_str(),
            r.criteria.decreasing_pdf,
            r.criteria.log_concave.map(|b| b.to_string()).unwrap_or_default(),
            r.c.map(fmt_f64).unwrap_or_default(),
            fmt_f64(r.min_cdf_gap),
        ));
    }
    out
}

fn run_dominance(a: DominanceArgs) -> CliResult<String> {
    let dist = load_dist(&a.dist.dist)?;
    let ps = match (a.p, a.grid.as_deref()) {
        (Some(p), _) => vec![p],
        (None, grid) => resolve_grid(grid, &dist, false)?.values(),
    };
    let reports = ps
        .iter()
        .map(|&p| {
            let pt = solve_pmean(&dist, p)?;
            dominance_report_at(&dist, &pt, a.grid_size)
        })
        .collect::<frechet_skew::Result<Vec<_>>>()?;
    if let Some(out) = &a.output {
        let text = match (a.format, a.p.is_some()) {
            (Format::Json, true) => to_json_text(&reports[0]),
            (Format::Json, false) => to_json_text(&reports),
            (Format::Csv, _) => dominance_csv(&reports),
        };
        write_artifact(out, &text)?;
    }
    if let [r] = &reports[..] {
        return Ok(format!("{} (p = {})", r.verdict.as_str(), r.p));
    }
    let mut verdicts: Vec<&str> = reports.iter().map(|r| r.verdict.as_str()).collect();
    verdicts.dedup();
    Ok(format!(
        "dominance at {} points: {}",
        reports.len(),
        verdicts.join(", ")
    ))
}

fn run_tailbone(a: TailboneArgs) -> CliResult<String> {
    let samples = match (&a.samples, a.dist.is_empty()) {
        (Some(path), _) => read_samples_csv(&fs::read_to_string(path).map_err(io_err(path))?)?,
        (None, false) => {
            let seed = a
                .seed
                .ok_or_else(|| CliError::Usage("--seed is required when sampling from --dist".into()))?;
            let n =
                a.n.ok_or_else(|| CliError::Usage("--n is required when sampling from --dist".into()))?;
            let dists = a.dist.iter().map(|p| load_dist(p)).collect::<CliResult<Vec<_>>>()?;
            let refs: Vec<&Distribution> = dists.iter().collect();
            SampleSet::product(&refs, n, seed)?
        }
        (None, true) => return Err(CliError::Usage("give --samples or at least one --dist".into())),
    };
    let grid: GridSpec = a.grid.parse()?;
    let traj = tailbone_trajectory(&samples, &grid.values())?;
    if let Some(out) = &a.output {
        let text = match a.format {
            Format::Csv => trajectory_csv(&traj),
            Format::Json => to_json_text(&traj),
        };
        write_artifact(out, &text)?;
    }
    let unconverged = traj.entries.iter().filter(|e| !e.converged).count();
    let zeta = match &traj.zeta {
        Some(z) => format!(
            "ζ = ({})",
            z.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(", ")
        ),
        None => "ζ unstable".to_string(),
    };
    Ok(format!(
        "tailbone: {} points in ℝ^{}, {} entries ({unconverged} unconverged), {zeta}",
        samples.len(),
        samples.dim(),
        traj.entries.len()
    ))
}

pub const ORACLE_REPORT: &str = "oracle_report.json";
pub const ORACLE_CURVE: &str = "oracle_curve.csv";

fn run_oracle(a: OracleArgs) -> CliResult<String> {
    let run = run_oracle_suite()?;
    fs::create_dir_all(&a.output_dir).map_err(io_err(&a.output_dir))?;
    write_artifact(&a.output_dir.join(ORACLE_REPORT), &to_json_text(&run.report))?;
    write_artifact(&a.output_dir.join(ORACLE_CURVE), &curve_csv(&run.curve))?;
    let (passed, total) = (run.report.passed, run.report.total);
    if passed != total {
        return Err(CliError::OracleFailed {
            failed: total - passed,
            total,
        });
    }
    Ok(format!("oracle-check: {passed}/{total} checks passed"))
}

/// Size the global thread pool from [`THREADS_ENV`], if set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    // Only fails if a pool already exists, in which case it is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
