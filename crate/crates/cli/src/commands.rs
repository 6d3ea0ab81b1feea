//! Subcommands and their argument handling.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use carima_core::causal::{ArmaOrders, TestChoice};
use carima_core::regarima::{fit_regarima, fit_regarima_auto};
use carima_core::sarima::SearchOptions;
use carima_core::sim::{run_study, StudyConfig};
use carima_core::{run_carima, AnalysisConfig, DiffSpec, FitOptions, Regressors, TimeSeries};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use crate::dataset::{ingest_csv, CsvSchema, Dataset};
use crate::dummies::{holiday_dummy, read_holidays, weekday_dummies, HOLIDAY_NAME, WEEKDAY_NAMES};
use crate::emit::{emit_report, parse_formats, Manifest};
use crate::error::{exit, UsageError};
use crate::report::{MachineReport, ReportBody};

#[derive(Debug, Parser)]
#[command(name = "carima", version, about = "Causal effects of interventions on time series via seasonal ARIMA counterfactuals")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate and test the effect of an intervention on one series.
    Analyze(AnalyzeArgs),
    /// As analyze, plus the step-dummy regression comparator.
    Compare(AnalyzeArgs),
    /// Run the Monte-Carlo study.
    Simulate(SimulateArgs),
    /// Check the numerical kernels against brute-force references.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestFlag {
    Gaussian,
    Bootstrap,
    Both,
}

impl From<TestFlag> for TestChoice {
    fn from(t: TestFlag) -> Self {
        match t {
            TestFlag::Gaussian => TestChoice::Gaussian,
            TestFlag::Bootstrap => TestChoice::Bootstrap,
            TestFlag::Both => TestChoice::Both,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// TOML analysis settings; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Response column.
    #[arg(long)]
    pub target: Option<String>,
    /// Regressor columns.
    #[arg(long, value_delimiter = ',')]
    pub regressors: Option<Vec<String>>,
    #[arg(long, default_value = "date")]
    pub date_column: String,
    /// Last day before the intervention takes effect (YYYY-MM-DD).
    #[arg(long)]
    pub intervention_date: Option<NaiveDate>,
    /// Post-period horizons in days.
    #[arg(long, value_delimiter = ',')]
    pub horizons: Option<Vec<usize>>,
    /// ARMA orders p,q,P,Q.
    #[arg(long, conflicts_with = "auto_order")]
    pub order: Option<String>,
    /// Choose the ARMA orders by BIC.
    #[arg(long)]
    pub auto_order: bool,
    /// Differencing d,D,s.
    #[arg(long)]
    pub diff: Option<String>,
    /// Model the logarithm of the response.
    #[arg(long)]
    pub log: bool,
    /// Fit without an intercept.
    #[arg(long)]
    pub no_intercept: bool,
    #[arg(long, value_enum)]
    pub test: Option<TestFlag>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub n_boot: Option<usize>,
    /// Seed for every random draw.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Add six day-of-week indicators (Sunday baseline).
    #[arg(long)]
    pub weekday_dummies: bool,
    /// File of holiday dates, one per line, for a holiday indicator.
    #[arg(long)]
    pub holiday_file: Option<PathBuf>,
    /// Worker threads for the bootstrap.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Output formats: csv, json (or json-like), svg.
    #[arg(long, default_value = "csv,json,svg")]
    pub format: String,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// TOML study settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "csv,json")]
    pub format: String,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    pub format: String,
}

fn parse_list<const N: usize>(text: &str, what: &str) -> Result<[usize; N], UsageError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(UsageError(format!("{what} needs {N} comma-separated integers, got {text:?}")));
    }
    let mut out = [0usize; N];
    for (slot, p) in out.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| UsageError(format!("bad integer {p:?} in {what}")))?;
    }
    Ok(out)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Merges the optional TOML file with the flags.
pub fn analysis_config(args: &AnalyzeArgs) -> Result<AnalysisConfig> {
    let mut cfg = match &args.config {
        Some(p) => {
            let cfg: AnalysisConfig = toml::from_str(&read_text(p)?).with_context(|| format!("parsing {}", p.display()))?;
            cfg
        }
        None => {
            let target = args
                .target
                .clone()
                .ok_or_else(|| UsageError("--target is required without --config".into()))?;
            let horizons = args
                .horizons
                .clone()
                .ok_or_else(|| UsageError("--horizons is required without --config".into()))?;
            AnalysisConfig::new(target, 0, horizons)
        }
    };
    if args.config.is_none() {
        cfg.intervention_index = None;
    }
    if let Some(t) = &args.target {
        cfg.series = t.clone();
    }
    if let Some(r) = &args.regressors {
        cfg.regressors = r.clone();
    }
    if let Some(d) = args.intervention_date {
        cfg.intervention_date = Some(d);
        cfg.intervention_index = None;
    }
    if let Some(h) = &args.horizons {
        cfg.horizons = h.clone();
    }
    if let Some(o) = &args.order {
        let [p, q, sp, sq] = parse_list::<4>(o, "--order")?;
        cfg.order = Some(ArmaOrders {
            p,
            q,
            seasonal_p: sp,
            seasonal_q: sq,
        });
        cfg.auto = false;
    }
    if args.auto_order {
        cfg.auto = true;
        cfg.order = None;
    }
    if let Some(d) = &args.diff {
        let [d, sd, s] = parse_list::<3>(d, "--diff")?;
        cfg.diff = DiffSpec { d, seasonal_d: sd, s };
    }
    if args.log {
        cfg.log_transform = true;
    }
    if args.no_intercept {
        cfg.intercept = false;
    }
    if let Some(t) = args.test {
        cfg.test = t.into();
    }
    if let Some(a) = args.alpha {
        cfg.alpha = a;
    }
    if let Some(n) = args.n_boot {
        cfg.n_boot = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = Some(s);
    }
    if cfg.intervention_date.is_none() && cfg.intervention_index.is_none() {
        return Err(UsageError("--intervention-date is required".into()).into());
    }
    Ok(cfg)
}

/// Reads the data and appends any generated calendar regressors to both the
/// dataset and the configuration.
pub fn load_data(args: &AnalyzeArgs, cfg: &mut AnalysisConfig) -> Result<(TimeSeries, Regressors)> {
    let generated: Vec<String> = cfg
        .regressors
        .iter()
        .filter(|r| WEEKDAY_NAMES.contains(&r.as_str()) || r.as_str() == HOLIDAY_NAME)
        .cloned()
        .collect();
    let from_file: Vec<String> = cfg.regressors.iter().filter(|r| !generated.contains(r)).cloned().collect();
    let mut schema = CsvSchema::new(cfg.series.clone(), from_file);
    schema.date_column = args.date_column.clone();
    let mut data: Dataset = ingest_csv(&args.data, &schema)?;
    info!("read {} days from {}", data.len(), args.data.display());
    let mut names = data.regressor_names.clone();
    let weekday = args.weekday_dummies || generated.iter().any(|g| WEEKDAY_NAMES.contains(&g.as_str()));
    if weekday {
        for (name, col) in weekday_dummies(&data.dates) {
            data.push_regressor(name.clone(), col)?;
            names.push(name);
        }
    }
    let holiday = args.holiday_file.is_some() || generated.iter().any(|g| g == HOLIDAY_NAME);
    if holiday {
        let path = args
            .holiday_file
            .as_ref()
            .ok_or_else(|| UsageError("holiday regressor needs --holiday-file".into()))?;
        let set = read_holidays(path)?;
        let col = holiday_dummy(&data.dates, &set);
        data.push_regressor(HOLIDAY_NAME, col)?;
        names.push(HOLIDAY_NAME.into());
    }
    cfg.regressors = names;
    if let Some(d) = cfg.intervention_date {
        if data.index_of(d).is_none() {
            return Err(UsageError(format!("intervention date {d} is outside the data")).into());
        }
    }
    Ok((data.series()?, data.regressor_set()?))
}

/// Runs one parsed command line and returns the exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Analyze(args) => analyze(&args, false),
        Command::Compare(args) => analyze(&args, true),
        Command::Simulate(args) => simulate(&args),
        Command::Selftest(args) => selftest(&args),
    }
}

fn set_workers(n: usize) {
    // Results never depend on the pool size; failing to resize an already
    // initialised global pool is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
}

fn finish(report: &MachineReport, out: &Path, format: &str) -> Result<Manifest> {
    let formats = parse_formats(format)?;
    let manifest = emit_report(report, out, &formats)?;
    info!("wrote {} files to {}", manifest.files.len() + 1, out.display());
    Ok(manifest)
}

fn analyze(args: &AnalyzeArgs, compare: bool) -> Result<i32> {
    parse_formats(&args.format)?;
    set_workers(args.workers);
    let mut cfg = analysis_config(args)?;
    let (y, x) = load_data(args, &mut cfg)?;
    cfg.validate()?;
    let report = run_carima(&cfg, &y, &x)?;
    let body = if compare {
        let end = report.t_star + 1 + report.horizons.last().copied().unwrap_or(0);
        let y_window = y.slice(0, end)?;
        let y_window = if cfg.log_transform { y_window.map(f64::ln) } else { y_window };
        let x_window = x.slice(0, end)?;
        let opts = FitOptions {
            intercept: cfg.intercept,
            ..FitOptions::default()
        };
        let regarima = if cfg.auto {
            let search = SearchOptions {
                fit: opts,
                ..SearchOptions::default()
            };
            fit_regarima_auto(&y_window, &x_window, report.t_star, cfg.diff, &search, cfg.alpha)?
        } else {
            fit_regarima(&y_window, &x_window, report.t_star, &report.model.order, &opts, cfg.alpha)?
        };
        ReportBody::Comparison {
            config: cfg,
            report,
            regarima,
        }
    } else {
        ReportBody::Analysis { config: cfg, report }
    };
    let report = MachineReport::new(body);
    finish(&report, &args.out, &args.format)?;
    let summary = crate::emit::render_files(&report, &[])?;
    if let Some((_, text)) = summary.iter().find(|(n, _)| n == "summary.txt") {
        print!("{text}");
    }
    Ok(0)
}

fn simulate(args: &SimulateArgs) -> Result<i32> {
    parse_formats(&args.format)?;
    let mut cfg = match &args.config {
        Some(p) => {
            let cfg: StudyConfig = toml::from_str(&read_text(p)?).with_context(|| format!("parsing {}", p.display()))?;
            cfg
        }
        None => StudyConfig::default(),
    };
    if let Some(n) = args.reps {
        cfg.n_reps = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    let out = run_study(&cfg)?;
    print!("{}", out.tables.to_text());
    let report = MachineReport::new(ReportBody::Study {
        config: cfg,
        tables: out.tables,
    });
    finish(&report, &args.out, &args.format)?;
    Ok(0)
}

fn selftest(args: &SelftestArgs) -> Result<i32> {
    let checks = carima_core::oracle::run_all(args.seed)?;
    print!("{}", crate::report::selftest_summary(&checks));
    let failed = checks.iter().any(|c| !c.passed);
    if let Some(out) = &args.out {
        let report = MachineReport::new(ReportBody::Selftest { seed: args.seed, checks });
        finish(&report, out, &args.format)?;
    }
    Ok(if failed { exit::MODEL } else { 0 })
}
