//! The `froc` command-line tool.
//!
//! Scalar results are written as JSON and tables as CSV unless `--format`
//! says otherwise. Errors go to stderr as `{"error": kind, "message": ...}`
//! with exit code 1 for data or argument problems and 2 for numerical
//! failures.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::data::{self, FrocDataset, ScoreMap, SummaryStats, ValidationReport};
use crate::distributions::{ks_statistic, Family, KsResult};
use crate::empirical::{self, EmpiricalAfroc};
use crate::error::{ErrorClass, FrocError, Result};
use crate::indices::{self, AccuracyIndex, CurvePoint, DfMode, Index, IndexEstimate};
use crate::model::{self, FitDocument, IdcaFit};
use crate::simulate::{self, ScenarioGrid};

#[derive(Debug, Parser)]
#[command(name = "froc", version, about = "IDCA-model analysis of FROC data")]
pub struct Cli {
    /// Worker threads, 0 for one per core. FROC_THREADS takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the IDCA model and report parameters, covariance and KS checks.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        dist: DistArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Confidence interval for the AFROC area.
    Auc {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        dist: DistArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Form the interval on the logit scale.
        #[arg(long)]
        logit: bool,
    },
    /// Confidence interval for the LLF at a fixed FPF.
    Llf {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        dist: DistArgs,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        fpf: f64,
        #[arg(long)]
        logit: bool,
    },
    /// Fitted AFROC curve, optionally with a pointwise band.
    Curve {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        dist: DistArgs,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[arg(long)]
        band: bool,
        #[arg(long)]
        logit: bool,
    },
    /// Joint confidence region for several indices.
    Ellipse {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        dist: DistArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated: auc, p, lambda, lambda2, llf@Q.
        #[arg(long, value_delimiter = ',', required = true)]
        indices: Vec<String>,
        /// Chi-square degrees of freedom: m or m-1.
        #[arg(long, default_value = "m")]
        df: String,
    },
    /// Nonparametric AFROC area with a bootstrap interval.
    Empirical {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1000)]
        bootstrap: usize,
    },
    /// Coverage study over a scenario grid.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Counts and validation issues for a dataset.
    Summary {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub subjects: PathBuf,
    #[arg(long)]
    pub marks: PathBuf,
    /// Monotone score transform applied before anything else.
    #[arg(long, value_enum)]
    pub rescale: Option<Rescale>,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[arg(long, default_value = "normal")]
    pub tp_dist: Family,
    #[arg(long, default_value = "normal")]
    pub fp_dist: Family,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rescale {
    /// Min-max onto [0, 1], then shrink into the open interval.
    Minmax,
    /// Shrink scores already in [0, 1] into the open interval.
    Shrink,
}

const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Serialize)]
struct GoodnessOfFit {
    theta1: KsResult,
    theta2: KsResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta3: Option<KsResult>,
}

#[derive(Debug, Serialize)]
struct FitReport {
    #[serde(flatten)]
    fit: FitDocument,
    goodness_of_fit: GoodnessOfFit,
}

#[derive(Debug, Serialize)]
struct SummaryReport {
    #[serde(flatten)]
    stats: SummaryStats,
    fit_ready: bool,
    issues: Vec<String>,
}

#[derive(Debug, Serialize)]
struct EmpiricalReport {
    estimate: IndexEstimate,
    bootstrap: usize,
    seed: u64,
    curve: EmpiricalAfroc,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            report_error("invalid_argument", &e.to_string());
            return 1;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            report_error(e.kind(), &e.to_string());
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &FrocError) -> i32 {
    match e.class() {
        ErrorClass::Data => 1,
        ErrorClass::Numerical => 2,
    }
}

fn report_error(kind: &str, message: &str) {
    let body = serde_json::json!({ "error": kind, "message": message.trim() });
    eprintln!("{body}");
}

fn configure_threads(flag: usize) -> Result<()> {
    let n = match std::env::var("FROC_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            FrocError::InvalidArgument(format!(
                "FROC_THREADS must be a non-negative integer, got '{v}'"
            ))
        })?,
        Err(_) => flag,
    };
    // The global pool can only be built once per process; later calls keep it.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Fit { data, dist, common } => {
            let ds = load(&data)?;
            let fit = fit_dataset(&ds, &dist)?;
            let report = FitReport {
                goodness_of_fit: goodness_of_fit(&ds, &fit)?,
                fit: fit.to_document(),
            };
            match common.format.unwrap_or(Format::Json) {
                Format::Json => emit_json(&common, &report),
                Format::Csv => {
                    let names = fit.parameter_names();
                    let values = fit.params.to_vector();
                    let mut buf = csv_writer();
                    write_row(&mut buf, ["name", "value", "stderr"])?;
                    for (i, (n, v)) in names.iter().zip(values).enumerate() {
                        let se = fit.covariance[(i, i)].sqrt();
                        write_row(&mut buf, [n.clone(), num(v), num(se)])?;
                    }
                    emit_csv(&common, buf)
                }
            }
        }
        Command::Auc {
            data,
            dist,
            common,
            logit,
        } => {
            let ds = load(&data)?;
            let fit = fit_dataset(&ds, &dist)?;
            let est = interval(&fit, &Index::Auc, common.alpha, logit)?;
            emit_estimate(&common, &est)
        }
        Command::Llf {
            data,
            dist,
            common,
            fpf,
            logit,
        } => {
            let ds = load(&data)?;
            let fit = fit_dataset(&ds, &dist)?;
            let est = interval(&fit, &Index::LlfAtFpf(fpf), common.alpha, logit)?;
            emit_estimate(&common, &est)
        }
        Command::Curve {
            data,
            dist,
            common,
            points,
            band,
            logit,
        } => {
            let ds = load(&data)?;
            let fit = fit_dataset(&ds, &dist)?;
            let curve = model_curve(&fit, points, band.then_some((common.alpha, logit)))?;
            match common.format.unwrap_or(Format::Csv) {
                Format::Json => emit_json(&common, &curve),
                Format::Csv => {
                    let mut buf = csv_writer();
                    write_row(&mut buf, ["fpf", "llf", "band_low", "band_high"])?;
                    for p in &curve {
                        write_row(
                            &mut buf,
                            [num(p.fpf), num(p.llf), opt(p.band_low), opt(p.band_high)],
                        )?;
                    }
                    emit_csv(&common, buf)
                }
            }
        }
        Command::Ellipse {
            data,
            dist,
            common,
            indices,
            df,
        } => {
            let ds = load(&data)?;
            let fit = fit_dataset(&ds, &dist)?;
            let parsed = indices
                .iter()
                .map(|s| s.parse::<Index>())
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&dyn AccuracyIndex> = parsed.iter().map(|i| i as _).collect();
            let df: DfMode = df.parse()?;
            let spec = indices::confidence_ellipse(&fit, &refs, common.alpha, df)?;
            match common.format.unwrap_or(Format::Json) {
                Format::Json => emit_json(&common, &spec),
                Format::Csv => {
                    if spec.boundary.is_empty() {
                        return Err(FrocError::InvalidArgument(
                            "CSV boundary output needs exactly two indices; use --format json"
                                .into(),
                        ));
                    }
                    let mut buf = csv_writer();
                    write_row(&mut buf, ["h1", "h2"])?;
                    for [a, b] in &spec.boundary {
                        write_row(&mut buf, [num(*a), num(*b)])?;
                    }
                    emit_csv(&common, buf)
                }
            }
        }
        Command::Empirical {
            data,
            common,
            bootstrap,
        } => {
            let ds = load(&data)?;
            let seed = common.seed.unwrap_or(DEFAULT_SEED);
            let estimate = empirical::bootstrap_ci(&ds, bootstrap, common.alpha, seed)?;
            let curve = empirical::empirical_curve(&ds)?;
            match common.format.unwrap_or(Format::Json) {
                Format::Json => emit_json(
                    &common,
                    &EmpiricalReport {
                        estimate,
                        bootstrap,
                        seed,
                        curve,
                    },
                ),
                Format::Csv => {
                    let mut buf = csv_writer();
                    write_row(&mut buf, ["threshold", "fpf", "llf"])?;
                    for p in &curve.points {
                        write_row(&mut buf, [num(p.threshold), num(p.fpf), num(p.llf)])?;
                    }
                    emit_csv(&common, buf)
                }
            }
        }
        Command::Simulate { config, common } => {
            let text = std::fs::read_to_string(&config).map_err(|e| {
                FrocError::InvalidArgument(format!("cannot read config {}: {e}", config.display()))
            })?;
            let mut grid: ScenarioGrid = serde_json::from_str(&text).map_err(|e| {
                FrocError::InvalidArgument(format!("bad scenario config {}: {e}", config.display()))
            })?;
            if let Some(seed) = common.seed {
                grid.seed = seed;
            }
            let rows = simulate::run_grid(&grid)?;
            match common.format.unwrap_or(Format::Csv) {
                Format::Json => emit_json(&common, &rows),
                Format::Csv => {
                    let mut buf = Vec::new();
                    simulate::write_grid_csv(&rows, &mut buf)?;
                    write_output(common.out.as_deref(), &buf)
                }
            }
        }
        Command::Summary { data, common } => {
            let ds = load(&data)?;
            let ValidationReport { issues } = data::validate(&ds);
            let report = SummaryReport {
                stats: data::summary_stats(&ds),
                fit_ready: issues.is_empty(),
                issues,
            };
            emit_json(&common, &report)
        }
    }
}

fn load(args: &DataArgs) -> Result<FrocDataset> {
    let ds = FrocDataset::from_paths(&args.subjects, &args.marks)?;
    match args.rescale {
        None => Ok(ds),
        Some(Rescale::Minmax) => {
            let unit = data::rescale_scores(&ds, ScoreMap::MinMax)?;
            data::rescale_scores(&unit, ScoreMap::ShrinkUnit)
        }
        Some(Rescale::Shrink) => data::rescale_scores(&ds, ScoreMap::ShrinkUnit),
    }
}

fn fit_dataset(ds: &FrocDataset, dist: &DistArgs) -> Result<IdcaFit> {
    model::fit(ds, dist.tp_dist, dist.fp_dist)
}

fn interval(fit: &IdcaFit, index: &Index, alpha: f64, logit: bool) -> Result<IndexEstimate> {
    if logit {
        indices::ci_index_logit(fit, index, alpha)
    } else {
        indices::ci_index(fit, index, alpha)
    }
}

/// KS statistics of each fitted score law against its own sample.
pub fn goodness_of_fit_parts(
    ds: &FrocDataset,
    fit: &IdcaFit,
) -> Result<(KsResult, KsResult, Option<KsResult>)> {
    let t1 = ks_statistic(&fit.params.theta1, &ds.tp_scores())?;
    let t2 = ks_statistic(&fit.params.theta2, &ds.fp_scores_negatives())?;
    let t3 = match &fit.params.theta3 {
        Some(d) => Some(ks_statistic(d, &ds.fp_scores_positives())?),
        None => None,
    };
    Ok((t1, t2, t3))
}

fn goodness_of_fit(ds: &FrocDataset, fit: &IdcaFit) -> Result<GoodnessOfFit> {
    let (theta1, theta2, theta3) = goodness_of_fit_parts(ds, fit)?;
    Ok(GoodnessOfFit {
        theta1,
        theta2,
        theta3,
    })
}

/// The fitted curve on `points` FPF values with an optional pointwise band.
pub fn model_curve(
    fit: &IdcaFit,
    points: usize,
    band: Option<(f64, bool)>,
) -> Result<Vec<CurvePoint>> {
    let mut curve = indices::afroc_curve(&fit.params, points)?;
    if let Some((alpha, logit)) = band {
        let grid: Vec<f64> = curve.iter().map(|p| p.fpf).collect();
        let banded = indices::ci_llf_pointwise(fit, &grid, alpha, logit)?;
        let mut it = banded.into_iter().peekable();
        for p in curve.iter_mut() {
            if it.peek().is_some_and(|b| b.fpf == p.fpf) {
                let b = it.next().unwrap_or(*p);
                p.band_low = b.band_low;
                p.band_high = b.band_high;
            }
        }
    }
    Ok(curve)
}

fn emit_estimate(common: &CommonArgs, est: &IndexEstimate) -> Result<()> {
    match common.format.unwrap_or(Format::Json) {
        Format::Json => emit_json(common, est),
        Format::Csv => {
            let mut buf = csv_writer();
            write_row(
                &mut buf,
                ["name", "value", "stderr", "ci_low", "ci_high", "alpha"],
            )?;
            write_row(
                &mut buf,
                [
                    est.name.clone(),
                    num(est.value),
                    num(est.stderr),
                    num(est.ci_low),
                    num(est.ci_high),
                    num(est.alpha),
                ],
            )?;
            emit_csv(common, buf)
        }
    }
}

fn emit_json<T: Serialize>(common: &CommonArgs, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_output(common.out.as_deref(), text.as_bytes())
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn write_row<I, S>(w: &mut csv::Writer<Vec<u8>>, row: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(row)
        .map_err(|e| FrocError::Io(std::io::Error::other(e)))
}

fn emit_csv(common: &CommonArgs, w: csv::Writer<Vec<u8>>) -> Result<()> {
    let buf = w
        .into_inner()
        .map_err(|e| FrocError::Io(std::io::Error::other(e.to_string())))?;
    write_output(common.out.as_deref(), &buf)
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| {
            FrocError::InvalidArgument(format!("cannot write output {}: {e}", path.display()))
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
