//! `dpfair calibrate | transform | report`.
//!
//! Exit codes: 0 success, 1 I/O or numerical failure, 2 bad input (CLI flags,
//! CSV, model file), 3 degenerate group, 4 MEWE did not converge, 5 unknown group.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::model_file::{load_model, save_model};
use super::table::{binary_labels, ScoreTable};
use crate::barycenter::GroupedScores;
use crate::empirical::JitterSpec;
use crate::error::FairError;
use crate::fair_predictor::{calibrate, check_epsilon, CalibrationConfig, FairMode, FairModel};
use crate::metrics::{empirical_excess_risk_fair, group_unfairness, MetricReport, ReportInputs, DEFAULT_F1_THRESHOLD};
use crate::optim::SimplexSettings;
use crate::parametric::{FamilyKind, MeweConfig, SupportTransform};

pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DEGENERATE_GROUP: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;
pub const EXIT_UNKNOWN_GROUP: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "dpfair", version, about = "Demographic-parity post-processing of model scores")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a fair model from a calibration CSV (columns `score`, `group`).
    Calibrate(CalibrateArgs),
    /// Append a `fair_score` column to a CSV using a fitted model.
    Transform(TransformArgs),
    /// Unfairness, budget deviation and optional F1 / ε sweep as JSON.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Constrain the fair output to a parametric family.
    #[arg(long, value_parser = parse_family)]
    pub family: Option<FamilyKind>,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    /// Uniform tie-breaking jitter width in score units (0 disables).
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub mewe_samples: usize,
    #[arg(long, default_value_t = 4)]
    pub mewe_replicates: usize,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2_000)]
    pub max_iters: usize,
    /// Write the best model even if no optimizer restart converged.
    #[arg(long)]
    pub allow_nonconverged: bool,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Override the model's ε.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Additional group column to evaluate unfairness against.
    #[arg(long)]
    pub latent_group_col: Option<String>,
    /// Decision threshold for F1 (needs a 0/1 `label` column).
    #[arg(long, default_value_t = DEFAULT_F1_THRESHOLD)]
    pub threshold: f64,
    /// Comma-separated ε values, e.g. `0,0.5,1`.
    #[arg(long, value_delimiter = ',')]
    pub epsilon_sweep: Option<Vec<f64>>,
}

fn parse_family(s: &str) -> Result<FamilyKind, String> {
    s.parse().map_err(|e: FairError| e.to_string())
}

/// A failed command: message for standard error plus process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub fn exit_code(err: &FairError) -> i32 {
    match err {
        FairError::DegenerateGroup { .. } => EXIT_DEGENERATE_GROUP,
        FairError::ConvergenceFailure { .. } => EXIT_CONVERGENCE,
        FairError::UnknownGroup { .. } => EXIT_UNKNOWN_GROUP,
        FairError::Parse(_)
        | FairError::EmptySample
        | FairError::InvalidScore { .. }
        | FairError::InvalidProbability(_)
        | FairError::InvalidParameter(_)
        | FairError::SizeMismatch { .. }
        | FairError::Json(_) => EXIT_PARSE,
        FairError::Io(_) | FairError::NumericalDomain(_) | FairError::SupportViolation(_) => EXIT_IO,
    }
}

impl From<FairError> for CliError {
    fn from(err: FairError) -> Self {
        Self { code: exit_code(&err), message: err.to_string() }
    }
}

impl From<io::Error> for CliError {
    fn from(err: io::Error) -> Self {
        FairError::Io(err).into()
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        Self { code: EXIT_IO, message: err.to_string() }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        Self { code: EXIT_IO, message: err.to_string() }
    }
}

pub fn run<W: Write>(cli: Cli, stdout: &mut W) -> Result<(), CliError> {
    match cli.command {
        Command::Calibrate(args) => cmd_calibrate(&args, stdout),
        Command::Transform(args) => cmd_transform(&args, stdout),
        Command::Report(args) => cmd_report(&args, stdout),
    }
}

/// Parses `args` (including the program name) and runs the command;
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { 0 };
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out).and_then(|_| out.flush().map_err(CliError::from)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

#[derive(Serialize)]
struct GroupSummary {
    count: usize,
    weight: f64,
}

#[derive(Serialize)]
struct FitSummary {
    family: FamilyKind,
    theta: Vec<f64>,
    support_transform: Option<SupportTransform>,
    objective: f64,
    converged: bool,
    restarts: usize,
}

#[derive(Serialize)]
struct CalibrationSummary {
    n: usize,
    mode: FairMode,
    epsilon: f64,
    groups: BTreeMap<String, GroupSummary>,
    mewe: Option<FitSummary>,
}

fn cmd_calibrate<W: Write>(args: &CalibrateArgs, stdout: &mut W) -> Result<(), CliError> {
    check_epsilon(args.epsilon)?;
    let table = ScoreTable::from_path(&args.input)?;
    let data = table.grouped()?;
    let config = CalibrationConfig {
        epsilon: args.epsilon,
        jitter: JitterSpec::new(args.jitter, args.seed)?,
        weights: None,
        family: args.family,
        mewe: MeweConfig {
            mc_samples: args.mewe_samples,
            replicates: args.mewe_replicates,
            seed: args.seed,
            optimizer: SimplexSettings { max_iters: args.max_iters, ..Default::default() },
            restarts: args.restarts,
        },
    };
    if args.family.is_some() {
        config.mewe.validate()?;
    }
    let calibration = calibrate(&data, &config)?;
    if let Some(fit) = &calibration.fit {
        if !fit.converged {
            if args.allow_nonconverged {
                eprintln!("warning: no optimizer restart converged; keeping best objective {}", fit.objective);
            } else {
                return Err(fit.clone().require_converged().unwrap_err().into());
            }
        }
    }
    let model = &calibration.model;
    save_model(model, &args.output)?;

    let counts = data.by_group();
    let summary = CalibrationSummary {
        n: data.len(),
        mode: model.mode(),
        epsilon: model.epsilon(),
        groups: model
            .barycenter()
            .weights()
            .iter()
            .map(|(s, w)| (s.to_string(), GroupSummary { count: counts[s].len(), weight: w }))
            .collect(),
        mewe: calibration.fit.as_ref().map(|f| FitSummary {
            family: f.model.family().kind,
            theta: f.model.theta().to_vec(),
            support_transform: f.model.family().support,
            objective: f.objective,
            converged: f.converged,
            restarts: f.restarts.len(),
        }),
    };
    serde_json::to_writer_pretty(&mut *stdout, &summary)?;
    writeln!(stdout)?;
    Ok(())
}

fn unknown_group_error(table: &ScoreTable, err: FairError) -> CliError {
    match err {
        FairError::UnknownGroup { group, index: Some(i) } => CliError {
            code: EXIT_UNKNOWN_GROUP,
            message: format!(
                "unknown group `{group}` first seen at data row {} (line {})",
                i + 1,
                table.line_of(i)
            ),
        },
        other => other.into(),
    }
}

fn cmd_transform<W: Write>(args: &TransformArgs, stdout: &mut W) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let epsilon = args.epsilon.unwrap_or(model.epsilon());
    check_epsilon(epsilon)?;
    let table = ScoreTable::from_path(&args.input)?;
    let data = table.grouped()?;
    let fair = model
        .transform_batch_with_epsilon(&data, epsilon)
        .map_err(|e| unknown_group_error(&table, e))?;

    let sink: Box<dyn Write + '_> = match &args.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(&mut *stdout),
    };
    let mut wtr = csv::Writer::from_writer(sink);
    let mut header = table.headers().clone();
    header.push_field("fair_score");
    wtr.write_record(&header)?;
    for (record, value) in table.records().iter().zip(&fair) {
        let mut row = record.clone();
        row.push_field(&value.to_string());
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct GroupUnfairness {
    unfairness: f64,
    per_group_w1: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct LatentReport {
    column: String,
    uncorrected: GroupUnfairness,
    corrected: GroupUnfairness,
}

#[derive(Serialize)]
struct ReportSweepRow {
    epsilon: f64,
    #[serde(flatten)]
    report: MetricReport,
    latent_unfairness: Option<f64>,
}

#[derive(Serialize)]
struct Report {
    n: usize,
    mode: FairMode,
    epsilon: f64,
    uncorrected: MetricReport,
    corrected: MetricReport,
    latent: Option<LatentReport>,
    sweep: Option<Vec<ReportSweepRow>>,
}

fn unfairness_of(scores: &[f64], groups: &[String]) -> Result<GroupUnfairness, FairError> {
    let (unfairness, per_group_w1) = group_unfairness(scores, groups)?;
    Ok(GroupUnfairness { unfairness, per_group_w1 })
}

fn cmd_report<W: Write>(args: &ReportArgs, stdout: &mut W) -> Result<(), CliError> {
    let model: FairModel = load_model(&args.model)?;
    let table = ScoreTable::from_path(&args.input)?;
    if table.is_empty() {
        return Err(FairError::EmptySample.into());
    }
    let latent_groups = args.latent_group_col.as_deref().map(|c| table.column(c)).transpose()?;
    if let Some(sweep) = &args.epsilon_sweep {
        for &e in sweep {
            check_epsilon(e)?;
        }
    }
    let data: GroupedScores = table.grouped()?;
    let labels = table.labels().transpose()?;
    let binary = labels.as_deref().and_then(binary_labels);
    let inputs = ReportInputs {
        reference: labels.as_deref(),
        labels: binary.as_deref(),
        threshold: Some(args.threshold),
    };

    let fair = model.fair_parts(&data).map_err(|e| unknown_group_error(&table, e))?;
    let raw = data.scores();
    let at = |eps: f64| -> Vec<f64> { fair.iter().zip(raw).map(|(&f, &x)| (1.0 - eps) * f + eps * x).collect() };

    let uncorrected = MetricReport::evaluate(raw, raw, data.groups(), inputs)?;
    let corrected_scores = at(model.epsilon());
    let mut corrected = MetricReport::evaluate(&corrected_scores, raw, data.groups(), inputs)?;
    corrected.excess_risk_fair = empirical_excess_risk_fair(&data, model.barycenter()).ok();

    let latent = match (&latent_groups, &args.latent_group_col) {
        (Some(groups), Some(column)) => Some(LatentReport {
            column: column.clone(),
            uncorrected: unfairness_of(raw, groups)?,
            corrected: unfairness_of(&corrected_scores, groups)?,
        }),
        _ => None,
    };

    let sweep = match &args.epsilon_sweep {
        None => None,
        Some(eps_list) => {
            let mut rows = Vec::with_capacity(eps_list.len());
            for &epsilon in eps_list {
                let scores = at(epsilon);
                let report = MetricReport::evaluate(&scores, raw, data.groups(), inputs)?;
                let latent_unfairness = latent_groups
                    .as_ref()
                    .map(|g| group_unfairness(&scores, g).map(|(u, _)| u))
                    .transpose()?;
                rows.push(ReportSweepRow { epsilon, report, latent_unfairness });
            }
            Some(rows)
        }
    };

    let report = Report {
        n: data.len(),
        mode: model.mode(),
        epsilon: model.epsilon(),
        uncorrected,
        corrected,
        latent,
        sweep,
    };
    serde_json::to_writer_pretty(&mut *stdout, &report)?;
    writeln!(stdout)?;
    Ok(())
}
