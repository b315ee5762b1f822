//! `pooltest`: design, generate, decode and simulate random group tests.
//!
//! Exit codes: 0 on success, 1 on domain or parse errors, 2 when an
//! exhaustive search would exceed its budget.

mod output;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pooltest_core::decode::{decode, DecodeResult};
use pooltest_core::design::coefficient_table;
use pooltest_core::format::{
    read_answers, read_gtm1, read_item_list, write_answers, write_gtm1, write_item_list,
};
use pooltest_core::randgen::generate;
use pooltest_core::simulate::{
    estimate_property_rate, run_trials, run_trials_with_workers, DefectMode,
};
use pooltest_core::verify::check_property;
use pooltest_core::{
    answer_vector, DecoderKind, DesignSpec, Error, ModelKind, Property, TestMatrix, TrialConfig,
};

#[derive(Parser)]
#[command(
    name = "pooltest",
    version,
    about = "Random non-adaptive group testing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prescribed test count and model parameter for a design.
    Design(DesignArgs),
    /// Coefficients of ln n for d = 2..=d-max.
    Table(TableArgs),
    /// Draw a test matrix and write it as GTM1.
    Generate(GenerateArgs),
    /// Answer vector of a matrix for a defective set.
    Answer(AnswerArgs),
    /// Recover the defective set from a matrix and its answers.
    Decode(DecodeArgs),
    /// Check a matrix property for a known defective set.
    Verify(VerifyArgs),
    /// Monte Carlo success or property rates.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct DesignFlags {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// disjunct, separable or semi
    #[arg(long, default_value = "semi")]
    property: Property,
    /// rid or rrsd
    #[arg(long, default_value = "rid")]
    model: ModelKind,
}

impl DesignFlags {
    fn spec(&self) -> Result<DesignSpec, Error> {
        DesignSpec::new(self.n, self.d, self.delta, self.property, self.model)
    }
}

#[derive(Args)]
struct DesignArgs {
    #[command(flatten)]
    design: DesignFlags,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, default_value_t = 7)]
    d_max: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    design: DesignFlags,
    /// Override the prescribed number of tests.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, env = "POOLTEST_SEED", default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnswerArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Whitespace-separated one-based item indices.
    #[arg(long)]
    defectives: PathBuf,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    answers: PathBuf,
    #[arg(long)]
    d: usize,
    /// disjunct, semi or brute
    #[arg(long, default_value = "semi")]
    decoder: DecoderKind,
    /// Candidate budget for the exhaustive phase.
    #[arg(long)]
    budget: Option<u128>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    defectives: PathBuf,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value = "semi")]
    property: Property,
    #[arg(long, default_value_t = pooltest_core::decode::DEFAULT_BRUTE_FORCE_BUDGET)]
    budget: u128,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    /// One or more defect bounds, comma separated; one report row each.
    #[arg(long, value_delimiter = ',', required = true)]
    d: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value = "semi")]
    property: Property,
    #[arg(long, default_value = "rid")]
    model: ModelKind,
    /// Override the prescribed number of tests.
    #[arg(long)]
    m: Option<usize>,
    /// Decoder whose exact recovery counts as success.
    #[arg(long)]
    decoder: Option<DecoderKind>,
    /// Count verifier acceptance of this property instead of decoding.
    #[arg(long, conflicts_with = "decoder")]
    verify_property: Option<Property>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, env = "POOLTEST_SEED", default_value_t = 0)]
    seed: u64,
    /// exactly-d or at-most-d
    #[arg(long, default_value = "exactly-d")]
    defect_mode: DefectMode,
    /// Use this GTM1 matrix in every trial.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    budget: Option<u128>,
    /// Worker threads; the report does not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Include per-trial timing columns (not reproducible).
    #[arg(long)]
    timings: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

/// A core error, tagged with the file it came from.
struct Failure {
    error: Error,
    path: Option<PathBuf>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error, path: None }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn in_file<T>(path: &Path, result: Result<T, Error>) -> CliResult<T> {
    result.map_err(|error| Failure {
        error,
        path: Some(path.to_path_buf()),
    })
}

fn read_text(path: &Path) -> CliResult<String> {
    in_file(
        path,
        fs::read_to_string(path).map_err(|e| Error::Input(e.to_string())),
    )
}

fn read_matrix(path: &Path) -> CliResult<TestMatrix> {
    let text = read_text(path)?;
    in_file(path, read_gtm1(&text))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => in_file(
            path,
            fs::write(path, text).map_err(|e| Error::Input(e.to_string())),
        ),
        None => {
            // a closed pipe is not worth an error message
            let _ = io::stdout().lock().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn check_d(d: usize) -> CliResult<()> {
    if d == 0 {
        return Err(Error::Domain("d must be ≥ 1".into()).into());
    }
    Ok(())
}

fn cmd_design(args: &DesignArgs) -> CliResult<()> {
    let spec = args.design.spec()?;
    let coefficient = spec.ln_n_coefficient()?;
    emit(None, &output::design(&spec, coefficient, args.format))
}

fn cmd_table(args: &TableArgs) -> CliResult<()> {
    let rows = coefficient_table(args.d_max)?;
    emit(None, &output::table(&rows, args.format))
}

fn cmd_generate(args: &GenerateArgs) -> CliResult<()> {
    let mut spec = args.design.spec()?;
    if let Some(m) = args.m {
        spec = DesignSpec::custom(spec.n, spec.d, spec.delta, spec.property, spec.model, m)?;
    }
    let matrix = generate(&spec, args.seed)?;
    emit(args.out.as_deref(), &write_gtm1(&matrix))
}

fn cmd_answer(args: &AnswerArgs) -> CliResult<()> {
    let matrix = read_matrix(&args.matrix)?;
    let items = in_file(
        &args.defectives,
        read_item_list(&read_text(&args.defectives)?, matrix.cols()),
    )?;
    let answers = answer_vector(&matrix, &items)?;
    emit(args.out.as_deref(), &write_answers(&answers))
}

fn cmd_decode(args: &DecodeArgs) -> CliResult<()> {
    check_d(args.d)?;
    let matrix = read_matrix(&args.matrix)?;
    let answers = in_file(
        &args.answers,
        read_answers(&read_text(&args.answers)?, matrix.rows()),
    )?;
    let outcome = decode(args.decoder, &matrix, &answers, args.d, args.budget)?;
    let text = match outcome.result {
        DecodeResult::Found(items) => write_item_list(&items),
        DecodeResult::Ambiguous { count } => format!("ambiguous {count}\n"),
        DecodeResult::NoConsistentSet => "inconsistent\n".to_string(),
    };
    emit(None, &text)
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<()> {
    check_d(args.d)?;
    let matrix = read_matrix(&args.matrix)?;
    let items = in_file(
        &args.defectives,
        read_item_list(&read_text(&args.defectives)?, matrix.cols()),
    )?;
    let report = check_property(&matrix, &items, args.d, args.property, args.budget)?;
    emit(None, &output::property_report(&report, args.format))
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    if args.trials == 0 {
        return Err(Error::Domain("trials must be ≥ 1".into()).into());
    }
    if args.workers == Some(0) {
        return Err(Error::Domain("workers must be ≥ 1".into()).into());
    }
    let mut specs = Vec::with_capacity(args.d.len());
    for &d in &args.d {
        let mut spec = DesignSpec::new(args.n, d, args.delta, args.property, args.model)?;
        if let Some(m) = args.m {
            spec = DesignSpec::custom(spec.n, d, spec.delta, spec.property, spec.model, m)?;
        }
        specs.push(spec);
    }
    let fixed = match &args.matrix {
        Some(path) => Some(Arc::new(read_matrix(path)?)),
        None => None,
    };

    let mut reports = Vec::with_capacity(specs.len());
    for spec in specs {
        let decoder = args.decoder.unwrap_or(match spec.property {
            Property::Disjunct => DecoderKind::Disjunct,
            Property::SemiDisjunct => DecoderKind::SemiDisjunct,
            Property::Separable => DecoderKind::BruteForce,
        });
        let mut cfg = TrialConfig::new(spec, args.trials, args.seed, decoder);
        cfg.defect_mode = args.defect_mode;
        cfg.budget = args.budget;
        cfg.fixed_matrix = fixed.clone();
        let report = match (args.verify_property, args.workers) {
            (Some(property), _) => estimate_property_rate(&cfg, property)?,
            (None, Some(w)) => run_trials_with_workers(&cfg, w)?,
            (None, None) => run_trials(&cfg)?,
        };
        reports.push(if args.timings {
            report
        } else {
            report.without_timing()
        });
    }
    emit(
        None,
        &output::simulation(&reports, args.timings, args.format),
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Design(a) => cmd_design(a),
        Command::Table(a) => cmd_table(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Answer(a) => cmd_answer(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Simulate(a) => cmd_simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { error, path }) => {
            match path {
                Some(p) => eprintln!("error: {}: {error}", p.display()),
                None => eprintln!("error: {error}"),
            }
            ExitCode::from(if error.is_budget() { 2 } else { 1 })
        }
    }
}
