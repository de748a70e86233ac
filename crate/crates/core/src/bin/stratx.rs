use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;

use stratx::catpd::{catstratpd, CatStratPDParams};
use stratx::numpd::{stratpd, StratPDParams};
use stratx::oracle::{self, CheckReport};
use stratx::synth::{SynthKind, SynthSpec};
use stratx::{bench, export, load_csv, Dataset, Error};

#[derive(Parser)]
#[command(
    name = "stratx",
    version,
    about = "Model-free partial dependence from CSV data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partial dependence curve of a numeric feature.
    Pd(RunArgs),
    /// Per-category effect of a categorical feature.
    Catpd(RunArgs),
    /// Write a generated dataset as CSV.
    Synth(SynthArgs),
    /// Time the computation over increasing row counts.
    Bench(BenchArgs),
    /// Cross-check the optimized path against a direct transliteration.
    OracleCheck(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Svg,
}

#[derive(Args)]
struct Params {
    #[arg(long, default_value_t = 10)]
    min_samples_leaf: usize,
    #[arg(long, default_value_t = 5)]
    min_slopes_per_x: usize,
    #[arg(long, default_value_t = 1)]
    ntrials: usize,
    #[arg(long, default_value_t = 1.0)]
    max_features: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Params {
    fn numeric(&self) -> StratPDParams {
        StratPDParams {
            min_samples_leaf: self.min_samples_leaf,
            min_slopes_per_x: self.min_slopes_per_x,
            ntrials: self.ntrials,
            max_features: self.max_features,
            rng_seed: self.seed,
        }
    }

    fn categorical(&self) -> CatStratPDParams {
        CatStratPDParams {
            min_samples_leaf: self.min_samples_leaf,
            ntrials: self.ntrials,
            max_features: self.max_features,
            rng_seed: self.seed,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    response: String,
    /// Feature of interest.
    #[arg(long)]
    feature: String,
    /// Columns to label-encode as categorical.
    #[arg(long, value_delimiter = ',')]
    categorical: Vec<String>,
    #[command(flatten)]
    params: Params,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: SynthKind,
    /// Rows; for weather, readings per state and day.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_parser = parse_kind, default_value = "noisy_quadratic")]
    kind: SynthKind,
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    sizes: Vec<usize>,
    /// Column to time; defaults per dataset kind.
    #[arg(long)]
    feature: Option<String>,
    #[command(flatten)]
    params: Params,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Number of random datasets to check.
    #[arg(long, default_value_t = 50)]
    cases: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Check every column of this file instead of random datasets.
    #[arg(long, requires = "response")]
    input: Option<PathBuf>,
    #[arg(long)]
    response: Option<String>,
    #[arg(long, value_delimiter = ',')]
    categorical: Vec<String>,
}

fn parse_kind(s: &str) -> Result<SynthKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InsufficientSupport => 3,
            Error::MergePassLimit { .. } => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 2,
            message: e.to_string(),
        }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(args: &RunArgs) -> Result<(Dataset, usize), Failure> {
    if args.feature == args.response {
        return Err(fail(
            2,
            format!("feature '{}' is the response column", args.feature),
        ));
    }
    let ds = load_csv(&args.input, &args.response, &args.categorical)?;
    let j = ds
        .column_index(&args.feature)
        .ok_or_else(|| Error::MissingColumn(args.feature.clone()))?;
    Ok((ds, j))
}

fn cmd_pd(args: RunArgs) -> Result<(), Failure> {
    let (ds, j) = load(&args)?;
    let curve = stratpd(&ds, j, &args.params.numeric())?;
    eprintln!(
        "ignored_rows={} kept_points={}",
        curve.ignored_rows,
        curve.len()
    );
    let mut out = open_out(args.out.as_deref())?;
    match args.format {
        Format::Csv => export::write_curve_csv(&curve, &mut out)?,
        Format::Svg => {
            out.write_all(export::curve_svg(&curve, &args.feature, ds.response_name()).as_bytes())?
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_catpd(args: RunArgs) -> Result<(), Failure> {
    let (ds, j) = load(&args)?;
    let effect = catstratpd(&ds, j, &args.params.categorical())?;
    eprintln!(
        "ignored_rows={} supported_categories={}",
        effect.ignored_rows,
        effect.n_supported()
    );
    if effect.n_supported() == 0 {
        return Err(fail(4, "no category is supported"));
    }
    let labels = &ds.meta(j)?.category_labels;
    let mut out = open_out(args.out.as_deref())?;
    match args.format {
        Format::Csv => export::write_effect_csv(&effect, labels, &mut out)?,
        Format::Svg => out.write_all(
            export::effect_svg(&effect, labels, &args.feature, ds.response_name()).as_bytes(),
        )?,
    }
    out.flush()?;
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), Failure> {
    let ds = SynthSpec {
        kind: args.kind,
        n: args.n,
        sigma: args.sigma,
        seed: args.seed,
    }
    .generate()?;
    let mut out = open_out(Some(&args.out))?;
    ds.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    let rows = bench::run(
        args.kind,
        &args.sizes,
        args.feature.as_deref(),
        &args.params.numeric(),
        args.params.seed,
    )?;
    let mut out = open_out(args.out.as_deref())?;
    bench::write_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<(), Failure> {
    let mut report = CheckReport::default();
    match &args.input {
        Some(path) => {
            let response = args.response.as_deref().unwrap_or_default();
            let ds = load_csv(path, response, &args.categorical)?;
            oracle::check_all_columns(&ds, args.seed, &mut report)?;
        }
        None => {
            for case in 0..args.cases as u64 {
                let seed = args.seed.wrapping_add(case);
                oracle::check_all_columns(&oracle::random_case(seed), seed, &mut report)?;
            }
        }
    }
    eprintln!(
        "cases={} comparisons={} mismatches={}",
        report.cases,
        report.comparisons,
        report.mismatches.len()
    );
    for m in &report.mismatches {
        eprintln!("mismatch: {m}");
    }
    if report.mismatches.is_empty() {
        Ok(())
    } else {
        Err(fail(1, "optimized output differs from the reference"))
    }
}

fn set_threads() {
    let Ok(v) = std::env::var("STRATX_THREADS") else {
        return;
    };
    match v.parse::<usize>() {
        Ok(k) if k > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build_global()
            {
                warn!("could not size thread pool: {e}");
            }
        }
        _ => warn!("ignoring STRATX_THREADS={v}: expected a positive integer"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    set_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Pd(a) => cmd_pd(a),
        Command::Catpd(a) => cmd_catpd(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Bench(a) => cmd_bench(a),
        Command::OracleCheck(a) => cmd_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
