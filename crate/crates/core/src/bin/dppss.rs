use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dppss::data::{
    gen_gmm_trimodal, gen_two_class, load_csv, load_mnist_idx, pca_project, rescale_to_margin,
    Dataset,
};
use dppss::density::KdeKernel;
use dppss::estimators::DesignRule;
use dppss::experiments::{
    parse_list, parse_samplers, run_coreset_experiment, run_pegasos_experiment,
    run_quadrature_experiment, write_csv, CoresetConfig, CoresetRow, MinibatchWeighting,
    PegasosConfig, PegasosRow, QuadratureConfig, QuadratureSummary, WeightChoice,
};
use dppss::validation::{
    parse_suites, run_validation, Effort, ValidationOptions, ValidationReport,
};

/// Base directory for relative input paths and the default MNIST file names.
const DATA_DIR_VAR: &str = "DPPSS_DATA_DIR";
const MNIST_IMAGES: &str = "train-images-idx3-ubyte";
const MNIST_LABELS: &str = "train-labels-idx1-ubyte";

#[derive(Parser)]
#[command(
    name = "dppss",
    version,
    about = "DPP quadrature, coreset and minibatch experiments"
)]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write CSV here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Variance decay of DPP quadrature against i.i.d. Monte Carlo.
    Quadrature(QuadratureArgs),
    /// Worst-case relative error of k-means coresets.
    CoresetKmeans(CoresetArgs),
    /// Pegasos with per-class DPP minibatches.
    Pegasos(PegasosArgs),
    /// Run self-check suites; exits non-zero if any check fails.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct QuadratureArgs {
    /// iid, haar, db2, ope, a comma-separated list, or all.
    #[arg(long, default_value = "all")]
    sampler: String,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// gamma<s>, mixcos, bump or one.
    #[arg(long = "fn", default_value = "gamma0.75")]
    function: String,
    /// Scales j; each gives n = 2^(dj). Alternative to --n-list.
    #[arg(long, conflicts_with = "n_list")]
    scale_j: Option<String>,
    #[arg(long, default_value = "4,16,64,256")]
    n_list: String,
    #[arg(long, default_value_t = 400)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Weight ω: auto (bump for db2, 1 otherwise), one or bump.
    #[arg(long, default_value = "auto")]
    weight: String,
    /// Design point of the db2 control variate: moment or center.
    #[arg(long, default_value = "moment")]
    design: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum DatasetKind {
    Gmm,
    Mnist,
    Csv,
}

#[derive(Args)]
struct DatasetArgs {
    #[arg(long, value_enum, default_value = "gmm")]
    dataset: DatasetKind,
    /// Synthetic dataset size.
    #[arg(long, default_value_t = 1024)]
    n_points: usize,
    /// Seed of the synthetic dataset.
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
    /// IDX image file (default: train-images-idx3-ubyte under DPPSS_DATA_DIR).
    #[arg(long)]
    mnist_images: Option<PathBuf>,
    /// IDX label file (default: train-labels-idx1-ubyte under DPPSS_DATA_DIR).
    #[arg(long)]
    mnist_labels: Option<PathBuf>,
    /// Digits kept from MNIST, e.g. 4,9. Empty keeps all ten.
    #[arg(long, default_value = "")]
    digits: String,
    /// Number of MNIST images (balanced over digits).
    #[arg(long, default_value_t = 1000)]
    limit: usize,
    /// Input file for --dataset csv; a column named `label` holds labels.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct CoresetArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long, default_value = "all")]
    sampler: String,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value = "16,64,256")]
    m_list: String,
    #[arg(long, default_value_t = 150)]
    replicas: usize,
    #[arg(long, default_value_t = 150)]
    candidates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PegasosArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long, default_value = "all")]
    sampler: String,
    /// Minibatch size per class (first entry is used).
    #[arg(long, default_value = "16")]
    m_list: String,
    #[arg(long, default_value_t = 200)]
    iterations: usize,
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// average (plain minibatch mean) or ht (inclusion-probability weights).
    #[arg(long, default_value = "average")]
    weighting: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ValidateArgs {
    /// all, or a comma-separated list of oracle, stratified, unbiasedness,
    /// partition, transfer, slopes, formulas.
    #[arg(default_value = "all")]
    suites: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// About a tenth of the Monte Carlo work.
    #[arg(long)]
    quick: bool,
    /// Swap in deliberately biased samplers (negative control).
    #[arg(long)]
    tamper: bool,
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

fn data_path(explicit: Option<&Path>, default_name: &str) -> AnyResult<PathBuf> {
    let base = std::env::var_os(DATA_DIR_VAR).map(PathBuf::from);
    match (explicit, base) {
        (Some(p), _) if p.is_absolute() => Ok(p.to_path_buf()),
        (Some(p), Some(b)) if !p.exists() => Ok(b.join(p)),
        (Some(p), _) => Ok(p.to_path_buf()),
        (None, Some(b)) => Ok(b.join(default_name)),
        (None, None) => {
            Err(format!("no path given for {default_name} and {DATA_DIR_VAR} is not set").into())
        }
    }
}

fn parse_digits(s: &str) -> AnyResult<Vec<u8>> {
    if s.trim().is_empty() {
        return Ok((0..10).collect());
    }
    Ok(parse_list(s)?.into_iter().map(|d| d as u8).collect())
}

/// Two-dimensional dataset inside `[0.02, 0.98]²`. `two_class` picks the
/// synthetic generator for `gmm`.
fn load_dataset(args: &DatasetArgs, two_class: bool, default_digits: &str) -> AnyResult<Dataset> {
    let raw = match args.dataset {
        DatasetKind::Gmm if two_class => {
            return Ok(gen_two_class(args.n_points / 2, args.data_seed)?)
        }
        DatasetKind::Gmm => return Ok(gen_gmm_trimodal(args.n_points, args.data_seed)?),
        DatasetKind::Mnist => {
            let images = data_path(args.mnist_images.as_deref(), MNIST_IMAGES)?;
            let labels = data_path(args.mnist_labels.as_deref(), MNIST_LABELS)?;
            let digits = if args.digits.is_empty() {
                default_digits
            } else {
                &args.digits
            };
            load_mnist_idx(&images, &labels, &parse_digits(digits)?, args.limit)?
        }
        DatasetKind::Csv => {
            let path = args.input.as_deref().ok_or("--dataset csv needs --input")?;
            load_csv(&data_path(Some(path), "")?)?
        }
    };
    if raw.dim() > 2 {
        Ok(pca_project(&raw, 2)?.data)
    } else {
        Ok(rescale_to_margin(raw)?)
    }
}

fn emit(out: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> AnyResult<()> {
    match out {
        Some(p) => write_csv(File::create(p)?, header, rows)?,
        None => write_csv(io::stdout().lock(), header, rows)?,
    }
    Ok(())
}

fn quadrature(args: &QuadratureArgs, out: Option<&Path>) -> AnyResult<bool> {
    let samplers = parse_samplers(&args.sampler)?;
    let n_list = match &args.scale_j {
        Some(js) => parse_list(js)?
            .into_iter()
            .map(|j| {
                1usize
                    .checked_shl((j * args.dim) as u32)
                    .filter(|_| j * args.dim < 40)
                    .ok_or_else(|| format!("scale {j} is too large"))
            })
            .collect::<Result<_, _>>()?,
        None => parse_list(&args.n_list)?,
    };
    let weight: WeightChoice = args.weight.parse()?;
    let design: DesignRule = args.design.parse()?;
    let mut rows = Vec::new();
    for sampler in samplers {
        let summary = run_quadrature_experiment(&QuadratureConfig {
            sampler,
            dim: args.dim,
            function: args.function.clone(),
            weight,
            design,
            n_list: n_list.clone(),
            trials: args.trials,
            seed: args.seed,
        })?;
        rows.extend(summary.csv_rows());
    }
    emit(out, &QuadratureSummary::HEADER, &rows)?;
    Ok(true)
}

fn coreset(args: &CoresetArgs, out: Option<&Path>) -> AnyResult<bool> {
    let data = load_dataset(&args.data, false, "")?;
    let cfg = CoresetConfig {
        k: args.k,
        m_list: parse_list(&args.m_list)?,
        samplers: parse_samplers(&args.sampler)?,
        replicas: args.replicas,
        candidates: args.candidates,
        seed: args.seed,
        ..CoresetConfig::default()
    };
    let rows: Vec<Vec<String>> = run_coreset_experiment(&data, &cfg)?
        .iter()
        .map(CoresetRow::fields)
        .collect();
    emit(out, &CoresetRow::HEADER, &rows)?;
    Ok(true)
}

fn pegasos(args: &PegasosArgs, out: Option<&Path>) -> AnyResult<bool> {
    let data = load_dataset(&args.data, true, "4,9")?;
    let m = *parse_list(&args.m_list)?
        .first()
        .ok_or("--m-list is empty")?;
    let cfg = PegasosConfig {
        samplers: parse_samplers(&args.sampler)?,
        m_per_class: m,
        iterations: args.iterations,
        lambda: args.lambda,
        trials: args.trials,
        weighting: args.weighting.parse::<MinibatchWeighting>()?,
        kde: KdeKernel::Gaussian,
        seed: args.seed,
        ..PegasosConfig::default()
    };
    let rows: Vec<Vec<String>> = run_pegasos_experiment(&data, &cfg)?
        .iter()
        .map(PegasosRow::fields)
        .collect();
    emit(out, &PegasosRow::HEADER, &rows)?;
    Ok(true)
}

fn validate(args: &ValidateArgs, out: Option<&Path>) -> AnyResult<bool> {
    let opts = ValidationOptions {
        seed: args.seed,
        tamper: args.tamper,
        effort: if args.quick {
            Effort::Quick
        } else {
            Effort::Full
        },
    };
    let report = run_validation(&parse_suites(&args.suites)?, &opts)?;
    emit(out, &ValidationReport::HEADER, &report.csv_rows())?;
    if !report.passed() {
        eprintln!(
            "{} of {} checks failed",
            report.failures(),
            report.checks.len()
        );
    }
    Ok(report.passed())
}

fn run(cli: &Cli) -> AnyResult<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Quadrature(a) => quadrature(a, out),
        Command::CoresetKmeans(a) => coreset(a, out),
        Command::Pegasos(a) => pegasos(a, out),
        Command::Validate(a) => validate(a, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e}");
            ExitCode::from(2)
        }
    }
}
