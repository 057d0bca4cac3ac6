use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bookaudit::pipeline::{
    self, compare, comparison_csv, emit_charts, write_experiment, write_profile, MetricSeriesTable, RunConfig,
};
use bookaudit::recommenders::parse_algorithms;
use bookaudit::syndata::{generate, SynthParams};
use bookaudit::windowing::{SplitConfig, YearMonth};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

/// Exit status for a run that finished but skipped splits or algorithms.
const PARTIAL: u8 = 2;

#[derive(Parser)]
#[command(name = "bookaudit", version, about = "Longitudinal audit of recommender interaction logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monthly data-side metrics of the interaction log.
    Profile(RunArgs),
    /// Train and evaluate recommenders on rolling train/test splits.
    Experiment(RunArgs),
    /// Means and slopes before and after an intervention date.
    Compare(CompareArgs),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Render SVG charts from a metric table.
    Report(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Splits evaluated in parallel.
    #[arg(long)]
    workers: Option<usize>,
    /// Comma-separated algorithms, e.g. `mostpop,itemknn,implicitmf,bpr`.
    #[arg(long)]
    algos: Option<String>,
    /// List length and metric cutoff.
    #[arg(long)]
    k: Option<usize>,
    /// Browsing patience of the exposure model.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    interactions: Option<PathBuf>,
    #[arg(long)]
    genres: Option<PathBuf>,
    #[arg(long)]
    authors: Option<PathBuf>,
    #[arg(long, alias = "data_start")]
    data_start: Option<NaiveDate>,
    #[arg(long, alias = "first_test_start")]
    first_test_start: Option<NaiveDate>,
    #[arg(long, alias = "test_months")]
    test_months: Option<u32>,
    #[arg(long, alias = "train_months")]
    train_months: Option<u32>,
    /// Last day of usable data, inclusive.
    #[arg(long, alias = "horizon_end")]
    horizon_end: Option<NaiveDate>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = &self.$field { $target = v.clone(); })*
            };
        }
        set!(
            out => c.output_dir,
            seed => c.seed,
            workers => c.workers,
            k => c.exposure.k,
            gamma => c.exposure.gamma,
            interactions => c.inputs.interactions,
            genres => c.inputs.genres,
            authors => c.inputs.authors,
            data_start => c.windowing.data_start,
            first_test_start => c.windowing.first_test_start,
            test_months => c.windowing.test_months,
            train_months => c.windowing.train_months,
            horizon_end => c.windowing.horizon_end,
        );
        if let Some(list) = &self.algos {
            c.algorithms = parse_algorithms(list)?;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct CompareArgs {
    /// Metric table written by `profile` or `experiment`.
    #[arg(long)]
    table: PathBuf,
    /// Intervention date, YYYY-MM-DD.
    #[arg(long)]
    date: NaiveDate,
    /// Output directory for `compare.csv`; prints to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// JSON generator parameters; omitted keys take their defaults.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value = "synth")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    table: PathBuf,
    /// Directory for the SVG files.
    #[arg(long, default_value = "charts")]
    out: PathBuf,
}

fn profile(args: &RunArgs) -> Result<u8> {
    let config = args.resolve()?;
    let table = pipeline::run_profile(&config)?;
    let written = write_profile(&table, &config.output_dir)?;
    log::info!("wrote {} files to {}", written.len(), config.output_dir.display());
    println!("{}", config.output_dir.join(pipeline::PROFILE_CSV).display());
    Ok(0)
}

fn experiment(args: &RunArgs) -> Result<u8> {
    let config = args.resolve()?;
    let outcome = pipeline::run_experiment(&config)?;
    write_experiment(&outcome, &config.output_dir)?;
    for w in &outcome.skipped {
        eprintln!("warning: split {w} skipped: no eligible users");
    }
    for f in &outcome.failures {
        eprintln!("warning: {} failed on split {}: {}", f.algorithm, f.window, f.message);
    }
    println!("{}", config.output_dir.join(pipeline::EXPERIMENT_CSV).display());
    Ok(if outcome.is_partial() { PARTIAL } else { 0 })
}

fn compare_cmd(args: &CompareArgs) -> Result<u8> {
    let table = MetricSeriesTable::read_csv(&args.table)?;
    let rows = compare(&table, args.date)?;
    let csv = comparison_csv(&rows);
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join("compare.csv");
            fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
            println!("{}", path.display());
        }
        None => print!("{csv}"),
    }
    let skipped = rows.iter().filter(|r| r.summary.is_none()).count();
    if skipped > 0 {
        eprintln!("note: {skipped} series have fewer than 2 windows on one side and were not summarized");
    }
    Ok(0)
}

/// A run config whose windows fit the synthetic timeline.
fn synth_config(params: &SynthParams) -> Result<RunConfig> {
    let start = YearMonth::from_first_day(params.start)?;
    let months = params.months as u32;
    if months < 2 {
        bail!("need at least 2 months to build a train/test split");
    }
    let train_months = if months >= 26 { 24 } else { (months / 2).max(1) };
    let test_months = if months - train_months >= 2 { 2 } else { 1 };
    let end = start.plus(months as i64).first_day().pred_opt().expect("valid date");
    let mut config = RunConfig {
        windowing: SplitConfig {
            data_start: params.start,
            first_test_start: start.plus(train_months as i64).first_day(),
            test_months,
            train_months,
            horizon_end: end,
        },
        seed: params.seed,
        ..Default::default()
    };
    config.inputs.interactions = bookaudit::syndata::INTERACTIONS_FILE.into();
    config.inputs.genres = bookaudit::syndata::GENRES_FILE.into();
    config.inputs.authors = bookaudit::syndata::AUTHORS_FILE.into();
    config.output_dir = "out".into();
    Ok(config)
}

fn synth(args: &SynthArgs) -> Result<u8> {
    let mut params = match &args.params {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<SynthParams>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => SynthParams::default(),
    };
    if let Some(seed) = args.seed {
        params.seed = seed;
    }
    let config = synth_config(&params)?;
    let data = generate(&params)?;
    let paths = data.write_to_dir(&args.out)?;
    let config_path = args.out.join("config.json");
    fs::write(&config_path, config.to_json() + "\n")
        .with_context(|| format!("writing {}", config_path.display()))?;
    log::info!("{} events written", data.events.len());
    for p in [&paths.interactions, &paths.genres, &paths.authors, &config_path] {
        println!("{}", p.display());
    }
    Ok(0)
}

fn report(args: &ReportArgs) -> Result<u8> {
    let table = MetricSeriesTable::read_csv(&args.table)?;
    for p in emit_charts(&table, Path::new(&args.out))? {
        println!("{}", p.display());
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Profile(a) => profile(a),
        Command::Experiment(a) => experiment(a),
        Command::Compare(a) => compare_cmd(a),
        Command::Synth(a) => synth(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
