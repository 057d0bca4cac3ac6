//! Profiling and rolling-window experiment runs, plus their CSV, SVG and JSON outputs.
mod charts;
mod compare;
mod config;
mod table;

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use charts::{chart_file_name, emit_charts, render_chart};
pub use compare::{compare, comparison_csv, ols_slope, write_comparison, ComparisonRow, SideSummary, COMPARE_HEADER};
pub use config::{ExposureSettings, InputPaths, RunConfig};
pub use table::{MetricRow, MetricSeriesTable, CSV_HEADER, DATA_SERIES};

use crate::error::{Error, Result};
use crate::ingestion::{
    deduplicate, read_authors_file, read_genres_file, read_interactions_file, validate_records,
    AuthorTable, GenreTable, InteractionRecord,
};
use crate::metrics::{self, names, EntityLevel, ExposureModel};
use crate::recommenders::{recommend, Algorithm, InteractionMatrix, RankedList, TrainedModel};
use crate::windowing::{bucket_by, records_in, rolling_splits, ExperimentSplit, MonthRange, SplitWindows};

pub const PROFILE_CSV: &str = "profile.csv";
pub const EXPERIMENT_CSV: &str = "experiment.csv";
pub const EXPERIMENT_META: &str = "experiment_meta.json";
pub const CHARTS_DIR: &str = "charts";

/// Deduplicated interaction records plus the genre and author side tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<InteractionRecord>,
    pub genres: GenreTable,
    pub authors: AuthorTable,
}

impl Dataset {
    pub fn load(inputs: &InputPaths) -> Result<Self> {
        let events = read_interactions_file(&inputs.interactions)?;
        let records = deduplicate(&events);
        validate_records(&records)?;
        Ok(Dataset {
            records,
            genres: read_genres_file(&inputs.genres)?,
            authors: read_authors_file(&inputs.authors)?,
        })
    }
}

/// Per-component seed: the first 8 bytes (little endian) of
/// SHA-256(global seed LE ‖ component ‖ 0x00 ‖ window).
pub fn derive_seed(global: u64, component: &str, window: &str) -> u64 {
    let digest = Sha256::new()
        .chain_update(global.to_le_bytes())
        .chain_update(component.as_bytes())
        .chain_update([0u8])
        .chain_update(window.as_bytes())
        .finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// The nine data-side metrics for every month of `range`.
///
/// Months are keyed by `last_ts`, except `n_first_records`, which counts records
/// whose `first_ts` falls in the month. Metrics undefined for a month (no genre
/// coverage, no known genders, no records) are left out.
pub fn profile_table(dataset: &Dataset, range: MonthRange) -> Result<MetricSeriesTable> {
    let by_last = bucket_by(&dataset.records, range, |r| r.last_ts)?;
    let by_first = bucket_by(&dataset.records, range, |r| r.first_ts)?;
    let mut rows = Vec::new();
    for ((month, bucket), (_, first)) in by_last.iter().zip(&by_first) {
        let label = month.to_string();
        let counts = metrics::unique_counts_records(bucket, &dataset.authors);
        let n_users = counts.n_users.unwrap_or(0) as u64;
        let mut push = |metric: &str, value: Option<f64>| {
            if let Some(v) = value {
                rows.push(MetricRow::new(&label, DATA_SERIES, metric, v, n_users));
            }
        };
        push(names::N_RECORDS, Some(bucket.len() as f64));
        push(names::N_FIRST_RECORDS, Some(first.len() as f64));
        push(names::UNIQUE_USERS, Some(n_users as f64));
        push(names::UNIQUE_ITEMS, Some(counts.n_items as f64));
        push(names::UNIQUE_AUTHORS, Some(counts.n_authors as f64));
        push(
            names::PROFILE_GENRE_ENTROPY,
            metrics::user_profile_genre_entropy(bucket, &dataset.genres),
        );
        push(
            names::INTERACTION_GINI_ITEM,
            metrics::interaction_gini(bucket, EntityLevel::Item, &dataset.authors),
        );
        push(
            names::INTERACTION_GINI_AUTHOR,
            metrics::interaction_gini(bucket, EntityLevel::Author, &dataset.authors),
        );
        push(
            names::FEMALE_SHARE,
            metrics::female_author_share(bucket.iter().map(|r| r.item_id.as_str()), &dataset.authors),
        );
    }
    MetricSeriesTable::new(rows)
}

/// Load the inputs named in `config` and profile every month of the data range.
pub fn run_profile(config: &RunConfig) -> Result<MetricSeriesTable> {
    config.validate()?;
    let dataset = Dataset::load(&config.inputs)?;
    profile_table(&dataset, config.windowing.data_range()?)
}

/// Train one algorithm on one split's training window.
///
/// Only records whose `last_ts` falls inside the training window are read, so
/// nothing at or after the test start can influence the result.
pub fn train_split(
    records: &[InteractionRecord],
    windows: &SplitWindows,
    algorithm: Algorithm,
    config: &RunConfig,
) -> Result<(InteractionMatrix, TrainedModel)> {
    let matrix = InteractionMatrix::from_records(records_in(records, windows.train));
    let seed = derive_seed(config.seed, algorithm.name(), &windows.label());
    let model = TrainedModel::train(algorithm, &matrix, &config.algorithm_configs(), seed)?;
    Ok((matrix, model))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitSummary {
    pub window: String,
    pub n_train_records: usize,
    pub n_eligible: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitFailure {
    pub window: String,
    pub algorithm: Algorithm,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub table: MetricSeriesTable,
    pub splits: Vec<SplitSummary>,
    /// Windows with no eligible users.
    pub skipped: Vec<String>,
    pub failures: Vec<SplitFailure>,
}

impl ExperimentOutcome {
    pub fn is_partial(&self) -> bool {
        !self.skipped.is_empty() || !self.failures.is_empty()
    }

    pub fn meta_json(&self) -> String {
        #[derive(Serialize)]
        struct Meta<'a> {
            splits: &'a [SplitSummary],
            skipped: &'a [String],
            failures: &'a [SplitFailure],
        }
        let meta = Meta {
            splits: &self.splits,
            skipped: &self.skipped,
            failures: &self.failures,
        };
        serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n"
    }
}

/// The ten list-side metrics for one algorithm on one split.
pub fn list_metrics(
    window: &str,
    algorithm: Algorithm,
    lists: &[RankedList],
    relevant: &HashMap<&str, HashSet<&str>>,
    matrix: &InteractionMatrix,
    dataset: &Dataset,
    model: &ExposureModel,
) -> Result<Vec<MetricRow>> {
    let k = model.k();
    let n = lists.len();
    let mut rows = Vec::new();
    let mut push = |metric: &str, value: Option<f64>| {
        if let Some(v) = value {
            rows.push(MetricRow::new(window, algorithm.name(), metric, v, n as u64));
        }
    };
    let mean = |v: Vec<f64>| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    let empty = HashSet::new();
    let rel = |l: &RankedList| relevant.get(l.user_id.as_str()).unwrap_or(&empty);

    push(&names::ndcg(k), mean(lists.iter().map(|l| metrics::ndcg(&l.items, rel(l), k)).collect()));
    push(&names::rbp(k), mean(lists.iter().map(|l| metrics::rbp(&l.items, rel(l), model)).collect()));
    push(&names::mrr(k), mean(lists.iter().map(|l| metrics::mrr(&l.items, rel(l), k)).collect()));
    push(
        names::GENRE_ENTROPY,
        mean(
            lists
                .iter()
                .filter_map(|l| metrics::list_genre_distribution(&l.items, &dataset.genres, model))
                .map(|d| d.entropy())
                .collect(),
        ),
    );

    // the exposure catalog is everything the model could have recommended
    let items = matrix.item_ids();
    let mut authors: Vec<&str> = items
        .iter()
        .filter_map(|i| dataset.authors.primary(i).map(|a| a.author_id.as_str()))
        .collect();
    authors.sort_unstable();
    authors.dedup();
    push(
        &names::gini_item(k),
        Some(metrics::exposure_gini(lists, items, EntityLevel::Item, &dataset.authors, model)?),
    );
    if !authors.is_empty() {
        push(
            &names::gini_author(k),
            Some(metrics::exposure_gini(lists, &authors, EntityLevel::Author, &dataset.authors, model)?),
        );
    }
    push(
        names::FEMALE_SHARE,
        metrics::female_author_share(
            lists.iter().flat_map(|l| l.items.iter().map(String::as_str)),
            &dataset.authors,
        ),
    );
    push(
        names::FEMALE_SHARE_WEIGHTED,
        metrics::female_share_weighted(lists, &dataset.authors, model),
    );
    let counts = metrics::unique_counts_lists(lists, &dataset.authors);
    push(names::UNIQUE_ITEMS, Some(counts.n_items as f64));
    push(names::UNIQUE_AUTHORS, Some(counts.n_authors as f64));
    Ok(rows)
}

struct SplitResult {
    summary: SplitSummary,
    rows: Vec<MetricRow>,
    failures: Vec<SplitFailure>,
}

fn run_split(dataset: &Dataset, split: &ExperimentSplit, config: &RunConfig, model: &ExposureModel) -> SplitResult {
    let window = split.label();
    let train_records = records_in(&dataset.records, split.train());
    let summary = SplitSummary {
        window: window.clone(),
        n_train_records: train_records.len(),
        n_eligible: split.eligible_users.len(),
    };
    let mut result = SplitResult {
        summary,
        rows: Vec::new(),
        failures: Vec::new(),
    };
    if split.eligible_users.is_empty() {
        return result;
    }

    let mut relevant: HashMap<&str, HashSet<&str>> = HashMap::new();
    for r in records_in(&dataset.records, split.test()) {
        if split.eligible_users.contains(&r.user_id) {
            relevant.entry(&r.user_id).or_default().insert(&r.item_id);
        }
    }

    for &algorithm in &config.algorithms {
        let attempt = train_split(&dataset.records, &split.windows, algorithm, config).and_then(|(matrix, trained)| {
            let lists = split
                .eligible_users
                .iter()
                .map(|u| recommend(&trained, &matrix, u, model.k()))
                .collect::<Result<Vec<_>>>()?;
            list_metrics(&window, algorithm, &lists, &relevant, &matrix, dataset, model)
        });
        match attempt {
            Ok(rows) => result.rows.extend(rows),
            Err(e) => {
                log::warn!("{window}: {algorithm} failed: {e}");
                result.failures.push(SplitFailure {
                    window: window.clone(),
                    algorithm,
                    message: e.to_string(),
                });
            }
        }
    }
    result
}

/// Train and evaluate every configured algorithm on every rolling split.
///
/// Splits run concurrently on `config.workers` threads; the result does not
/// depend on the worker count.
pub fn experiment_on(dataset: &Dataset, config: &RunConfig) -> Result<ExperimentOutcome> {
    let model = config.exposure_model()?;
    if config.workers == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    let splits = rolling_splits(&dataset.records, &config.windowing)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<SplitResult> =
        pool.install(|| splits.par_iter().map(|s| run_split(dataset, s, config, &model)).collect());

    let mut rows = Vec::new();
    let mut outcome = ExperimentOutcome {
        table: MetricSeriesTable::default(),
        splits: Vec::new(),
        skipped: Vec::new(),
        failures: Vec::new(),
    };
    for r in results {
        if r.summary.n_eligible == 0 {
            log::warn!("{}: no eligible users, split skipped", r.summary.window);
            outcome.skipped.push(r.summary.window.clone());
        }
        rows.extend(r.rows);
        outcome.failures.extend(r.failures);
        outcome.splits.push(r.summary);
    }
    outcome.table = MetricSeriesTable::new(rows)?;
    Ok(outcome)
}

pub fn run_experiment(config: &RunConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let dataset = Dataset::load(&config.inputs)?;
    experiment_on(&dataset, config)
}

/// Write `profile.csv` and its charts under `out`.
pub fn write_profile(table: &MetricSeriesTable, out: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let csv = out.join(PROFILE_CSV);
    table.write_csv(&csv)?;
    let mut written = vec![csv];
    if !table.is_empty() {
        written.extend(emit_charts(table, &out.join(CHARTS_DIR).join("profile"))?);
    }
    Ok(written)
}

/// Write `experiment.csv`, `experiment_meta.json` and the charts under `out`.
pub fn write_experiment(outcome: &ExperimentOutcome, out: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let csv = out.join(EXPERIMENT_CSV);
    outcome.table.write_csv(&csv)?;
    let meta = out.join(EXPERIMENT_META);
    fs::write(&meta, outcome.meta_json()).map_err(|e| Error::io(&meta, e))?;
    let mut written = vec![csv, meta];
    if !outcome.table.is_empty() {
        written.extend(emit_charts(&outcome.table, &out.join(CHARTS_DIR).join("experiment"))?);
    }
    Ok(written)
}
