//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Set `BOOKAUDIT_REAL_DATA` to a directory holding `interactions.csv`,
//! `genres.csv` and `authors.csv` exported from the full Goodreads crawl to run
//! the optional real-data check.
mod oracles;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use bookaudit::ingestion::{AuthorTable, Gender, GenreTable, InteractionRecord};
use bookaudit::metrics::{self, names, EntityLevel, ExposureModel};
use bookaudit::pipeline::{
    self, experiment_on, profile_table, train_split, write_experiment, Dataset, ExperimentOutcome,
    InputPaths, RunConfig,
};
use bookaudit::recommenders::{
    Algorithm, Bpr, BprConfig, ImplicitMf, ImplicitMfConfig, InteractionMatrix, RankedList,
    TripleParams,
};
use bookaudit::syndata::{generate, SynthParams};
use bookaudit::windowing::{rolling_splits, split_windows, SplitConfig, YearMonth};
use chrono::{Months, NaiveDate};
use oracles::World;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Status {
    Pass,
    Fail,
    Skip,
}

type Outcome = Result<(Status, String), String>;

fn pass(detail: String) -> Outcome {
    Ok((Status::Pass, detail))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// ---------------------------------------------------------------- 1

fn random_world(rng: &mut ChaCha8Rng) -> (World, Vec<String>, AuthorTable, GenreTable) {
    let n_items = rng.random_range(1..=50);
    let n_authors = rng.random_range(1..=15);
    let n_genres = rng.random_range(1..=6);
    let items: Vec<String> = (0..n_items).map(|i| format!("i{i:02}")).collect();
    let genders = ["female", "male", "unknown"];
    let gender: BTreeMap<String, &'static str> = (0..n_authors)
        .map(|a| (format!("a{a:02}"), genders[rng.random_range(0..3)]))
        .collect();
    let mut author_of = BTreeMap::new();
    let mut genre_counts = BTreeMap::new();
    for item in &items {
        if rng.random::<f64>() < 0.9 {
            author_of.insert(item.clone(), format!("a{:02}", rng.random_range(0..n_authors)));
        }
        if rng.random::<f64>() < 0.85 {
            let counts: Vec<u64> = (0..n_genres)
                .map(|_| if rng.random::<f64>() < 0.5 { rng.random_range(0..20) } else { 0 })
                .collect();
            genre_counts.insert(item.clone(), counts);
        }
    }
    let genre_names: Vec<String> = (0..n_genres).map(|g| format!("g{g}")).collect();
    let genre_rows: Vec<(&str, &str, u64)> = genre_counts
        .iter()
        .flat_map(|(item, counts): (&String, &Vec<u64>)| {
            counts
                .iter()
                .enumerate()
                .map(|(g, c)| (item.as_str(), genre_names[g].as_str(), *c))
                .collect::<Vec<_>>()
        })
        .collect();
    // every genre gets a row (possibly zero) for covered items, so the vocabularies agree
    let genres = GenreTable::from_counts(genre_rows);
    let n_genres = genres.n_genres();
    let authors = AuthorTable::from_rows(author_of.iter().map(|(item, a)| {
        (item.as_str(), a.as_str(), 1, Gender::parse_token(gender[a]).unwrap())
    }))
    .unwrap();
    let world = World {
        author_of,
        gender,
        genre_counts,
        n_genres,
    };
    (world, items, authors, genres)
}

fn random_list(rng: &mut ChaCha8Rng, items: &[String]) -> Vec<String> {
    let mut list = items.to_vec();
    list.shuffle(rng);
    list.truncate(rng.random_range(0..=items.len()));
    list
}

fn criterion_metric_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20240501);
    let mut worst = 0.0f64;
    let mut track = |name: &str, i: usize, a: f64, b: f64| -> Result<(), String> {
        let d = (a - b).abs();
        worst = worst.max(d);
        ensure(d <= 1e-9, || format!("instance {i}: {name} library {a} oracle {b}"))
    };
    let opt = |name: &str, i: usize, a: Option<f64>, b: Option<f64>| -> Result<Option<(f64, f64)>, String> {
        match (a, b) {
            (Some(a), Some(b)) => Ok(Some((a, b))),
            (None, None) => Ok(None),
            _ => Err(format!("instance {i}: {name} definedness differs: {a:?} vs {b:?}")),
        }
    };

    for inst in 0..500 {
        let (world, items, authors, genres) = random_world(&mut rng);
        let k = rng.random_range(1..=50);
        let gamma = rng.random_range(0.05..0.95);
        let model = ExposureModel::new(gamma, k).unwrap();

        // ranked metrics
        let list = random_list(&mut rng, &items);
        let relevant: BTreeSet<String> = items.iter().filter(|_| rng.random::<f64>() < 0.3).cloned().collect();
        let rel: HashSet<&str> = relevant.iter().map(String::as_str).collect();
        track("ndcg", inst, metrics::ndcg(&list, &rel, k), oracles::ndcg(&list, &relevant, k))?;
        track("rbp", inst, metrics::rbp(&list, &rel, &model), oracles::rbp(&list, &relevant, gamma, k))?;
        track("mrr", inst, metrics::mrr(&list, &rel, k), oracles::mrr(&list, &relevant, k))?;

        // entropy and gini on raw vectors
        let n = rng.random_range(1..=50);
        let raw: Vec<f64> = (0..n)
            .map(|_| if rng.random::<f64>() < 0.3 { 0.0 } else { rng.random_range(0.0..10.0) })
            .collect();
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            let probs: Vec<f64> = raw.iter().map(|x| x / total).collect();
            track("entropy", inst, metrics::entropy(&probs), oracles::entropy(&probs))?;
        }
        track("gini", inst, metrics::gini(&raw).unwrap(), oracles::gini(&raw))?;

        // list-level genre mixture
        let lib = metrics::list_genre_distribution(&list, &genres, &model).map(|d| d.probs().to_vec());
        let ora = world.list_genre_distribution(&list, gamma, k);
        match (lib, ora) {
            (Some(a), Some(b)) => {
                ensure(a.len() == b.len(), || format!("instance {inst}: genre vocab size"))?;
                for (x, y) in a.iter().zip(&b) {
                    track("list_genre_distribution", inst, *x, *y)?;
                }
            }
            (None, None) => {}
            (a, b) => return Err(format!("instance {inst}: genre distribution {a:?} vs {b:?}")),
        }

        // exposure over several lists
        let lists: Vec<Vec<String>> = (0..rng.random_range(1..=5)).map(|_| random_list(&mut rng, &items)).collect();
        let ranked: Vec<RankedList> = lists
            .iter()
            .enumerate()
            .map(|(u, l)| RankedList {
                user_id: format!("u{u}"),
                items: l.clone(),
            })
            .collect();
        let author_catalog: Vec<String> = world.author_of.values().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        track(
            "exposure_gini(item)",
            inst,
            metrics::exposure_gini(&ranked, &items, EntityLevel::Item, &authors, &model).unwrap(),
            world.exposure_gini(&lists, &items, false, gamma, k),
        )?;
        if !author_catalog.is_empty() {
            track(
                "exposure_gini(author)",
                inst,
                metrics::exposure_gini(&ranked, &author_catalog, EntityLevel::Author, &authors, &model).unwrap(),
                world.exposure_gini(&lists, &author_catalog, true, gamma, k),
            )?;
        }

        // records: interaction gini, female share, unique counts
        let n_records = rng.random_range(0..=50);
        let records: Vec<(String, String)> = (0..n_records)
            .map(|_| (format!("u{}", rng.random_range(0..8)), items[rng.random_range(0..items.len())].clone()))
            .collect();
        let recs: Vec<InteractionRecord> = records
            .iter()
            .map(|(u, i)| InteractionRecord {
                user_id: u.clone(),
                item_id: i.clone(),
                first_ts: 1,
                last_ts: 1,
                last_rating: None,
            })
            .collect();
        let refs: Vec<&InteractionRecord> = recs.iter().collect();
        for (level, author_level, name) in [
            (EntityLevel::Item, false, "interaction_gini(item)"),
            (EntityLevel::Author, true, "interaction_gini(author)"),
        ] {
            if let Some((a, b)) = opt(
                name,
                inst,
                metrics::interaction_gini(&refs, level, &authors),
                world.interaction_gini(&records, author_level),
            )? {
                track(name, inst, a, b)?;
            }
        }
        if let Some((a, b)) = opt(
            "female_share(records)",
            inst,
            metrics::female_author_share(records.iter().map(|r| r.1.as_str()), &authors),
            world.female_share(records.iter().map(|r| &r.1)),
        )? {
            track("female_share(records)", inst, a, b)?;
        }
        if let Some((a, b)) = opt(
            "female_share(lists)",
            inst,
            metrics::female_author_share(lists.iter().flatten().map(String::as_str), &authors),
            world.female_share(lists.iter().flatten()),
        )? {
            track("female_share(lists)", inst, a, b)?;
        }
        if let Some((a, b)) = opt(
            "female_share_weighted",
            inst,
            metrics::female_share_weighted(&ranked, &authors, &model),
            world.female_share_weighted(&lists, gamma, k),
        )? {
            track("female_share_weighted", inst, a, b)?;
        }
        let uc = metrics::unique_counts_records(&refs, &authors);
        let (oi, oa) = world.unique_counts(records.iter().map(|r| &r.1));
        let ou = records.iter().map(|r| &r.0).collect::<BTreeSet<_>>().len();
        ensure(uc.n_items == oi && uc.n_authors == oa && uc.n_users == Some(ou), || {
            format!("instance {inst}: unique counts {uc:?} vs ({ou}, {oi}, {oa})")
        })?;
        let ul = metrics::unique_counts_lists(&ranked, &authors);
        let (oi, oa) = world.unique_counts(lists.iter().flatten());
        ensure(ul.n_items == oi && ul.n_authors == oa, || {
            format!("instance {inst}: list unique counts {ul:?} vs ({oi}, {oa})")
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}, limit 60s"))?;
    pass(format!("500 instances, max |library - oracle| = {worst:.1e} (tol 1e-9), {elapsed:.2?}"))
}

// ---------------------------------------------------------------- 2

fn criterion_worked_values() -> Outcome {
    let w = ExposureModel::new(0.85, 3).unwrap().weights();
    ensure(w.len() == 3 && close(w[0], 1.0, 1e-15) && close(w[1], 0.85, 1e-15) && close(w[2], 0.7225, 1e-15), || {
        format!("weights {w:?}")
    })?;
    let g = metrics::gini(&[0.0, 0.0, 0.0, 1.0]).unwrap();
    ensure(close(g, 0.75, 1e-15), || format!("gini {g}"))?;
    let h = metrics::entropy(&[0.25; 4]);
    ensure(close(h, 2.0, 1e-15), || format!("entropy {h}"))?;
    let rel: HashSet<&str> = ["b"].into_iter().collect();
    let nd = metrics::ndcg(&["a", "b", "c"], &rel, 100);
    ensure(close(nd, 0.6309, 1e-4), || format!("ndcg {nd}"))?;
    let rel: HashSet<&str> = ["a"].into_iter().collect();
    let r = metrics::rbp(&["a", "b", "c"], &rel, &ExposureModel::new(0.85, 100).unwrap());
    ensure(close(r, 0.15, 1e-12), || format!("rbp {r}"))?;
    pass(format!("weights {w:?}, gini 0.75, entropy 2 bits, ndcg {nd:.6}, rbp {r}"))
}

// ---------------------------------------------------------------- 3

fn random_matrix(rng: &mut ChaCha8Rng, n_users: usize, n_items: usize, density: f64) -> InteractionMatrix {
    let users: Vec<String> = (0..n_users).map(|u| format!("u{u:03}")).collect();
    let items: Vec<String> = (0..n_items).map(|i| format!("i{i:03}")).collect();
    let mut pairs = Vec::new();
    for u in &users {
        pairs.push((u.as_str(), items[rng.random_range(0..n_items)].as_str()));
        for i in &items {
            if rng.random::<f64>() < density {
                pairs.push((u.as_str(), i.as_str()));
            }
        }
    }
    InteractionMatrix::from_pairs(pairs)
}

fn criterion_als_monotone() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut sweeps = 0;
    for m in 0..20 {
        let (nu, ni) = (rng.random_range(2..=100), rng.random_range(2..=100));
        let density = rng.random_range(0.01..0.3);
        let matrix = random_matrix(&mut rng, nu, ni, density);
        let config = ImplicitMfConfig {
            factors: rng.random_range(1..=12),
            reg: rng.random_range(0.01..1.0),
            alpha: rng.random_range(1.0..50.0),
            iterations: 10,
            seed: m,
        };
        let model = ImplicitMf::train(&matrix, &config).map_err(|e| e.to_string())?;
        let mut prev = model.initial_objective;
        for (s, &obj) in model.objective_history.iter().enumerate() {
            ensure(obj <= prev + 1e-8 * prev.abs(), || {
                format!("matrix {m} ({nu}x{ni}) half-sweep {s}: {prev} -> {obj}")
            })?;
            prev = obj;
            sweeps += 1;
        }
    }
    pass(format!("20 matrices, {sweeps} half-sweeps, none rose by more than 1e-8 relative"))
}

// ---------------------------------------------------------------- 4

fn finite_difference(params: &[f64], d: usize, reg: f64, h: f64) -> Vec<f64> {
    // parameter layout: user[d], pos[d], neg[d], pos_bias, neg_bias
    let f = |p: &[f64]| -> f64 {
        let (u, rest) = p.split_at(d);
        let (i, rest) = rest.split_at(d);
        let (j, b) = rest.split_at(d);
        let x: f64 = (0..d).map(|k| u[k] * (i[k] - j[k])).sum::<f64>() + b[0] - b[1];
        let norm: f64 = p.iter().map(|v| v * v).sum();
        -(1.0 + (-x).exp()).ln() - reg * norm
    };
    (0..params.len())
        .map(|k| {
            let mut plus = params.to_vec();
            let mut minus = params.to_vec();
            plus[k] += h;
            minus[k] -= h;
            (f(&plus) - f(&minus)) / (2.0 * h)
        })
        .collect()
}

fn criterion_bpr() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let triples = 150;
    for t in 0..triples {
        let d = rng.random_range(1..=10);
        let reg = rng.random_range(0.0..0.1);
        let params: Vec<f64> = (0..3 * d + 2).map(|_| rng.random_range(-1.5..1.5)).collect();
        let triple = TripleParams {
            user: &params[..d],
            pos: &params[d..2 * d],
            neg: &params[2 * d..3 * d],
            pos_bias: params[3 * d],
            neg_bias: params[3 * d + 1],
        };
        let g = triple.gradient();
        // the per-triple objective is ln σ(x) − reg‖θ‖², whose gradient adds −2·reg·θ
        let analytic: Vec<f64> = g
            .user
            .iter()
            .chain(&g.pos)
            .chain(&g.neg)
            .copied()
            .chain([g.pos_bias, g.neg_bias])
            .zip(&params)
            .map(|(gv, p)| gv - 2.0 * reg * p)
            .collect();
        let numeric = finite_difference(&params, d, reg, 1e-5);
        for (a, n) in analytic.iter().zip(&numeric) {
            let rel = (a - n).abs() / a.abs().max(n.abs()).max(1e-6);
            worst = worst.max(rel);
            ensure(rel < 1e-4, || format!("triple {t}: analytic {a} numeric {n}"))?;
        }
    }
    let matrix = InteractionMatrix::from_pairs([("u", "pos"), ("w", "neg")]);
    let model = Bpr::train(
        &matrix,
        &BprConfig {
            factors: 8,
            epochs: 200,
            seed: 4,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let u = matrix.user_idx("u").unwrap();
    let (sp, sn) = (
        model.score(u, matrix.item_idx("pos").unwrap()),
        model.score(u, matrix.item_idx("neg").unwrap()),
    );
    ensure(sp > sn, || format!("score(pos) {sp} <= score(neg) {sn}"))?;
    pass(format!(
        "{triples} triples, max relative error {worst:.1e} (tol 1e-4); toy score(pos) {sp:.3} > score(neg) {sn:.3}"
    ))
}

// ---------------------------------------------------------------- 5-7

struct SynthRun {
    dataset: Dataset,
    config: RunConfig,
    outcome: ExperimentOutcome,
    elapsed: Duration,
}

fn synth_config(inputs: InputPaths, out: PathBuf) -> RunConfig {
    RunConfig {
        inputs,
        output_dir: out,
        seed: 2024,
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        windowing: SplitConfig {
            data_start: date(2007, 1, 1),
            first_test_start: date(2009, 1, 1),
            test_months: 2,
            train_months: 24,
            horizon_end: date(2009, 12, 31),
        },
        ..Default::default()
    }
}

fn synth_run(dir: &Path) -> Result<SynthRun, String> {
    let start = Instant::now();
    let params = SynthParams::default();
    let data = generate(&params).map_err(|e| e.to_string())?;
    let paths = data.write_to_dir(&dir.join("data")).map_err(|e| e.to_string())?;
    let config = synth_config(
        InputPaths {
            interactions: paths.interactions,
            genres: paths.genres,
            authors: paths.authors,
        },
        dir.join("out"),
    );
    config.validate().map_err(|e| e.to_string())?;
    let dataset = Dataset::load(&config.inputs).map_err(|e| e.to_string())?;
    let outcome = experiment_on(&dataset, &config).map_err(|e| e.to_string())?;
    Ok(SynthRun {
        dataset,
        config,
        outcome,
        elapsed: start.elapsed(),
    })
}

fn criterion_regime(run: &SynthRun) -> Outcome {
    let t = &run.outcome.table;
    ensure(run.outcome.failures.is_empty() && run.outcome.skipped.is_empty(), || {
        format!("partial run: {}", run.outcome.meta_json())
    })?;
    ensure(run.elapsed < Duration::from_secs(300), || format!("took {:?}, limit 300s", run.elapsed))?;
    let windows = t.windows();
    let get = |w: &str, a: Algorithm, m: &str| -> Result<f64, String> {
        t.get(w, a.name(), m).map(|r| r.value).ok_or(format!("missing {w} {a} {m}"))
    };
    let k = run.config.exposure.k;
    let mut min_gini = f64::INFINITY;
    let mut ndcg_wins: BTreeMap<Algorithm, usize> = BTreeMap::new();
    for w in &windows {
        for metric in [names::gini_item(k), names::gini_author(k)] {
            let mp = get(w, Algorithm::MostPop, &metric)?;
            for a in [Algorithm::ItemKnn, Algorithm::ImplicitMf, Algorithm::Bpr] {
                let other = get(w, a, &metric)?;
                ensure(mp > other, || format!("(a) {w}: mostpop {metric} {mp} <= {a} {other}"))?;
            }
        }
        let g = get(w, Algorithm::MostPop, &names::gini_item(k))?;
        min_gini = min_gini.min(g);
        ensure(g > 0.95, || format!("(a) {w}: mostpop gini_item {g} <= 0.95"))?;

        let mp_unique = get(w, Algorithm::MostPop, names::UNIQUE_ITEMS)?;
        for a in [Algorithm::ItemKnn, Algorithm::Bpr] {
            let u = get(w, a, names::UNIQUE_ITEMS)?;
            ensure(u > mp_unique, || format!("(b) {w}: {a} unique items {u} <= mostpop {mp_unique}"))?;
        }
        let mp_ndcg = get(w, Algorithm::MostPop, &names::ndcg(k))?;
        for a in [Algorithm::ItemKnn, Algorithm::ImplicitMf, Algorithm::Bpr] {
            if get(w, a, &names::ndcg(k))? > mp_ndcg {
                *ndcg_wins.entry(a).or_default() += 1;
            }
        }
    }
    for a in [Algorithm::ItemKnn, Algorithm::ImplicitMf, Algorithm::Bpr] {
        let wins = ndcg_wins.get(&a).copied().unwrap_or(0);
        ensure(wins as f64 >= 0.8 * windows.len() as f64, || {
            format!("(c) {a} beats mostpop on ndcg in {wins}/{} windows", windows.len())
        })?;
    }
    pass(format!(
        "{} users, {} windows, {:.1?}: mostpop min gini_item@{k} {min_gini:.4}; ndcg wins {:?}",
        run.dataset.records.iter().map(|r| &r.user_id).collect::<BTreeSet<_>>().len(),
        windows.len(),
        run.elapsed,
        ndcg_wins.iter().map(|(a, n)| format!("{a} {n}/{}", windows.len())).collect::<Vec<_>>()
    ))
}

fn criterion_hygiene(run: &SynthRun) -> Outcome {
    let mut checked = 0;
    let splits = split_windows(&run.config.windowing).map_err(|e| e.to_string())?;
    for windows in &splits {
        let truncated: Vec<InteractionRecord> = run
            .dataset
            .records
            .iter()
            .filter(|r| r.last_ts < windows.test.start)
            .cloned()
            .collect();
        for &a in &run.config.algorithms {
            let full = train_split(&run.dataset.records, windows, a, &run.config).map_err(|e| e.to_string())?;
            let cut = train_split(&truncated, windows, a, &run.config).map_err(|e| e.to_string())?;
            ensure(full == cut, || format!("{a} at {} differs after truncation", windows.label()))?;
            checked += 1;
        }
    }
    pass(format!("{} splits x {} algorithms = {checked} artifacts unchanged", splits.len(), run.config.algorithms.len()))
}

fn read_tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn criterion_determinism(run: &SynthRun, dir: &Path) -> Outcome {
    let first = dir.join("run1");
    let second = dir.join("run2");
    write_experiment(&run.outcome, &first).map_err(|e| e.to_string())?;
    // a fresh end-to-end run from the files, with a different worker count
    let config = RunConfig {
        workers: 1.max(run.config.workers / 2),
        ..run.config.clone()
    };
    let again = pipeline::run_experiment(&config).map_err(|e| e.to_string())?;
    write_experiment(&again, &second).map_err(|e| e.to_string())?;
    let (a, b) = (read_tree(&first), read_tree(&second));
    ensure(a.keys().eq(b.keys()), || "different file sets".to_string())?;
    for (path, bytes) in &a {
        ensure(b[path] == *bytes, || format!("{} differs", path.display()))?;
    }
    let svgs = a.keys().filter(|p| p.extension().is_some_and(|e| e == "svg")).count();
    pass(format!("{} files ({svgs} SVG) byte-identical across two runs", a.len()))
}

// ---------------------------------------------------------------- 8

fn criterion_window_count() -> Outcome {
    let config = SplitConfig::default();
    // independent enumeration: step through calendar months with chrono
    let mut expected = Vec::new();
    let mut test_start = date(2009, 1, 1);
    loop {
        let test_end = test_start + Months::new(2);
        let last_day = test_end.pred_opt().unwrap();
        if last_day > date(2017, 10, 31) {
            break;
        }
        let train_start = test_start - Months::new(24);
        if train_start >= date(2007, 1, 1) {
            expected.push((train_start, test_start, test_end));
        }
        test_start = test_end;
    }
    let splits = rolling_splits(&[], &config).map_err(|e| e.to_string())?;
    ensure(splits.len() == expected.len(), || format!("{} splits, calendar says {}", splits.len(), expected.len()))?;
    let ts = |d: NaiveDate| d.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp();
    for (s, (tr, te, end)) in splits.iter().zip(&expected) {
        ensure(
            s.train().start == ts(*tr) && s.train().end == ts(*te) && s.test().start == ts(*te) && s.test().end == ts(*end),
            || format!("split {} disagrees with calendar ({tr}, {te}, {end})", s.label()),
        )?;
    }
    let first = &splits[0];
    ensure(
        first.train().start == ts(date(2007, 1, 1))
            && first.test().start == ts(date(2009, 1, 1))
            && first.test().end == ts(date(2009, 3, 1)),
        || "first split is not train [2007-01, 2009-01), test [2009-01, 2009-03)".into(),
    )?;
    pass(format!(
        "{} splits; first test {}, last test {}",
        splits.len(),
        first.label(),
        splits.last().unwrap().label()
    ))
}

// ---------------------------------------------------------------- 9

fn criterion_real_data() -> Outcome {
    let Some(dir) = std::env::var_os("BOOKAUDIT_REAL_DATA") else {
        return Ok((Status::Skip, "BOOKAUDIT_REAL_DATA not set; needs the full Goodreads export".into()));
    };
    let dir = PathBuf::from(dir);
    let inputs = InputPaths {
        interactions: dir.join("interactions.csv"),
        genres: dir.join("genres.csv"),
        authors: dir.join("authors.csv"),
    };
    let data = Dataset::load(&inputs).map_err(|e| e.to_string())?;
    let users = data.records.iter().map(|r| r.user_id.as_str()).collect::<BTreeSet<_>>().len();
    let books = data.records.iter().map(|r| r.item_id.as_str()).collect::<BTreeSet<_>>().len();
    let authors = data.authors.n_authors();
    let ratings: Vec<f64> = data.records.iter().filter_map(|r| r.last_rating.map(f64::from)).collect();
    let avg = ratings.iter().sum::<f64>() / ratings.len().max(1) as f64;
    ensure(users == 876_145 && books == 1_522_486 && authors == 612_241, || {
        format!("counts users {users}, books {books}, authors {authors}")
    })?;
    ensure(close(avg, 3.85, 0.005), || format!("average rating {avg}"))?;
    let profile = profile_table(&data, SplitConfig::default().data_range().map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let share = |w: &str| profile.get(w, "data", names::FEMALE_SHARE).map(|r| r.value);
    let early = share("2007-01").ok_or("no 2007-01 female share")?;
    let late = YearMonth::new(2011, 1)
        .map_err(|e| e.to_string())
        .and_then(|m| (0..12).filter_map(|i| share(&m.plus(i).to_string())).reduce(f64::max).ok_or("no 2011 share".into()))?;
    ensure(early < late && late > 0.5, || format!("female share {early} -> {late}"))?;
    pass(format!("{users} users, {books} books, {authors} authors, avg rating {avg:.3}; female share {early:.2} -> {late:.2}"))
}

// ----------------------------------------------------------------

fn run(label: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let (status, detail) = match result {
        Ok(x) => x,
        Err(e) => (Status::Fail, e),
    };
    let tag = match status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Skip => "SKIP",
    };
    println!("{tag} {label} ({:.1?}): {detail}", start.elapsed());
    !matches!(status, Status::Fail)
}

fn main() {
    // libtest passes flags such as --nocapture or a filter; this harness runs everything
    let mut ok = true;
    ok &= run("[1] metric-oracle equivalence", criterion_metric_oracles);
    ok &= run("[2] worked values", criterion_worked_values);
    ok &= run("[3] ALS objective monotone", criterion_als_monotone);
    ok &= run("[4] BPR gradient and toy ranking", criterion_bpr);

    let dir = tempfile::tempdir().expect("temp dir");
    match synth_run(dir.path()) {
        Ok(synth) => {
            ok &= run("[5] synthetic regime reproduction", || criterion_regime(&synth));
            ok &= run("[6] temporal hygiene", || criterion_hygiene(&synth));
            ok &= run("[7] end-to-end determinism", || criterion_determinism(&synth, dir.path()));
        }
        Err(e) => {
            for label in ["[5] synthetic regime reproduction", "[6] temporal hygiene", "[7] end-to-end determinism"] {
                ok &= run(label, || Err(format!("synthetic run failed: {e}")));
            }
        }
    }
    ok &= run("[8] default window count", criterion_window_count);
    ok &= run("[9] real-data statistics (optional)", criterion_real_data);
    if !ok {
        std::process::exit(1);
    }
}
