//! Seeded synthetic interaction, genre and author files.
//!
//! All randomness comes from a single ChaCha8 stream (`rand_chacha::ChaCha8Rng`)
//! seeded with `SynthParams::seed` and consumed in a fixed order, so the same
//! parameters produce byte-identical files on every platform.
//!
//! Items are ranked by a random permutation and chosen with weight
//! `rank^(−s)`, modulated by how well the item's latent genre mix matches the
//! user's latent taste. That modulation is what gives personalized models
//! something to learn.
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingestion::{
    deduplicate, AuthorTable, Gender, GenreTable, RawEvent, AUTHOR_COLUMNS, GENRE_COLUMNS,
    INTERACTION_COLUMNS,
};
use crate::pipeline::Dataset;
use crate::windowing::YearMonth;

pub const INTERACTIONS_FILE: &str = "interactions.csv";
pub const GENRES_FILE: &str = "genres.csv";
pub const AUTHORS_FILE: &str = "authors.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub n_users: usize,
    pub n_items: usize,
    pub n_authors: usize,
    pub n_genres: usize,
    /// First day of the first generated month.
    pub start: NaiveDate,
    pub months: usize,
    /// Poisson mean of events per user per month, before drift.
    pub interactions_per_user_per_month: f64,
    /// Item choice weight ∝ rank^(−s).
    pub popularity_exponent: f64,
    pub female_fraction: f64,
    /// Share of authors whose gender label is unknown, ambiguous or missing.
    pub unknown_gender_fraction: f64,
    /// Symmetric Dirichlet parameter for each item's genre mix.
    pub genre_concentration: f64,
    /// Mean number of genre-shelf applications per item.
    pub genre_shelvings: f64,
    /// Symmetric Dirichlet parameter for each user's genre taste.
    pub taste_concentration: f64,
    /// 0 ignores taste entirely; 1 weights items purely by taste match times popularity.
    pub taste_strength: f64,
    pub rating_probability: f64,
    pub coauthor_probability: f64,
    /// Per-month multipliers on activity; missing months use 1.
    pub activity_drift: Vec<f64>,
    /// Per-month multipliers on the choice weight of female-authored items.
    pub female_drift: Vec<f64>,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_users: 2000,
            n_items: 1000,
            n_authors: 400,
            n_genres: 12,
            start: NaiveDate::from_ymd_opt(2007, 1, 1).unwrap(),
            months: 36,
            interactions_per_user_per_month: 2.5,
            popularity_exponent: 1.1,
            female_fraction: 0.5,
            unknown_gender_fraction: 0.05,
            genre_concentration: 0.1,
            genre_shelvings: 20.0,
            taste_concentration: 0.1,
            taste_strength: 1.0,
            rating_probability: 0.6,
            coauthor_probability: 0.1,
            activity_drift: Vec::new(),
            female_drift: Vec::new(),
            seed: 42,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("synthetic parameters: {m}")));
        if self.n_users == 0 || self.n_items == 0 || self.n_authors == 0 || self.n_genres == 0 || self.months == 0 {
            return bad("all counts must be at least 1");
        }
        if self.popularity_exponent.is_nan() || self.popularity_exponent < 0.0 {
            return bad("popularity_exponent must be >= 0");
        }
        for (name, v) in [
            ("female_fraction", self.female_fraction),
            ("unknown_gender_fraction", self.unknown_gender_fraction),
            ("taste_strength", self.taste_strength),
            ("rating_probability", self.rating_probability),
            ("coauthor_probability", self.coauthor_probability),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(&format!("{name} must lie in [0, 1]"));
            }
        }
        if !(self.genre_concentration > 0.0 && self.taste_concentration > 0.0) {
            return bad("Dirichlet concentrations must be positive");
        }
        if !(self.interactions_per_user_per_month >= 0.0 && self.genre_shelvings >= 0.0) {
            return bad("rates must be nonnegative");
        }
        if self
            .activity_drift
            .iter()
            .chain(&self.female_drift)
            .any(|m| !m.is_finite() || *m < 0.0)
        {
            return bad("drift multipliers must be finite and nonnegative");
        }
        YearMonth::from_first_day(self.start)?;
        Ok(())
    }

    fn activity(&self, month: usize) -> f64 {
        self.activity_drift.get(month).copied().unwrap_or(1.0)
    }

    fn female_multiplier(&self, month: usize) -> f64 {
        self.female_drift.get(month).copied().unwrap_or(1.0)
    }
}

/// One row of the author file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorRow {
    pub item_id: String,
    pub author_id: String,
    pub position: u32,
    pub gender: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub events: Vec<RawEvent>,
    pub genre_rows: Vec<(String, String, u64)>,
    pub author_rows: Vec<AuthorRow>,
}

fn pad(prefix: &str, i: usize, n: usize) -> String {
    let width = n.to_string().len();
    format!("{prefix}{i:0width$}")
}

fn dirichlet<R: Rng>(rng: &mut R, k: usize, concentration: f64) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    let mut v: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter_mut().for_each(|x| *x /= total);
    } else {
        // every draw underflowed; fall back to a single random genre
        let g = rng.random_range(0..k);
        v[g] = 1.0;
    }
    v
}

fn poisson<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let p = Poisson::new(mean).expect("positive mean");
    p.sample(rng) as u64
}

/// Items of one author-gender group, drawn without replacement for one user.
struct Group {
    items: Vec<usize>,
    index: Option<WeightedIndex<f64>>,
    weights: Vec<f64>,
    total: f64,
}

impl Group {
    fn new(weighted: Vec<(usize, f64)>) -> Self {
        let (items, weights): (Vec<usize>, Vec<f64>) = weighted.into_iter().unzip();
        let total = weights.iter().sum();
        Group {
            items,
            index: WeightedIndex::new(&weights).ok(),
            weights,
            total,
        }
    }

    fn take<R: Rng>(&mut self, rng: &mut R) -> Option<usize> {
        let k = self.index.as_ref()?.sample(rng);
        self.total = (self.total - self.weights[k]).max(0.0);
        self.weights[k] = 0.0;
        let exhausted = self.weights.iter().all(|w| *w == 0.0);
        if exhausted {
            self.index = None;
            self.total = 0.0;
        } else if let Some(index) = self.index.as_mut() {
            index.update_weights(&[(k, &0.0)]).expect("some weight remains");
        }
        Some(self.items[k])
    }
}

const UNKNOWN_TOKENS: [&str; 3] = ["unknown", "ambiguous", ""];
const RATING_WEIGHTS: [f64; 5] = [0.05, 0.10, 0.20, 0.35, 0.30];

/// Generate a dataset. Deterministic in `params`.
pub fn generate(params: &SynthParams) -> Result<SyntheticData> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n_genres = params.n_genres;

    let author_ids: Vec<String> = (0..params.n_authors).map(|a| pad("a", a, params.n_authors)).collect();
    let author_gender: Vec<&'static str> = (0..params.n_authors)
        .map(|_| {
            if rng.random::<f64>() < params.unknown_gender_fraction {
                UNKNOWN_TOKENS[rng.random_range(0..UNKNOWN_TOKENS.len())]
            } else if rng.random::<f64>() < params.female_fraction {
                "female"
            } else {
                "male"
            }
        })
        .collect();

    let item_ids: Vec<String> = (0..params.n_items).map(|i| pad("b", i, params.n_items)).collect();
    let mut author_rows = Vec::new();
    let mut item_female = vec![false; params.n_items];
    for (i, item) in item_ids.iter().enumerate() {
        let a = rng.random_range(0..params.n_authors);
        item_female[i] = author_gender[a] == "female";
        author_rows.push(AuthorRow {
            item_id: item.clone(),
            author_id: author_ids[a].clone(),
            position: 1,
            gender: author_gender[a],
        });
        if params.n_authors > 1 && rng.random::<f64>() < params.coauthor_probability {
            let mut b = rng.random_range(0..params.n_authors - 1);
            if b >= a {
                b += 1;
            }
            author_rows.push(AuthorRow {
                item_id: item.clone(),
                author_id: author_ids[b].clone(),
                position: 2,
                gender: author_gender[b],
            });
        }
    }

    let genre_names: Vec<String> = (0..n_genres).map(|g| pad("genre", g, n_genres)).collect();
    let mut item_mix = Vec::with_capacity(params.n_items);
    let mut genre_rows = Vec::new();
    for item in &item_ids {
        let mix = dirichlet(&mut rng, n_genres, params.genre_concentration);
        let shelvings = 1 + poisson(&mut rng, params.genre_shelvings);
        let picker = WeightedIndex::new(&mix).expect("normalized mix");
        let mut counts = vec![0u64; n_genres];
        for _ in 0..shelvings {
            counts[picker.sample(&mut rng)] += 1;
        }
        for (g, c) in counts.iter().enumerate() {
            if *c > 0 {
                genre_rows.push((item.clone(), genre_names[g].clone(), *c));
            }
        }
        item_mix.push(mix);
    }

    let mut rank: Vec<usize> = (0..params.n_items).collect();
    rank.shuffle(&mut rng);
    let popularity: Vec<f64> = rank
        .iter()
        .map(|r| ((r + 1) as f64).powf(-params.popularity_exponent))
        .collect();

    let first_month = YearMonth::from_first_day(params.start)?;
    let month_windows: Vec<(i64, i64)> = (0..params.months)
        .map(|m| {
            let w = first_month.plus(m as i64).window(1);
            (w.start, w.end)
        })
        .collect();
    let rating_picker = WeightedIndex::new(RATING_WEIGHTS).unwrap();
    let user_ids: Vec<String> = (0..params.n_users).map(|u| pad("u", u, params.n_users)).collect();

    let female_items: Vec<usize> = (0..params.n_items).filter(|i| item_female[*i]).collect();
    let other_items: Vec<usize> = (0..params.n_items).filter(|i| !item_female[*i]).collect();

    let mut events = Vec::new();
    for user in &user_ids {
        let taste = dirichlet(&mut rng, n_genres, params.taste_concentration);
        let weight = |i: usize| {
            let fit: f64 = taste.iter().zip(&item_mix[i]).map(|(a, b)| a * b).sum();
            popularity[i] * ((1.0 - params.taste_strength) + params.taste_strength * n_genres as f64 * fit)
        };
        let group = |items: &[usize]| Group::new(items.iter().map(|&i| (i, weight(i))).collect());
        let mut female = group(&female_items);
        let mut other = group(&other_items);

        for (m, &(start, end)) in month_windows.iter().enumerate() {
            let n = poisson(&mut rng, params.interactions_per_user_per_month * params.activity(m));
            for _ in 0..n {
                let f_mass = female.total * params.female_multiplier(m);
                let o_mass = other.total;
                if (f_mass + o_mass).is_nan() || f_mass + o_mass <= 0.0 {
                    break;
                }
                let pick_female = rng.random::<f64>() < f_mass / (f_mass + o_mass);
                let g = if pick_female { &mut female } else { &mut other };
                let Some(item) = g.take(&mut rng) else {
                    continue;
                };
                let timestamp = rng.random_range(start..end);
                let rating = (rng.random::<f64>() < params.rating_probability)
                    .then(|| rating_picker.sample(&mut rng) as u8 + 1);
                events.push(RawEvent {
                    user_id: user.clone(),
                    item_id: item_ids[item].clone(),
                    timestamp,
                    rating,
                });
            }
        }
    }
    events.sort_by(|a, b| {
        (a.timestamp, &a.user_id, &a.item_id).cmp(&(b.timestamp, &b.user_id, &b.item_id))
    });

    Ok(SyntheticData {
        events,
        genre_rows,
        author_rows,
    })
}

/// Paths of the three files written by [`SyntheticData::write_to_dir`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetPaths {
    pub interactions: PathBuf,
    pub genres: PathBuf,
    pub authors: PathBuf,
}

impl DatasetPaths {
    pub fn in_dir(dir: &Path) -> Self {
        DatasetPaths {
            interactions: dir.join(INTERACTIONS_FILE),
            genres: dir.join(GENRES_FILE),
            authors: dir.join(AUTHORS_FILE),
        }
    }
}

fn write_csv<const N: usize, I>(path: &Path, header: [&str; N], rows: I) -> Result<()>
where
    I: IntoIterator<Item = [String; N]>,
{
    let err = |e: csv::Error| Error::Format {
        source_name: path.display().to_string(),
        message: e.to_string(),
    };
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

impl SyntheticData {
    /// The dataset ingestion would build from the written files.
    pub fn to_dataset(&self) -> Result<Dataset> {
        let records = deduplicate(&self.events);
        let genres = GenreTable::from_counts(self.genre_rows.iter().map(|(i, g, c)| (i.as_str(), g.as_str(), *c)));
        let authors = AuthorTable::from_rows(self.author_rows.iter().map(|a| {
            let gender = Gender::parse_token(a.gender).expect("generated tokens are valid");
            (a.item_id.as_str(), a.author_id.as_str(), a.position, gender)
        }))
        .map_err(Error::InvalidInput)?;
        Ok(Dataset {
            records,
            genres,
            authors,
        })
    }

    pub fn write_to_dir(&self, dir: &Path) -> Result<DatasetPaths> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let paths = DatasetPaths::in_dir(dir);
        write_csv(
            &paths.interactions,
            INTERACTION_COLUMNS,
            self.events.iter().map(|e| {
                [
                    e.user_id.clone(),
                    e.item_id.clone(),
                    e.timestamp.to_string(),
                    e.rating.map(|r| r.to_string()).unwrap_or_default(),
                ]
            }),
        )?;
        write_csv(
            &paths.genres,
            GENRE_COLUMNS,
            self.genre_rows
                .iter()
                .map(|(item, genre, count)| [item.clone(), genre.clone(), count.to_string()]),
        )?;
        write_csv(
            &paths.authors,
            AUTHOR_COLUMNS,
            self.author_rows.iter().map(|a| {
                [
                    a.item_id.clone(),
                    a.author_id.clone(),
                    a.position.to_string(),
                    a.gender.to_string(),
                ]
            }),
        )?;
        Ok(paths)
    }
}
