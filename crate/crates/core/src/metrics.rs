//! Effectiveness, diversity, concentration and representation measures.
//!
//! Ranked-list metrics share one geometric browsing model: position `p`
//! (1-based) receives exposure weight `γ^(p−1)`. The same weights drive RBP,
//! the rank-biased genre mixture and exposure Gini.
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::ingestion::{AuthorTable, Gender, GenreTable, InteractionRecord};
use crate::recommenders::RankedList;

/// Metric names as written to output tables.
pub mod names {
    pub const GENRE_ENTROPY: &str = "genre_entropy";
    pub const PROFILE_GENRE_ENTROPY: &str = "profile_genre_entropy";
    pub const INTERACTION_GINI_ITEM: &str = "interaction_gini_item";
    pub const INTERACTION_GINI_AUTHOR: &str = "interaction_gini_author";
    pub const FEMALE_SHARE: &str = "female_share";
    pub const FEMALE_SHARE_WEIGHTED: &str = "female_share_weighted";
    pub const UNIQUE_ITEMS: &str = "unique_items";
    pub const UNIQUE_AUTHORS: &str = "unique_authors";
    pub const UNIQUE_USERS: &str = "unique_users";
    pub const N_RECORDS: &str = "n_records";
    pub const N_FIRST_RECORDS: &str = "n_first_records";

    pub fn ndcg(k: usize) -> String {
        format!("ndcg@{k}")
    }

    pub fn rbp(k: usize) -> String {
        format!("rbp@{k}")
    }

    pub fn mrr(k: usize) -> String {
        format!("mrr@{k}")
    }

    pub fn gini_item(k: usize) -> String {
        format!("gini_item@{k}")
    }

    pub fn gini_author(k: usize) -> String {
        format!("gini_author@{k}")
    }
}

/// Geometric cascade browsing model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExposureModel {
    gamma: f64,
    k: usize,
}

impl Default for ExposureModel {
    fn default() -> Self {
        ExposureModel { gamma: 0.85, k: 100 }
    }
}

impl ExposureModel {
    pub fn new(gamma: f64, k: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Config(format!("patience {gamma} must lie in (0, 1)")));
        }
        if k == 0 {
            return Err(Error::Config("cutoff k must be at least 1".into()));
        }
        Ok(ExposureModel { gamma, k })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `w_p = γ^(p−1)` for `p = 1..=k`.
    pub fn weights(&self) -> Vec<f64> {
        (0..self.k).map(|p| self.gamma.powi(p as i32)).collect()
    }

    pub fn weight(&self, position: usize) -> f64 {
        debug_assert!(position >= 1);
        self.gamma.powi(position as i32 - 1)
    }
}

/// Binary-gain NDCG at cutoff `k`; 0 when nothing is relevant.
pub fn ndcg<S: AsRef<str>>(list: &[S], relevant: &HashSet<&str>, k: usize) -> f64 {
    if relevant.is_empty() {
        return 0.0;
    }
    let dcg: f64 = list
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, item)| relevant.contains(item.as_ref()))
        .map(|(i, _)| 1.0 / ((i + 2) as f64).log2())
        .sum();
    let ideal: f64 = (0..relevant.len().min(k))
        .map(|i| 1.0 / ((i + 2) as f64).log2())
        .sum();
    dcg / ideal
}

/// Rank-biased precision with persistence `γ` over the model's cutoff.
pub fn rbp<S: AsRef<str>>(list: &[S], relevant: &HashSet<&str>, model: &ExposureModel) -> f64 {
    let hits: f64 = list
        .iter()
        .take(model.k)
        .enumerate()
        .filter(|(_, item)| relevant.contains(item.as_ref()))
        .map(|(i, _)| model.gamma.powi(i as i32))
        .sum();
    (1.0 - model.gamma) * hits
}

/// Reciprocal rank of the first relevant item within the top `k`.
pub fn mrr<S: AsRef<str>>(list: &[S], relevant: &HashSet<&str>, k: usize) -> f64 {
    list.iter()
        .take(k)
        .position(|item| relevant.contains(item.as_ref()))
        .map(|i| 1.0 / (i + 1) as f64)
        .unwrap_or(0.0)
}

/// A normalized distribution over the genre vocabulary (dense, by genre index).
#[derive(Debug, Clone, PartialEq)]
pub struct GenreDistribution {
    probs: Vec<f64>,
}

impl GenreDistribution {
    /// Normalize nonnegative mass; `None` when the total is zero.
    pub fn from_mass(mass: Vec<f64>) -> Option<Self> {
        let total: f64 = mass.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return None;
        }
        Some(GenreDistribution {
            probs: mass.into_iter().map(|m| m / total).collect(),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, genre: usize) -> f64 {
        self.probs.get(genre).copied().unwrap_or(0.0)
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        entropy(&self.probs)
    }
}

/// `−Σ p log₂ p`, skipping zero terms.
pub fn entropy(probs: &[f64]) -> f64 {
    let h: f64 = probs
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| -p * p.log2())
        .sum();
    // a single certain genre gives −1·log₂1 = −0.0
    h.max(0.0)
}

fn add_item_genres(mass: &mut [f64], genres: &GenreTable, item: &str, weight: f64) -> bool {
    match genres.get(item) {
        Some(row) => {
            for &(g, p) in row {
                mass[g] += weight * p;
            }
            true
        }
        None => false,
    }
}

/// Rank-biased genre mixture `P(g|L) ∝ Σ_p w_p P(g | L[p])`.
///
/// Items without genre rows contribute nothing; `None` if no listed item has genres.
pub fn list_genre_distribution<S: AsRef<str>>(
    list: &[S],
    genres: &GenreTable,
    model: &ExposureModel,
) -> Option<GenreDistribution> {
    let mut mass = vec![0.0; genres.n_genres()];
    let mut any = false;
    for (p, item) in list.iter().take(model.k).enumerate() {
        any |= add_item_genres(&mut mass, genres, item.as_ref(), model.gamma.powi(p as i32));
    }
    if !any {
        return None;
    }
    GenreDistribution::from_mass(mass)
}

/// Unweighted mean over users of the entropy of each user's pooled genre mass.
///
/// Users whose books all lack genre rows are skipped; `None` if no user remains.
pub fn user_profile_genre_entropy(records: &[&InteractionRecord], genres: &GenreTable) -> Option<f64> {
    let mut per_user: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in records {
        if let Some(row) = genres.get(&r.item_id) {
            let mass = per_user
                .entry(r.user_id.as_str())
                .or_insert_with(|| vec![0.0; genres.n_genres()]);
            for &(g, p) in row {
                mass[g] += p;
            }
        }
    }
    if per_user.is_empty() {
        return None;
    }
    let n = per_user.len() as f64;
    let total: f64 = per_user
        .into_values()
        .filter_map(GenreDistribution::from_mass)
        .map(|d| d.entropy())
        .sum();
    Some(total / n)
}

/// Gini index `Σ_i Σ_j |x_i − x_j| / (2 n Σ x)`, computed from sorted prefix sums.
pub fn gini(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("gini of an empty vector".into()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidInput(format!("gini input {v} is negative or not finite")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let total: f64 = sorted.iter().sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    // Σ_i Σ_j |x_i − x_j| = 2 Σ_i (2i − n − 1) x_(i) for ascending x, 1-based i
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| (2.0 * (i + 1) as f64 - n - 1.0) * x)
        .sum();
    Ok((weighted / (n * total)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntityLevel {
    Item,
    Author,
}

fn entity_of<'a>(item: &'a str, level: EntityLevel, authors: &'a AuthorTable) -> Option<&'a str> {
    match level {
        EntityLevel::Item => Some(item),
        EntityLevel::Author => authors.primary(item).map(|a| a.author_id.as_str()),
    }
}

/// Gini of per-entity interaction counts among entities observed in `records`.
///
/// At author level each record counts toward its item's primary author;
/// items without an author row are ignored.
pub fn interaction_gini(
    records: &[&InteractionRecord],
    level: EntityLevel,
    authors: &AuthorTable,
) -> Option<f64> {
    let mut counts: HashMap<&str, f64> = HashMap::new();
    for r in records {
        if let Some(e) = entity_of(&r.item_id, level, authors) {
            *counts.entry(e).or_default() += 1.0;
        }
    }
    if counts.is_empty() {
        return None;
    }
    let mut values: Vec<f64> = counts.into_values().collect();
    values.sort_by(f64::total_cmp);
    gini(&values).ok()
}

/// Total position-weighted exposure per entity across all lists.
pub fn exposure_by_entity<'a>(
    lists: &'a [RankedList],
    level: EntityLevel,
    authors: &'a AuthorTable,
    model: &ExposureModel,
) -> HashMap<&'a str, f64> {
    let weights = model.weights();
    let mut exposure: HashMap<&str, f64> = HashMap::new();
    for list in lists {
        for (item, w) in list.items.iter().zip(&weights) {
            if let Some(e) = entity_of(item, level, authors) {
                *exposure.entry(e).or_default() += w;
            }
        }
    }
    exposure
}

/// Gini@k over the exposure vector of the full catalog; unrecommended entities get zero.
///
/// Exposed entities missing from `catalog` are appended rather than dropped.
pub fn exposure_gini<S: AsRef<str>>(
    lists: &[RankedList],
    catalog: &[S],
    level: EntityLevel,
    authors: &AuthorTable,
    model: &ExposureModel,
) -> Result<f64> {
    let exposure = exposure_by_entity(lists, level, authors, model);
    let mut seen = HashSet::with_capacity(catalog.len());
    let mut values: Vec<f64> = Vec::with_capacity(catalog.len());
    for e in catalog {
        let e = e.as_ref();
        if seen.insert(e) {
            values.push(exposure.get(e).copied().unwrap_or(0.0));
        }
    }
    let mut extra: Vec<(&str, f64)> = exposure
        .iter()
        .filter(|(e, _)| !seen.contains(*e))
        .map(|(e, x)| (*e, *x))
        .collect();
    extra.sort_by(|a, b| a.0.cmp(b.0));
    values.extend(extra.into_iter().map(|(_, x)| x));
    gini(&values)
}

/// Fraction female among entries whose primary-author gender is known.
///
/// Entries without an author row or with unknown gender are excluded from both
/// numerator and denominator; `None` when no entry has a known gender.
pub fn female_author_share<'a, I>(items: I, authors: &AuthorTable) -> Option<f64>
where
    I: IntoIterator<Item = &'a str>,
{
    let (mut female, mut known) = (0usize, 0usize);
    for item in items {
        match authors.gender_of_item(item) {
            Some(Gender::Female) => {
                female += 1;
                known += 1;
            }
            Some(Gender::Male) => known += 1,
            _ => {}
        }
    }
    (known > 0).then(|| female as f64 / known as f64)
}

/// Exposure-weighted variant of [`female_author_share`] over ranked lists.
pub fn female_share_weighted(lists: &[RankedList], authors: &AuthorTable, model: &ExposureModel) -> Option<f64> {
    let weights = model.weights();
    let (mut female, mut known) = (0.0, 0.0);
    for list in lists {
        for (item, w) in list.items.iter().zip(&weights) {
            match authors.gender_of_item(item) {
                Some(Gender::Female) => {
                    female += w;
                    known += w;
                }
                Some(Gender::Male) => known += w,
                _ => {}
            }
        }
    }
    (known > 0.0).then(|| female / known)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniqueCounts {
    pub n_users: Option<usize>,
    pub n_items: usize,
    pub n_authors: usize,
}

/// Distinct items and primary authors (any gender label) among `items`.
pub fn unique_counts<'a, I>(items: I, authors: &AuthorTable) -> UniqueCounts
where
    I: IntoIterator<Item = &'a str>,
{
    let items: BTreeSet<&str> = items.into_iter().collect();
    let n_authors = items
        .iter()
        .filter_map(|i| authors.primary(i).map(|a| a.author_id.as_str()))
        .collect::<BTreeSet<_>>()
        .len();
    UniqueCounts {
        n_users: None,
        n_items: items.len(),
        n_authors,
    }
}

/// Distinct users, items and authors in a bucket of records.
pub fn unique_counts_records(records: &[&InteractionRecord], authors: &AuthorTable) -> UniqueCounts {
    let n_users = records
        .iter()
        .map(|r| r.user_id.as_str())
        .collect::<BTreeSet<_>>()
        .len();
    UniqueCounts {
        n_users: Some(n_users),
        ..unique_counts(records.iter().map(|r| r.item_id.as_str()), authors)
    }
}

/// Distinct items and authors across a set of lists.
pub fn unique_counts_lists(lists: &[RankedList], authors: &AuthorTable) -> UniqueCounts {
    unique_counts(lists.iter().flat_map(|l| l.items.iter().map(String::as_str)), authors)
}
