//! Brute-force reference implementations, written from the metric definitions
//! without reusing any library code path.
use std::collections::{BTreeMap, BTreeSet};

fn log2_discount(position: usize) -> f64 {
    std::f64::consts::LN_2 / ((position + 1) as f64).ln()
}

pub fn ndcg(list: &[String], relevant: &BTreeSet<String>, k: usize) -> f64 {
    let mut dcg = 0.0;
    for p in 1..=k.min(list.len()) {
        if relevant.contains(&list[p - 1]) {
            dcg += log2_discount(p);
        }
    }
    let mut idcg = 0.0;
    for p in 1..=relevant.len().min(k) {
        idcg += log2_discount(p);
    }
    if idcg == 0.0 {
        0.0
    } else {
        dcg / idcg
    }
}

pub fn rbp(list: &[String], relevant: &BTreeSet<String>, gamma: f64, k: usize) -> f64 {
    let mut total = 0.0;
    let mut w = 1.0;
    for p in 1..=k.min(list.len()) {
        if relevant.contains(&list[p - 1]) {
            total += w;
        }
        w *= gamma;
    }
    (1.0 - gamma) * total
}

pub fn mrr(list: &[String], relevant: &BTreeSet<String>, k: usize) -> f64 {
    for p in 1..=k.min(list.len()) {
        if relevant.contains(&list[p - 1]) {
            return 1.0 / p as f64;
        }
    }
    0.0
}

pub fn entropy(probs: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in probs {
        if p > 0.0 {
            h -= p * p.ln() / std::f64::consts::LN_2;
        }
    }
    h
}

pub fn gini(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let total: f64 = x.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut diff = 0.0;
    for a in x {
        for b in x {
            diff += (a - b).abs();
        }
    }
    diff / (2.0 * n * total)
}

/// Position weights γ^(p−1) for p = 1..=k, by repeated multiplication.
pub fn weights(gamma: f64, k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k);
    let mut w = 1.0;
    for _ in 0..k {
        out.push(w);
        w *= gamma;
    }
    out
}

/// Small world of items, authors and genres shared by one random instance.
pub struct World {
    /// item → primary author
    pub author_of: BTreeMap<String, String>,
    pub gender: BTreeMap<String, &'static str>,
    /// item → raw counts per genre index
    pub genre_counts: BTreeMap<String, Vec<u64>>,
    pub n_genres: usize,
}

impl World {
    fn entity(&self, item: &str, author_level: bool) -> Option<String> {
        if author_level {
            self.author_of.get(item).cloned()
        } else {
            Some(item.to_string())
        }
    }

    pub fn exposure_gini(&self, lists: &[Vec<String>], catalog: &[String], author_level: bool, gamma: f64, k: usize) -> f64 {
        let w = weights(gamma, k);
        let mut exposure: BTreeMap<String, f64> = catalog.iter().map(|c| (c.clone(), 0.0)).collect();
        for list in lists {
            for (p, item) in list.iter().enumerate().take(k) {
                if let Some(e) = self.entity(item, author_level) {
                    *exposure.entry(e).or_insert(0.0) += w[p];
                }
            }
        }
        gini(&exposure.into_values().collect::<Vec<_>>())
    }

    pub fn list_genre_distribution(&self, list: &[String], gamma: f64, k: usize) -> Option<Vec<f64>> {
        let w = weights(gamma, k);
        let mut mass = vec![0.0; self.n_genres];
        let mut any = false;
        for (p, item) in list.iter().enumerate().take(k) {
            if let Some(counts) = self.genre_counts.get(item) {
                let total: u64 = counts.iter().sum();
                if total == 0 {
                    continue;
                }
                any = true;
                for g in 0..self.n_genres {
                    mass[g] += w[p] * counts[g] as f64 / total as f64;
                }
            }
        }
        if !any {
            return None;
        }
        let total: f64 = mass.iter().sum();
        Some(mass.iter().map(|m| m / total).collect())
    }

    pub fn interaction_gini(&self, records: &[(String, String)], author_level: bool) -> Option<f64> {
        let mut counts: BTreeMap<String, f64> = BTreeMap::new();
        for (_, item) in records {
            if let Some(e) = self.entity(item, author_level) {
                *counts.entry(e).or_insert(0.0) += 1.0;
            }
        }
        if counts.is_empty() {
            return None;
        }
        Some(gini(&counts.into_values().collect::<Vec<_>>()))
    }

    fn gender_of_item(&self, item: &str) -> Option<&'static str> {
        self.author_of.get(item).map(|a| self.gender[a])
    }

    pub fn female_share<'a>(&self, items: impl Iterator<Item = &'a String>) -> Option<f64> {
        let (mut f, mut known) = (0.0, 0.0);
        for item in items {
            match self.gender_of_item(item) {
                Some("female") => {
                    f += 1.0;
                    known += 1.0;
                }
                Some("male") => known += 1.0,
                _ => {}
            }
        }
        (known > 0.0).then(|| f / known)
    }

    pub fn female_share_weighted(&self, lists: &[Vec<String>], gamma: f64, k: usize) -> Option<f64> {
        let w = weights(gamma, k);
        let (mut f, mut known) = (0.0, 0.0);
        for list in lists {
            for (p, item) in list.iter().enumerate().take(k) {
                match self.gender_of_item(item) {
                    Some("female") => {
                        f += w[p];
                        known += w[p];
                    }
                    Some("male") => known += w[p],
                    _ => {}
                }
            }
        }
        (known > 0.0).then(|| f / known)
    }

    /// (distinct items, distinct primary authors of those items)
    pub fn unique_counts<'a>(&self, items: impl Iterator<Item = &'a String>) -> (usize, usize) {
        let items: BTreeSet<&String> = items.collect();
        let authors: BTreeSet<&String> = items.iter().filter_map(|i| self.author_of.get(*i)).collect();
        (items.len(), authors.len())
    }
}
