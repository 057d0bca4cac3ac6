//! Item-based k-nearest-neighbour scoring over binary cosine similarity.
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::InteractionMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ItemKnnConfig {
    pub n_neighbors: usize,
    pub min_sim: f64,
}

impl Default for ItemKnnConfig {
    fn default() -> Self {
        ItemKnnConfig {
            n_neighbors: 20,
            min_sim: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItemKnn {
    /// Per item, its retained neighbours `(item, sim)` ordered by descending similarity.
    pub neighbors: Vec<Vec<(u32, f64)>>,
    /// Per item `j`, every `(i, sim(i, j))` such that `j` is a neighbour of `i`, ascending in `i`.
    reverse: Vec<Vec<(u32, f64)>>,
}

/// Cosine similarity of item `i` to every other co-occurring item, untruncated.
///
/// Columns are binary, so the cosine reduces to `|U_i ∩ U_j| / sqrt(|U_i| |U_j|)`.
/// Output is sorted by item index.
pub fn cosine_row(matrix: &InteractionMatrix, i: usize, scratch: &mut Vec<u32>) -> Vec<(u32, f64)> {
    scratch.clear();
    scratch.resize(matrix.n_items(), 0);
    let mut touched = Vec::new();
    for &u in matrix.item_users(i) {
        for &j in matrix.user_items(u as usize) {
            if j as usize == i {
                continue;
            }
            if scratch[j as usize] == 0 {
                touched.push(j);
            }
            scratch[j as usize] += 1;
        }
    }
    touched.sort_unstable();
    let ni = matrix.item_users(i).len() as f64;
    touched
        .into_iter()
        .map(|j| {
            let nj = matrix.item_users(j as usize).len() as f64;
            (j, scratch[j as usize] as f64 / (ni * nj).sqrt())
        })
        .collect()
}

impl ItemKnn {
    pub fn train(matrix: &InteractionMatrix, config: &ItemKnnConfig) -> Result<Self> {
        if matrix.n_items() < 2 {
            return Err(Error::InvalidInput(
                "item k-NN needs at least two items".into(),
            ));
        }
        let n_neighbors = config.n_neighbors;
        let min_sim = config.min_sim;
        let neighbors: Vec<Vec<(u32, f64)>> = (0..matrix.n_items())
            .into_par_iter()
            .map_init(Vec::new, |scratch, i| {
                let mut row: Vec<(u32, f64)> = cosine_row(matrix, i, scratch)
                    .into_iter()
                    .filter(|&(_, s)| s > min_sim)
                    .collect();
                row.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                row.truncate(n_neighbors);
                row
            })
            .collect();

        let mut reverse = vec![Vec::new(); matrix.n_items()];
        for (i, row) in neighbors.iter().enumerate() {
            for &(j, s) in row {
                reverse[j as usize].push((i as u32, s));
            }
        }
        Ok(ItemKnn { neighbors, reverse })
    }

    /// Scores for user `u`. Items with no neighbour in the user's profile are
    /// left at negative infinity (unscorable).
    pub(crate) fn score_into(&self, matrix: &InteractionMatrix, u: usize, out: &mut [f64]) {
        out.fill(f64::NEG_INFINITY);
        for &j in matrix.user_items(u) {
            for &(i, s) in &self.reverse[j as usize] {
                let slot = &mut out[i as usize];
                if *slot == f64::NEG_INFINITY {
                    *slot = s;
                } else {
                    *slot += s;
                }
            }
        }
    }
}
