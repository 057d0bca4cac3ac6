//! Implicit-feedback recommenders trained on one window's interaction matrix.
mod als;
mod bpr;
mod factors;
mod itemknn;
mod matrix;
mod mostpop;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use als::{objective as als_objective, ImplicitMf, ImplicitMfConfig};
pub use bpr::{log_sigmoid, sigmoid, Bpr, BprConfig, TripleGradient, TripleParams};
pub use factors::Factors;
pub use itemknn::{cosine_row, ItemKnn, ItemKnnConfig};
pub use matrix::{Csr, InteractionMatrix};
pub use mostpop::MostPop;

use crate::error::{Error, Result};

pub const DEFAULT_LIST_LENGTH: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    MostPop,
    ItemKnn,
    ImplicitMf,
    Bpr,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::MostPop,
        Algorithm::ItemKnn,
        Algorithm::ImplicitMf,
        Algorithm::Bpr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::MostPop => "mostpop",
            Algorithm::ItemKnn => "itemknn",
            Algorithm::ImplicitMf => "implicitmf",
            Algorithm::Bpr => "bpr",
        }
    }

    pub fn is_personalized(self) -> bool {
        self != Algorithm::MostPop
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

/// Parse a comma-separated algorithm list such as `mostpop,itemknn`.
pub fn parse_algorithms(list: &str) -> Result<Vec<Algorithm>> {
    let mut algos = Vec::new();
    for part in list.split(',').filter(|p| !p.trim().is_empty()) {
        let a: Algorithm = part.parse()?;
        if !algos.contains(&a) {
            algos.push(a);
        }
    }
    if algos.is_empty() {
        return Err(Error::Config("empty algorithm list".into()));
    }
    Ok(algos)
}

/// Hyperparameters for every algorithm.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmConfigs {
    pub itemknn: ItemKnnConfig,
    pub implicitmf: ImplicitMfConfig,
    pub bpr: BprConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    MostPop(MostPop),
    ItemKnn(ItemKnn),
    ImplicitMf(ImplicitMf),
    Bpr(Bpr),
}

impl TrainedModel {
    /// Train `algorithm`, overriding the configured seed with `seed`.
    pub fn train(
        algorithm: Algorithm,
        matrix: &InteractionMatrix,
        configs: &AlgorithmConfigs,
        seed: u64,
    ) -> Result<Self> {
        if matrix.is_empty() {
            return Err(Error::InvalidInput("empty training matrix".into()));
        }
        Ok(match algorithm {
            Algorithm::MostPop => TrainedModel::MostPop(MostPop::train(matrix)),
            Algorithm::ItemKnn => TrainedModel::ItemKnn(ItemKnn::train(matrix, &configs.itemknn)?),
            Algorithm::ImplicitMf => {
                let config = ImplicitMfConfig {
                    seed,
                    ..configs.implicitmf.clone()
                };
                TrainedModel::ImplicitMf(ImplicitMf::train(matrix, &config)?)
            }
            Algorithm::Bpr => {
                let config = BprConfig {
                    seed,
                    ..configs.bpr.clone()
                };
                TrainedModel::Bpr(Bpr::train(matrix, &config)?)
            }
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            TrainedModel::MostPop(_) => Algorithm::MostPop,
            TrainedModel::ItemKnn(_) => Algorithm::ItemKnn,
            TrainedModel::ImplicitMf(_) => Algorithm::ImplicitMf,
            TrainedModel::Bpr(_) => Algorithm::Bpr,
        }
    }

    /// Score every item for user index `u`. Unscorable items get `-inf`.
    pub fn score_into(&self, matrix: &InteractionMatrix, u: usize, out: &mut [f64]) {
        match self {
            TrainedModel::MostPop(m) => m.score_into(out),
            TrainedModel::ItemKnn(m) => m.score_into(matrix, u, out),
            TrainedModel::ImplicitMf(m) => m.score_into(u, out),
            TrainedModel::Bpr(m) => m.score_into(u, out),
        }
    }
}

/// A user's top-k list. Position `p` (1-based) is `items[p - 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedList {
    pub user_id: String,
    pub items: Vec<String>,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Top-`k` unseen items for a user, by descending score, ties by ascending item id.
pub fn recommend(
    model: &TrainedModel,
    matrix: &InteractionMatrix,
    user_id: &str,
    k: usize,
) -> Result<RankedList> {
    let u = matrix
        .user_idx(user_id)
        .ok_or_else(|| Error::UnknownUser(user_id.to_string()))?;
    let mut scores = vec![0.0; matrix.n_items()];
    model.score_into(matrix, u, &mut scores);
    let profile = matrix.user_items(u);

    let mut candidates: Vec<(u32, f64)> = scores
        .iter()
        .enumerate()
        .filter(|(i, s)| s.is_finite() && profile.binary_search(&(*i as u32)).is_err())
        .map(|(i, s)| (i as u32, *s))
        .collect();
    let order = |a: &(u32, f64), b: &(u32, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
    if candidates.len() > k && k > 0 {
        candidates.select_nth_unstable_by(k - 1, order);
    }
    candidates.truncate(k);
    candidates.sort_unstable_by(order);

    Ok(RankedList {
        user_id: user_id.to_string(),
        items: candidates
            .into_iter()
            .map(|(i, _)| matrix.item_id(i as usize).to_string())
            .collect(),
    })
}
