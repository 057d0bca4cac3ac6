//! Bayesian personalized ranking with item biases, trained by SGD.
//!
//! For a triple `(u, i, j)` with `i` observed and `j` not, the pairwise score is
//! `x_uij = U_u·(V_i − V_j) + b_i − b_j` and each step ascends
//! `ln σ(x_uij) − reg ‖θ‖²` over the parameters the triple touches.
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::factors::{dot, Factors};
use super::matrix::InteractionMatrix;
use crate::error::{Error, Result};

const ALGORITHM: &str = "bpr";
const INIT_SCALE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BprConfig {
    #[serde(alias = "d")]
    pub factors: usize,
    pub learn_rate: f64,
    pub reg: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for BprConfig {
    fn default() -> Self {
        BprConfig {
            factors: 50,
            learn_rate: 0.05,
            reg: 0.01,
            epochs: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bpr {
    pub users: Factors,
    pub items: Factors,
    pub item_bias: Vec<f64>,
}

/// Parameters of one training triple.
#[derive(Debug, Clone, Copy)]
pub struct TripleParams<'a> {
    pub user: &'a [f64],
    pub pos: &'a [f64],
    pub neg: &'a [f64],
    pub pos_bias: f64,
    pub neg_bias: f64,
}

impl TripleParams<'_> {
    pub fn margin(&self) -> f64 {
        let mut x = self.pos_bias - self.neg_bias;
        for k in 0..self.user.len() {
            x += self.user[k] * (self.pos[k] - self.neg[k]);
        }
        x
    }

    /// `ln σ(x_uij)`.
    pub fn log_likelihood(&self) -> f64 {
        log_sigmoid(self.margin())
    }

    /// Gradient of `ln σ(x_uij)` with respect to every parameter of the triple.
    pub fn gradient(&self) -> TripleGradient {
        // d/dx ln σ(x) = σ(−x)
        let g = sigmoid(-self.margin());
        TripleGradient {
            user: self
                .pos
                .iter()
                .zip(self.neg)
                .map(|(p, n)| g * (p - n))
                .collect(),
            pos: self.user.iter().map(|u| g * u).collect(),
            neg: self.user.iter().map(|u| -g * u).collect(),
            pos_bias: g,
            neg_bias: -g,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripleGradient {
    pub user: Vec<f64>,
    pub pos: Vec<f64>,
    pub neg: Vec<f64>,
    pub pos_bias: f64,
    pub neg_bias: f64,
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

impl Bpr {
    pub fn train(matrix: &InteractionMatrix, config: &BprConfig) -> Result<Self> {
        if config.factors == 0 {
            return Err(Error::Config("bpr needs factors >= 1".into()));
        }
        if matrix.n_items() < 2 {
            return Err(Error::InvalidInput("bpr needs at least two items".into()));
        }
        if matrix.is_empty() {
            return Err(Error::InvalidInput("empty training matrix".into()));
        }
        let d = config.factors;
        let n_items = matrix.n_items();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut model = Bpr {
            users: Factors::random(matrix.n_users(), d, INIT_SCALE, &mut rng),
            items: Factors::random(n_items, d, INIT_SCALE, &mut rng),
            item_bias: vec![0.0; n_items],
        };
        let lr = config.learn_rate;
        let decay = 2.0 * config.reg;
        let csr = matrix.by_user();
        let nnz = csr.nnz();

        for epoch in 0..config.epochs {
            for _ in 0..nnz {
                let entry = rng.random_range(0..nnz);
                let u = csr.row_of_entry(entry);
                let profile = csr.row(u);
                let i = csr.entry(entry) as usize;
                if profile.len() >= n_items {
                    // no unobserved item to contrast against
                    continue;
                }
                let j = loop {
                    let j = rng.random_range(0..n_items as u32);
                    if profile.binary_search(&j).is_err() {
                        break j as usize;
                    }
                };

                let grad = TripleParams {
                    user: model.users.row(u),
                    pos: model.items.row(i),
                    neg: model.items.row(j),
                    pos_bias: model.item_bias[i],
                    neg_bias: model.item_bias[j],
                }
                .gradient();

                for (w, g) in model.users.row_mut(u).iter_mut().zip(&grad.user) {
                    *w += lr * (g - decay * *w);
                }
                for (w, g) in model.items.row_mut(i).iter_mut().zip(&grad.pos) {
                    *w += lr * (g - decay * *w);
                }
                for (w, g) in model.items.row_mut(j).iter_mut().zip(&grad.neg) {
                    *w += lr * (g - decay * *w);
                }
                let bi = &mut model.item_bias[i];
                *bi += lr * (grad.pos_bias - decay * *bi);
                let bj = &mut model.item_bias[j];
                *bj += lr * (grad.neg_bias - decay * *bj);
            }
            if !model.users.is_finite()
                || !model.items.is_finite()
                || model.item_bias.iter().any(|b| !b.is_finite())
            {
                return Err(Error::Training {
                    algorithm: ALGORITHM,
                    iteration: epoch,
                    message: "non-finite parameters".into(),
                });
            }
        }
        Ok(model)
    }

    pub fn score(&self, u: usize, i: usize) -> f64 {
        dot(self.users.row(u), self.items.row(i)) + self.item_bias[i]
    }

    pub(crate) fn score_into(&self, u: usize, out: &mut [f64]) {
        let x = self.users.row(u);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(x, self.items.row(i)) + self.item_bias[i];
        }
    }
}
