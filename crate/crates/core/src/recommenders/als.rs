//! Implicit-feedback matrix factorization by alternating least squares.
//!
//! Minimizes
//!
//! ```text
//! L = Σ_{u,i} c_ui (p_ui − x_u·y_i)² + reg (‖X‖² + ‖Y‖²),   c_ui = 1 + alpha·p_ui
//! ```
//!
//! over every user–item cell. Each half-sweep solves every row exactly with a
//! Cholesky factorization of its `d × d` normal equations, so `L` never rises.
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::factors::{dot, Factors};
use super::matrix::{Csr, InteractionMatrix};
use crate::error::{Error, Result};

const ALGORITHM: &str = "implicitmf";
const INIT_SCALE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImplicitMfConfig {
    #[serde(alias = "d")]
    pub factors: usize,
    pub reg: f64,
    pub alpha: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for ImplicitMfConfig {
    fn default() -> Self {
        ImplicitMfConfig {
            factors: 50,
            reg: 0.1,
            alpha: 40.0,
            iterations: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImplicitMf {
    pub users: Factors,
    pub items: Factors,
    /// Objective at initialization.
    pub initial_objective: f64,
    /// Objective after each half-sweep: users then items, per iteration.
    pub objective_history: Vec<f64>,
}

/// Confidence-weighted objective, evaluated without materializing the dense matrix.
///
/// `Σ_all s² = ⟨XᵀX, YᵀY⟩`, and observed cells add `(1+α)(1−s)² − s²`.
pub fn objective(matrix: &InteractionMatrix, users: &Factors, items: &Factors, reg: f64, alpha: f64) -> f64 {
    let gu = users.gram();
    let gi = items.gram();
    let dense: f64 = gu.iter().zip(&gi).map(|(a, b)| a * b).sum();
    let mut observed = 0.0;
    for u in 0..matrix.n_users() {
        let x = users.row(u);
        for &i in matrix.user_items(u) {
            let s = dot(x, items.row(i as usize));
            observed += (1.0 + alpha) * (1.0 - s) * (1.0 - s) - s * s;
        }
    }
    dense + observed + reg * (users.squared_norm() + items.squared_norm())
}

/// Solve every row of one side with the other side held fixed.
fn solve_side(fixed: &Factors, rows: &Csr, reg: f64, alpha: f64) -> Option<Factors> {
    let d = fixed.dim();
    let gram = fixed.gram();
    let solved: Option<Vec<Vec<f64>>> = (0..rows.n_rows())
        .into_par_iter()
        .map(|r| {
            let mut a = gram.clone();
            let mut b = vec![0.0; d];
            for &c in rows.row(r) {
                let y = fixed.row(c as usize);
                for p in 0..d {
                    let yp = alpha * y[p];
                    for q in p..d {
                        a[p * d + q] += yp * y[q];
                    }
                    b[p] += (1.0 + alpha) * y[p];
                }
            }
            for p in 0..d {
                a[p * d + p] += reg;
                for q in 0..p {
                    a[p * d + q] = a[q * d + p];
                }
            }
            let chol = DMatrix::from_row_slice(d, d, &a).cholesky()?;
            let x = chol.solve(&DVector::from_vec(b));
            Some(x.as_slice().to_vec())
        })
        .collect();
    let solved = solved?;
    let mut out = Factors::zeros(rows.n_rows(), d);
    for (r, x) in solved.into_iter().enumerate() {
        out.row_mut(r).copy_from_slice(&x);
    }
    Some(out)
}

impl ImplicitMf {
    pub fn train(matrix: &InteractionMatrix, config: &ImplicitMfConfig) -> Result<Self> {
        if config.factors == 0 || config.iterations == 0 {
            return Err(Error::Config(
                "implicitmf needs factors >= 1 and iterations >= 1".into(),
            ));
        }
        if matrix.is_empty() {
            return Err(Error::InvalidInput("empty training matrix".into()));
        }
        let d = config.factors;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut users = Factors::random(matrix.n_users(), d, INIT_SCALE, &mut rng);
        let mut items = Factors::random(matrix.n_items(), d, INIT_SCALE, &mut rng);
        let initial_objective = objective(matrix, &users, &items, config.reg, config.alpha);

        let fail = |iteration: usize, message: String| Error::Training {
            algorithm: ALGORITHM,
            iteration,
            message,
        };
        let mut history = Vec::with_capacity(2 * config.iterations);
        for it in 0..config.iterations {
            users = solve_side(&items, matrix.by_user(), config.reg, config.alpha)
                .ok_or_else(|| fail(it, "user normal equations not positive definite".into()))?;
            history.push(objective(matrix, &users, &items, config.reg, config.alpha));

            items = solve_side(&users, matrix.by_item(), config.reg, config.alpha)
                .ok_or_else(|| fail(it, "item normal equations not positive definite".into()))?;
            let obj = objective(matrix, &users, &items, config.reg, config.alpha);
            history.push(obj);

            if !obj.is_finite() || !users.is_finite() || !items.is_finite() {
                return Err(fail(it, format!("non-finite objective {obj}")));
            }
        }
        Ok(ImplicitMf {
            users,
            items,
            initial_objective,
            objective_history: history,
        })
    }

    pub fn score(&self, u: usize, i: usize) -> f64 {
        dot(self.users.row(u), self.items.row(i))
    }

    pub(crate) fn score_into(&self, u: usize, out: &mut [f64]) {
        let x = self.users.row(u);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(x, self.items.row(i));
        }
    }
}
