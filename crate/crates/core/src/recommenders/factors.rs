use rand::Rng;
use rand_distr::StandardNormal;

/// Dense row-major factor matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Factors {
    n_rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl Factors {
    pub fn zeros(n_rows: usize, dim: usize) -> Self {
        Factors {
            n_rows,
            dim,
            data: vec![0.0; n_rows * dim],
        }
    }

    /// Standard-normal entries scaled by `scale`, drawn row by row.
    pub fn random<R: Rng>(n_rows: usize, dim: usize, scale: f64, rng: &mut R) -> Self {
        let data = (0..n_rows * dim)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Factors { n_rows, dim, data }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn squared_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// `FᵀF` as a row-major `dim × dim` matrix.
    pub fn gram(&self) -> Vec<f64> {
        let d = self.dim;
        let mut g = vec![0.0; d * d];
        for r in 0..self.n_rows {
            let row = self.row(r);
            for a in 0..d {
                let ra = row[a];
                for b in a..d {
                    g[a * d + b] += ra * row[b];
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                g[a * d + b] = g[b * d + a];
            }
        }
        g
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
