use super::matrix::InteractionMatrix;

/// Non-personalized popularity ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct MostPop {
    /// Distinct-user count per item index.
    pub counts: Vec<u32>,
}

impl MostPop {
    pub fn train(matrix: &InteractionMatrix) -> Self {
        let counts = (0..matrix.n_items())
            .map(|i| matrix.item_users(i).len() as u32)
            .collect();
        MostPop { counts }
    }

    pub(crate) fn score_into(&self, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.counts) {
            *o = *c as f64;
        }
    }
}
