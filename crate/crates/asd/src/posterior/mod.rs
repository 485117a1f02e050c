//! Posterior state over environment parameters, one engine per model family,
//! all funneling into a common sampled representation.
//!
//! [`PosteriorSampleSet`] is the interchange format: `M` parameter draws
//! projected onto the active candidates' mean responses, one row per draw,
//! columns in active-candidate order. Selection rules consume sample sets and
//! never see the underlying parameterization.

mod gibbs;
mod laplace;
mod linear;
mod nodes;

pub use gibbs::{GibbsConfig, LowRankGibbsState};
pub use laplace::{
    laplace_fit, logistic_log_posterior, logistic_log_posterior_gradient, LaplaceConfig,
    LaplaceLogisticPosterior,
};
pub use linear::GaussianLinearPosterior;
pub use nodes::NodeGaussianBeliefs;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// `M` posterior draws evaluated at the active candidates.
#[derive(Clone, Debug)]
pub struct PosteriorSampleSet {
    samples: usize,
    candidates: usize,
    /// Row-major `samples x candidates`.
    values: Vec<f64>,
}

impl PosteriorSampleSet {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let samples = rows.len();
        if samples == 0 {
            return Err(Error::EmptySampleSet);
        }
        let candidates = rows[0].len();
        if candidates == 0 {
            return Err(Error::EmptyPool);
        }
        let mut values = Vec::with_capacity(samples * candidates);
        for row in &rows {
            if row.len() != candidates {
                return Err(Error::DimensionMismatch {
                    expected: candidates,
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("posterior sample"));
            }
            values.extend_from_slice(row);
        }
        Ok(Self {
            samples,
            candidates,
            values,
        })
    }

    pub fn sample_count(&self) -> usize {
        self.samples
    }

    pub fn candidate_count(&self) -> usize {
        self.candidates
    }

    pub fn row(&self, sample: usize) -> &[f64] {
        &self.values[sample * self.candidates..(sample + 1) * self.candidates]
    }

    pub fn value(&self, sample: usize, candidate: usize) -> f64 {
        self.values[sample * self.candidates + candidate]
    }

    /// Cross-sample mean response per candidate.
    pub fn mean_per_candidate(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.candidates];
        for s in 0..self.samples {
            for (m, v) in means.iter_mut().zip(self.row(s)) {
                *m += v;
            }
        }
        let inv = 1.0 / self.samples as f64;
        for m in &mut means {
            *m *= inv;
        }
        means
    }
}

/// Cholesky factor of a symmetric matrix, retrying once with a small jitter
/// on the diagonal before giving up.
pub(crate) fn cholesky_with_jitter(
    matrix: &DMatrix<f64>,
    context: &'static str,
) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    if let Some(chol) = Cholesky::new(matrix.clone()) {
        return Ok(chol);
    }
    let mut bumped = matrix.clone();
    for i in 0..bumped.nrows() {
        bumped[(i, i)] += 1e-9;
    }
    Cholesky::new(bumped).ok_or(Error::NotPositiveDefinite(context))
}

/// Draw `m` samples from a multivariate Gaussian given its Cholesky factor.
pub(crate) fn sample_gaussian<R: Rng>(
    mean: &DVector<f64>,
    chol: &Cholesky<f64, nalgebra::Dyn>,
    m: usize,
    rng: &mut R,
) -> Vec<DVector<f64>> {
    let dim = mean.len();
    let l = chol.l();
    (0..m)
        .map(|_| {
            let z = DVector::from_fn(dim, |_, _| StandardNormal.sample(rng));
            mean + &l * z
        })
        .collect()
}
