//! Conjugate Gaussian posterior for linear responses with known noise scale.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{cholesky_with_jitter, sample_gaussian, PosteriorSampleSet};
use crate::env::LinkFunction;
use crate::error::{Error, Result};

/// Belief `theta ~ N(mean, cov)` updated one observation at a time.
///
/// Starting from the isotropic prior `N(0, prior_sd^2 I)`, each observed
/// pair `(x, y)` with `y = theta . x + noise` applies the rank-one
/// conjugate update in closed form, so no matrix inversion is ever needed.
#[derive(Clone, Debug)]
pub struct GaussianLinearPosterior {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    noise_var: f64,
}

impl GaussianLinearPosterior {
    pub fn new(dim: usize, prior_sd: f64, noise_sd: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::OutOfRange {
                what: "dimension",
                range: "positive",
                value: 0.0,
            });
        }
        if !(prior_sd > 0.0 && prior_sd.is_finite()) {
            return Err(Error::OutOfRange {
                what: "prior standard deviation",
                range: "positive finite",
                value: prior_sd,
            });
        }
        if !(noise_sd > 0.0 && noise_sd.is_finite()) {
            return Err(Error::OutOfRange {
                what: "noise standard deviation",
                range: "positive finite",
                value: noise_sd,
            });
        }
        Ok(Self {
            mean: DVector::zeros(dim),
            cov: DMatrix::identity(dim, dim) * (prior_sd * prior_sd),
            noise_var: noise_sd * noise_sd,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Rank-one conjugate update for one observation `y = theta . x + noise`.
    pub fn update(&mut self, features: &[f64], label: f64) -> Result<()> {
        if features.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: features.len(),
            });
        }
        if features.iter().any(|v| !v.is_finite()) || !label.is_finite() {
            return Err(Error::NonFinite("observation"));
        }
        let x = DVector::from_column_slice(features);
        let sigma_x = &self.cov * &x;
        let denom = self.noise_var + x.dot(&sigma_x);
        let residual = label - self.mean.dot(&x);
        self.mean += &sigma_x * (residual / denom);
        self.cov -= &sigma_x * sigma_x.transpose() / denom;
        // The rank-one downdate loses exact symmetry in floating point;
        // restore it so later Cholesky factorizations stay stable.
        let symmetrized = (&self.cov + self.cov.transpose()) * 0.5;
        self.cov = symmetrized;
        Ok(())
    }

    pub fn predictive_mean(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: features.len(),
            });
        }
        Ok(features
            .iter()
            .zip(self.mean.iter())
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Posterior standard deviation of `theta . x`.
    pub fn feature_sd(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: features.len(),
            });
        }
        let x = DVector::from_column_slice(features);
        let quad = x.dot(&(&self.cov * &x));
        Ok(quad.max(0.0).sqrt())
    }

    /// Draw `m` parameter vectors from the current posterior.
    pub fn sample_thetas<R: Rng>(&self, m: usize, rng: &mut R) -> Result<Vec<DVector<f64>>> {
        if m == 0 {
            return Err(Error::EmptySampleSet);
        }
        let chol = cholesky_with_jitter(&self.cov, "linear posterior covariance")?;
        Ok(sample_gaussian(&self.mean, &chol, m, rng))
    }

    /// Sample set over candidate feature rows, passing each projected draw
    /// through `link`.
    pub fn sample_set<R: Rng>(
        &self,
        features: &[&[f64]],
        link: LinkFunction,
        m: usize,
        rng: &mut R,
    ) -> Result<PosteriorSampleSet> {
        if features.is_empty() {
            return Err(Error::EmptyPool);
        }
        for row in features {
            if row.len() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: row.len(),
                });
            }
        }
        let thetas = self.sample_thetas(m, rng)?;
        let rows = thetas
            .iter()
            .map(|theta| {
                features
                    .iter()
                    .map(|row| {
                        let z: f64 = row.iter().zip(theta.iter()).map(|(a, b)| a * b).sum();
                        link.value(z)
                    })
                    .collect()
            })
            .collect();
        PosteriorSampleSet::from_rows(rows)
    }
}
