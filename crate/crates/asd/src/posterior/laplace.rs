//! Gaussian (Laplace) approximation to the logistic-response posterior.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{cholesky_with_jitter, sample_gaussian, PosteriorSampleSet};
use crate::env::LinkFunction;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct LaplaceConfig {
    pub prior_sd: f64,
    /// Sup-norm gradient threshold declaring the mode found.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LaplaceConfig {
    fn default() -> Self {
        Self {
            prior_sd: 1.0,
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

/// Mode and local Gaussian approximation of the logistic posterior.
#[derive(Clone, Debug)]
pub struct LaplaceLogisticPosterior {
    mode: DVector<f64>,
    cov: DMatrix<f64>,
    converged: bool,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable `ln(1 + exp(z))`.
fn log1p_exp(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Log posterior `sum_i [y_i z_i - ln(1 + exp(z_i))] - |theta|^2 / (2 prior_sd^2)`
/// with `z_i = theta . x_i`. Labels may be any real value; the expression is
/// linear in `y`, so the objective stays strictly concave regardless.
pub fn logistic_log_posterior(
    features: &[Vec<f64>],
    labels: &[f64],
    theta: &[f64],
    prior_sd: f64,
) -> f64 {
    let mut total = 0.0;
    for (x, &y) in features.iter().zip(labels) {
        let z: f64 = x.iter().zip(theta).map(|(a, b)| a * b).sum();
        total += y * z - log1p_exp(z);
    }
    let sq: f64 = theta.iter().map(|v| v * v).sum();
    total - sq / (2.0 * prior_sd * prior_sd)
}

/// Gradient of [`logistic_log_posterior`] with respect to `theta`.
pub fn logistic_log_posterior_gradient(
    features: &[Vec<f64>],
    labels: &[f64],
    theta: &[f64],
    prior_sd: f64,
) -> Vec<f64> {
    let dim = theta.len();
    let mut grad = vec![0.0; dim];
    for (x, &y) in features.iter().zip(labels) {
        let z: f64 = x.iter().zip(theta).map(|(a, b)| a * b).sum();
        let coeff = y - sigmoid(z);
        for (g, &xi) in grad.iter_mut().zip(x) {
            *g += coeff * xi;
        }
    }
    let prior_var = prior_sd * prior_sd;
    for (g, &t) in grad.iter_mut().zip(theta) {
        *g -= t / prior_var;
    }
    grad
}

/// Negative Hessian `sum_i s(z_i)(1 - s(z_i)) x_i x_i^T + I / prior_sd^2`.
/// Independent of the labels and always positive definite.
fn neg_hessian(features: &[Vec<f64>], theta: &DVector<f64>, dim: usize, prior_sd: f64) -> DMatrix<f64> {
    let mut h = DMatrix::identity(dim, dim) / (prior_sd * prior_sd);
    for x in features {
        let xv = DVector::from_column_slice(x);
        let z = xv.dot(theta);
        let s = sigmoid(z);
        let w = s * (1.0 - s);
        h += &xv * xv.transpose() * w;
    }
    h
}

/// Fit the Laplace approximation by Newton ascent with step halving.
///
/// Empty data returns the prior itself (`mode = 0`, `cov = prior_sd^2 I`).
pub fn laplace_fit(
    features: &[Vec<f64>],
    labels: &[f64],
    dim: usize,
    cfg: &LaplaceConfig,
) -> Result<LaplaceLogisticPosterior> {
    if dim == 0 {
        return Err(Error::OutOfRange {
            what: "dimension",
            range: "positive",
            value: 0.0,
        });
    }
    if !(cfg.prior_sd > 0.0 && cfg.prior_sd.is_finite()) {
        return Err(Error::OutOfRange {
            what: "prior standard deviation",
            range: "positive finite",
            value: cfg.prior_sd,
        });
    }
    if features.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: features.len(),
            found: labels.len(),
        });
    }
    for x in features {
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature vector"));
        }
    }
    if labels.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("label"));
    }

    let mut theta = DVector::zeros(dim);
    let mut converged = false;
    for _ in 0..cfg.max_iter {
        let grad = DVector::from_vec(logistic_log_posterior_gradient(
            features,
            labels,
            theta.as_slice(),
            cfg.prior_sd,
        ));
        if grad.amax() < cfg.tol {
            converged = true;
            break;
        }
        let h = neg_hessian(features, &theta, dim, cfg.prior_sd);
        let chol = cholesky_with_jitter(&h, "logistic negative Hessian")?;
        let direction = chol.solve(&grad);
        let current = logistic_log_posterior(features, labels, theta.as_slice(), cfg.prior_sd);
        // Step halving: the full Newton step can overshoot far from the mode.
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let candidate = &theta + &direction * step;
            let value =
                logistic_log_posterior(features, labels, candidate.as_slice(), cfg.prior_sd);
            if value > current {
                theta = candidate;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // Close to the mode the objective is flat to rounding while the
            // Newton step still contracts the gradient quadratically, so
            // accept the full step whenever it shrinks the gradient.
            let candidate = &theta + &direction;
            let next_grad = DVector::from_vec(logistic_log_posterior_gradient(
                features,
                labels,
                candidate.as_slice(),
                cfg.prior_sd,
            ));
            if next_grad.amax() < grad.amax() {
                theta = candidate;
                continue;
            }
            converged = grad.amax() < cfg.tol;
            break;
        }
    }
    if !converged {
        let grad = DVector::from_vec(logistic_log_posterior_gradient(
            features,
            labels,
            theta.as_slice(),
            cfg.prior_sd,
        ));
        converged = grad.amax() < cfg.tol;
    }

    let h = neg_hessian(features, &theta, dim, cfg.prior_sd);
    let chol = cholesky_with_jitter(&h, "logistic negative Hessian")?;
    let cov = chol.inverse();
    Ok(LaplaceLogisticPosterior {
        mode: theta,
        cov,
        converged,
    })
}

impl LaplaceLogisticPosterior {
    pub fn dim(&self) -> usize {
        self.mode.len()
    }

    pub fn mode(&self) -> &DVector<f64> {
        &self.mode
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Posterior-mode response probability for a feature row.
    pub fn predictive_mean(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: features.len(),
            });
        }
        let z: f64 = features.iter().zip(self.mode.iter()).map(|(a, b)| a * b).sum();
        Ok(sigmoid(z))
    }

    /// Standard deviation of `theta . x` under the Gaussian approximation.
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

    /// Sample set over candidate rows: Gaussian draws around the mode pushed
    /// through the logistic link.
    pub fn sample_set<R: Rng>(
        &self,
        features: &[&[f64]],
        m: usize,
        rng: &mut R,
    ) -> Result<PosteriorSampleSet> {
        if features.is_empty() {
            return Err(Error::EmptyPool);
        }
        if m == 0 {
            return Err(Error::EmptySampleSet);
        }
        for row in features {
            if row.len() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: row.len(),
                });
            }
        }
        let chol = cholesky_with_jitter(&self.cov, "Laplace covariance")?;
        let thetas = sample_gaussian(&self.mode, &chol, m, rng);
        let rows = thetas
            .iter()
            .map(|theta| {
                features
                    .iter()
                    .map(|row| {
                        let z: f64 = row.iter().zip(theta.iter()).map(|(a, b)| a * b).sum();
                        LinkFunction::Logistic.value(z)
                    })
                    .collect()
            })
            .collect();
        PosteriorSampleSet::from_rows(rows)
    }
}
