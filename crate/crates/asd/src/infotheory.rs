//! Exact information-theoretic quantities over small discrete models.
//!
//! Everything here enumerates distributions directly; nothing is sampled or
//! estimated. These functions are the ground truth that the sampling-based
//! variance proxy in [`crate::policies`] is checked against, and they are
//! deliberately capped at joint sizes where full enumeration is instant.
//! All entropies and informations are in nats.

use crate::error::{Error, Result};

/// Full enumeration refuses joints beyond this many states.
pub const MAX_JOINT_STATES: usize = 10_000;

const MASS_TOLERANCE: f64 = 1e-9;

fn validate_distribution(probs: &[f64]) -> Result<()> {
    let mut total = 0.0;
    for &p in probs {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "probability mass {p} is negative or not finite"
            )));
        }
        total += p;
    }
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "probability mass sums to {total}, expected 1"
        )));
    }
    Ok(())
}

/// Entropy of an already-validated mass slice; zero cells contribute zero.
fn entropy_unchecked(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

/// Shannon entropy of a discrete distribution, in nats.
///
/// Uses the `0 ln 0 = 0` convention. Rejects negative or non-finite mass and
/// mass that does not sum to one.
pub fn entropy(probs: &[f64]) -> Result<f64> {
    validate_distribution(probs)?;
    Ok(entropy_unchecked(probs))
}

/// Joint distribution of a pair of discrete variables, row-major.
#[derive(Clone, Debug)]
pub struct DiscreteJoint {
    rows: usize,
    cols: usize,
    probs: Vec<f64>,
}

impl DiscreteJoint {
    pub fn new(rows: usize, cols: usize, probs: Vec<f64>) -> Result<Self> {
        let states = rows.saturating_mul(cols);
        if states > MAX_JOINT_STATES {
            return Err(Error::JointTooLarge {
                states,
                limit: MAX_JOINT_STATES,
            });
        }
        if probs.len() != states || states == 0 {
            return Err(Error::InvalidDistribution(format!(
                "joint table holds {} entries, expected {rows}x{cols}",
                probs.len()
            )));
        }
        validate_distribution(&probs)?;
        Ok(Self { rows, cols, probs })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn prob(&self, row: usize, col: usize) -> f64 {
        self.probs[row * self.cols + col]
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        self.probs
            .chunks_exact(self.cols)
            .map(|row| row.iter().sum())
            .collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for row in self.probs.chunks_exact(self.cols) {
            for (acc, p) in out.iter_mut().zip(row) {
                *acc += p;
            }
        }
        out
    }
}

/// Mutual information `I(X; Y)` of a joint distribution, in nats.
///
/// Computed as `H(X) + H(Y) - H(X, Y)`; cancellation can leave a tiny
/// negative residue, which is clamped to zero so the theoretical `I >= 0`
/// holds exactly.
pub fn mutual_information(joint: &DiscreteJoint) -> f64 {
    let hx = entropy_unchecked(&joint.row_marginal());
    let hy = entropy_unchecked(&joint.col_marginal());
    let hxy = entropy_unchecked(&joint.probs);
    (hx + hy - hxy).max(0.0)
}

/// Finite response model on a shared label alphabet: for every
/// `(parameter, candidate)` pair, a distribution over the alphabet.
#[derive(Clone, Debug)]
pub struct DiscreteLabelModel {
    label_values: Vec<f64>,
    /// `probs[theta][candidate][label]`
    probs: Vec<Vec<Vec<f64>>>,
}

impl DiscreteLabelModel {
    pub fn new(label_values: Vec<f64>, probs: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if label_values.is_empty() || probs.is_empty() {
            return Err(Error::InvalidDistribution(
                "label model needs at least one label and one parameter".into(),
            ));
        }
        if label_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("label values"));
        }
        let candidates = probs[0].len();
        if candidates == 0 {
            return Err(Error::EmptyPool);
        }
        for per_theta in &probs {
            if per_theta.len() != candidates {
                return Err(Error::DimensionMismatch {
                    expected: candidates,
                    found: per_theta.len(),
                });
            }
            for dist in per_theta {
                if dist.len() != label_values.len() {
                    return Err(Error::DimensionMismatch {
                        expected: label_values.len(),
                        found: dist.len(),
                    });
                }
                validate_distribution(dist)?;
            }
        }
        Ok(Self {
            label_values,
            probs,
        })
    }

    pub fn theta_count(&self) -> usize {
        self.probs.len()
    }

    pub fn candidate_count(&self) -> usize {
        self.probs[0].len()
    }

    pub fn label_count(&self) -> usize {
        self.label_values.len()
    }

    pub fn label_values(&self) -> &[f64] {
        &self.label_values
    }

    pub fn label_probs(&self, theta: usize, candidate: usize) -> &[f64] {
        &self.probs[theta][candidate]
    }

    /// Expected label for a `(parameter, candidate)` pair.
    pub fn mean_label(&self, theta: usize, candidate: usize) -> f64 {
        self.probs[theta][candidate]
            .iter()
            .zip(&self.label_values)
            .map(|(p, v)| p * v)
            .sum()
    }

    /// The ordered top-`k` candidate tuple under parameter `theta`: candidates
    /// sorted by mean label descending, ties broken by lowest index.
    pub fn top_tuple(&self, theta: usize, k: usize) -> Vec<usize> {
        let means: Vec<f64> = (0..self.candidate_count())
            .map(|x| self.mean_label(theta, x))
            .collect();
        let mut order: Vec<usize> = (0..means.len()).collect();
        order.sort_by(|&a, &b| {
            means[b]
                .partial_cmp(&means[a])
                .expect("finite means")
                .then(a.cmp(&b))
        });
        order.truncate(k);
        order
    }
}

/// Exact information gain `I(top-k tuple; Y_candidate)` by full enumeration.
///
/// `prior` weights the parameter support; the top-`k` tuple is a
/// deterministic function of the parameter (means ranked descending, ties to
/// the lowest index), so the joint has at most `theta_count x label_count`
/// states. `top_k = 1` makes the target the identity of the best candidate.
pub fn exact_info_gain(
    prior: &[f64],
    model: &DiscreteLabelModel,
    candidate: usize,
    top_k: usize,
) -> Result<f64> {
    if prior.len() != model.theta_count() {
        return Err(Error::DimensionMismatch {
            expected: model.theta_count(),
            found: prior.len(),
        });
    }
    validate_distribution(prior)?;
    if candidate >= model.candidate_count() {
        return Err(Error::IndexOutOfRange {
            index: candidate,
            len: model.candidate_count(),
        });
    }
    if top_k == 0 || top_k > model.candidate_count() {
        return Err(Error::OutOfRange {
            what: "top_k",
            range: "[1, candidate count]",
            value: top_k as f64,
        });
    }
    let states = model.theta_count().saturating_mul(model.label_count());
    if states > MAX_JOINT_STATES {
        return Err(Error::JointTooLarge {
            states,
            limit: MAX_JOINT_STATES,
        });
    }

    // Group parameters by their top-k tuple, keeping first-seen order.
    let mut tuples: Vec<Vec<usize>> = Vec::new();
    let group_of: Vec<usize> = (0..model.theta_count())
        .map(|theta| {
            let tuple = model.top_tuple(theta, top_k);
            match tuples.iter().position(|t| *t == tuple) {
                Some(pos) => pos,
                None => {
                    tuples.push(tuple);
                    tuples.len() - 1
                }
            }
        })
        .collect();

    let cols = model.label_count();
    let mut table = vec![0.0; tuples.len() * cols];
    for theta in 0..model.theta_count() {
        let row = group_of[theta];
        for (label, p) in model.label_probs(theta, candidate).iter().enumerate() {
            table[row * cols + label] += prior[theta] * p;
        }
    }
    let joint = DiscreteJoint::new(tuples.len(), cols, table)?;
    Ok(mutual_information(&joint))
}
