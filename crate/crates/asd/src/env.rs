//! Response environments: the ground truth a run samples labels from.
//!
//! An environment assigns every pool item a true mean response and generates
//! noisy labels around it. Graph environments additionally reveal a side
//! observation for every neighbor of the labeled node; replay environments
//! return recorded values with no noise at all.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::pool::{CandidatePool, Item, Payload};

/// Monotone mean function for regression-style environments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkFunction {
    Identity,
    Logistic,
}

impl LinkFunction {
    pub fn value(&self, z: f64) -> f64 {
        match self {
            LinkFunction::Identity => z,
            LinkFunction::Logistic => 1.0 / (1.0 + (-z).exp()),
        }
    }

    pub fn derivative(&self, z: f64) -> f64 {
        match self {
            LinkFunction::Identity => 1.0,
            LinkFunction::Logistic => {
                let s = self.value(z);
                s * (1.0 - s)
            }
        }
    }

    /// Upper bound on the derivative over the whole real line.
    pub fn derivative_bound(&self) -> f64 {
        match self {
            LinkFunction::Identity => 1.0,
            LinkFunction::Logistic => 0.25,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LinkFunction::Identity => "identity",
            LinkFunction::Logistic => "logistic",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Environment {
    Linear {
        theta: Vec<f64>,
        noise_sd: f64,
    },
    Glm {
        theta: Vec<f64>,
        link: LinkFunction,
        noise_sd: f64,
    },
    Graph {
        graph: Graph,
        node_values: Vec<f64>,
        noise_sd: f64,
        /// Observations are truncated to `[-bound, bound]` when finite.
        bound: f64,
    },
    LowRank {
        /// Left factor, `rows x rank`.
        factor_u: DMatrix<f64>,
        /// Right factor, `cols x rank`; the mean matrix is `U * V^T`.
        factor_v: DMatrix<f64>,
        noise_sd: f64,
    },
    Replay {
        yields: Vec<f64>,
    },
}

fn check_noise_sd(noise_sd: f64) -> Result<()> {
    if !noise_sd.is_finite() || noise_sd < 0.0 {
        return Err(Error::OutOfRange {
            what: "noise_sd",
            range: "[0, inf)",
            value: noise_sd,
        });
    }
    Ok(())
}

fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    Ok(())
}

impl Environment {
    pub fn linear(theta: Vec<f64>, noise_sd: f64) -> Result<Self> {
        check_finite(&theta, "theta")?;
        check_noise_sd(noise_sd)?;
        Ok(Environment::Linear { theta, noise_sd })
    }

    pub fn glm(theta: Vec<f64>, link: LinkFunction, noise_sd: f64) -> Result<Self> {
        check_finite(&theta, "theta")?;
        check_noise_sd(noise_sd)?;
        Ok(Environment::Glm {
            theta,
            link,
            noise_sd,
        })
    }

    /// `bound` may be `f64::INFINITY` for untruncated noise. A finite bound
    /// must already contain every node value, otherwise truncated sampling
    /// could stall.
    pub fn graph(graph: Graph, node_values: Vec<f64>, noise_sd: f64, bound: f64) -> Result<Self> {
        check_finite(&node_values, "node values")?;
        check_noise_sd(noise_sd)?;
        if node_values.len() != graph.node_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.node_count(),
                found: node_values.len(),
            });
        }
        if bound.is_nan() || bound <= 0.0 {
            return Err(Error::OutOfRange {
                what: "bound",
                range: "(0, inf]",
                value: bound,
            });
        }
        if bound.is_finite() {
            if let Some(worst) = node_values.iter().cloned().map(f64::abs).reduce(f64::max) {
                if worst > bound {
                    return Err(Error::InvalidCombination(format!(
                        "node value magnitude {worst} exceeds observation bound {bound}"
                    )));
                }
            }
        }
        Ok(Environment::Graph {
            graph,
            node_values,
            noise_sd,
            bound,
        })
    }

    pub fn low_rank(factor_u: DMatrix<f64>, factor_v: DMatrix<f64>, noise_sd: f64) -> Result<Self> {
        check_noise_sd(noise_sd)?;
        if factor_u.iter().any(|v| !v.is_finite()) || factor_v.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("low-rank factors"));
        }
        if factor_u.ncols() != factor_v.ncols() {
            return Err(Error::DimensionMismatch {
                expected: factor_u.ncols(),
                found: factor_v.ncols(),
            });
        }
        Ok(Environment::LowRank {
            factor_u,
            factor_v,
            noise_sd,
        })
    }

    pub fn replay(yields: Vec<f64>) -> Result<Self> {
        check_finite(&yields, "yields")?;
        Ok(Environment::Replay { yields })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Environment::Linear { .. } => "linear",
            Environment::Glm { .. } => "glm",
            Environment::Graph { .. } => "graph",
            Environment::LowRank { .. } => "low-rank",
            Environment::Replay { .. } => "replay",
        }
    }

    pub fn noise_sd(&self) -> f64 {
        match self {
            Environment::Linear { noise_sd, .. }
            | Environment::Glm { noise_sd, .. }
            | Environment::Graph { noise_sd, .. }
            | Environment::LowRank { noise_sd, .. } => *noise_sd,
            Environment::Replay { .. } => 0.0,
        }
    }
}

fn dot_checked(theta: &[f64], item: &Item) -> Result<f64> {
    let x = item.payload.features().ok_or(Error::PayloadMismatch {
        expected: "features",
        found: item.payload.kind(),
    })?;
    if x.len() != theta.len() {
        return Err(Error::DimensionMismatch {
            expected: theta.len(),
            found: x.len(),
        });
    }
    Ok(theta.iter().zip(x).map(|(a, b)| a * b).sum())
}

/// True mean response of an item under an environment.
pub fn env_mean(env: &Environment, item: &Item) -> Result<f64> {
    match env {
        Environment::Linear { theta, .. } => dot_checked(theta, item),
        Environment::Glm { theta, link, .. } => Ok(link.value(dot_checked(theta, item)?)),
        Environment::Graph { node_values, .. } => match item.payload {
            Payload::Node(node) => {
                node_values
                    .get(node)
                    .copied()
                    .ok_or(Error::IndexOutOfRange {
                        index: node,
                        len: node_values.len(),
                    })
            }
            ref other => Err(Error::PayloadMismatch {
                expected: "node",
                found: other.kind(),
            }),
        },
        Environment::LowRank {
            factor_u, factor_v, ..
        } => match item.payload {
            Payload::Cell { row, col } => {
                if row >= factor_u.nrows() || col >= factor_v.nrows() {
                    return Err(Error::IndexOutOfRange {
                        index: row.max(col),
                        len: factor_u.nrows().max(factor_v.nrows()),
                    });
                }
                Ok((factor_u.row(row) * factor_v.row(col).transpose())[(0, 0)])
            }
            ref other => Err(Error::PayloadMismatch {
                expected: "cell",
                found: other.kind(),
            }),
        },
        Environment::Replay { yields } => {
            yields
                .get(item.index)
                .copied()
                .ok_or(Error::IndexOutOfRange {
                    index: item.index,
                    len: yields.len(),
                })
        }
    }
}

/// Gaussian noise truncated so `value + noise` stays within `[-bound, bound]`.
fn truncated_observation<R: Rng>(
    value: f64,
    noise_sd: f64,
    bound: f64,
    rng: &mut R,
) -> Result<f64> {
    if noise_sd == 0.0 {
        return Ok(value);
    }
    let normal = Normal::new(0.0, noise_sd).expect("validated noise sd");
    if bound.is_infinite() {
        return Ok(value + normal.sample(rng));
    }
    // Rejection sampling; the constructor guarantees |value| <= bound so the
    // acceptance region always has mass.
    for _ in 0..1_000_000 {
        let y = value + normal.sample(rng);
        if y.abs() <= bound {
            return Ok(y);
        }
    }
    Err(Error::Sampling("truncated noise rejection stalled"))
}

/// Draw a label for an item: the realized response plus, for graph
/// environments, one side observation per neighbor of the labeled node.
/// Replay environments return the recorded yield exactly.
pub fn env_sample_label<R: Rng>(
    env: &Environment,
    item: &Item,
    rng: &mut R,
) -> Result<(f64, Vec<(usize, f64)>)> {
    match env {
        Environment::Linear { noise_sd, .. }
        | Environment::Glm { noise_sd, .. }
        | Environment::LowRank { noise_sd, .. } => {
            let mean = env_mean(env, item)?;
            let label = if *noise_sd > 0.0 {
                mean + Normal::new(0.0, *noise_sd).expect("validated noise sd").sample(rng)
            } else {
                mean
            };
            Ok((label, Vec::new()))
        }
        Environment::Graph {
            graph,
            node_values,
            noise_sd,
            bound,
        } => {
            let node = match item.payload {
                Payload::Node(node) => node,
                ref other => {
                    return Err(Error::PayloadMismatch {
                        expected: "node",
                        found: other.kind(),
                    })
                }
            };
            if node >= node_values.len() {
                return Err(Error::IndexOutOfRange {
                    index: node,
                    len: node_values.len(),
                });
            }
            let label = truncated_observation(node_values[node], *noise_sd, *bound, rng)?;
            let mut side = Vec::with_capacity(graph.degree(node));
            for &z in graph.neighbors(node) {
                side.push((z, truncated_observation(node_values[z], *noise_sd, *bound, rng)?));
            }
            Ok((label, side))
        }
        Environment::Replay { .. } => Ok((env_mean(env, item)?, Vec::new())),
    }
}

/// The `t` pool items with the largest true means (ties to the lowest index),
/// in descending mean order, together with their summed means.
pub fn oracle_top_t(
    env: &Environment,
    pool: &CandidatePool,
    t: usize,
) -> Result<(Vec<usize>, f64)> {
    if t > pool.len() {
        return Err(Error::HorizonExceedsPool {
            horizon: t,
            pool: pool.len(),
        });
    }
    if t == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let mut means = Vec::with_capacity(pool.len());
    for item in pool.items() {
        means.push(env_mean(env, item)?);
    }
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&a, &b| {
        means[b]
            .partial_cmp(&means[a])
            .expect("finite means")
            .then(a.cmp(&b))
    });
    order.truncate(t);
    let value = order.iter().map(|&i| means[i]).sum();
    Ok((order, value))
}

/// Worst-case construction for budget `t`: `t^2` independent unit-noise
/// Gaussian arms, the first `t` of them with mean `gap`, the rest zero.
pub fn make_hard_instance(t: usize, gap: f64) -> Result<(Environment, CandidatePool)> {
    if t == 0 {
        return Err(Error::OutOfRange {
            what: "horizon",
            range: "[1, inf)",
            value: 0.0,
        });
    }
    if !gap.is_finite() {
        return Err(Error::NonFinite("gap"));
    }
    let n = t * t;
    let mut values = vec![0.0; n];
    values[..t].fill(gap);
    let env = Environment::graph(Graph::empty(n), values, 1.0, f64::INFINITY)?;
    Ok((env, CandidatePool::from_nodes(n)))
}

/// Coherence profile of a low-rank mean matrix and the entry bound it
/// certifies.
#[derive(Clone, Debug)]
pub struct IncoherenceReport {
    /// Largest row coherence of the left singular subspace.
    pub mu_max_u: f64,
    /// Largest row coherence of the right singular subspace.
    pub mu_max_v: f64,
    /// Smallest constant under which the coherence assumption holds.
    pub gamma: f64,
    /// Largest singular value of the mean matrix.
    pub spectral_norm: f64,
    /// `gamma * rank^(3/2) * spectral_norm / rows`.
    pub assumption_bound: f64,
    /// Cauchy-Schwarz entry bound `sqrt(mu_max_u * mu_max_v) * spectral_norm`.
    pub entry_bound: f64,
    /// Largest absolute entry actually present in the mean matrix.
    pub max_abs_entry: f64,
}

/// Measure how much the factors' singular subspaces align with the standard
/// basis. `entry_bound` always dominates `max_abs_entry`.
pub fn incoherence_diagnostic(
    factor_u: &DMatrix<f64>,
    factor_v: &DMatrix<f64>,
) -> Result<IncoherenceReport> {
    if factor_u.ncols() != factor_v.ncols() {
        return Err(Error::DimensionMismatch {
            expected: factor_u.ncols(),
            found: factor_v.ncols(),
        });
    }
    let mean = factor_u * factor_v.transpose();
    let max_abs_entry = mean.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let svd = mean.clone().svd(true, true);
    let spectral_norm = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    let tol = spectral_norm * 1e-12;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if rank == 0 {
        return Err(Error::InvalidCombination(
            "mean matrix is zero; coherence is undefined".into(),
        ));
    }
    let u = svd.u.as_ref().expect("requested u");
    let vt = svd.v_t.as_ref().expect("requested v_t");
    let row_coherence_max = |basis_rows: usize, at: &dyn Fn(usize, usize) -> f64| -> f64 {
        (0..basis_rows)
            .map(|i| (0..rank).map(|k| at(i, k) * at(i, k)).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let mu_max_u = row_coherence_max(u.nrows(), &|i, k| u[(i, k)]);
    let mu_max_v = row_coherence_max(vt.ncols(), &|j, k| vt[(k, j)]);
    let rows = mean.nrows() as f64;
    let r = rank as f64;
    // The assumption reads mu_max <= sqrt(gamma * r / rows); invert for the
    // smallest gamma this matrix satisfies.
    let gamma = mu_max_u.max(mu_max_v).powi(2) * rows / r;
    Ok(IncoherenceReport {
        mu_max_u,
        mu_max_v,
        gamma,
        spectral_norm,
        assumption_bound: gamma * r.powf(1.5) * spectral_norm / rows,
        entry_bound: (mu_max_u * mu_max_v).sqrt() * spectral_norm,
        max_abs_entry,
    })
}
