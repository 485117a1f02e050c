//! Benchmark harness: repeated episodes across models, policies, and seeds.
//!
//! An experiment fixes a model family and a seed, draws a fresh environment
//! and pool per run, and plays every requested policy on that same draw so
//! comparisons are paired. All randomness descends from the base seed through
//! tagged substreams, which makes whole experiments bit-reproducible.

pub mod episode;

pub use episode::{run_episode, Engine, EngineSettings, PolicyKind};

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::env::{make_hard_instance, Environment, LinkFunction};
use crate::error::{Error, Result};
use crate::graph::{gen_complete, gen_random, gen_star};
use crate::policies::PolicyConfig;
use crate::pool::CandidatePool;
use crate::posterior::GibbsConfig;
use crate::regret::Trajectory;
use crate::rng::{substream, PURPOSE_NOISE, PURPOSE_POLICY, STREAM_ENV};

/// Simulated model families the harness can draw environments from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// Gaussian linear responses over Gaussian feature vectors.
    Linear,
    /// Logistic-link responses over Gaussian feature vectors.
    Logistic,
    /// Gaussian node values on an Erdos-Renyi graph with side observations.
    GraphRandom,
    /// Gaussian node values on a complete graph.
    GraphComplete,
    /// Gaussian node values on a hub-heavy graph.
    GraphStar,
    /// Low-rank matrix completion over all cells.
    Matrix,
    /// Worst-case construction: `t^2` arms, `t` of them better by `gap`.
    HardInstance,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Logistic => "logistic",
            ModelKind::GraphRandom => "graph-random",
            ModelKind::GraphComplete => "graph-complete",
            ModelKind::GraphStar => "graph-star",
            ModelKind::Matrix => "matrix",
            ModelKind::HardInstance => "hard-instance",
        }
    }

    pub fn is_graph(self) -> bool {
        matches!(
            self,
            ModelKind::GraphRandom | ModelKind::GraphComplete | ModelKind::GraphStar
        )
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ModelKind::Linear),
            "logistic" => Ok(ModelKind::Logistic),
            "graph-random" => Ok(ModelKind::GraphRandom),
            "graph-complete" => Ok(ModelKind::GraphComplete),
            "graph-star" => Ok(ModelKind::GraphStar),
            "matrix" => Ok(ModelKind::Matrix),
            "hard-instance" => Ok(ModelKind::HardInstance),
            other => Err(Error::Config(format!(
                "unknown model '{other}' (expected linear, logistic, graph-random, \
                 graph-complete, graph-star, matrix, or hard-instance)"
            ))),
        }
    }
}

/// Full description of one experiment. Fields irrelevant to the chosen model
/// (for example `graph_p` under `linear`) are carried but ignored.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    /// Independent environment draws.
    pub runs: usize,
    /// Labels collected per run.
    pub horizon: usize,
    /// Items in the pool (nodes for graph models; ignored for matrix and
    /// hard-instance models, whose pools are implied by their shapes).
    pub pool_size: usize,
    /// Feature dimension for linear and logistic models.
    pub dim: usize,
    /// Scale of the Gaussian feature entries.
    pub feature_sd: f64,
    /// Label noise scale.
    pub noise_sd: f64,
    /// Scale of the drawn parameters (and the engines' prior).
    pub prior_sd: f64,
    /// Edge probability for random and star graphs.
    pub graph_p: f64,
    /// Fraction of nodes that are hubs in the star model.
    pub hub_fraction: f64,
    pub matrix_rows: usize,
    pub matrix_cols: usize,
    pub matrix_rank: usize,
    /// Mean advantage of the good arms in the hard instance.
    pub gap: f64,
    pub policies: Vec<PolicyKind>,
    pub policy: PolicyConfig,
    pub gibbs: GibbsConfig,
    pub base_seed: u64,
}

impl ExperimentConfig {
    /// Standard settings for each model family.
    pub fn for_model(model: ModelKind) -> Self {
        let mut cfg = Self {
            model,
            runs: 10,
            horizon: 100,
            pool_size: 500,
            dim: 20,
            feature_sd: 1.0,
            noise_sd: 1.0,
            prior_sd: 1.0,
            graph_p: 0.01,
            hub_fraction: 1.0 / 3.0,
            matrix_rows: 30,
            matrix_cols: 30,
            matrix_rank: 2,
            gap: 0.5,
            policies: vec![
                PolicyKind::Ids,
                PolicyKind::Ts,
                PolicyKind::Ucb,
                PolicyKind::Random,
            ],
            policy: PolicyConfig::default(),
            gibbs: GibbsConfig::default(),
            base_seed: 0,
        };
        match model {
            ModelKind::Linear | ModelKind::Logistic => {}
            ModelKind::GraphRandom | ModelKind::GraphComplete | ModelKind::GraphStar => {
                cfg.horizon = 50;
                cfg.pool_size = 900;
                cfg.policies = vec![PolicyKind::Ids, PolicyKind::Ts, PolicyKind::Random];
            }
            ModelKind::Matrix => {
                cfg.policies = vec![PolicyKind::Ids, PolicyKind::Ts, PolicyKind::Random];
                cfg.policy.lambda = 3.0;
            }
            ModelKind::HardInstance => {
                cfg.horizon = 20;
                cfg.policies = vec![PolicyKind::Random];
            }
        }
        cfg
    }

    /// Number of items a single run's pool will contain.
    pub fn effective_pool_size(&self) -> usize {
        match self.model {
            ModelKind::Matrix => self.matrix_rows * self.matrix_cols,
            ModelKind::HardInstance => self.horizon * self.horizon,
            _ => self.pool_size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.policy.validate()?;
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::Config("at least one policy is required".into()));
        }
        for (i, a) in self.policies.iter().enumerate() {
            if self.policies[..i].contains(a) {
                return Err(Error::Config(format!(
                    "policy '{a}' listed twice; repeats would replay the same random stream"
                )));
            }
        }
        if self.horizon > self.effective_pool_size() {
            return Err(Error::HorizonExceedsPool {
                horizon: self.horizon,
                pool: self.effective_pool_size(),
            });
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::OutOfRange {
                what: "noise_sd",
                range: "[0, inf)",
                value: self.noise_sd,
            });
        }
        if !(self.prior_sd > 0.0 && self.prior_sd.is_finite()) {
            return Err(Error::OutOfRange {
                what: "prior_sd",
                range: "(0, inf)",
                value: self.prior_sd,
            });
        }
        match self.model {
            ModelKind::Linear | ModelKind::Logistic => {
                if self.dim == 0 {
                    return Err(Error::Config("feature dimension must be at least 1".into()));
                }
                if !(self.feature_sd > 0.0 && self.feature_sd.is_finite()) {
                    return Err(Error::OutOfRange {
                        what: "feature_sd",
                        range: "(0, inf)",
                        value: self.feature_sd,
                    });
                }
            }
            ModelKind::GraphRandom | ModelKind::GraphStar => {
                if !(0.0..=1.0).contains(&self.graph_p) {
                    return Err(Error::OutOfRange {
                        what: "graph_p",
                        range: "[0, 1]",
                        value: self.graph_p,
                    });
                }
                if self.model == ModelKind::GraphStar && !(0.0..=1.0).contains(&self.hub_fraction)
                {
                    return Err(Error::OutOfRange {
                        what: "hub_fraction",
                        range: "[0, 1]",
                        value: self.hub_fraction,
                    });
                }
            }
            ModelKind::GraphComplete => {}
            ModelKind::Matrix => {
                if self.matrix_rank == 0
                    || self.matrix_rank > self.matrix_rows.min(self.matrix_cols)
                {
                    return Err(Error::Config(format!(
                        "matrix rank {} must lie in [1, {}]",
                        self.matrix_rank,
                        self.matrix_rows.min(self.matrix_cols)
                    )));
                }
            }
            ModelKind::HardInstance => {
                if !self.gap.is_finite() {
                    return Err(Error::NonFinite("gap"));
                }
            }
        }
        let ucb_ok = matches!(self.model, ModelKind::Linear | ModelKind::Logistic);
        if !ucb_ok && self.policies.contains(&PolicyKind::Ucb) {
            return Err(Error::IncompatiblePolicy {
                policy: "ucb".into(),
                reason: format!(
                    "confidence bounds exist for linear and logistic models, not '{}'",
                    self.model
                ),
            });
        }
        Ok(())
    }

    fn engine_settings(&self) -> EngineSettings {
        EngineSettings {
            prior_sd: self.prior_sd,
            assumed_noise_sd: None,
            laplace: Default::default(),
            gibbs: self.gibbs,
            rank: self.matrix_rank,
        }
    }
}

fn normal(sd: f64, rng: &mut impl Rng) -> f64 {
    sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
}

/// Draw one environment and its matching pool for `cfg`.
pub fn build_environment<R: Rng>(
    cfg: &ExperimentConfig,
    rng: &mut R,
) -> Result<(Environment, CandidatePool)> {
    match cfg.model {
        ModelKind::Linear | ModelKind::Logistic => {
            let theta: Vec<f64> = (0..cfg.dim).map(|_| normal(cfg.prior_sd, rng)).collect();
            let rows: Vec<Vec<f64>> = (0..cfg.pool_size)
                .map(|_| (0..cfg.dim).map(|_| normal(cfg.feature_sd, rng)).collect())
                .collect();
            let env = if cfg.model == ModelKind::Linear {
                Environment::linear(theta, cfg.noise_sd)?
            } else {
                Environment::glm(theta, LinkFunction::Logistic, cfg.noise_sd)?
            };
            Ok((env, CandidatePool::from_features(rows)))
        }
        ModelKind::GraphRandom | ModelKind::GraphComplete | ModelKind::GraphStar => {
            let graph = match cfg.model {
                ModelKind::GraphRandom => gen_random(cfg.pool_size, cfg.graph_p, rng)?,
                ModelKind::GraphComplete => gen_complete(cfg.pool_size),
                _ => gen_star(cfg.pool_size, cfg.graph_p, cfg.hub_fraction, rng)?,
            };
            let values: Vec<f64> = (0..cfg.pool_size)
                .map(|_| normal(cfg.prior_sd, rng))
                .collect();
            let env = Environment::graph(graph, values, cfg.noise_sd, f64::INFINITY)?;
            Ok((env, CandidatePool::from_nodes(cfg.pool_size)))
        }
        ModelKind::Matrix => {
            let u = DMatrix::from_fn(cfg.matrix_rows, cfg.matrix_rank, |_, _| {
                normal(cfg.prior_sd, rng)
            });
            let v = DMatrix::from_fn(cfg.matrix_cols, cfg.matrix_rank, |_, _| {
                normal(cfg.prior_sd, rng)
            });
            let env = Environment::low_rank(u, v, cfg.noise_sd)?;
            Ok((env, CandidatePool::from_cells(cfg.matrix_rows, cfg.matrix_cols)))
        }
        ModelKind::HardInstance => make_hard_instance(cfg.horizon, cfg.gap),
    }
}

/// One policy's play on one environment draw.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub run_id: usize,
    pub policy: PolicyKind,
    pub trajectory: Trajectory,
    /// Per-step allocation gap; may be negative at single steps.
    pub instant: Vec<f64>,
    /// Running sum of `instant`; nonnegative at every step.
    pub cumulative: Vec<f64>,
    pub final_regret: f64,
}

/// Pointwise mean and sample standard deviation of a policy's cumulative
/// regret curve across runs.
#[derive(Clone, Debug)]
pub struct CurveSummary {
    pub policy: PolicyKind,
    pub mean: Vec<f64>,
    /// Zero when the experiment had a single run.
    pub sd: Vec<f64>,
}

impl CurveSummary {
    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }

    pub fn final_sd(&self) -> f64 {
        self.sd.last().copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub records: Vec<RunRecord>,
    pub summaries: Vec<CurveSummary>,
}

fn summarize(records: &[RunRecord], policies: &[PolicyKind], horizon: usize) -> Vec<CurveSummary> {
    policies
        .iter()
        .map(|&policy| {
            let curves: Vec<&[f64]> = records
                .iter()
                .filter(|r| r.policy == policy)
                .map(|r| r.cumulative.as_slice())
                .collect();
            let runs = curves.len();
            let mut mean = vec![0.0; horizon];
            let mut sd = vec![0.0; horizon];
            for t in 0..horizon {
                let m = curves.iter().map(|c| c[t]).sum::<f64>() / runs as f64;
                mean[t] = m;
                if runs > 1 {
                    let ss: f64 = curves.iter().map(|c| (c[t] - m).powi(2)).sum();
                    sd[t] = (ss / (runs - 1) as f64).sqrt();
                }
            }
            CurveSummary { policy, mean, sd }
        })
        .collect()
}

/// Run every `(run, policy)` pair of `cfg`.
///
/// Run `r` draws its environment from substream `[r, env]` of the base seed,
/// and every policy plays that same draw with its own noise and decision
/// substreams `[r, policy, purpose]`, so label noise is decoupled from the
/// policies' internal randomness and no two cells share a stream.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let settings = cfg.engine_settings();
    let mut records = Vec::with_capacity(cfg.runs * cfg.policies.len());
    for run in 0..cfg.runs {
        let mut env_rng = substream(cfg.base_seed, &[run as u64, STREAM_ENV]);
        let (env, pool) = build_environment(cfg, &mut env_rng)?;
        for &policy in &cfg.policies {
            let tags = [run as u64, policy.tag()];
            let mut noise_rng = substream(cfg.base_seed, &[tags[0], tags[1], PURPOSE_NOISE]);
            let mut policy_rng = substream(cfg.base_seed, &[tags[0], tags[1], PURPOSE_POLICY]);
            let mut pool = pool.clone();
            let mut engine = Engine::for_policy(policy, &env, &pool, &settings, &mut policy_rng)?;
            let (trajectory, ledger) = run_episode(
                &env,
                &mut pool,
                cfg.horizon,
                policy,
                &cfg.policy,
                &mut engine,
                &mut noise_rng,
                &mut policy_rng,
            )?;
            records.push(RunRecord {
                run_id: run,
                policy,
                trajectory,
                instant: ledger.instant().to_vec(),
                cumulative: ledger.cumulative().to_vec(),
                final_regret: ledger.final_regret(),
            });
        }
    }
    let summaries = summarize(&records, &cfg.policies, cfg.horizon);
    Ok(ExperimentResult { records, summaries })
}

/// Write one row per `(run, policy, step)` with the realized label and the
/// regret bookkeeping. Steps are numbered from 1.
pub fn write_raw_csv<W: Write>(records: &[RunRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "run_id",
        "policy",
        "step",
        "chosen_index",
        "label",
        "instant_regret",
        "cumulative_regret",
    ])?;
    for record in records {
        for (t, step) in record.trajectory.steps.iter().enumerate() {
            w.write_record(&[
                record.run_id.to_string(),
                record.policy.name().to_string(),
                (t + 1).to_string(),
                step.chosen.to_string(),
                step.label.to_string(),
                record.instant[t].to_string(),
                record.cumulative[t].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Write one row per `(policy, step)` with the cross-run mean and sample
/// standard deviation of cumulative regret. Steps are numbered from 1.
pub fn write_summary_csv<W: Write>(summaries: &[CurveSummary], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["policy", "step", "regret_mean", "regret_sd"])?;
    for summary in summaries {
        for t in 0..summary.mean.len() {
            w.write_record(&[
                summary.policy.name().to_string(),
                (t + 1).to_string(),
                summary.mean[t].to_string(),
                summary.sd[t].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Final regret of uniform selection on the worst-case construction, one
/// point per budget in `t_values`.
#[derive(Clone, Copy, Debug)]
pub struct HardInstancePoint {
    pub budget: usize,
    pub regret_mean: f64,
    pub regret_sd: f64,
}

/// Play the hard instance at several budgets. Regret should grow with the
/// budget: the pool holds `t^2` arms of which only `t` are good, so uniform
/// selection keeps missing them no matter how large `t` gets.
pub fn hard_instance_demo(
    t_values: &[usize],
    runs: usize,
    gap: f64,
    base_seed: u64,
) -> Result<Vec<HardInstancePoint>> {
    let mut points = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let mut cfg = ExperimentConfig::for_model(ModelKind::HardInstance);
        cfg.horizon = t;
        cfg.runs = runs;
        cfg.gap = gap;
        // Decorrelate budgets without letting them share run substreams.
        cfg.base_seed = base_seed.wrapping_add(t as u64);
        let result = run_experiment(&cfg)?;
        let finals: Vec<f64> = result.records.iter().map(|r| r.final_regret).collect();
        let mean = finals.iter().sum::<f64>() / finals.len() as f64;
        let sd = if finals.len() > 1 {
            (finals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (finals.len() - 1) as f64)
                .sqrt()
        } else {
            0.0
        };
        points.push(HardInstancePoint {
            budget: t,
            regret_mean: mean,
            regret_sd: sd,
        });
    }
    Ok(points)
}

/// Smallest eigenvalue of the pool's second-moment matrix `(1/n) sum x x^T`.
///
/// Positive values certify that every direction of feature space is
/// exercised; zero means some direction never appears, so no selection rule
/// can learn along it. Tiny negative eigenvalues from round-off clamp to
/// zero. An empty pool scores zero.
pub fn exploratory_score(features: &[Vec<f64>]) -> Result<f64> {
    let Some(first) = features.first() else {
        return Ok(0.0);
    };
    let dim = first.len();
    if dim == 0 {
        return Ok(0.0);
    }
    let mut moment = DMatrix::zeros(dim, dim);
    for row in features {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("features"));
        }
        let x = DVector::from_column_slice(row);
        moment += &x * x.transpose();
    }
    moment /= features.len() as f64;
    let eigen = SymmetricEigen::new(moment);
    let smallest = eigen.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(smallest.max(0.0))
}
