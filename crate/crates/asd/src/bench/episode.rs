//! One episode: a policy labels `horizon` pool items, each at most once.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::env::{env_mean, env_sample_label, Environment, LinkFunction};
use crate::error::{Error, Result};
use crate::policies::{
    instant_regret_estimate, select_from_delta_gain, select_random, select_ts, select_ucb_glm,
    select_ucb_linear, two_point_mix, vids_gain, PolicyConfig, SelectionMode,
};
use crate::pool::{CandidatePool, Item, Payload};
use crate::posterior::{
    laplace_fit, GaussianLinearPosterior, GibbsConfig, LaplaceConfig, LaplaceLogisticPosterior,
    LowRankGibbsState, NodeGaussianBeliefs, PosteriorSampleSet,
};
use crate::regret::{DiagnosticsSummary, RegretLedger, StepRecord, Trajectory};

/// Selection policies runnable in an episode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    /// Information-directed sampling over posterior draws.
    Ids,
    /// Thompson sampling: act greedily on one posterior draw.
    Ts,
    /// Upper confidence bound (linear and logistic models only).
    Ucb,
    /// Uniform over the remaining items.
    Random,
    /// Greedy on the true means; the regret-zero reference.
    Oracle,
}

impl PolicyKind {
    /// Stable tag mixed into seed derivation. Never renumber.
    pub fn tag(self) -> u64 {
        match self {
            PolicyKind::Ids => 1,
            PolicyKind::Ts => 2,
            PolicyKind::Ucb => 3,
            PolicyKind::Random => 4,
            PolicyKind::Oracle => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Ids => "ids",
            PolicyKind::Ts => "ts",
            PolicyKind::Ucb => "ucb",
            PolicyKind::Random => "random",
            PolicyKind::Oracle => "oracle",
        }
    }

    /// Whether two runs under identical seeds and inputs pick identical items.
    pub fn is_deterministic(self) -> bool {
        matches!(self, PolicyKind::Ucb | PolicyKind::Oracle)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ids" => Ok(PolicyKind::Ids),
            "ts" => Ok(PolicyKind::Ts),
            "ucb" => Ok(PolicyKind::Ucb),
            "random" => Ok(PolicyKind::Random),
            "oracle" => Ok(PolicyKind::Oracle),
            other => Err(Error::Config(format!(
                "unknown policy '{other}' (expected ids, ts, ucb, random, or oracle)"
            ))),
        }
    }
}

/// Belief-tracking knobs shared by every engine family.
#[derive(Clone, Copy, Debug)]
pub struct EngineSettings {
    pub prior_sd: f64,
    /// Noise scale assumed by belief updates; `None` takes the environment's.
    pub assumed_noise_sd: Option<f64>,
    pub laplace: LaplaceConfig,
    pub gibbs: GibbsConfig,
    /// Factor rank assumed by the matrix engine.
    pub rank: usize,
}

impl Default for EngineSettings {
    fn default() -> Self {
        Self {
            prior_sd: 1.0,
            assumed_noise_sd: None,
            laplace: LaplaceConfig::default(),
            gibbs: GibbsConfig::default(),
            rank: 2,
        }
    }
}

/// Posterior tracker matched to an environment family.
///
/// `Passive` carries no state and serves the policies that never consult a
/// posterior (random and oracle).
#[derive(Debug)]
pub enum Engine {
    Linear {
        posterior: GaussianLinearPosterior,
    },
    Logistic {
        features: Vec<Vec<f64>>,
        labels: Vec<f64>,
        config: LaplaceConfig,
        posterior: LaplaceLogisticPosterior,
    },
    Nodes {
        beliefs: NodeGaussianBeliefs,
        noise_sd: f64,
    },
    LowRank {
        chain: LowRankGibbsState,
    },
    Passive,
}

fn feature_rows<'a>(items: &[&'a Item]) -> Result<Vec<&'a [f64]>> {
    items
        .iter()
        .map(|item| {
            item.payload.features().ok_or(Error::PayloadMismatch {
                expected: "features",
                found: item.payload.kind(),
            })
        })
        .collect()
}

fn node_ids(items: &[&Item]) -> Result<Vec<usize>> {
    items
        .iter()
        .map(|item| match item.payload {
            Payload::Node(node) => Ok(node),
            ref other => Err(Error::PayloadMismatch {
                expected: "node",
                found: other.kind(),
            }),
        })
        .collect()
}

fn cell_ids(items: &[&Item]) -> Result<Vec<(usize, usize)>> {
    items
        .iter()
        .map(|item| match item.payload {
            Payload::Cell { row, col } => Ok((row, col)),
            ref other => Err(Error::PayloadMismatch {
                expected: "cell",
                found: other.kind(),
            }),
        })
        .collect()
}

impl Engine {
    /// Build the engine matching `env` for `policy`. Policies that never use
    /// a posterior get the stateless passive engine regardless of `env`.
    pub fn for_policy<R: Rng>(
        policy: PolicyKind,
        env: &Environment,
        pool: &CandidatePool,
        settings: &EngineSettings,
        rng: &mut R,
    ) -> Result<Engine> {
        if matches!(policy, PolicyKind::Random | PolicyKind::Oracle) {
            return Ok(Engine::Passive);
        }
        let noise = settings.assumed_noise_sd.unwrap_or_else(|| env.noise_sd());
        match env {
            Environment::Linear { theta, .. } => Ok(Engine::Linear {
                posterior: GaussianLinearPosterior::new(theta.len(), settings.prior_sd, noise)?,
            }),
            Environment::Glm { theta, .. } => {
                let config = LaplaceConfig {
                    prior_sd: settings.prior_sd,
                    ..settings.laplace
                };
                let posterior = laplace_fit(&[], &[], theta.len(), &config)?;
                Ok(Engine::Logistic {
                    features: Vec::new(),
                    labels: Vec::new(),
                    config,
                    posterior,
                })
            }
            Environment::Graph { node_values, .. } => Ok(Engine::Nodes {
                beliefs: NodeGaussianBeliefs::new(node_values.len(), 0.0, settings.prior_sd)?,
                noise_sd: noise,
            }),
            Environment::LowRank {
                factor_u, factor_v, ..
            } => Ok(Engine::LowRank {
                chain: LowRankGibbsState::new(
                    factor_u.nrows(),
                    factor_v.nrows(),
                    settings.rank,
                    settings.prior_sd,
                    noise,
                    settings.gibbs,
                    rng,
                )?,
            }),
            Environment::Replay { .. } => {
                if pool.is_empty() {
                    return Err(Error::EmptyPool);
                }
                let dim = match &pool.item(0).payload {
                    Payload::Features(row) => row.len(),
                    other => {
                        return Err(Error::PayloadMismatch {
                            expected: "features",
                            found: other.kind(),
                        })
                    }
                };
                let noise = settings.assumed_noise_sd.ok_or_else(|| {
                    Error::InvalidCombination(
                        "replaying recorded data needs an assumed noise scale".into(),
                    )
                })?;
                Ok(Engine::Linear {
                    posterior: GaussianLinearPosterior::new(dim, settings.prior_sd, noise)?,
                })
            }
        }
    }

    pub fn has_posterior(&self) -> bool {
        !matches!(self, Engine::Passive)
    }

    pub fn supports_ucb(&self) -> bool {
        matches!(self, Engine::Linear { .. } | Engine::Logistic { .. })
    }

    /// Fold one labeled item (plus any side observations) into the belief.
    pub fn observe(&mut self, item: &Item, label: f64, side: &[(usize, f64)]) -> Result<()> {
        match self {
            Engine::Linear { posterior } => {
                let row = item.payload.features().ok_or(Error::PayloadMismatch {
                    expected: "features",
                    found: item.payload.kind(),
                })?;
                posterior.update(row, label)
            }
            Engine::Logistic {
                features,
                labels,
                config,
                posterior,
            } => {
                let row = item.payload.features().ok_or(Error::PayloadMismatch {
                    expected: "features",
                    found: item.payload.kind(),
                })?;
                features.push(row.to_vec());
                labels.push(label);
                *posterior = laplace_fit(features, labels, row.len(), config)?;
                Ok(())
            }
            Engine::Nodes { beliefs, noise_sd } => {
                let node = match item.payload {
                    Payload::Node(node) => node,
                    ref other => {
                        return Err(Error::PayloadMismatch {
                            expected: "node",
                            found: other.kind(),
                        })
                    }
                };
                beliefs.observe(node, label, *noise_sd)?;
                for &(neighbor, value) in side {
                    beliefs.observe(neighbor, value, *noise_sd)?;
                }
                Ok(())
            }
            Engine::LowRank { chain } => {
                let (row, col) = match item.payload {
                    Payload::Cell { row, col } => (row, col),
                    ref other => {
                        return Err(Error::PayloadMismatch {
                            expected: "cell",
                            found: other.kind(),
                        })
                    }
                };
                chain.observe(row, col, label)
            }
            Engine::Passive => Ok(()),
        }
    }

    /// Posterior draws over the listed items' mean responses.
    pub fn sample_set<R: Rng>(
        &mut self,
        items: &[&Item],
        m: usize,
        rng: &mut R,
    ) -> Result<PosteriorSampleSet> {
        match self {
            Engine::Linear { posterior } => {
                posterior.sample_set(&feature_rows(items)?, LinkFunction::Identity, m, rng)
            }
            Engine::Logistic { posterior, .. } => {
                posterior.sample_set(&feature_rows(items)?, m, rng)
            }
            Engine::Nodes { beliefs, .. } => beliefs.sample_set(&node_ids(items)?, m, rng),
            Engine::LowRank { chain } => chain.sample_set(&cell_ids(items)?, m, rng),
            Engine::Passive => Err(Error::IncompatiblePolicy {
                policy: "posterior sampling".into(),
                reason: "the passive engine tracks no posterior".into(),
            }),
        }
    }

    /// Confidence-bound pick over the listed items.
    pub fn select_ucb(&self, items: &[&Item], alpha: f64) -> Result<usize> {
        match self {
            Engine::Linear { posterior } => {
                select_ucb_linear(posterior, &feature_rows(items)?, alpha)
            }
            Engine::Logistic { posterior, .. } => {
                select_ucb_glm(posterior, &feature_rows(items)?, alpha)
            }
            _ => Err(Error::IncompatiblePolicy {
                policy: "ucb".into(),
                reason: "confidence bounds exist for linear and logistic engines only".into(),
            }),
        }
    }
}

/// Gain actually credited to labeling an item in a graph environment: its own
/// conditional-variance gain plus the gains of every still-active neighbor,
/// since labeling reveals those neighbors too. Node values are independent,
/// so already-labeled neighbors contribute exactly zero and are skipped.
/// Non-graph environments pass the per-item gain through unchanged.
fn aggregate_gain(env: &Environment, items: &[&Item], gain: &[f64]) -> Result<Vec<f64>> {
    let Environment::Graph { graph, .. } = env else {
        return Ok(gain.to_vec());
    };
    let nodes = node_ids(items)?;
    let mut column_of = vec![usize::MAX; graph.node_count()];
    for (col, &node) in nodes.iter().enumerate() {
        column_of[node] = col;
    }
    let mut aggregated = gain.to_vec();
    for (col, &node) in nodes.iter().enumerate() {
        for &neighbor in graph.neighbors(node) {
            let other = column_of[neighbor];
            if other != usize::MAX {
                aggregated[col] += gain[other];
            }
        }
    }
    Ok(aggregated)
}

fn oracle_column(env: &Environment, items: &[&Item]) -> Result<usize> {
    let mut best = 0;
    let mut best_mean = f64::NEG_INFINITY;
    for (col, item) in items.iter().enumerate() {
        let mean = env_mean(env, item)?;
        if mean > best_mean {
            best = col;
            best_mean = mean;
        }
    }
    Ok(best)
}

/// Run one episode: `horizon` rounds of select, label, update, retire.
///
/// The chosen items are removed from the pool as the episode goes, the
/// engine absorbs every observation (including graph side observations), and
/// the returned ledger prices each step against the oracle's allocation.
/// Label noise and policy randomness draw from separate streams so paired
/// comparisons across policies stay aligned.
#[allow(clippy::too_many_arguments)]
pub fn run_episode<Rn: Rng, Rp: Rng>(
    env: &Environment,
    pool: &mut CandidatePool,
    horizon: usize,
    policy: PolicyKind,
    config: &PolicyConfig,
    engine: &mut Engine,
    noise_rng: &mut Rn,
    policy_rng: &mut Rp,
) -> Result<(Trajectory, RegretLedger)> {
    config.validate()?;
    if horizon > pool.active_count() {
        return Err(Error::HorizonExceedsPool {
            horizon,
            pool: pool.active_count(),
        });
    }
    match policy {
        PolicyKind::Ids | PolicyKind::Ts if !engine.has_posterior() => {
            return Err(Error::IncompatiblePolicy {
                policy: policy.name().into(),
                reason: "needs a posterior engine".into(),
            });
        }
        PolicyKind::Ucb if !engine.supports_ucb() => {
            return Err(Error::IncompatiblePolicy {
                policy: "ucb".into(),
                reason: "confidence bounds exist for linear and logistic engines only".into(),
            });
        }
        _ => {}
    }

    let mut ledger = RegretLedger::new(env, pool, horizon)?;
    let mut trajectory = Trajectory::default();
    for step in 0..horizon {
        let (global, label, side, mean, diagnostics) = {
            let items = pool.active_items();
            let (column, diagnostics) = match policy {
                PolicyKind::Ids => {
                    let set = engine.sample_set(&items, config.sample_count, policy_rng)?;
                    let delta = instant_regret_estimate(&set);
                    let gain = aggregate_gain(env, &items, &vids_gain(&set))?;
                    match config.mode {
                        SelectionMode::DeterministicVids => {
                            let (column, ratio) =
                                select_from_delta_gain(&delta, &gain, config.lambda)?;
                            let summary = DiagnosticsSummary {
                                delta: delta[column],
                                gain: gain[column],
                                ratio: ratio[column],
                            };
                            (column, Some(summary))
                        }
                        SelectionMode::TwoPointIds => {
                            let mix = two_point_mix(&delta, &gain)?;
                            let column = mix.sample(policy_rng);
                            let summary = DiagnosticsSummary {
                                delta: delta[column],
                                gain: gain[column],
                                ratio: mix.psi,
                            };
                            (column, Some(summary))
                        }
                    }
                }
                PolicyKind::Ts => {
                    let set = engine.sample_set(&items, 1, policy_rng)?;
                    (select_ts(&set, policy_rng), None)
                }
                PolicyKind::Ucb => (engine.select_ucb(&items, config.ucb_alpha)?, None),
                PolicyKind::Random => (select_random(items.len(), policy_rng)?, None),
                PolicyKind::Oracle => (oracle_column(env, &items)?, None),
            };
            let item = items[column];
            let (label, side) = env_sample_label(env, item, noise_rng)?;
            let mean = env_mean(env, item)?;
            engine.observe(item, label, &side)?;
            (item.index, label, side, mean, diagnostics)
        };
        ledger.record(mean);
        pool.deactivate(global)?;
        trajectory.steps.push(StepRecord {
            step,
            chosen: global,
            label,
            side_observations: side,
            diagnostics,
        });
    }
    Ok((trajectory, ledger))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn tiny_linear() -> (Environment, CandidatePool) {
        let env = Environment::linear(vec![1.0, -0.5], 0.1).unwrap();
        let pool = CandidatePool::from_features(vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.5, 0.5],
            vec![-1.0, 0.0],
            vec![0.3, -0.8],
        ]);
        (env, pool)
    }

    #[test]
    fn policy_names_round_trip() {
        for policy in [
            PolicyKind::Ids,
            PolicyKind::Ts,
            PolicyKind::Ucb,
            PolicyKind::Random,
            PolicyKind::Oracle,
        ] {
            assert_eq!(policy.name().parse::<PolicyKind>().unwrap(), policy);
        }
        assert!("greedy".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn oracle_walks_the_true_ranking() {
        let (env, mut pool) = tiny_linear();
        let mut engine = Engine::Passive;
        let mut noise_rng = substream(7, &[0]);
        let mut policy_rng = substream(7, &[1]);
        let (trajectory, ledger) = run_episode(
            &env,
            &mut pool,
            3,
            PolicyKind::Oracle,
            &PolicyConfig::default(),
            &mut engine,
            &mut noise_rng,
            &mut policy_rng,
        )
        .unwrap();
        // True means: [1.0, -0.5, 0.25, -1.0, 0.7] so the order is 0, 4, 2.
        assert_eq!(trajectory.chosen_indices(), vec![0, 4, 2]);
        assert_eq!(ledger.final_regret(), 0.0);
        assert!(ledger.instant().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn episode_retires_each_item_once() {
        let (env, mut pool) = tiny_linear();
        let settings = EngineSettings::default();
        let mut policy_rng = substream(8, &[1]);
        let mut engine =
            Engine::for_policy(PolicyKind::Ids, &env, &pool, &settings, &mut policy_rng).unwrap();
        let mut noise_rng = substream(8, &[0]);
        let (trajectory, ledger) = run_episode(
            &env,
            &mut pool,
            5,
            PolicyKind::Ids,
            &PolicyConfig {
                sample_count: 16,
                ..Default::default()
            },
            &mut engine,
            &mut noise_rng,
            &mut policy_rng,
        )
        .unwrap();
        let mut chosen = trajectory.chosen_indices();
        chosen.sort_unstable();
        assert_eq!(chosen, vec![0, 1, 2, 3, 4], "each item exactly once");
        assert_eq!(pool.active_count(), 0);
        assert_eq!(ledger.recorded_steps(), 5);
        // Labeling everything collects everything: zero final regret.
        assert!(ledger.final_regret().abs() < 1e-12);
        assert!(trajectory.steps[0].diagnostics.is_some());
    }

    #[test]
    fn horizon_and_compatibility_are_checked_up_front() {
        let (env, mut pool) = tiny_linear();
        let config = PolicyConfig::default();
        let mut noise_rng = substream(9, &[0]);
        let mut policy_rng = substream(9, &[1]);
        let err = run_episode(
            &env,
            &mut pool,
            6,
            PolicyKind::Random,
            &config,
            &mut Engine::Passive,
            &mut noise_rng,
            &mut policy_rng,
        )
        .unwrap_err();
        assert!(matches!(err, Error::HorizonExceedsPool { .. }));
        let err = run_episode(
            &env,
            &mut pool,
            2,
            PolicyKind::Ids,
            &config,
            &mut Engine::Passive,
            &mut noise_rng,
            &mut policy_rng,
        )
        .unwrap_err();
        assert!(matches!(err, Error::IncompatiblePolicy { .. }));
        assert_eq!(pool.active_count(), 5, "failed validation labels nothing");
    }

    #[test]
    fn ucb_needs_a_confidence_engine() {
        let graph = crate::graph::gen_complete(4);
        let env = Environment::graph(graph, vec![0.0; 4], 1.0, f64::INFINITY).unwrap();
        let mut pool = CandidatePool::from_nodes(4);
        let settings = EngineSettings::default();
        let mut policy_rng = substream(10, &[1]);
        let mut engine =
            Engine::for_policy(PolicyKind::Ucb, &env, &pool, &settings, &mut policy_rng).unwrap();
        let mut noise_rng = substream(10, &[0]);
        let err = run_episode(
            &env,
            &mut pool,
            2,
            PolicyKind::Ucb,
            &PolicyConfig::default(),
            &mut engine,
            &mut noise_rng,
            &mut policy_rng,
        )
        .unwrap_err();
        assert!(matches!(err, Error::IncompatiblePolicy { .. }));
    }

    #[test]
    fn graph_side_observations_feed_the_engine() {
        // Star on 4 nodes: node 0 adjacent to all, others only to 0.
        let graph =
            crate::graph::Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let env =
            Environment::graph(graph, vec![0.3, -0.2, 0.9, 0.1], 0.0, f64::INFINITY).unwrap();
        let mut pool = CandidatePool::from_nodes(4);
        let settings = EngineSettings::default();
        let mut policy_rng = substream(11, &[1]);
        let mut engine =
            Engine::for_policy(PolicyKind::Ids, &env, &pool, &settings, &mut policy_rng).unwrap();
        let mut noise_rng = substream(11, &[0]);
        let (trajectory, _) = run_episode(
            &env,
            &mut pool,
            2,
            PolicyKind::Ids,
            &PolicyConfig {
                sample_count: 32,
                ..Default::default()
            },
            &mut engine,
            &mut noise_rng,
            &mut policy_rng,
        )
        .unwrap();
        // Labeling the hub must reveal every other node.
        let hub_step = trajectory
            .steps
            .iter()
            .find(|s| s.chosen == 0)
            .expect("hub labeled within two steps of a four-node star");
        assert_eq!(hub_step.side_observations.len(), 3);
        // Noiseless values collapse the beliefs; the engine now knows node 2
        // is best among the remaining items.
        if let Engine::Nodes { beliefs, .. } = &engine {
            assert_eq!(beliefs.mean(2).unwrap(), 0.9);
            assert_eq!(beliefs.sd(2).unwrap(), 0.0);
        } else {
            panic!("graph environment builds a node engine");
        }
    }

    #[test]
    fn aggregate_gain_sums_active_neighborhoods() {
        let graph = crate::graph::Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let env = Environment::graph(graph, vec![0.0; 3], 1.0, f64::INFINITY).unwrap();
        let pool = CandidatePool::from_nodes(3);
        let items = pool.active_items();
        let gain = vec![1.0, 2.0, 4.0];
        let aggregated = aggregate_gain(&env, &items, &gain).unwrap();
        // Path 0-1-2: node 0 sees itself + node 1, node 1 sees all three.
        assert_eq!(aggregated, vec![3.0, 7.0, 6.0]);
    }

    #[test]
    fn replay_engine_requires_assumed_noise() {
        let env = Environment::replay(vec![0.5, 0.7]).unwrap();
        let pool = CandidatePool::from_features(vec![vec![1.0], vec![0.0]]);
        let mut rng = substream(12, &[1]);
        let err = Engine::for_policy(
            PolicyKind::Ids,
            &env,
            &pool,
            &EngineSettings::default(),
            &mut rng,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidCombination(_)));
        let settings = EngineSettings {
            assumed_noise_sd: Some(0.1),
            ..Default::default()
        };
        let engine = Engine::for_policy(PolicyKind::Ids, &env, &pool, &settings, &mut rng).unwrap();
        assert!(engine.has_posterior());
    }
}
