//! Per-run bookkeeping: what was chosen, what came back, and how far the run
//! sits from the best same-size subset in hindsight.
//!
//! The ledger scores against the oracle's descending schedule: the step-`t`
//! allocation is the `t`-th largest true mean, so the cumulative entry at
//! step `t` equals the gap between the best `t+1`-subset of the pool and the
//! true means actually collected. That gap is nonnegative at every step and
//! its final value is the run's regret; individual increments may be
//! negative when a policy picks a top item later than the oracle would have.

use crate::env::{env_mean, oracle_top_t, Environment};
use crate::error::Result;
use crate::pool::CandidatePool;

/// Scalar slice of a step's selection diagnostics, kept per trajectory step.
#[derive(Clone, Copy, Debug)]
pub struct DiagnosticsSummary {
    /// Estimated instant regret of the chosen item.
    pub delta: f64,
    /// Estimated information gain of the chosen item.
    pub gain: f64,
    /// The selection ratio the chosen item minimized.
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct StepRecord {
    /// 0-based step number.
    pub step: usize,
    /// Pool index of the labeled item.
    pub chosen: usize,
    /// Realized label.
    pub label: f64,
    /// `(item index, observed value)` pairs revealed alongside the label.
    pub side_observations: Vec<(usize, f64)>,
    /// Present for ratio-driven policies.
    pub diagnostics: Option<DiagnosticsSummary>,
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub steps: Vec<StepRecord>,
}

impl Trajectory {
    pub fn chosen_indices(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.chosen).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct RegretLedger {
    oracle_value: f64,
    /// Oracle means in the order the oracle would collect them (descending).
    allocation: Vec<f64>,
    instant: Vec<f64>,
    cumulative: Vec<f64>,
}

impl RegretLedger {
    /// Score future choices against the best `horizon`-subset of `pool`
    /// under `env`. The pool must still be fully active.
    pub fn new(env: &Environment, pool: &CandidatePool, horizon: usize) -> Result<Self> {
        let (indices, oracle_value) = oracle_top_t(env, pool, horizon)?;
        let mut allocation = Vec::with_capacity(indices.len());
        for &i in &indices {
            allocation.push(env_mean(env, pool.item(i))?);
        }
        Ok(Self {
            oracle_value,
            allocation,
            instant: Vec::with_capacity(horizon),
            cumulative: Vec::with_capacity(horizon),
        })
    }

    /// Record the true mean of the item chosen at the next step.
    pub fn record(&mut self, chosen_true_mean: f64) {
        let t = self.instant.len();
        assert!(t < self.allocation.len(), "ledger horizon exhausted");
        let instant = self.allocation[t] - chosen_true_mean;
        let prev = self.cumulative.last().copied().unwrap_or(0.0);
        self.instant.push(instant);
        self.cumulative.push(prev + instant);
    }

    pub fn horizon(&self) -> usize {
        self.allocation.len()
    }

    pub fn recorded_steps(&self) -> usize {
        self.instant.len()
    }

    pub fn oracle_value(&self) -> f64 {
        self.oracle_value
    }

    pub fn instant(&self) -> &[f64] {
        &self.instant
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Final cumulative regret; zero for an empty horizon.
    pub fn final_regret(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}
