//! Independent per-node Gaussian beliefs for graph-feedback environments.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::PosteriorSampleSet;
use crate::error::{Error, Result};

/// One Gaussian belief per node, updated by precision accumulation.
///
/// A noiseless observation collapses the node to a point mass, represented
/// by infinite precision; later noisy observations cannot widen it again.
#[derive(Clone, Debug)]
pub struct NodeGaussianBeliefs {
    means: Vec<f64>,
    precisions: Vec<f64>,
}

impl NodeGaussianBeliefs {
    pub fn new(nodes: usize, prior_mean: f64, prior_sd: f64) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::EmptyPool);
        }
        if !prior_mean.is_finite() {
            return Err(Error::NonFinite("prior mean"));
        }
        if !(prior_sd > 0.0 && prior_sd.is_finite()) {
            return Err(Error::OutOfRange {
                what: "prior standard deviation",
                range: "positive finite",
                value: prior_sd,
            });
        }
        Ok(Self {
            means: vec![prior_mean; nodes],
            precisions: vec![1.0 / (prior_sd * prior_sd); nodes],
        })
    }

    pub fn node_count(&self) -> usize {
        self.means.len()
    }

    pub fn mean(&self, node: usize) -> Result<f64> {
        self.check(node)?;
        Ok(self.means[node])
    }

    /// Posterior standard deviation; zero for collapsed nodes.
    pub fn sd(&self, node: usize) -> Result<f64> {
        self.check(node)?;
        if self.precisions[node].is_infinite() {
            return Ok(0.0);
        }
        Ok((1.0 / self.precisions[node]).sqrt())
    }

    fn check(&self, node: usize) -> Result<()> {
        if node >= self.means.len() {
            return Err(Error::IndexOutOfRange {
                index: node,
                len: self.means.len(),
            });
        }
        Ok(())
    }

    /// Fold in one observation of `node` with the given noise scale.
    /// `noise_sd == 0` collapses the belief to a point mass at `value`.
    pub fn observe(&mut self, node: usize, value: f64, noise_sd: f64) -> Result<()> {
        self.check(node)?;
        if !value.is_finite() {
            return Err(Error::NonFinite("observation"));
        }
        if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
            return Err(Error::OutOfRange {
                what: "noise standard deviation",
                range: "nonnegative finite",
                value: noise_sd,
            });
        }
        if noise_sd == 0.0 {
            self.means[node] = value;
            self.precisions[node] = f64::INFINITY;
            return Ok(());
        }
        if self.precisions[node].is_infinite() {
            // Point mass already established; noisy evidence cannot move it.
            return Ok(());
        }
        let obs_precision = 1.0 / (noise_sd * noise_sd);
        let total = self.precisions[node] + obs_precision;
        self.means[node] =
            (self.precisions[node] * self.means[node] + obs_precision * value) / total;
        self.precisions[node] = total;
        Ok(())
    }

    /// Sample set over the listed nodes, columns in the given order.
    pub fn sample_set<R: Rng>(
        &self,
        nodes: &[usize],
        m: usize,
        rng: &mut R,
    ) -> Result<PosteriorSampleSet> {
        if nodes.is_empty() {
            return Err(Error::EmptyPool);
        }
        if m == 0 {
            return Err(Error::EmptySampleSet);
        }
        for &node in nodes {
            self.check(node)?;
        }
        let sds: Vec<f64> = nodes.iter().map(|&n| self.sd(n).unwrap()).collect();
        let rows = (0..m)
            .map(|_| {
                nodes
                    .iter()
                    .zip(&sds)
                    .map(|(&n, &sd)| {
                        let z: f64 = StandardNormal.sample(rng);
                        self.means[n] + sd * z
                    })
                    .collect()
            })
            .collect();
        PosteriorSampleSet::from_rows(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use approx::assert_relative_eq;

    #[test]
    fn precision_accumulates_across_observations() {
        let mut beliefs = NodeGaussianBeliefs::new(3, 0.0, 1.0).unwrap();
        beliefs.observe(1, 2.0, 1.0).unwrap();
        // Prior N(0,1) plus one unit-noise observation of 2.0: N(1.0, 0.5).
        assert_relative_eq!(beliefs.mean(1).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(beliefs.sd(1).unwrap(), 0.5f64.sqrt(), epsilon = 1e-12);
        beliefs.observe(1, 2.0, 1.0).unwrap();
        assert_relative_eq!(beliefs.mean(1).unwrap(), 4.0 / 3.0, epsilon = 1e-12);
        // Untouched node keeps its prior.
        assert_relative_eq!(beliefs.sd(0).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn noiseless_observation_collapses_node() {
        let mut beliefs = NodeGaussianBeliefs::new(2, 0.0, 1.0).unwrap();
        beliefs.observe(0, 0.7, 0.0).unwrap();
        assert_eq!(beliefs.mean(0).unwrap(), 0.7);
        assert_eq!(beliefs.sd(0).unwrap(), 0.0);
        // Later noisy evidence cannot widen a point mass.
        beliefs.observe(0, -5.0, 1.0).unwrap();
        assert_eq!(beliefs.mean(0).unwrap(), 0.7);
        assert_eq!(beliefs.sd(0).unwrap(), 0.0);
    }

    #[test]
    fn sample_set_respects_collapsed_nodes() {
        let mut rng = substream(93, &[5]);
        let mut beliefs = NodeGaussianBeliefs::new(4, 0.0, 1.0).unwrap();
        beliefs.observe(2, 0.42, 0.0).unwrap();
        let set = beliefs.sample_set(&[2, 0], 16, &mut rng).unwrap();
        for s in 0..16 {
            assert_eq!(set.value(s, 0), 0.42);
        }
        // The prior column should actually vary.
        let spread = (0..16)
            .map(|s| set.value(s, 1))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        assert!(spread.1 - spread.0 > 1e-3);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(NodeGaussianBeliefs::new(0, 0.0, 1.0).is_err());
        assert!(NodeGaussianBeliefs::new(2, f64::NAN, 1.0).is_err());
        assert!(NodeGaussianBeliefs::new(2, 0.0, 0.0).is_err());
        let mut beliefs = NodeGaussianBeliefs::new(2, 0.0, 1.0).unwrap();
        assert!(beliefs.observe(5, 0.0, 1.0).is_err());
        assert!(beliefs.observe(0, f64::NAN, 1.0).is_err());
        assert!(beliefs.observe(0, 0.0, -1.0).is_err());
        assert!(beliefs.mean(9).is_err());
        let mut rng = substream(94, &[6]);
        assert!(beliefs.sample_set(&[], 4, &mut rng).is_err());
        assert!(beliefs.sample_set(&[0], 0, &mut rng).is_err());
        assert!(beliefs.sample_set(&[7], 4, &mut rng).is_err());
    }
}
