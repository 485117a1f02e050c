//! Gibbs sampler for the low-rank matrix model `Y = U V^T + noise`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{cholesky_with_jitter, PosteriorSampleSet};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct GibbsConfig {
    /// Sweeps discarded before collecting samples.
    pub burn_in: usize,
    /// Sweeps between consecutive collected samples.
    pub thinning: usize,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self {
            burn_in: 100,
            thinning: 1,
        }
    }
}

/// Markov chain over the factor pair `(U, V)` given observed cells.
///
/// Entries of both factors carry independent `N(0, prior_sd^2)` priors, and
/// each observed cell adds a Gaussian likelihood with scale `noise_sd`. The
/// conditional of one row of `U` given `V` (and vice versa) is an
/// `rank`-dimensional Gaussian, so a sweep resamples every row of both
/// factors in closed form. Burn-in sweeps anneal the noise scale down to the
/// model's value to avoid trapping the chain far from the data (see
/// [`Self::sample_set`]). The chain state persists across calls; each
/// `sample_set` call re-runs burn-in from the current state.
#[derive(Clone, Debug)]
pub struct LowRankGibbsState {
    factor_u: DMatrix<f64>,
    factor_v: DMatrix<f64>,
    prior_sd: f64,
    noise_sd: f64,
    config: GibbsConfig,
    /// Observed `(row, col, value)` triples.
    observations: Vec<(usize, usize, f64)>,
}

impl LowRankGibbsState {
    pub fn new<R: Rng>(
        rows: usize,
        cols: usize,
        rank: usize,
        prior_sd: f64,
        noise_sd: f64,
        config: GibbsConfig,
        rng: &mut R,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyPool);
        }
        if rank == 0 || rank > rows.min(cols) {
            return Err(Error::OutOfRange {
                what: "rank",
                range: "1..=min(rows, cols)",
                value: rank as f64,
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
        if config.thinning == 0 {
            return Err(Error::OutOfRange {
                what: "thinning",
                range: "positive",
                value: 0.0,
            });
        }
        let init = |r: &mut R, n: usize| {
            DMatrix::from_fn(n, rank, |_, _| {
                let z: f64 = StandardNormal.sample(r);
                prior_sd * z
            })
        };
        let factor_u = init(rng, rows);
        let factor_v = init(rng, cols);
        Ok(Self {
            factor_u,
            factor_v,
            prior_sd,
            noise_sd,
            config,
            observations: Vec::new(),
        })
    }

    pub fn rows(&self) -> usize {
        self.factor_u.nrows()
    }

    pub fn cols(&self) -> usize {
        self.factor_v.nrows()
    }

    pub fn rank(&self) -> usize {
        self.factor_u.ncols()
    }

    pub fn observation_count(&self) -> usize {
        self.observations.len()
    }

    pub fn observe(&mut self, row: usize, col: usize, value: f64) -> Result<()> {
        if row >= self.rows() {
            return Err(Error::IndexOutOfRange {
                index: row,
                len: self.rows(),
            });
        }
        if col >= self.cols() {
            return Err(Error::IndexOutOfRange {
                index: col,
                len: self.cols(),
            });
        }
        if !value.is_finite() {
            return Err(Error::NonFinite("observation"));
        }
        self.observations.push((row, col, value));
        Ok(())
    }

    /// Resample one factor row from its Gaussian conditional.
    ///
    /// `others` holds `(other_row, value)` pairs: the paired factor's row
    /// index and the observed cell value.
    fn resample_row<R: Rng>(
        target: &mut DMatrix<f64>,
        index: usize,
        paired: &DMatrix<f64>,
        others: &[(usize, f64)],
        prior_sd: f64,
        noise_sd: f64,
        rng: &mut R,
    ) -> Result<()> {
        let rank = target.ncols();
        let noise_var = noise_sd * noise_sd;
        let mut precision = DMatrix::identity(rank, rank) / (prior_sd * prior_sd);
        let mut moment = DVector::zeros(rank);
        for &(other, value) in others {
            let w = paired.row(other).transpose();
            precision += &w * w.transpose() / noise_var;
            moment += w * (value / noise_var);
        }
        let chol = cholesky_with_jitter(&precision, "Gibbs row conditional")?;
        let mean = chol.solve(&moment);
        // `precision^{-1} l z` has covariance `precision^{-1}` when
        // `l` is the Cholesky factor of `precision`.
        let z = DVector::from_fn(rank, |_, _| StandardNormal.sample(rng));
        let draw = mean + chol.solve(&(chol.l() * z));
        target.row_mut(index).copy_from(&draw.transpose());
        Ok(())
    }

    /// One full sweep at the model's noise scale: every row of `U`, then
    /// every row of `V`.
    pub fn sweep<R: Rng>(&mut self, rng: &mut R) -> Result<()> {
        self.sweep_with_noise(self.noise_sd, rng)
    }

    fn sweep_with_noise<R: Rng>(&mut self, noise_sd: f64, rng: &mut R) -> Result<()> {
        for i in 0..self.rows() {
            let others: Vec<(usize, f64)> = self
                .observations
                .iter()
                .filter(|&&(r, _, _)| r == i)
                .map(|&(_, c, y)| (c, y))
                .collect();
            Self::resample_row(
                &mut self.factor_u,
                i,
                &self.factor_v,
                &others,
                self.prior_sd,
                noise_sd,
                rng,
            )?;
        }
        for j in 0..self.cols() {
            let others: Vec<(usize, f64)> = self
                .observations
                .iter()
                .filter(|&&(_, c, _)| c == j)
                .map(|&(r, _, y)| (r, y))
                .collect();
            Self::resample_row(
                &mut self.factor_v,
                j,
                &self.factor_u,
                &others,
                self.prior_sd,
                noise_sd,
                rng,
            )?;
        }
        Ok(())
    }

    /// Burn in from the current chain state, then collect `m` draws of the
    /// listed cells' means, one sweep block per draw.
    pub fn sample_set<R: Rng>(
        &mut self,
        cells: &[(usize, usize)],
        m: usize,
        rng: &mut R,
    ) -> Result<PosteriorSampleSet> {
        if cells.is_empty() {
            return Err(Error::EmptyPool);
        }
        if m == 0 {
            return Err(Error::EmptySampleSet);
        }
        for &(r, c) in cells {
            if r >= self.rows() {
                return Err(Error::IndexOutOfRange {
                    index: r,
                    len: self.rows(),
                });
            }
            if c >= self.cols() {
                return Err(Error::IndexOutOfRange {
                    index: c,
                    len: self.cols(),
                });
            }
        }
        // Anneal the noise scale geometrically across burn-in. Tight noise
        // makes the conditionals so narrow that a badly scaled random start
        // can lock the chain into a low-posterior configuration (one factor
        // row blows up, pinning its partners near zero); starting the
        // burn-in at the prior's own cell scale and shrinking toward the
        // model noise walks the state into the fitting mode first. Collected
        // draws always use the exact conditionals at the model noise.
        let burn = self.config.burn_in;
        if burn > 0 {
            let cell_scale = self.prior_sd * self.prior_sd * (self.rank() as f64).sqrt();
            let start = self.noise_sd.max(cell_scale);
            let ratio = start / self.noise_sd;
            for k in 0..burn {
                let remaining = (burn - 1 - k) as f64 / (burn.max(2) - 1) as f64;
                let noise = self.noise_sd * ratio.powf(remaining);
                self.sweep_with_noise(noise, rng)?;
            }
        }
        let mut rows = Vec::with_capacity(m);
        for _ in 0..m {
            for _ in 0..self.config.thinning {
                self.sweep(rng)?;
            }
            let row: Vec<f64> = cells
                .iter()
                .map(|&(r, c)| self.factor_u.row(r).dot(&self.factor_v.row(c)))
                .collect();
            rows.push(row);
        }
        PosteriorSampleSet::from_rows(rows)
    }
}
