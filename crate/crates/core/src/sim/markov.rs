use rand::RngCore;

use crate::covmodel::CovarianceModel;
use crate::error::{Error, Result};
use crate::rng::{open_uniform, standard_normal};

/// Exact grid sampler for the exponential (Ornstein-Uhlenbeck) covariance:
/// `X_0 = Z_0`, `X_{k+1} = rho X_k + sqrt(1 - rho^2) Z_{k+1}` with `rho = exp(-C step)`.
///
/// Linear in the path length and able to stop at the first exceedance.
#[derive(Debug, Clone, Copy)]
pub struct MarkovSampler {
    rho: f64,
    innovation: f64,
}

impl MarkovSampler {
    pub fn new(model: &CovarianceModel, step: f64) -> Result<Self> {
        if !model.is_markov() {
            return Err(Error::invalid(
                "sampler",
                format!("{} is not an exponential covariance", model.label()),
            ));
        }
        let rho = model.evaluate(step)?;
        Ok(MarkovSampler {
            rho,
            innovation: (1.0 - rho * rho).sqrt(),
        })
    }

    pub fn fill<R: RngCore + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let mut x = 0.0;
        for (k, v) in out.iter_mut().enumerate() {
            let z = standard_normal(rng);
            x = if k == 0 { z } else { self.rho * x + self.innovation * z };
            *v = x;
        }
    }

    /// Index of the first grid value strictly above `u` among the first `n_points`.
    pub fn first_exceedance<R: RngCore + ?Sized>(&self, rng: &mut R, n_points: usize, u: f64) -> Option<usize> {
        if n_points == 0 {
            return None;
        }
        let mut x = standard_normal(rng);
        if x > u {
            return Some(0);
        }
        for k in 1..n_points {
            x = self.rho * x + self.innovation * standard_normal(rng);
            if x > u {
                return Some(k);
            }
        }
        None
    }

    /// Like [`first_exceedance`](Self::first_exceedance), but also detects
    /// crossings between grid points: given consecutive values `x, y <= u`
    /// the path is taken to cross with the Brownian-bridge probability
    /// `exp(-2 (u - x)(u - y) / (1 - rho^2))`. A crossing inside
    /// `(k - 1, k)` reports index `k`.
    pub fn first_crossing<R: RngCore + ?Sized>(&self, rng: &mut R, n_points: usize, u: f64) -> Option<usize> {
        if n_points == 0 {
            return None;
        }
        let mut x = standard_normal(rng);
        if x > u {
            return Some(0);
        }
        let inv_var = 2.0 / (self.innovation * self.innovation);
        for k in 1..n_points {
            let y = self.rho * x + self.innovation * standard_normal(rng);
            if y > u {
                return Some(k);
            }
            let e = (u - x) * (u - y) * inv_var;
            if e < BRIDGE_CUTOFF && open_uniform(rng) < (-e).exp() {
                return Some(k);
            }
            x = y;
        }
        None
    }
}

/// Bridge crossings with probability below `exp(-40)` are ignored.
const BRIDGE_CUTOFF: f64 = 40.0;
