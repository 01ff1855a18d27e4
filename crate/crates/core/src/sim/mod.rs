//! Exact-in-law simulation of stationary Gaussian paths and fractional
//! Brownian motion on uniform grids.

mod circulant;
mod fbm;
mod markov;

use rand::RngCore;

pub use circulant::{
    plan_embedding, CirculantPlan, CirculantSampler, EmbeddingRecord, CLIP_TOLERANCE,
    MAX_CIRCULANT_SIZE,
};
pub use fbm::{fgn_autocovariance, sample_fbm, FbmSampler};
pub use markov::MarkovSampler;

use crate::covmodel::CovarianceModel;
use crate::error::{Error, Result};

/// Uniform grid `0, step, ..., step * (n_points - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    step: f64,
    n_points: usize,
}

impl GridSpec {
    pub fn new(step: f64, n_points: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::invalid("grid.step", format!("{step} is not positive")));
        }
        if n_points < 2 {
            return Err(Error::invalid("grid.n_points", "need at least two points"));
        }
        Ok(GridSpec { step, n_points })
    }

    /// Grid with the given step covering `[0, span]` (the last point may fall short of `span`).
    pub fn covering(step: f64, span: f64) -> Result<Self> {
        let n = (span / step + 1e-9).floor() as usize + 1;
        GridSpec::new(step, n.max(2))
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn duration(&self) -> f64 {
        self.step * (self.n_points - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.step * k as f64
    }
}

/// A simulated path on a grid together with its running maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub running_max: f64,
}

impl PathSample {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_points());
        let running_max = max_of(&values);
        PathSample {
            grid,
            values,
            running_max,
        }
    }

    /// Writes `t,x` rows.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x"])?;
        for (k, x) in self.values.iter().enumerate() {
            w.write_record([self.grid.time(k).to_string(), x.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// One exact draw of the stationary path on `grid`, using circulant embedding.
pub fn sample_path<R: RngCore + ?Sized>(
    model: &CovarianceModel,
    grid: GridSpec,
    rng: &mut R,
) -> Result<PathSample> {
    let plan = CirculantPlan::for_model(model, grid.step(), grid.n_points())?;
    let mut sampler = CirculantSampler::new(std::sync::Arc::new(plan));
    let (a, _) = sampler.sample_pair(rng, grid.n_points());
    Ok(PathSample::new(grid, a.to_vec()))
}
