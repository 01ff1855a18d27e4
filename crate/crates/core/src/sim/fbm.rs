use std::sync::Arc;

use rand::RngCore;

use super::{CirculantPlan, CirculantSampler, GridSpec, PathSample};
use crate::error::{Error, Result};
use crate::rng::standard_normal;

/// Autocovariance of unit-step fractional Gaussian noise at integer lag `k`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

enum Inner {
    Embedded(CirculantSampler),
    /// Hurst 1: every increment is the same Gaussian, `B(t) = t N`.
    Line,
}

/// Fractional Brownian motion on a fixed grid: cumulated fractional Gaussian
/// noise from a circulant embedding.
pub struct FbmSampler {
    hurst: f64,
    grid: GridSpec,
    inner: Inner,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl FbmSampler {
    pub fn new(hurst: f64, grid: GridSpec) -> Result<Self> {
        if !(hurst > 0.0 && hurst <= 1.0) {
            return Err(Error::invalid("hurst", format!("{hurst} is outside (0, 1]")));
        }
        let inner = if hurst == 1.0 {
            Inner::Line
        } else {
            let var = grid.step().powf(2.0 * hurst);
            let plan = CirculantPlan::for_sequence(
                |k| Ok(var * fgn_autocovariance(hurst, k)),
                grid.n_points() - 1,
                &format!("fgn(hurst={hurst})"),
                grid.step(),
            )?;
            Inner::Embedded(CirculantSampler::new(Arc::new(plan)))
        };
        Ok(FbmSampler {
            hurst,
            grid,
            inner,
            a: Vec::with_capacity(grid.n_points()),
            b: Vec::with_capacity(grid.n_points()),
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Two independent paths, each starting at `B(0) = 0`.
    pub fn sample_pair<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> (&[f64], &[f64]) {
        let n = self.grid.n_points();
        self.a.clear();
        self.b.clear();
        match &mut self.inner {
            Inner::Line => {
                let (za, zb) = (standard_normal(rng), standard_normal(rng));
                for k in 0..n {
                    let t = self.grid.time(k);
                    self.a.push(t * za);
                    self.b.push(t * zb);
                }
            }
            Inner::Embedded(s) => {
                let (da, db) = s.sample_pair(rng, n - 1);
                cumulate(da, &mut self.a);
                cumulate(db, &mut self.b);
            }
        }
        (&self.a, &self.b)
    }
}

fn cumulate(increments: &[f64], out: &mut Vec<f64>) {
    let mut acc = 0.0;
    out.push(0.0);
    for &d in increments {
        acc += d;
        out.push(acc);
    }
}

/// One fractional Brownian motion path with Hurst index `hurst` on `grid`.
pub fn sample_fbm<R: RngCore + ?Sized>(hurst: f64, grid: GridSpec, rng: &mut R) -> Result<PathSample> {
    let mut s = FbmSampler::new(hurst, grid)?;
    let (a, _) = s.sample_pair(rng);
    Ok(PathSample::new(grid, a.to_vec()))
}
