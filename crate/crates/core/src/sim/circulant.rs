use std::sync::Arc;

use rand::RngCore;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::GridSpec;
use crate::covmodel::CovarianceModel;
use crate::error::{Error, Result};
use crate::rng::standard_normal;

/// Largest relative mass of negative eigenvalues that may be clipped to zero.
pub const CLIP_TOLERANCE: f64 = 1e-6;
/// Padding stops doubling the circulant beyond this size.
pub const MAX_CIRCULANT_SIZE: usize = 1 << 26;

/// Spectrum summary of one circulant embedding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingRecord {
    pub circulant_size: usize,
    pub min_eigenvalue: f64,
    /// Sum of `|negative eigenvalues|` over sum of `|eigenvalues|`.
    pub clipped_mass: f64,
}

impl EmbeddingRecord {
    pub fn is_exact(&self, tolerance: f64) -> bool {
        self.min_eigenvalue >= -tolerance
    }

    pub fn is_usable(&self) -> bool {
        self.clipped_mass <= CLIP_TOLERANCE
    }
}

/// Smallest power of two `>= 2 (n_points - 1)`, and at least 2.
fn minimal_size(n_points: usize) -> usize {
    (2 * n_points.saturating_sub(1)).max(2).next_power_of_two()
}

/// Embeds the covariance of `model` on `grid`, doubling the circulant until
/// the clipped negative mass is at most [`CLIP_TOLERANCE`].
pub fn plan_embedding(model: &CovarianceModel, grid: GridSpec) -> Result<EmbeddingRecord> {
    CirculantPlan::for_model(model, grid.step(), grid.n_points()).map(|p| p.record)
}

/// Square-root spectrum of a circulant embedding, ready for sampling.
pub struct CirculantPlan {
    record: EmbeddingRecord,
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantPlan")
            .field("record", &self.record)
            .finish_non_exhaustive()
    }
}

impl CirculantPlan {
    pub fn for_model(model: &CovarianceModel, step: f64, n_points: usize) -> Result<Self> {
        Self::for_model_from(model, step, n_points, minimal_size(n_points))
    }

    /// As [`for_model`](Self::for_model) but starting the padding search at
    /// `start_size` (a power of two).
    pub fn for_model_from(
        model: &CovarianceModel,
        step: f64,
        n_points: usize,
        start_size: usize,
    ) -> Result<Self> {
        Self::search(
            |k| model.evaluate(k as f64 * step),
            n_points,
            start_size.max(minimal_size(n_points)),
            MAX_CIRCULANT_SIZE,
            || (model.label(), step),
        )
    }

    /// Embedding of an arbitrary stationary covariance sequence `cov(lag)`.
    pub fn for_sequence<F>(cov: F, n_points: usize, label: &str, step: f64) -> Result<Self>
    where
        F: Fn(usize) -> Result<f64>,
    {
        Self::search(
            cov,
            n_points,
            minimal_size(n_points),
            MAX_CIRCULANT_SIZE,
            || (label.to_string(), step),
        )
    }

    fn search<F, L>(cov: F, n_points: usize, start: usize, max_size: usize, label: L) -> Result<Self>
    where
        F: Fn(usize) -> Result<f64>,
        L: Fn() -> (String, f64),
    {
        let mut size = start;
        loop {
            let plan = Self::at_size(&cov, size)?;
            if plan.record.is_usable() {
                return Ok(plan);
            }
            if size >= max_size {
                let (model, step) = label();
                return Err(Error::Embedding {
                    model,
                    n_points,
                    step,
                    circulant_size: size,
                    clipped_mass: plan.record.clipped_mass,
                });
            }
            size *= 2;
        }
    }

    /// Embedding at exactly `size` (a power of two), whatever its clipped mass.
    pub fn at_size<F>(cov: F, size: usize) -> Result<Self>
    where
        F: Fn(usize) -> Result<f64>,
    {
        debug_assert!(size.is_power_of_two() && size >= 2);
        let half = size / 2;
        let mut row = vec![Complex64::new(0.0, 0.0); size];
        for k in 0..=half {
            let c = cov(k)?;
            row[k].re = c;
            if k > 0 && k < half {
                row[size - k].re = c;
            }
        }
        let fft = FftPlanner::new().plan_fft_forward(size);
        fft.process(&mut row);

        let (mut neg, mut total, mut min) = (0.0, 0.0, f64::INFINITY);
        for z in &row {
            let l = z.re;
            min = min.min(l);
            total += l.abs();
            if l < 0.0 {
                neg -= l;
            }
        }
        let clipped_mass = if total > 0.0 { neg / total } else { 0.0 };
        let scale = row
            .iter()
            .map(|z| (z.re.max(0.0) / size as f64).sqrt())
            .collect();
        Ok(CirculantPlan {
            record: EmbeddingRecord {
                circulant_size: size,
                min_eigenvalue: min,
                clipped_mass,
            },
            scale,
            fft,
        })
    }

    pub fn record(&self) -> &EmbeddingRecord {
        &self.record
    }

    pub fn size(&self) -> usize {
        self.record.circulant_size
    }

    /// Number of leading grid points whose joint law the embedding reproduces.
    pub fn capacity(&self) -> usize {
        self.size() / 2 + 1
    }

    /// `sqrt(max(lambda_j, 0) / M)` for each eigenvalue.
    pub fn scale(&self) -> &[f64] {
        &self.scale
    }
}

/// Draws pairs of independent paths from one plan, reusing its buffers.
///
/// Both the real and imaginary parts of one transform are exact draws, so
/// each call yields two paths for the cost of one FFT.
pub struct CirculantSampler {
    plan: Arc<CirculantPlan>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl CirculantSampler {
    pub fn new(plan: Arc<CirculantPlan>) -> Self {
        let size = plan.size();
        let scratch = vec![Complex64::new(0.0, 0.0); plan.fft.get_inplace_scratch_len()];
        CirculantSampler {
            plan,
            buf: vec![Complex64::new(0.0, 0.0); size],
            scratch,
            re: Vec::new(),
            im: Vec::new(),
        }
    }

    pub fn plan(&self) -> &Arc<CirculantPlan> {
        &self.plan
    }

    /// Number of standard normals consumed per call.
    pub fn noise_len(&self) -> usize {
        2 * self.plan.size()
    }

    /// Two independent paths of `n_points` each. Noise is drawn as
    /// `(re_0, im_0, re_1, im_1, ...)`.
    pub fn sample_pair<R: RngCore + ?Sized>(&mut self, rng: &mut R, n_points: usize) -> (&[f64], &[f64]) {
        for (w, &s) in self.buf.iter_mut().zip(&self.plan.scale) {
            let a = standard_normal(rng);
            let b = standard_normal(rng);
            *w = Complex64::new(s * a, s * b);
        }
        self.transform(n_points)
    }

    /// Same map as [`sample_pair`](Self::sample_pair) applied to caller-supplied noise
    /// of length [`noise_len`](Self::noise_len).
    pub fn sample_pair_from_noise(&mut self, noise: &[f64], n_points: usize) -> (&[f64], &[f64]) {
        assert_eq!(noise.len(), self.noise_len());
        for ((w, &s), z) in self.buf.iter_mut().zip(&self.plan.scale).zip(noise.chunks_exact(2)) {
            *w = Complex64::new(s * z[0], s * z[1]);
        }
        self.transform(n_points)
    }

    fn transform(&mut self, n_points: usize) -> (&[f64], &[f64]) {
        assert!(
            n_points <= self.plan.capacity(),
            "{n_points} points exceed embedding capacity {}",
            self.plan.capacity()
        );
        self.plan.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        self.re.clear();
        self.im.clear();
        self.re.extend(self.buf[..n_points].iter().map(|z| z.re));
        self.im.extend(self.buf[..n_points].iter().map(|z| z.im));
        (&self.re, &self.im)
    }
}
