//! Slow, obviously-correct reference implementations.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

/// Covariance matrix `r((i - j) step)` on `n` points.
pub fn covariance_matrix(n: usize, r: impl Fn(f64) -> f64, step: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| r((i as f64 - j as f64).abs() * step))
}

/// Lower Cholesky factor.
pub fn cholesky(cov: &DMatrix<f64>) -> DMatrix<f64> {
    cov.clone().cholesky().expect("covariance is positive definite").l()
}

/// Eigenvalues of the symmetric circulant with first row `row` by the
/// defining sum, no FFT.
pub fn naive_circulant_eigenvalues(row: &[f64]) -> Vec<f64> {
    let m = row.len();
    (0..m)
        .map(|j| {
            row.iter()
                .enumerate()
                .map(|(k, &c)| c * (2.0 * PI * ((j * k) % m) as f64 / m as f64).cos())
                .sum()
        })
        .collect()
}

/// First row of the minimal circulant embedding of `r` at size `m`.
pub fn circulant_row(m: usize, r: impl Fn(f64) -> f64, step: f64) -> Vec<f64> {
    (0..m).map(|k| r(k.min(m - k) as f64 * step)).collect()
}

/// Real factor `B` (`m x 2m`) with `B B^T = C` for the circulant `C`:
/// column pairs are `sqrt(lambda_j / m) (cos, sin)(2 pi j k / m)`, the same
/// linear map of `(re_0, im_0, re_1, im_1, ...)` noise as the FFT sampler
/// (real part of the output).
pub fn circulant_factor(eigenvalues: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let m = eigenvalues.len();
    let mut re = DMatrix::zeros(m, 2 * m);
    let mut im = DMatrix::zeros(m, 2 * m);
    for j in 0..m {
        let s = (eigenvalues[j].max(0.0) / m as f64).sqrt();
        for k in 0..m {
            let theta = -2.0 * PI * ((j * k) % m) as f64 / m as f64;
            let (sn, cs) = theta.sin_cos();
            // (a + i b)(cos + i sin)
            re[(k, 2 * j)] = s * cs;
            re[(k, 2 * j + 1)] = -s * sn;
            im[(k, 2 * j)] = s * sn;
            im[(k, 2 * j + 1)] = s * cs;
        }
    }
    (re, im)
}

pub fn apply(b: &DMatrix<f64>, noise: &[f64], n: usize) -> Vec<f64> {
    let x = b * DVector::from_column_slice(noise);
    x.iter().take(n).copied().collect()
}
