//! Fixtures shared by the criterion benches.

use std::sync::Arc;

use gpsup_core::sim::{CirculantPlan, CirculantSampler};
use gpsup_core::CovarianceModel;

/// Covariance families exercised by the sampler benches.
pub fn models() -> Vec<(&'static str, CovarianceModel)> {
    vec![
        ("ou", CovarianceModel::stable_exp(1.0, 1.0).unwrap()),
        ("alpha-1.5", CovarianceModel::stable_exp(1.5, 1.0).unwrap()),
        ("gaussian", CovarianceModel::stable_exp(2.0, 1.0).unwrap()),
    ]
}

pub fn circulant_sampler(model: &CovarianceModel, step: f64, n_points: usize) -> CirculantSampler {
    CirculantSampler::new(Arc::new(CirculantPlan::for_model(model, step, n_points).unwrap()))
}
