//! Extremes of stationary Gaussian processes over random horizons.
//!
//! Covariance models, exact grid samplers, Pickands constant estimation,
//! closed-form tail asymptotics and a Monte Carlo engine to check them.

pub mod asymptotics;
pub mod covmodel;
pub mod error;
pub mod horizon;
pub mod mc;
pub mod pickands;
pub mod quadrature;
pub mod rng;
pub mod sim;
pub mod special;
pub mod stats;

pub use asymptotics::{AsymptoticResult, Formula, ResultRegime};
pub use covmodel::{AssumptionReport, CovTable, CovarianceModel, Family, Verdict};
pub use error::{Error, ErrorKind, Result};
pub use pickands::{ExtrapolationPolicy, PickandsCache, PickandsEstimate, PickandsResult};
pub use horizon::{HorizonDistribution, HorizonDraw, HorizonKind, Regime, TailTable};
pub use mc::{Crossing, GridPolicy, Lemma43Row, McEstimate, McSettings, SweepRow};
pub use sim::{GridSpec, PathSample};
