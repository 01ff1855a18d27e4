//! Closed-form tail asymptotics of `sup_{[0,T]} X` for each heaviness regime
//! of the horizon, all evaluated in log space.
//!
//! The central quantity is the critical scale
//! `m(u) = [C^{1/alpha} H_alpha u^{2/alpha} Psi(u)]^{-1}`: an interval of
//! length `x m(u)` is crossed at level `u` with probability about `1 - e^{-x}`.

use std::f64::consts::PI;
use std::fmt;

use crate::covmodel::CovarianceModel;
use crate::error::{Error, Result};
use crate::horizon::{HorizonDistribution, HorizonKind, Regime};
use crate::special::{ln_gamma, ln_psi};

pub use crate::special::{psi, psi_asymptotic};

/// Which regime a result belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResultRegime {
    FixedInterval,
    Horizon(Regime),
}

impl fmt::Display for ResultRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResultRegime::FixedInterval => f.write_str("fixed"),
            ResultRegime::Horizon(r) => r.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    /// `T_len C^{1/alpha} H u^{2/alpha} Psi(u)` for a fixed interval.
    Pickands,
    /// `E T C^{1/alpha} H u^{2/alpha} Psi(u)`.
    IntegrableHorizon,
    /// Gamma(1-lambda) H^lambda C^{lambda/alpha} (2 pi)^{-lambda/2} L(.) u^{lambda(2-alpha)/alpha} e^{-lambda u^2/2}.
    RegularlyVarying,
    /// `Gamma(1-lambda) P(T > m(u))`.
    RegularlyVaryingScaleForm,
    /// `L(u^{(alpha-2)/alpha} e^{u^2/2})`.
    SlowlyVarying,
    /// `P(T > m(u))`.
    SlowlyVaryingScaleForm,
}

impl Formula {
    pub fn tag(self) -> &'static str {
        match self {
            Formula::Pickands => "pickands",
            Formula::IntegrableHorizon => "integrable",
            Formula::RegularlyVarying => "regularly-varying",
            Formula::RegularlyVaryingScaleForm => "regularly-varying-scale-form",
            Formula::SlowlyVarying => "slowly-varying",
            Formula::SlowlyVaryingScaleForm => "slowly-varying-scale-form",
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A closed-form approximation of `P(sup_{[0,T]} X > u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticResult {
    pub value: f64,
    pub ln_value: f64,
    pub regime: ResultRegime,
    pub formula: Formula,
    /// The same asymptotics written through `m(u)`, where one exists.
    pub scale_form: Option<f64>,
    pub ln_scale_form: Option<f64>,
    pub u: f64,
    pub alpha: f64,
    pub c_coef: f64,
    pub h_alpha: f64,
    pub horizon: String,
}

impl AsymptoticResult {
    /// `scale_form / value`, or `None` without a scale form.
    pub fn form_ratio(&self) -> Option<f64> {
        self.ln_scale_form.map(|l| (l - self.ln_value).exp())
    }
}

fn check_inputs(u: f64, h_alpha: f64) -> Result<()> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::invalid("u", format!("{u} must be positive")));
    }
    if !(h_alpha > 0.0 && h_alpha.is_finite()) {
        return Err(Error::invalid("h_alpha", format!("{h_alpha} must be positive")));
    }
    Ok(())
}

/// `ln(C^{1/alpha} H u^{2/alpha} Psi(u)) = -ln m(u)`.
fn ln_unit_rate(u: f64, model: &CovarianceModel, h_alpha: f64) -> f64 {
    let a = model.alpha();
    model.c_coef().ln() / a + h_alpha.ln() + 2.0 / a * u.ln() + ln_psi(u)
}

/// `ln m(u)`.
pub fn ln_m_scale(u: f64, model: &CovarianceModel, h_alpha: f64) -> Result<f64> {
    check_inputs(u, h_alpha)?;
    Ok(-ln_unit_rate(u, model, h_alpha))
}

/// Critical horizon scale `m(u) = [C^{1/alpha} H_alpha u^{2/alpha} Psi(u)]^{-1}`
/// (infinite once it overflows; use [`ln_m_scale`] there).
pub fn m_scale(u: f64, model: &CovarianceModel, h_alpha: f64) -> Result<f64> {
    ln_m_scale(u, model, h_alpha).map(f64::exp)
}

fn result(
    ln_value: f64,
    ln_scale_form: Option<f64>,
    regime: ResultRegime,
    formula: Formula,
    u: f64,
    model: &CovarianceModel,
    h_alpha: f64,
    horizon: String,
) -> AsymptoticResult {
    AsymptoticResult {
        value: ln_value.exp(),
        ln_value,
        regime,
        formula,
        scale_form: ln_scale_form.map(f64::exp),
        ln_scale_form,
        u,
        alpha: model.alpha(),
        c_coef: model.c_coef(),
        h_alpha,
        horizon,
    }
}

/// Crossing probability of a fixed interval of length `t_len`: `t_len / m(u)`.
pub fn fixed_interval(u: f64, model: &CovarianceModel, t_len: f64, h_alpha: f64) -> Result<AsymptoticResult> {
    check_inputs(u, h_alpha)?;
    if !(t_len > 0.0 && t_len.is_finite()) {
        return Err(Error::invalid("t_len", format!("{t_len} must be positive")));
    }
    Ok(result(
        t_len.ln() + ln_unit_rate(u, model, h_alpha),
        None,
        ResultRegime::FixedInterval,
        Formula::Pickands,
        u,
        model,
        h_alpha,
        format!("deterministic(t0={t_len})"),
    ))
}

/// Integrable horizon with mean `mean_t`: `E T C^{1/alpha} H u^{2/alpha} Psi(u)`.
pub fn integrable_horizon_mean(u: f64, model: &CovarianceModel, mean_t: f64, h_alpha: f64) -> Result<AsymptoticResult> {
    check_inputs(u, h_alpha)?;
    if !(mean_t >= 0.0 && mean_t.is_finite()) {
        return Err(Error::invalid("mean_t", format!("{mean_t} must be finite and nonnegative")));
    }
    Ok(result(
        mean_t.ln() + ln_unit_rate(u, model, h_alpha),
        None,
        ResultRegime::Horizon(Regime::D1),
        Formula::IntegrableHorizon,
        u,
        model,
        h_alpha,
        format!("mean={mean_t}"),
    ))
}

pub fn integrable_horizon(
    u: f64,
    model: &CovarianceModel,
    horizon: &HorizonDistribution,
    h_alpha: f64,
) -> Result<AsymptoticResult> {
    if horizon.regime() != Regime::D1 {
        return Err(Error::Regime(format!(
            "integrable-horizon asymptotics need a D1 horizon, got {} ({})",
            horizon.regime(),
            horizon.label()
        )));
    }
    let mut r = integrable_horizon_mean(u, model, horizon.mean(), h_alpha)?;
    r.horizon = horizon.label();
    Ok(r)
}

/// `ln` of the regularly varying argument `u^{(alpha-2)/alpha} e^{u^2/2}`.
fn ln_horizon_argument(u: f64, alpha: f64) -> f64 {
    (alpha - 2.0) / alpha * u.ln() + 0.5 * u * u
}

/// `ln L` at the horizon argument, or an error naming the level when the
/// argument falls below the horizon support.
fn ln_slowly_varying_at_level(horizon: &HorizonDistribution, u: f64, alpha: f64) -> Result<f64> {
    let ln_arg = ln_horizon_argument(u, alpha);
    horizon.ln_slowly_varying_at_log(ln_arg).map_err(|e| match e {
        Error::InvalidParameter { .. } => Error::invalid(
            "u",
            format!(
                "level {u} is too low: the horizon argument e^{ln_arg} lies below the support of {}",
                horizon.label()
            ),
        ),
        other => other,
    })
}

/// Regularly varying horizon (index `lambda` in (0, 1)), with the scale form
/// `Gamma(1 - lambda) P(T > m(u))` alongside.
pub fn regularly_varying_horizon(
    u: f64,
    model: &CovarianceModel,
    horizon: &HorizonDistribution,
    h_alpha: f64,
) -> Result<AsymptoticResult> {
    check_inputs(u, h_alpha)?;
    let lambda = match (horizon.regime(), horizon.lambda_tail()) {
        (Regime::D2, Some(l)) if l > 0.0 && l < 1.0 => l,
        (Regime::D2, l) => return Err(Error::Regime(format!("D2 needs an index in (0, 1), got {l:?}"))),
        (r, _) => {
            return Err(Error::Regime(format!(
                "regularly varying asymptotics need a D2 horizon, got {r} ({})",
                horizon.label()
            )))
        }
    };
    let a = model.alpha();
    let ln_gamma_factor = ln_gamma(1.0 - lambda);
    let ln_value = ln_gamma_factor + lambda * h_alpha.ln() + lambda / a * model.c_coef().ln()
        - 0.5 * lambda * (2.0 * PI).ln()
        + ln_slowly_varying_at_level(horizon, u, a)?
        + lambda * (2.0 - a) / a * u.ln()
        - 0.5 * lambda * u * u;
    let ln_scale = ln_gamma_factor + horizon.ln_tail_at_log(ln_m_scale(u, model, h_alpha)?);
    Ok(result(
        ln_value,
        Some(ln_scale),
        ResultRegime::Horizon(Regime::D2),
        Formula::RegularlyVarying,
        u,
        model,
        h_alpha,
        horizon.label(),
    ))
}

/// Slowly varying horizon: `L(u^{(alpha-2)/alpha} e^{u^2/2})`, with the scale
/// form `P(T > m(u))` alongside.
pub fn slowly_varying_horizon(
    u: f64,
    model: &CovarianceModel,
    horizon: &HorizonDistribution,
    h_alpha: f64,
) -> Result<AsymptoticResult> {
    check_inputs(u, h_alpha)?;
    if horizon.regime() != Regime::D3 {
        return Err(Error::Regime(format!(
            "slowly varying asymptotics need a D3 horizon, got {} ({})",
            horizon.regime(),
            horizon.label()
        )));
    }
    let ln_value = ln_slowly_varying_at_level(horizon, u, model.alpha())?;
    let ln_scale = horizon.ln_tail_at_log(ln_m_scale(u, model, h_alpha)?);
    Ok(result(
        ln_value,
        Some(ln_scale),
        ResultRegime::Horizon(Regime::D3),
        Formula::SlowlyVarying,
        u,
        model,
        h_alpha,
        horizon.label(),
    ))
}

/// Routes to the formula matching the horizon: fixed interval for a
/// deterministic horizon, then by regime.
pub fn dispatch(
    u: f64,
    model: &CovarianceModel,
    horizon: &HorizonDistribution,
    h_alpha: f64,
) -> Result<AsymptoticResult> {
    match (horizon.kind(), horizon.regime()) {
        (HorizonKind::Deterministic { t0 }, _) => fixed_interval(u, model, *t0, h_alpha),
        (_, Regime::D1) => integrable_horizon(u, model, horizon, h_alpha),
        (_, Regime::D2) => regularly_varying_horizon(u, model, horizon, h_alpha),
        (_, Regime::D3) => slowly_varying_horizon(u, model, horizon, h_alpha),
    }
}
