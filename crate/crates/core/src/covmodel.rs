//! Stationary covariance models `r(t)` with local behaviour `1 - C|t|^alpha`.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Default relative tolerance of the local-shape (A1) ratio screen.
pub const A1_TOLERANCE: f64 = 0.01;
/// `|r(t) ln t|` at the far end of the probe grid must fall below this.
pub const A3_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `r(t) = exp(-C |t|^alpha)`
    StableExp,
    /// `exp(-C |t|)`, the stable family at `alpha = 1`.
    OrnsteinUhlenbeck,
    /// Tabulated `r` with linear interpolation between knots.
    Custom(CovTable),
}

/// Knots `(t_i, r_i)` with `t_0 = 0`, `r_0 = 1` and strictly increasing `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovTable {
    t: Vec<f64>,
    r: Vec<f64>,
}

impl CovTable {
    pub fn new(t: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        if t.len() != r.len() || t.len() < 2 {
            return Err(Error::invalid(
                "model.table",
                "needs at least two (t, r) rows of equal length",
            ));
        }
        if t[0] != 0.0 || r[0] != 1.0 {
            return Err(Error::invalid("model.table", "first row must be (0, 1)"));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("model.table", "t must be strictly increasing"));
        }
        if r.iter().any(|v| !v.is_finite() || v.abs() > 1.0) {
            return Err(Error::invalid("model.table", "|r| must not exceed 1"));
        }
        Ok(CovTable { t, r })
    }

    /// Reads a two-column CSV `t,r`; a header row is optional.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let (t, r) = read_two_columns(path)?;
        CovTable::new(t, r)
    }

    pub fn t_max(&self) -> f64 {
        *self.t.last().unwrap()
    }

    fn interpolate(&self, t: f64) -> Result<f64> {
        let t_max = self.t_max();
        if t > t_max {
            return Err(Error::OutOfRange { t, lo: 0.0, hi: t_max });
        }
        let i = self.t.partition_point(|&k| k <= t);
        if i == self.t.len() {
            return Ok(*self.r.last().unwrap());
        }
        let (t0, t1) = (self.t[i - 1], self.t[i]);
        let w = (t - t0) / (t1 - t0);
        Ok(self.r[i - 1] + w * (self.r[i] - self.r[i - 1]))
    }
}

pub(crate) fn read_two_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(csv_err)?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        if record.len() < 2 {
            return Err(Error::Config(format!(
                "{}: row {} has fewer than two columns",
                path.display(),
                line + 1
            )));
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => {
                a.push(x);
                b.push(y);
            }
            // header
            _ if line == 0 => continue,
            _ => {
                return Err(Error::Config(format!(
                    "{}: row {} is not numeric",
                    path.display(),
                    line + 1
                )))
            }
        }
    }
    Ok((a, b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel {
    family: Family,
    alpha: f64,
    c_coef: f64,
}

impl CovarianceModel {
    pub fn stable_exp(alpha: f64, c_coef: f64) -> Result<Self> {
        Self::with_family(Family::StableExp, alpha, c_coef)
    }

    pub fn ornstein_uhlenbeck(c_coef: f64) -> Result<Self> {
        Self::with_family(Family::OrnsteinUhlenbeck, 1.0, c_coef)
    }

    /// Tabulated model; the declared `(alpha, C)` are trusted, only screened
    /// by [`CovarianceModel::check_assumptions`].
    pub fn custom(table: CovTable, alpha: f64, c_coef: f64) -> Result<Self> {
        Self::with_family(Family::Custom(table), alpha, c_coef)
    }

    fn with_family(family: Family, alpha: f64, c_coef: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::invalid("model.alpha", format!("{alpha} is outside (0, 2]")));
        }
        if !(c_coef > 0.0 && c_coef.is_finite()) {
            return Err(Error::invalid("model.c_coef", format!("{c_coef} is not positive")));
        }
        Ok(CovarianceModel {
            family,
            alpha,
            c_coef,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c_coef(&self) -> f64 {
        self.c_coef
    }

    /// `r(t)`; symmetric in `t`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        let t = t.abs();
        match &self.family {
            Family::StableExp | Family::OrnsteinUhlenbeck => {
                Ok((-self.c_coef * t.powf(self.alpha)).exp())
            }
            Family::Custom(table) => table.interpolate(t),
        }
    }

    /// `1 - r(t)`, without cancellation for the parametric families.
    pub fn one_minus_r(&self, t: f64) -> Result<f64> {
        match &self.family {
            Family::StableExp | Family::OrnsteinUhlenbeck => {
                Ok(-(-self.c_coef * t.abs().powf(self.alpha)).exp_m1())
            }
            Family::Custom(table) => Ok(1.0 - table.interpolate(t.abs())?),
        }
    }

    /// Largest lag at which [`evaluate`](Self::evaluate) succeeds.
    pub fn max_lag(&self) -> f64 {
        match &self.family {
            Family::Custom(table) => table.t_max(),
            _ => f64::INFINITY,
        }
    }

    /// The exponential covariance is Markov, so grid paths satisfy an exact AR(1) recursion.
    pub fn is_markov(&self) -> bool {
        matches!(self.family, Family::StableExp | Family::OrnsteinUhlenbeck) && self.alpha == 1.0
    }

    pub fn check_assumptions(&self, t_max: f64, n_probe: usize) -> Result<AssumptionReport> {
        self.check_assumptions_with(t_max, n_probe, A1_TOLERANCE)
    }

    /// Numerical screens for the local-shape (A1), strict-decorrelation (A2)
    /// and log-decay (A3) conditions on probe grids.
    ///
    /// These are necessary-condition screens: "consistent" is not a proof.
    pub fn check_assumptions_with(
        &self,
        t_max: f64,
        n_probe: usize,
        a1_tolerance: f64,
    ) -> Result<AssumptionReport> {
        if !(t_max > 1.0) {
            return Err(Error::invalid("t_max", "must exceed 1"));
        }
        if n_probe < 10 {
            return Err(Error::invalid("n_probe", "must be at least 10"));
        }
        let t_hi = t_max.min(self.max_lag());

        // A1: probe 1e-2 down to 1e-6, then keep halving the exponent scale
        // until the Taylor remainder C t^alpha is below the tolerance.
        let mut a1_ratios = Vec::new();
        let mut t: f64 = 1e-2;
        let shrink = 10f64.powf(-4.0 / (n_probe as f64 - 1.0).max(4.0));
        while t >= 1e-6 || (self.c_coef * t.powf(self.alpha) > a1_tolerance && t > 1e-15) {
            a1_ratios.push((t, self.one_minus_r(t)? / (self.c_coef * t.powf(self.alpha))));
            t *= shrink;
        }
        let a1_ok = {
            let last = a1_ratios.last().unwrap().1;
            let tail = &a1_ratios[a1_ratios.len() / 2..];
            let converging = tail
                .windows(2)
                .all(|w| (w[1].1 - 1.0).abs() <= (w[0].1 - 1.0).abs() + 1e-9);
            (last - 1.0).abs() <= a1_tolerance && converging
        };

        // A2: linear and geometric probes over (0, t_hi].
        let mut a2_probes: Vec<f64> = (1..=n_probe)
            .map(|k| t_hi * k as f64 / n_probe as f64)
            .collect();
        a2_probes.extend(geometric(1e-6, t_hi, n_probe));
        let mut a2_max = f64::NEG_INFINITY;
        let mut a2_at = 0.0;
        for &t in &a2_probes {
            let r = self.evaluate(t)?;
            if r > a2_max {
                a2_max = r;
                a2_at = t;
            }
        }
        let a2_ok = a2_max < 1.0;

        // A3: |r(t) ln t| on a geometric grid in [e, t_hi].
        let mut a3_values = Vec::new();
        let a3_ok = if t_hi > std::f64::consts::E {
            for t in geometric(std::f64::consts::E, t_hi, n_probe) {
                a3_values.push((t, (self.evaluate(t)? * t.ln()).abs()));
            }
            let last = a3_values.last().unwrap().1;
            let tail = &a3_values[a3_values.len() * 2 / 3..];
            let decreasing = tail.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);
            last < A3_TOLERANCE && decreasing
        } else {
            false
        };

        Ok(AssumptionReport {
            a1: Verdict::from_bool(a1_ok),
            a2: Verdict::from_bool(a2_ok),
            a3: Verdict::from_bool(a3_ok),
            a1_ratios,
            a2_max_correlation: a2_max,
            a2_argmax: a2_at,
            a3_values,
            probed_up_to: t_hi,
        })
    }

    pub fn label(&self) -> String {
        match &self.family {
            Family::StableExp => format!("stable-exp(alpha={}, C={})", self.alpha, self.c_coef),
            Family::OrnsteinUhlenbeck => format!("ornstein-uhlenbeck(C={})", self.c_coef),
            Family::Custom(t) => format!(
                "custom({} knots, alpha={}, C={})",
                t.t.len(),
                self.alpha,
                self.c_coef
            ),
        }
    }
}

impl fmt::Display for CovarianceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = (hi / lo).ln() / (n as f64 - 1.0);
    (0..n).map(|k| (lo.ln() + ratio * k as f64).exp().min(hi)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    Violated,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Consistent
        } else {
            Verdict::Violated
        }
    }

    pub fn is_consistent(self) -> bool {
        self == Verdict::Consistent
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Consistent => "consistent",
            Verdict::Violated => "violated",
        })
    }
}

#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub a1: Verdict,
    pub a2: Verdict,
    pub a3: Verdict,
    /// `(t, (1 - r(t)) / (C t^alpha))` on a decreasing sequence of lags.
    pub a1_ratios: Vec<(f64, f64)>,
    pub a2_max_correlation: f64,
    pub a2_argmax: f64,
    /// `(t, |r(t) ln t|)` on a geometric grid.
    pub a3_values: Vec<(f64, f64)>,
    pub probed_up_to: f64,
}

impl AssumptionReport {
    pub fn all_consistent(&self) -> bool {
        self.a1.is_consistent() && self.a2.is_consistent() && self.a3.is_consistent()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn evaluate_examples() {
        let ou = CovarianceModel::stable_exp(1.0, 1.0).unwrap();
        assert_eq!(ou.evaluate(0.0).unwrap(), 1.0);
        assert_relative_eq!(ou.evaluate(1.0).unwrap(), 0.367_879_441_171_442_3, max_relative = 1e-15);
        let gauss = CovarianceModel::stable_exp(2.0, 0.5).unwrap();
        assert_relative_eq!(gauss.evaluate(2.0).unwrap(), (-2.0f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn parameter_validation() {
        assert!(CovarianceModel::stable_exp(0.0, 1.0).is_err());
        assert!(CovarianceModel::stable_exp(2.5, 1.0).is_err());
        assert!(CovarianceModel::stable_exp(1.0, 0.0).is_err());
        assert!(CovarianceModel::stable_exp(2.0, 1e-3).is_ok());
    }

    #[test]
    fn custom_interpolates_and_rejects_out_of_range() {
        let table = CovTable::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.5, 0.1]).unwrap();
        let m = CovarianceModel::custom(table, 1.0, 0.5).unwrap();
        assert_relative_eq!(m.evaluate(0.5).unwrap(), 0.75);
        assert_relative_eq!(m.evaluate(1.5).unwrap(), 0.3);
        assert_eq!(m.evaluate(2.0).unwrap(), 0.1);
        assert!(matches!(m.evaluate(2.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn custom_table_validation() {
        assert!(CovTable::new(vec![0.0, 1.0], vec![0.9, 0.5]).is_err());
        assert!(CovTable::new(vec![0.0, 1.0, 1.0], vec![1.0, 0.5, 0.4]).is_err());
        assert!(CovTable::new(vec![0.0, 1.0], vec![1.0, 1.5]).is_err());
    }

    #[test]
    fn ou_satisfies_all_screens() {
        let m = CovarianceModel::stable_exp(1.0, 1.0).unwrap();
        let rep = m.check_assumptions(100.0, 50).unwrap();
        assert!(rep.all_consistent(), "{rep:?}");
    }

    #[test]
    fn gaussian_covariance_satisfies_all_screens() {
        let m = CovarianceModel::stable_exp(2.0, 1.0).unwrap();
        let rep = m.check_assumptions(100.0, 50).unwrap();
        assert!(rep.all_consistent(), "{rep:?}");
    }

    #[test]
    fn small_alpha_is_screened_at_finer_lags() {
        let m = CovarianceModel::stable_exp(0.3, 2.0).unwrap();
        let rep = m.check_assumptions(1e4, 40).unwrap();
        assert!(rep.a1.is_consistent(), "{:?}", rep.a1_ratios.last());
    }

    #[test]
    fn flat_custom_violates_a2() {
        let table = CovTable::new(vec![0.0, 0.5, 1.0], vec![1.0, 1.0, 1.0]).unwrap();
        let m = CovarianceModel::custom(table, 1.0, 1.0).unwrap();
        let rep = m.check_assumptions(100.0, 20).unwrap();
        assert_eq!(rep.a2, Verdict::Violated);
        assert_eq!(rep.a2_max_correlation, 1.0);
    }

    #[test]
    fn wrong_declared_shape_violates_a1() {
        let m = CovarianceModel::custom(
            CovTable::new(vec![0.0, 1.0, 10.0], vec![1.0, 0.5, 0.0]).unwrap(),
            1.0,
            2.0,
        )
        .unwrap();
        let rep = m.check_assumptions(10.0, 20).unwrap();
        assert_eq!(rep.a1, Verdict::Violated);
    }

    #[test]
    fn screen_preconditions() {
        let m = CovarianceModel::stable_exp(1.0, 1.0).unwrap();
        assert!(m.check_assumptions(1.0, 50).is_err());
        assert!(m.check_assumptions(10.0, 9).is_err());
    }

    #[test]
    fn a1_ratio_at_decades() {
        for &(alpha, c) in &[(1.0, 1.0), (1.5, 0.7), (2.0, 1.0), (1.2, 0.2)] {
            let m = CovarianceModel::stable_exp(alpha, c).unwrap();
            for k in 2..=6 {
                let t = 10f64.powi(-k);
                let ratio = (1.0 - m.evaluate(t).unwrap()) / (c * t.powf(alpha));
                assert!((0.99..=1.01).contains(&ratio), "alpha={alpha} t={t} ratio={ratio}");
            }
        }
    }

    proptest! {
        #[test]
        fn bounded_and_monotone(alpha in 0.05f64..=2.0, c in 0.01f64..10.0, t in 0.0f64..50.0, dt in 0.0f64..5.0) {
            let m = CovarianceModel::stable_exp(alpha, c).unwrap();
            let a = m.evaluate(t).unwrap();
            let b = m.evaluate(t + dt).unwrap();
            prop_assert!(a.abs() <= 1.0);
            prop_assert!(b <= a);
            prop_assert_eq!(m.evaluate(0.0).unwrap(), 1.0);
        }
    }
}
