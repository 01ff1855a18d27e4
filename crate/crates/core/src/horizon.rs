//! Laws of the random horizon `T`: exact tails, inverse-transform samplers,
//! slowly varying factors and the heaviness regime.

use std::f64::consts::E;
use std::fmt;
use std::path::Path;

use rand::RngCore;

use crate::covmodel::read_two_columns;
use crate::error::{Error, Result};
use crate::quadrature;
use crate::rng::open_uniform;

/// Heaviness class of `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Finite mean.
    D1,
    /// Regularly varying tail with index in (0, 1).
    D2,
    /// Slowly varying tail.
    D3,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::D1 => "D1",
            Regime::D2 => "D2",
            Regime::D3 => "D3",
        })
    }
}

/// Tabulated tail `P(T > t)`: linear between knots, constant before the first
/// knot, and power-law beyond the last with the slope of the last two knots.
#[derive(Debug, Clone, PartialEq)]
pub struct TailTable {
    t: Vec<f64>,
    p: Vec<f64>,
    /// Log-log decay rate beyond the last knot.
    decay: f64,
}

impl TailTable {
    pub fn new(t: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if t.len() != p.len() || t.len() < 2 {
            return Err(Error::invalid("horizon.table", "needs at least two (t, tail) rows"));
        }
        if t[0] < 0.0 || t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("horizon.table", "t must be nonnegative and strictly increasing"));
        }
        if p.iter().any(|&v| !(0.0..=1.0).contains(&v)) || p.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("horizon.table", "tail values must be non-increasing in [0, 1]"));
        }
        let n = t.len();
        let decay = if p[n - 1] == 0.0 {
            f64::INFINITY
        } else if t[n - 2] > 0.0 {
            -(p[n - 1] / p[n - 2]).ln() / (t[n - 1] / t[n - 2]).ln()
        } else {
            0.0
        };
        Ok(TailTable { t, p, decay })
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let (t, p) = read_two_columns(path)?;
        TailTable::new(t, p)
    }

    fn last(&self) -> (f64, f64) {
        (*self.t.last().unwrap(), *self.p.last().unwrap())
    }

    fn tail(&self, t: f64) -> f64 {
        let (t_last, p_last) = self.last();
        if t < self.t[0] {
            return self.p[0];
        }
        if t >= t_last {
            return if self.decay.is_infinite() {
                0.0
            } else {
                p_last * (t / t_last).powf(-self.decay)
            };
        }
        let i = self.t.partition_point(|&k| k <= t);
        let (t0, t1) = (self.t[i - 1], self.t[i]);
        self.p[i - 1] + (t - t0) / (t1 - t0) * (self.p[i] - self.p[i - 1])
    }

    fn ln_tail_at_log(&self, ln_t: f64) -> f64 {
        let (t_last, p_last) = self.last();
        if ln_t < t_last.ln() {
            self.tail(ln_t.exp()).ln()
        } else if self.decay.is_infinite() {
            f64::NEG_INFINITY
        } else {
            p_last.ln() - self.decay * (ln_t - t_last.ln())
        }
    }

    fn inverse(&self, u: f64) -> (f64, bool) {
        let (t_last, p_last) = self.last();
        if u >= self.p[0] {
            return (self.t[0].min(0.0), false);
        }
        if u < p_last {
            if self.decay > 0.0 && self.decay.is_finite() {
                return (t_last * (u / p_last).powf(-1.0 / self.decay), false);
            }
            return (t_last, true);
        }
        // first knot with p <= u
        let i = self.p.partition_point(|&q| q > u);
        let (p0, p1) = (self.p[i - 1], self.p[i]);
        let (t0, t1) = (self.t[i - 1], self.t[i]);
        if p0 == p1 {
            return (t1, false);
        }
        (t0 + (p0 - u) / (p0 - p1) * (t1 - t0), false)
    }

    fn mean(&self) -> f64 {
        let mut m = self.t[0] * self.p[0];
        for k in 1..self.t.len() {
            m += 0.5 * (self.p[k] + self.p[k - 1]) * (self.t[k] - self.t[k - 1]);
        }
        let (t_last, p_last) = self.last();
        if p_last == 0.0 {
            m
        } else if self.decay > 1.0 {
            m + p_last * t_last / (self.decay - 1.0)
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HorizonKind {
    Deterministic { t0: f64 },
    Exponential { mean: f64 },
    /// `P(T > t) = t^{-lambda}` for `t >= 1`.
    Pareto { lambda: f64 },
    /// `P(T > t) = 1 / ln t` for `t >= e`.
    LogPareto,
    CustomTail(TailTable),
}

/// One draw of `T`, possibly truncated at the configured cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonDraw {
    pub value: f64,
    pub capped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonDistribution {
    kind: HorizonKind,
    regime: Regime,
    lambda_tail: Option<f64>,
    cap: Option<f64>,
}

impl HorizonDistribution {
    pub fn deterministic(t0: f64) -> Result<Self> {
        if !(t0 >= 0.0 && t0.is_finite()) {
            return Err(Error::invalid("horizon.t0", "must be finite and nonnegative"));
        }
        Ok(Self::build(HorizonKind::Deterministic { t0 }, Regime::D1, None))
    }

    pub fn exponential(mean: f64) -> Result<Self> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(Error::invalid("horizon.mean", "must be positive"));
        }
        Ok(Self::build(HorizonKind::Exponential { mean }, Regime::D1, None))
    }

    pub fn pareto(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self::build(HorizonKind::Pareto { lambda }, Regime::D2, Some(lambda)))
    }

    pub fn log_pareto() -> Self {
        Self::build(HorizonKind::LogPareto, Regime::D3, None)
    }

    /// Tabulated tail with a declared regime; `lambda` is required for D2 and
    /// ignored otherwise.
    pub fn custom_tail(table: TailTable, regime: Regime, lambda: Option<f64>) -> Result<Self> {
        let lambda_tail = match regime {
            Regime::D2 => {
                let l = lambda.ok_or_else(|| Error::invalid("horizon.lambda", "required for D2"))?;
                check_lambda(l)?;
                Some(l)
            }
            _ => None,
        };
        if regime == Regime::D1 && !table.mean().is_finite() {
            return Err(Error::invalid(
                "horizon.regime",
                "D1 declared but the tabulated tail has infinite mean",
            ));
        }
        Ok(Self::build(HorizonKind::CustomTail(table), regime, lambda_tail))
    }

    fn build(kind: HorizonKind, regime: Regime, lambda_tail: Option<f64>) -> Self {
        HorizonDistribution {
            kind,
            regime,
            lambda_tail,
            cap: None,
        }
    }

    /// Truncate draws at `t_cap`.
    pub fn with_cap(mut self, t_cap: f64) -> Result<Self> {
        if !(t_cap > 0.0 && t_cap.is_finite()) {
            return Err(Error::invalid("horizon.t_cap", "must be positive"));
        }
        self.cap = Some(t_cap);
        Ok(self)
    }

    pub fn kind(&self) -> &HorizonKind {
        &self.kind
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// Regular-variation index (D2 only).
    pub fn lambda_tail(&self) -> Option<f64> {
        self.lambda_tail
    }

    pub fn cap(&self) -> Option<f64> {
        self.cap
    }

    /// `P(T > t_cap)`, the mass hidden by truncation (0 without a cap).
    pub fn truncated_mass(&self) -> f64 {
        self.cap.map_or(0.0, |c| self.tail(c))
    }

    /// Smallest point of the support where the tail formula applies.
    pub fn support_floor(&self) -> f64 {
        match &self.kind {
            HorizonKind::Pareto { .. } => 1.0,
            HorizonKind::LogPareto => E,
            HorizonKind::CustomTail(tab) => tab.t[0],
            _ => 0.0,
        }
    }

    /// Exact `P(T > t)`.
    pub fn tail(&self, t: f64) -> f64 {
        match &self.kind {
            HorizonKind::Deterministic { t0 } => {
                if t < *t0 {
                    1.0
                } else {
                    0.0
                }
            }
            HorizonKind::Exponential { mean } => (-t.max(0.0) / mean).exp(),
            HorizonKind::Pareto { lambda } => {
                if t <= 1.0 {
                    1.0
                } else {
                    t.powf(-lambda)
                }
            }
            HorizonKind::LogPareto => {
                if t <= E {
                    1.0
                } else {
                    1.0 / t.ln()
                }
            }
            HorizonKind::CustomTail(tab) => tab.tail(t),
        }
    }

    /// `ln P(T > e^{ln_t})`, usable when `e^{ln_t}` overflows.
    pub fn ln_tail_at_log(&self, ln_t: f64) -> f64 {
        match &self.kind {
            HorizonKind::Pareto { lambda } => -lambda * ln_t.max(0.0),
            HorizonKind::LogPareto => -(ln_t.max(1.0)).ln(),
            HorizonKind::Exponential { mean } => {
                if ln_t > 700.0 {
                    f64::NEG_INFINITY
                } else {
                    -ln_t.exp() / mean
                }
            }
            HorizonKind::Deterministic { .. } => {
                if ln_t > 700.0 {
                    f64::NEG_INFINITY
                } else {
                    self.tail(ln_t.exp()).ln()
                }
            }
            HorizonKind::CustomTail(tab) => tab.ln_tail_at_log(ln_t),
        }
    }

    fn check_slowly_varying(&self, t: f64) -> Result<f64> {
        let lambda = match self.regime {
            Regime::D1 => {
                return Err(Error::Regime(
                    "the slowly varying factor is defined only for D2 and D3 horizons".into(),
                ))
            }
            Regime::D2 => self.lambda_tail.unwrap(),
            Regime::D3 => 0.0,
        };
        if t < self.support_floor() {
            return Err(Error::invalid(
                "t",
                format!("{t} is below the support floor {}", self.support_floor()),
            ));
        }
        Ok(lambda)
    }

    /// `L(t) = P(T > t) t^lambda` (D2) or `P(T > t)` (D3).
    pub fn slowly_varying_part(&self, t: f64) -> Result<f64> {
        let lambda = self.check_slowly_varying(t)?;
        Ok(self.tail(t) * t.powf(lambda))
    }

    /// `ln L(e^{ln_t})`.
    pub fn ln_slowly_varying_at_log(&self, ln_t: f64) -> Result<f64> {
        let floor = self.support_floor();
        if floor > 0.0 && ln_t < floor.ln() {
            return Err(Error::invalid("t", format!("e^{ln_t} is below the support floor {floor}")));
        }
        let lambda = self.check_slowly_varying(floor)?;
        Ok(self.ln_tail_at_log(ln_t) + lambda * ln_t)
    }

    /// `E T`, infinite for D2 and D3.
    pub fn mean(&self) -> f64 {
        match &self.kind {
            HorizonKind::Deterministic { t0 } => *t0,
            HorizonKind::Exponential { mean } => *mean,
            HorizonKind::Pareto { .. } | HorizonKind::LogPareto => f64::INFINITY,
            HorizonKind::CustomTail(tab) => tab.mean(),
        }
    }

    /// Inverse-transform draw from one open uniform, truncated at the cap if set.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> HorizonDraw {
        let (raw, table_capped) = match &self.kind {
            HorizonKind::Deterministic { t0 } => (*t0, false),
            HorizonKind::Exponential { mean } => (-mean * open_uniform(rng).ln(), false),
            HorizonKind::Pareto { lambda } => (open_uniform(rng).powf(-1.0 / lambda), false),
            HorizonKind::LogPareto => ((1.0 / open_uniform(rng)).exp(), false),
            HorizonKind::CustomTail(tab) => tab.inverse(open_uniform(rng)),
        };
        match self.cap {
            Some(c) if raw > c => HorizonDraw {
                value: c,
                capped: true,
            },
            _ => HorizonDraw {
                value: raw,
                capped: table_capped,
            },
        }
    }

    /// Ratio of `int_0^x P(T > t) dt` to its regularly varying equivalent
    /// `x P(T > x) / (1 - lambda)`; tends to 1 as `x` grows.
    pub fn karamata_check(&self, x: f64) -> Result<f64> {
        let lambda = match self.regime {
            Regime::D2 => self.lambda_tail.unwrap(),
            r => return Err(Error::Regime(format!("integral check needs a D2 horizon, got {r}"))),
        };
        let floor = self.support_floor();
        if !(x > floor) {
            return Err(Error::invalid("x", format!("{x} must exceed the support floor {floor}")));
        }
        const REL_TOL: f64 = 1e-8;
        let head = if floor > 0.0 {
            quadrature::integrate(|t| self.tail(t), 0.0, floor, REL_TOL)?
        } else {
            0.0
        };
        // t = e^s smooths the power-law decay over many decades
        let lo = if floor > 0.0 { floor } else { (x * 1e-12).max(f64::MIN_POSITIVE) };
        let body = quadrature::integrate(|s| self.tail(s.exp()) * s.exp(), lo.ln(), x.ln(), REL_TOL)?;
        let below_lo = if floor > 0.0 { 0.0 } else { lo };
        let integral = head + body + below_lo;
        Ok(integral / (x * self.tail(x) / (1.0 - lambda)))
    }

    pub fn label(&self) -> String {
        let base = match &self.kind {
            HorizonKind::Deterministic { t0 } => format!("deterministic(t0={t0})"),
            HorizonKind::Exponential { mean } => format!("exponential(mean={mean})"),
            HorizonKind::Pareto { lambda } => format!("pareto(lambda={lambda})"),
            HorizonKind::LogPareto => "log-pareto".to_string(),
            HorizonKind::CustomTail(t) => format!("custom-tail({} knots, {})", t.t.len(), self.regime),
        };
        match self.cap {
            Some(c) => format!("{base} capped at {c}"),
            None => base,
        }
    }
}

impl fmt::Display for HorizonDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("horizon.lambda", format!("{lambda} is outside (0, 1)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Purpose};
    use approx::assert_relative_eq;

    #[test]
    fn tail_examples() {
        assert_eq!(HorizonDistribution::exponential(1.0).unwrap().tail(0.0), 1.0);
        assert_relative_eq!(HorizonDistribution::pareto(0.5).unwrap().tail(4.0), 0.5);
        assert_relative_eq!(HorizonDistribution::log_pareto().tail(E * E), 0.5, max_relative = 1e-15);
        let d = HorizonDistribution::deterministic(5.0).unwrap();
        assert_eq!(d.tail(4.999), 1.0);
        assert_eq!(d.tail(5.0), 0.0);
    }

    #[test]
    fn regimes_follow_kind() {
        assert_eq!(HorizonDistribution::deterministic(1.0).unwrap().regime(), Regime::D1);
        assert_eq!(HorizonDistribution::exponential(2.0).unwrap().regime(), Regime::D1);
        assert_eq!(HorizonDistribution::pareto(0.3).unwrap().regime(), Regime::D2);
        assert_eq!(HorizonDistribution::log_pareto().regime(), Regime::D3);
        assert!(HorizonDistribution::pareto(1.0).is_err());
        assert!(HorizonDistribution::pareto(0.0).is_err());
    }

    #[test]
    fn slowly_varying_examples() {
        let p = HorizonDistribution::pareto(0.5).unwrap();
        for &t in &[1.0, 3.0, 1e6] {
            assert_relative_eq!(p.slowly_varying_part(t).unwrap(), 1.0, max_relative = 1e-12);
        }
        let lp = HorizonDistribution::log_pareto();
        assert_relative_eq!(lp.slowly_varying_part(E * E).unwrap(), 0.5, max_relative = 1e-15);
        assert!(matches!(
            HorizonDistribution::exponential(1.0).unwrap().slowly_varying_part(3.0),
            Err(Error::Regime(_))
        ));
        assert!(p.slowly_varying_part(0.5).is_err());
    }

    #[test]
    fn custom_tail_algebraic_split() {
        // P(T > t) = 2 t^{-0.3} ln t on [1e6, 1e8] (decreasing, below one there)
        let ts: Vec<f64> = (0..=20).map(|k| 1e6 * 10f64.powf(k as f64 / 10.0)).collect();
        let ps: Vec<f64> = ts.iter().map(|t| 2.0 * t.powf(-0.3) * t.ln()).collect();
        let h = HorizonDistribution::custom_tail(TailTable::new(ts.clone(), ps).unwrap(), Regime::D2, Some(0.3)).unwrap();
        for &t in &ts {
            assert_relative_eq!(h.slowly_varying_part(t).unwrap(), 2.0 * t.ln(), max_relative = 1e-12);
        }
    }

    #[test]
    fn custom_tail_validation() {
        assert!(TailTable::new(vec![0.0, 1.0], vec![0.5, 0.7]).is_err());
        assert!(TailTable::new(vec![0.0, 1.0], vec![1.0, 1.2]).is_err());
        let t = TailTable::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.5, 0.4]).unwrap();
        assert!(HorizonDistribution::custom_tail(t.clone(), Regime::D2, None).is_err());
        // power-law continuation with slope ln(1.25)/ln 2 < 1: infinite mean
        assert!(HorizonDistribution::custom_tail(t, Regime::D1, None).is_err());
    }

    #[test]
    fn custom_tail_inverse_is_consistent() {
        let t = TailTable::new(vec![0.0, 1.0, 3.0, 10.0], vec![1.0, 0.6, 0.2, 0.05]).unwrap();
        for &u in &[0.9, 0.6, 0.4, 0.1, 0.05, 0.01] {
            let (x, capped) = t.inverse(u);
            assert!(!capped);
            assert_relative_eq!(t.tail(x), u, max_relative = 1e-12);
        }
    }

    #[test]
    fn ln_tail_matches_direct_evaluation() {
        let hs = [
            HorizonDistribution::pareto(0.7).unwrap(),
            HorizonDistribution::log_pareto(),
            HorizonDistribution::exponential(3.0).unwrap(),
        ];
        for h in &hs {
            for &t in &[3.0, 50.0, 1e3] {
                assert_relative_eq!(h.ln_tail_at_log(f64::ln(t)), h.tail(t).ln(), max_relative = 1e-12);
            }
        }
        // the exponential tail underflows long before its logarithm does
        let e = HorizonDistribution::exponential(3.0).unwrap();
        assert_eq!(e.tail(1e4), 0.0);
        assert_relative_eq!(e.ln_tail_at_log(1e4f64.ln()), -1e4 / 3.0, max_relative = 1e-12);
        // far beyond f64 range
        assert_relative_eq!(HorizonDistribution::log_pareto().ln_tail_at_log(800.0), -(800f64.ln()));
    }

    #[test]
    fn deterministic_and_capped_sampling() {
        let mut rng = substream(1, Purpose::Generic, 0);
        let d = HorizonDistribution::deterministic(5.0).unwrap();
        for _ in 0..10 {
            assert_eq!(d.sample(&mut rng), HorizonDraw { value: 5.0, capped: false });
        }
        let lp = HorizonDistribution::log_pareto().with_cap(100.0).unwrap();
        assert_relative_eq!(lp.truncated_mass(), 1.0 / 100f64.ln());
        let draws: Vec<_> = (0..1000).map(|_| lp.sample(&mut rng)).collect();
        assert!(draws.iter().all(|d| d.value <= 100.0 && d.value >= E));
        assert!(draws.iter().filter(|d| d.capped).all(|d| d.value == 100.0));
    }

    // Closed form for Pareto(lambda): int_0^x tail = 1 + (x^{1-lambda} - 1)/(1 - lambda).
    fn pareto_karamata_oracle(lambda: f64, x: f64) -> f64 {
        let integral = 1.0 + (x.powf(1.0 - lambda) - 1.0) / (1.0 - lambda);
        integral / (x * x.powf(-lambda) / (1.0 - lambda))
    }

    #[test]
    fn karamata_pareto_half() {
        let h = HorizonDistribution::pareto(0.5).unwrap();
        let r = h.karamata_check(100.0).unwrap();
        assert_relative_eq!(pareto_karamata_oracle(0.5, 100.0), 0.95, max_relative = 1e-14);
        assert_relative_eq!(r, 0.95, max_relative = 1e-8);
        let r6 = h.karamata_check(1e6).unwrap();
        assert!((0.999..=1.0).contains(&r6), "{r6}");
        assert_relative_eq!(r6, pareto_karamata_oracle(0.5, 1e6), max_relative = 1e-8);
    }

    #[test]
    fn karamata_pareto_heavy_index() {
        let h = HorizonDistribution::pareto(0.9).unwrap();
        // convergence is slow near lambda = 1: the gap is 0.9 x^{-0.1}
        let r = h.karamata_check(1e6).unwrap();
        assert_relative_eq!(r, pareto_karamata_oracle(0.9, 1e6), max_relative = 1e-8);
        assert!((r - 0.773_930_221_164_137_6).abs() < 1e-8, "{r}");
        let far = h.karamata_check(1e20).unwrap();
        assert!((far - 1.0).abs() < 0.01, "{far}");
    }

    #[test]
    fn karamata_monotone_towards_one() {
        for &lambda in &[0.2, 0.5, 0.8] {
            let h = HorizonDistribution::pareto(lambda).unwrap();
            let rs: Vec<f64> = [1e1, 1e2, 1e3, 1e4, 1e5, 1e6].iter().map(|&x| h.karamata_check(x).unwrap()).collect();
            for w in rs.windows(2) {
                assert!((w[1] - 1.0).abs() < (w[0] - 1.0).abs(), "{rs:?}");
            }
        }
    }

    #[test]
    fn karamata_requires_d2() {
        assert!(matches!(HorizonDistribution::log_pareto().karamata_check(10.0), Err(Error::Regime(_))));
        assert!(HorizonDistribution::pareto(0.5).unwrap().karamata_check(0.5).is_err());
    }

    #[test]
    fn slow_variation_probe() {
        let hs = [HorizonDistribution::pareto(0.5).unwrap(), HorizonDistribution::log_pareto()];
        for h in &hs {
            let ratios: Vec<f64> = [1e3, 1e4, 1e5, 1e6]
                .iter()
                .map(|&t| h.slowly_varying_part(2.0 * t).unwrap() / h.slowly_varying_part(t).unwrap())
                .collect();
            for w in ratios.windows(2) {
                assert!((w[1] - 1.0).abs() <= (w[0] - 1.0).abs() + 1e-15);
            }
            assert!(ratios.iter().all(|r| (0.9..=1.1).contains(r)), "{ratios:?}");
        }
    }
}
