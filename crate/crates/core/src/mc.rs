//! Monte Carlo estimates of `P(sup_{[0,T]} X > u)` and of the
//! non-exceedance probabilities `P(sup_{[0, x m(u)]} X <= u)`.
//!
//! Every trial owns its substreams (horizon draw and path noise), so
//! estimates depend on the seed and trial count only. Exceedance is strict.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::asymptotics::{self, AsymptoticResult};
use crate::covmodel::CovarianceModel;
use crate::error::{Error, Result};
use crate::horizon::{HorizonDistribution, HorizonKind, Regime};
use crate::rng::{substream, Purpose};
use crate::sim::{CirculantPlan, CirculantSampler, MarkovSampler};
use crate::special::phi_cdf;
use crate::stats::{wilson_interval, Z95};

pub const DEFAULT_A_COEF: f64 = 0.25;
pub const DEFAULT_STEP_CAP: f64 = 0.05;
pub const MIN_TRIALS: usize = 1000;
/// Default cap on grid points per path.
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 22;
/// Below this many hits (or misses) the Wilson interval replaces the normal one.
pub const WILSON_THRESHOLD: u64 = 30;
const PAIRS_PER_CHUNK: u64 = 512;

/// Grid spacing `min(a u^{-2/alpha}, step_cap)`, tied to the correlation
/// scale of exceedances at level `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPolicy {
    pub a_coef: f64,
    pub step_cap: f64,
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy {
            a_coef: DEFAULT_A_COEF,
            step_cap: DEFAULT_STEP_CAP,
        }
    }
}

impl GridPolicy {
    pub fn new(a_coef: f64, step_cap: f64) -> Result<Self> {
        if !(a_coef > 0.0 && a_coef.is_finite()) {
            return Err(Error::invalid("a_coef", format!("{a_coef} must be positive")));
        }
        if !(step_cap > 0.0 && step_cap.is_finite()) {
            return Err(Error::invalid("step_cap", format!("{step_cap} must be positive")));
        }
        Ok(GridPolicy { a_coef, step_cap })
    }

    /// The cap applies for `u <= 0`.
    pub fn step(&self, u: f64, alpha: f64) -> f64 {
        if u <= 0.0 {
            self.step_cap
        } else {
            (self.a_coef * u.powf(-2.0 / alpha)).min(self.step_cap)
        }
    }
}

/// How an exceedance is detected along a simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Crossing {
    /// A grid value strictly above `u`.
    #[default]
    Grid,
    /// Grid values plus Brownian-bridge crossings between grid points, which
    /// removes most of the discretisation bias. Exponential covariances only.
    Bridge,
}

/// Shared run parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub n_trials: usize,
    pub policy: GridPolicy,
    pub seed: u64,
    /// Largest number of grid points in one path.
    pub memory_budget: usize,
    pub crossing: Crossing,
}

impl McSettings {
    pub fn new(n_trials: usize, policy: GridPolicy, seed: u64) -> Self {
        McSettings {
            n_trials,
            policy,
            seed,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            crossing: Crossing::Grid,
        }
    }

    pub fn with_crossing(mut self, crossing: Crossing) -> Self {
        self.crossing = crossing;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_trials < MIN_TRIALS {
            return Err(Error::invalid(
                "n_trials",
                format!("{} is below the minimum {MIN_TRIALS}", self.n_trials),
            ));
        }
        if self.memory_budget < 2 {
            return Err(Error::invalid("memory_budget", "must allow at least two grid points"));
        }
        Ok(())
    }
}

/// A binomial proportion with its 95% interval and truncation accounting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub probability: f64,
    pub hits: u64,
    pub n_trials: u64,
    pub ci95_half_width: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub grid_step_used: f64,
    /// `P(T > cap)` of the horizon distribution.
    pub truncated_mass: f64,
    /// Trials whose horizon was cut (cap or memory budget) without an
    /// exceedance in the simulated part; each may still be a hit.
    pub unresolved: u64,
    pub seed: u64,
}

fn interval(hits: u64, n: u64) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    if hits.min(n - hits) < WILSON_THRESHOLD {
        wilson_interval(hits, n, Z95)
    } else {
        let h = Z95 * (p * (1.0 - p) / n as f64).sqrt();
        ((p - h).max(0.0), (p + h).min(1.0))
    }
}

impl McEstimate {
    fn new(hits: u64, n: u64, step: f64, truncated_mass: f64, unresolved: u64, seed: u64) -> Self {
        let (lo, hi) = interval(hits, n);
        let p = hits as f64 / n as f64;
        let half = if hits.min(n - hits) < WILSON_THRESHOLD {
            0.5 * (hi - lo)
        } else {
            Z95 * (p * (1.0 - p) / n as f64).sqrt()
        };
        McEstimate {
            probability: p,
            hits,
            n_trials: n,
            ci95_half_width: half,
            ci_low: lo,
            ci_high: hi,
            grid_step_used: step,
            truncated_mass,
            unresolved,
            seed,
        }
    }

    /// Share of trials that may hide an exceedance beyond the simulated part:
    /// the larger of the horizon's truncated mass and the unresolved fraction.
    pub fn unresolved_share(&self) -> f64 {
        self.truncated_mass.max(self.unresolved as f64 / self.n_trials as f64)
    }

    /// `[p, p + unresolved_share]`.
    pub fn bracket(&self) -> (f64, f64) {
        let p = self.probability;
        (p, (p + self.unresolved_share()).min(1.0))
    }

    /// The bracket widened by the 95% intervals at both ends.
    pub fn bracket_ci(&self) -> (f64, f64) {
        (self.ci_low, (self.ci_high + self.unresolved_share()).min(1.0))
    }
}

/// Circulant plans per power-of-two size, built on first use.
struct EmbeddingCache {
    model: CovarianceModel,
    step: f64,
    plans: Mutex<BTreeMap<usize, Arc<CirculantPlan>>>,
}

impl EmbeddingCache {
    fn plan(&self, n_points: usize) -> Result<Arc<CirculantPlan>> {
        let slot = (2 * n_points.saturating_sub(1)).max(2).next_power_of_two();
        let mut plans = self.plans.lock().unwrap();
        if let Some(p) = plans.get(&slot) {
            return Ok(Arc::clone(p));
        }
        let plan = Arc::new(CirculantPlan::for_model(&self.model, self.step, n_points)?);
        plans.insert(slot, Arc::clone(&plan));
        Ok(plan)
    }
}

enum Backend {
    Markov(MarkovSampler, Crossing),
    Circulant(EmbeddingCache),
}

impl Backend {
    fn new(model: &CovarianceModel, step: f64, crossing: Crossing) -> Result<Self> {
        Ok(if model.is_markov() {
            Backend::Markov(MarkovSampler::new(model, step)?, crossing)
        } else if crossing == Crossing::Bridge {
            return Err(Error::Config(format!(
                "bridge crossing needs an exponential covariance, not {}",
                model.label()
            )));
        } else {
            Backend::Circulant(EmbeddingCache {
                model: model.clone(),
                step,
                plans: Mutex::new(BTreeMap::new()),
            })
        })
    }
}

/// Per-worker path source: first exceedance of `u` for both trials of a pair.
struct Scanner<'a> {
    backend: &'a Backend,
    seed: u64,
    samplers: HashMap<usize, CirculantSampler>,
}

impl<'a> Scanner<'a> {
    fn new(backend: &'a Backend, seed: u64) -> Self {
        Scanner {
            backend,
            seed,
            samplers: HashMap::new(),
        }
    }

    /// `n[i] = 0` skips trial `i` of the pair.
    fn pair(&mut self, pair: u64, n: [usize; 2], u: f64) -> Result<[Option<usize>; 2]> {
        match self.backend {
            Backend::Markov(s, crossing) => {
                let mut out = [None; 2];
                for i in 0..2 {
                    if n[i] > 0 {
                        let mut rng = substream(self.seed, Purpose::PathNoise, 2 * pair + i as u64);
                        out[i] = match crossing {
                            Crossing::Grid => s.first_exceedance(&mut rng, n[i], u),
                            Crossing::Bridge => s.first_crossing(&mut rng, n[i], u),
                        };
                    }
                }
                Ok(out)
            }
            Backend::Circulant(cache) => {
                let n_max = n[0].max(n[1]);
                if n_max == 0 {
                    return Ok([None; 2]);
                }
                let len = n_max.max(2);
                let plan = cache.plan(len)?;
                let sampler = self
                    .samplers
                    .entry(plan.size())
                    .or_insert_with(|| CirculantSampler::new(plan));
                let mut rng = substream(self.seed, Purpose::PathNoise, pair);
                let (a, b) = sampler.sample_pair(&mut rng, len);
                let first = |p: &[f64], k: usize| p[..k].iter().position(|&x| x > u);
                Ok([first(a, n[0]), first(b, n[1])])
            }
        }
    }
}

/// Runs `n_trials` trials in fixed chunks of pairs, merging in chunk order.
fn run_pairs<A, F, M>(backend: &Backend, seed: u64, n_trials: usize, per_pair: F, merge: M) -> Result<A>
where
    A: Default + Send,
    F: Fn(&mut Scanner, u64, &mut A) -> Result<()> + Sync,
    M: Fn(&mut A, A),
{
    let n_pairs = (n_trials as u64).div_ceil(2);
    let n_chunks = n_pairs.div_ceil(PAIRS_PER_CHUNK);
    let parts: Vec<A> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut scanner = Scanner::new(backend, seed);
            let mut acc = A::default();
            for pair in c * PAIRS_PER_CHUNK..((c + 1) * PAIRS_PER_CHUNK).min(n_pairs) {
                per_pair(&mut scanner, pair, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = A::default();
    for p in parts {
        merge(&mut total, p);
    }
    Ok(total)
}

#[derive(Default)]
struct TailCounts {
    hits: u64,
    unresolved: u64,
}

fn n_points_for(span: f64, step: f64) -> usize {
    (span / step + 1e-9).floor() as usize + 1
}

/// `P(sup_{[0,T]} X > u)` with `T` drawn from `horizon` per trial.
///
/// Capped draws and draws longer than the memory budget are simulated up to
/// the cut and, when they do not exceed there, counted as unresolved.
pub fn estimate_sup_tail(
    model: &CovarianceModel,
    horizon: &HorizonDistribution,
    u: f64,
    settings: &McSettings,
) -> Result<McEstimate> {
    settings.validate()?;
    if !u.is_finite() {
        return Err(Error::invalid("u", "must be finite"));
    }
    if horizon.regime() != Regime::D1 && horizon.cap().is_none() {
        return Err(Error::Config(format!(
            "{} horizon {} needs a cap for simulation",
            horizon.regime(),
            horizon.label()
        )));
    }
    let step = settings.policy.step(u, model.alpha());
    let budget = settings.memory_budget;
    if let HorizonKind::Deterministic { t0 } = horizon.kind() {
        let n = n_points_for(*t0, step);
        if n > budget {
            return Err(Error::Budget {
                points: n as u64,
                budget,
                context: format!("deterministic horizon {t0} at u={u}, step={step}"),
            });
        }
    }
    let backend = Backend::new(model, step, settings.crossing)?;
    let n_trials = settings.n_trials;
    let counts = run_pairs(
        &backend,
        settings.seed,
        n_trials,
        |scanner, pair, acc: &mut TailCounts| {
            let mut n = [0usize; 2];
            let mut cut = [false; 2];
            for i in 0..2 {
                let trial = 2 * pair + i as u64;
                if trial as usize >= n_trials {
                    continue;
                }
                let draw = horizon.sample(&mut substream(settings.seed, Purpose::Horizon, trial));
                let wanted = n_points_for(draw.value, step);
                n[i] = wanted.min(budget);
                cut[i] = draw.capped || wanted > budget;
            }
            let first = scanner.pair(pair, n, u)?;
            for i in 0..2 {
                if n[i] == 0 {
                    continue;
                }
                match first[i] {
                    Some(_) => acc.hits += 1,
                    None if cut[i] => acc.unresolved += 1,
                    None => {}
                }
            }
            Ok(())
        },
        |a, b| {
            a.hits += b.hits;
            a.unresolved += b.unresolved;
        },
    )?;
    Ok(McEstimate::new(
        counts.hits,
        n_trials as u64,
        step,
        horizon.truncated_mass(),
        counts.unresolved,
        settings.seed,
    ))
}

/// One row of the uniform-convergence suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma43Row {
    pub x: f64,
    /// Interval length `x m(u)`.
    pub span: f64,
    /// Estimate of the non-exceedance probability.
    pub estimate: McEstimate,
    /// `e^{-x}`, or `Phi(u)` for the single point `x = 0`.
    pub target: f64,
}

impl Lemma43Row {
    pub fn deviation(&self) -> f64 {
        (self.estimate.probability - self.target).abs()
    }

    /// `|estimate - target| <= max(3 * ci95, floor)`.
    pub fn within(&self, floor: f64) -> bool {
        self.deviation() <= (3.0 * self.estimate.ci95_half_width).max(floor)
    }
}

pub const LEMMA43_MIN_LEVEL: f64 = 2.5;
pub const LEMMA43_X_RANGE: (f64, f64) = (0.25, 4.0);

/// `P(sup_{[0, x m(u)]} X <= u)` for each `x`, all from the same paths on
/// `[0, max x m(u)]`. `x = 0` is the single point `{0}`.
pub fn lemma43_check(
    model: &CovarianceModel,
    u: f64,
    x_values: &[f64],
    settings: &McSettings,
    h_alpha: f64,
) -> Result<Vec<Lemma43Row>> {
    settings.validate()?;
    if !(u >= LEMMA43_MIN_LEVEL) {
        return Err(Error::invalid("u", format!("{u} is below {LEMMA43_MIN_LEVEL}")));
    }
    if x_values.is_empty() {
        return Err(Error::invalid("x_values", "must not be empty"));
    }
    let (lo, hi) = LEMMA43_X_RANGE;
    if let Some(x) = x_values.iter().find(|&&x| !(x == 0.0 || (lo..=hi).contains(&x))) {
        return Err(Error::invalid("x_values", format!("{x} is outside {{0}} and [{lo}, {hi}]")));
    }
    let m = asymptotics::m_scale(u, model, h_alpha)?;
    let step = settings.policy.step(u, model.alpha());
    let ends: Vec<usize> = x_values.iter().map(|&x| n_points_for(x * m, step)).collect();
    let n_max = *ends.iter().max().unwrap();
    if n_max > settings.memory_budget {
        let x = x_values.iter().cloned().fold(0.0, f64::max);
        return Err(Error::Budget {
            points: n_max as u64,
            budget: settings.memory_budget,
            context: format!("x={x}, u={u}: span {} at step {step}", x * m),
        });
    }
    let backend = Backend::new(model, step, settings.crossing)?;
    let n_trials = settings.n_trials;
    let survivors = run_pairs(
        &backend,
        settings.seed,
        n_trials,
        |scanner, pair, acc: &mut Vec<u64>| {
            if acc.is_empty() {
                acc.resize(ends.len(), 0);
            }
            let mut n = [n_max; 2];
            if 2 * pair + 1 >= n_trials as u64 {
                n[1] = 0;
            }
            let first = scanner.pair(pair, n, u)?;
            for i in 0..2 {
                if n[i] == 0 {
                    continue;
                }
                for (s, &end) in acc.iter_mut().zip(&ends) {
                    // no exceedance among the first `end` grid points
                    if first[i].map_or(true, |k| k >= end) {
                        *s += 1;
                    }
                }
            }
            Ok(())
        },
        |a, b| {
            if a.is_empty() {
                *a = b;
            } else {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            }
        },
    )?;
    Ok(x_values
        .iter()
        .zip(&survivors)
        .map(|(&x, &s)| Lemma43Row {
            x,
            span: x * m,
            estimate: McEstimate::new(s, n_trials as u64, step, 0.0, 0, settings.seed),
            target: if x == 0.0 { phi_cdf(u) } else { (-x).exp() },
        })
        .collect())
}

/// One level of a regime sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub u: f64,
    pub mc: McEstimate,
    pub asymptotic: AsymptoticResult,
    /// The value compared against: the closed form for deterministic and
    /// integrable horizons, the scale form `P(T > m(u))`-based one otherwise.
    pub target: f64,
    pub ratio: f64,
    /// `bracket_ci` of the estimate.
    pub bracket: (f64, f64),
}

impl SweepRow {
    pub fn target_in_bracket(&self) -> bool {
        self.bracket.0 <= self.target && self.target <= self.bracket.1
    }
}

/// Monte Carlo against asymptotics along increasing levels, on common
/// random numbers across levels.
pub fn regime_sweep(
    model: &CovarianceModel,
    horizon: &HorizonDistribution,
    u_values: &[f64],
    settings: &McSettings,
    h_alpha: f64,
) -> Result<Vec<SweepRow>> {
    if u_values.is_empty() {
        return Err(Error::invalid("u_values", "must not be empty"));
    }
    if u_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("u_values", "must be strictly increasing"));
    }
    u_values
        .iter()
        .map(|&u| {
            let asymptotic = asymptotics::dispatch(u, model, horizon, h_alpha)?;
            let target = asymptotic.scale_form.unwrap_or(asymptotic.value);
            let mc = estimate_sup_tail(model, horizon, u, settings)?;
            Ok(SweepRow {
                u,
                ratio: mc.probability / target,
                bracket: mc.bracket_ci(),
                mc,
                asymptotic,
                target,
            })
        })
        .collect()
}
