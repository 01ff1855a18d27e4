//! Monte Carlo estimation of the Pickands constant
//! `H_alpha = lim_{S -> inf} H_alpha(S) / S`, where
//! `H_alpha(S) = E exp(sup_{[0,S]} sqrt(2) B_alpha(t) - t^alpha)` and `B_alpha`
//! is fractional Brownian motion with Hurst index `alpha / 2`.
//!
//! `H_alpha(S)` grows like `H_alpha S + c_alpha`, so the rate is read off as
//! the slope between ladder points rather than as `H_alpha(S) / S`, and the
//! one-sided grid bias is removed by Richardson extrapolation in the step.
//! All ladder points come from the same paths (common random numbers).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{substream, Purpose};
use crate::sim::{FbmSampler, GridSpec};
use crate::stats::Moments;

pub const MIN_PATHS: usize = 100;
pub const MAX_STEP: f64 = 0.05;
pub const DEFAULT_PATHS: usize = 2_000_000;
pub const DEFAULT_STEPS: [f64; 2] = [0.02, 0.01];
pub const DEFAULT_TOLERANCE: f64 = 0.1;
pub const MAX_HORIZON: f64 = 8.0;
const DEFAULT_EXPONENT_LADDER: [f64; 3] = [1.0, 2.0, 3.0];
const PAIRS_PER_CHUNK: usize = 256;

/// Closed-form Pickands constants: `H_1 = 1`, `H_2 = 1 / sqrt(pi)`.
pub fn known_pickands(alpha: f64) -> Option<f64> {
    if alpha == 1.0 {
        Some(1.0)
    } else if alpha == 2.0 {
        Some(1.0 / std::f64::consts::PI.sqrt())
    } else {
        None
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::invalid("alpha", format!("{alpha} is outside (0, 2]")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PickandsEstimate {
    pub alpha: f64,
    pub s_horizon: f64,
    pub grid_step: f64,
    pub n_paths: usize,
    pub h_of_s: f64,
    pub h_rate: f64,
    pub std_error: f64,
    /// Largest single-path share of the sample sum of `exp(sup)`; values
    /// near one flag a mean carried by a handful of paths.
    pub max_weight_share: f64,
}

/// Estimate of `H_alpha(S)` on a grid of spacing `grid_step`.
///
/// A horizon shorter than one step leaves the single point `{0}` and gives
/// exactly one.
pub fn estimate_h_of_s(alpha: f64, s_horizon: f64, grid_step: f64, n_paths: usize, seed: u64) -> Result<PickandsEstimate> {
    check_alpha(alpha)?;
    if !(s_horizon >= 0.0 && s_horizon.is_finite()) {
        return Err(Error::invalid("s_horizon", format!("{s_horizon} must be finite and nonnegative")));
    }
    check_steps(&[grid_step])?;
    if n_paths < MIN_PATHS {
        return Err(Error::invalid("n_paths", format!("{n_paths} is below the minimum {MIN_PATHS}")));
    }
    if s_horizon < grid_step {
        return Ok(PickandsEstimate {
            alpha,
            s_horizon,
            grid_step,
            n_paths,
            h_of_s: 1.0,
            h_rate: if s_horizon > 0.0 { 1.0 / s_horizon } else { f64::INFINITY },
            std_error: 0.0,
            max_weight_share: 1.0 / n_paths as f64,
        });
    }
    let sums = simulate(alpha, &[s_horizon], &[grid_step], &[], n_paths, seed, false)?;
    Ok(sums.point(0, 0))
}

/// How the rate is read off the extrapolated `H(S)` ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HorizonFit {
    /// Slope between the two largest horizons.
    Slope,
    /// `H S + c + d / S` through the three largest horizons, which also
    /// removes the leading finite-horizon curvature of `H(S) - H S`.
    Curvature,
}

impl fmt::Display for HorizonFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HorizonFit::Slope => "slope",
            HorizonFit::Curvature => "curvature",
        })
    }
}

/// Ladder of horizons and grid steps for [`estimate_pickands`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationPolicy {
    /// Increasing horizons.
    pub s_ladder: Vec<f64>,
    /// Decreasing grid steps; each must be an integer multiple of the last.
    pub steps: Vec<f64>,
    pub n_paths: usize,
    /// Relative Cauchy tolerance between the last two rate estimates.
    pub tolerance: f64,
    pub seed: u64,
    pub fit: HorizonFit,
    /// Subtract `exp(sqrt(2) B(S) - S^alpha) - 1`, which has mean exactly
    /// zero and tracks the paths whose supremum sits near the endpoint.
    pub control_variate: bool,
}

impl ExtrapolationPolicy {
    /// Horizons with `S^alpha` in {1, 2, 3} (capped at 8 and rounded to the
    /// coarse grid), steps {0.02, 0.01}, 2e6 paths, curvature fit with the
    /// endpoint control variate.
    ///
    /// The second moment of `exp(sup)` grows like `exp(2 S^alpha)`, so the
    /// horizons scale with `1 / alpha` to keep the variance comparable.
    pub fn default_for(alpha: f64, seed: u64) -> Result<Self> {
        check_alpha(alpha)?;
        let coarse = DEFAULT_STEPS[0];
        let round = |s: f64| ((s / coarse).round() * coarse).clamp(1.0, MAX_HORIZON);
        let mut s_ladder: Vec<f64> = DEFAULT_EXPONENT_LADDER.iter().map(|&v| round(v.powf(1.0 / alpha))).collect();
        if s_ladder[2] == MAX_HORIZON {
            s_ladder = vec![MAX_HORIZON / 4.0, MAX_HORIZON / 2.0, MAX_HORIZON];
        }
        s_ladder.dedup();
        Ok(ExtrapolationPolicy {
            s_ladder,
            steps: DEFAULT_STEPS.to_vec(),
            n_paths: DEFAULT_PATHS,
            tolerance: DEFAULT_TOLERANCE,
            seed,
            fit: HorizonFit::Curvature,
            control_variate: true,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.s_ladder.is_empty() {
            return Err(Error::invalid("s_ladder", "must not be empty"));
        }
        if self.s_ladder.iter().any(|s| !(s.is_finite() && *s >= 1.0)) {
            return Err(Error::invalid("s_ladder", "horizons must be finite and at least 1"));
        }
        if self.s_ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("s_ladder", "must be strictly increasing"));
        }
        check_steps(&self.steps)?;
        let fine = *self.steps.last().unwrap();
        if self.s_ladder.windows(2).any(|w| on_grid(w[1], fine) <= on_grid(w[0], fine)) {
            return Err(Error::invalid("s_ladder", "horizons collapse onto the same grid point"));
        }
        if self.n_paths < MIN_PATHS {
            return Err(Error::invalid("n_paths", format!("{} is below the minimum {MIN_PATHS}", self.n_paths)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance", "must be positive"));
        }
        Ok(())
    }
}

/// Last grid time at or below `s`.
fn on_grid(s: f64, step: f64) -> f64 {
    (s / step + 1e-9).floor() * step
}

fn check_steps(steps: &[f64]) -> Result<()> {
    if steps.is_empty() {
        return Err(Error::invalid("steps", "must not be empty"));
    }
    if steps.iter().any(|h| !(*h > 0.0 && *h <= MAX_STEP)) {
        return Err(Error::invalid("steps", format!("grid steps must lie in (0, {MAX_STEP}]")));
    }
    if steps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("steps", "must be strictly decreasing"));
    }
    let fine = *steps.last().unwrap();
    for &h in steps {
        let k = (h / fine).round();
        if (k * fine - h).abs() > 1e-9 * h {
            return Err(Error::invalid("steps", format!("{h} is not an integer multiple of {fine}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderWarning {
    /// One horizon: the rate is `H(S) / S`, boundary term included.
    SinglePoint,
    /// Two horizons: one slope, nothing to check it against.
    Unchecked,
    /// One grid step: no extrapolation in the step.
    SingleStep,
}

impl fmt::Display for LadderWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LadderWarning::SinglePoint => "single-point ladder",
            LadderWarning::Unchecked => "two-point ladder, convergence unchecked",
            LadderWarning::SingleStep => "single grid step, no step extrapolation",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Increasing,
    Decreasing,
    Mixed,
    Flat,
}

fn trend(xs: &[f64]) -> Trend {
    let up = xs.windows(2).all(|w| w[1] >= w[0]);
    let down = xs.windows(2).all(|w| w[1] <= w[0]);
    match (up, down) {
        (true, true) => Trend::Flat,
        (true, false) => Trend::Increasing,
        (false, true) => Trend::Decreasing,
        (false, false) => Trend::Mixed,
    }
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trend::Increasing => "increasing",
            Trend::Decreasing => "decreasing",
            Trend::Mixed => "mixed",
            Trend::Flat => "flat",
        })
    }
}

/// Result of [`estimate_pickands`].
#[derive(Debug, Clone, PartialEq)]
pub struct PickandsResult {
    /// Final estimate: `h_rate` is the last entry of `rates`, `h_of_s` the
    /// step-extrapolated `H(S)` at the largest horizon.
    pub estimate: PickandsEstimate,
    /// Plain `H(S)` for every (horizon, step), horizons outermost.
    pub ladder: Vec<PickandsEstimate>,
    /// Step-extrapolated `H(S)` per horizon.
    pub extrapolated: Vec<f64>,
    /// Rate estimates with standard errors: slopes between consecutive
    /// horizons, then the curvature fit when requested.
    pub rates: Vec<(f64, f64)>,
    /// `H(S) / S` at the finest step; decreasing in `S` while the boundary
    /// term dominates.
    pub naive_rates: Vec<f64>,
    pub naive_trend: Trend,
    pub warnings: Vec<LadderWarning>,
}

/// Weights `w` with `sum w_i S_i = 1`, `sum w_i = 0`, `sum w_i / S_i = 0`.
fn curvature_weights(s: [f64; 3]) -> [f64; 3] {
    let m = [
        [s[0], s[1], s[2]],
        [1.0, 1.0, 1.0],
        [1.0 / s[0], 1.0 / s[1], 1.0 / s[2]],
    ];
    let det3 = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let d = det3(m);
    let mut w = [0.0; 3];
    for (i, wi) in w.iter_mut().enumerate() {
        // Cramer's rule with right-hand side (1, 0, 0)
        let mut a = m;
        for row in a.iter_mut() {
            row[i] = 0.0;
        }
        a[0][i] = 1.0;
        *wi = det3(a) / d;
    }
    w
}

/// `H_alpha` from the growth of `H_alpha(S)` across the policy ladder.
///
/// Errors with every rate estimate when the last two differ by more than the
/// policy tolerance.
pub fn estimate_pickands(alpha: f64, policy: &ExtrapolationPolicy) -> Result<PickandsResult> {
    check_alpha(alpha)?;
    policy.validate()?;
    let (s, steps) = (&policy.s_ladder, &policy.steps);
    let fine = *steps.last().unwrap();
    let s_eff: Vec<f64> = s.iter().map(|&x| on_grid(x, fine)).collect();
    // H_ext(S) = sum_j step_weights[j] H(S, steps[j]), error of order step^{alpha/2}
    let step_weights: Vec<f64> = match steps.len() {
        1 => vec![1.0],
        n => {
            let rho = (steps[n - 2] / steps[n - 1]).powf(0.5 * alpha);
            let mut w = vec![0.0; n];
            w[n - 2] = -1.0 / (rho - 1.0);
            w[n - 1] = rho / (rho - 1.0);
            w
        }
    };
    let n_combo = s.len() * steps.len();
    let mut linear: Vec<Vec<f64>> = (0..s.len())
        .map(|i| {
            let mut w = vec![0.0; n_combo];
            w[i * steps.len()..(i + 1) * steps.len()].copy_from_slice(&step_weights);
            w
        })
        .collect();
    let combine = |coef: &[(usize, f64)], linear: &[Vec<f64>]| -> Vec<f64> {
        (0..n_combo).map(|c| coef.iter().map(|&(i, a)| a * linear[i][c]).sum()).collect()
    };
    for i in 1..s.len() {
        let ds = s_eff[i] - s_eff[i - 1];
        let w = combine(&[(i, 1.0 / ds), (i - 1, -1.0 / ds)], &linear);
        linear.push(w);
    }
    let curvature = policy.fit == HorizonFit::Curvature && s.len() >= 3;
    if curvature {
        let k = s.len();
        let cw = curvature_weights([s_eff[k - 3], s_eff[k - 2], s_eff[k - 1]]);
        let w = combine(&[(k - 3, cw[0]), (k - 2, cw[1]), (k - 1, cw[2])], &linear);
        linear.push(w);
    }
    let sums = simulate(alpha, s, steps, &linear, policy.n_paths, policy.seed, policy.control_variate)?;

    let ladder: Vec<PickandsEstimate> = (0..s.len())
        .flat_map(|i| (0..steps.len()).map(move |j| (i, j)))
        .map(|(i, j)| sums.point(i, j))
        .collect();
    let extrapolated: Vec<f64> = (0..s.len()).map(|i| sums.linear[i].mean()).collect();
    let rates: Vec<(f64, f64)> = (s.len()..linear.len())
        .map(|k| (sums.linear[k].mean(), sums.linear[k].std_error()))
        .collect();
    let naive_rates: Vec<f64> = (0..s.len()).map(|i| ladder[(i + 1) * steps.len() - 1].h_rate).collect();

    let mut warnings = Vec::new();
    if steps.len() == 1 {
        warnings.push(LadderWarning::SingleStep);
    }
    let last = s.len() - 1;
    let (h_rate, std_error) = match rates.len() {
        0 => {
            warnings.push(LadderWarning::SinglePoint);
            (extrapolated[0] / s_eff[0], sums.linear[0].std_error() / s_eff[0])
        }
        1 => {
            warnings.push(LadderWarning::Unchecked);
            rates[0]
        }
        n => {
            let (a, b) = (rates[n - 2].0, rates[n - 1].0);
            if !((b - a).abs() <= policy.tolerance * b.abs()) {
                return Err(Error::NonConvergence {
                    rates: rates.iter().map(|r| r.0).collect(),
                    tolerance: policy.tolerance,
                });
            }
            rates[n - 1]
        }
    };
    Ok(PickandsResult {
        estimate: PickandsEstimate {
            alpha,
            s_horizon: s[last],
            grid_step: fine,
            n_paths: policy.n_paths,
            h_of_s: extrapolated[last],
            h_rate,
            std_error,
            max_weight_share: ladder[ladder.len() - 1].max_weight_share,
        },
        naive_trend: trend(&naive_rates),
        ladder,
        extrapolated,
        rates,
        naive_rates,
        warnings,
    })
}

struct LadderSums {
    alpha: f64,
    s: Vec<f64>,
    steps: Vec<f64>,
    n_paths: usize,
    raw: Vec<Moments>,
    linear: Vec<Moments>,
}

impl LadderSums {
    fn point(&self, i: usize, j: usize) -> PickandsEstimate {
        let m = &self.raw[i * self.steps.len() + j];
        let s_eff = on_grid(self.s[i], *self.steps.last().unwrap());
        PickandsEstimate {
            alpha: self.alpha,
            s_horizon: self.s[i],
            grid_step: self.steps[j],
            n_paths: self.n_paths,
            h_of_s: m.mean(),
            h_rate: m.mean() / s_eff,
            std_error: m.std_error(),
            max_weight_share: m.max() / m.sum(),
        }
    }
}

/// Samples `n_paths` fBm paths on `[0, max S]` at the finest step and
/// accumulates `exp(sup)` for every (horizon, step) pair, plus linear
/// combinations of the (optionally controlled) values.
///
/// Paths come in pairs from one substream per pair; chunks of pairs are
/// merged in index order, so the result does not depend on the thread count.
fn simulate(
    alpha: f64,
    s: &[f64],
    steps: &[f64],
    linear: &[Vec<f64>],
    n_paths: usize,
    seed: u64,
    control: bool,
) -> Result<LadderSums> {
    let fine = *steps.last().unwrap();
    let strides: Vec<usize> = steps.iter().map(|h| (h / fine).round() as usize).collect();
    let ends: Vec<usize> = s.iter().map(|&x| (on_grid(x, fine) / fine).round() as usize).collect();
    let n_points = ends.iter().max().unwrap() + 1;
    let grid = GridSpec::new(fine, n_points)?;
    let drift: Vec<f64> = (0..n_points).map(|k| grid.time(k).powf(alpha)).collect();
    // surface embedding failures once, before fanning out
    drop(FbmSampler::new(0.5 * alpha, grid)?);

    let n_combo = s.len() * steps.len();
    let n_pairs = n_paths.div_ceil(2);
    let n_chunks = n_pairs.div_ceil(PAIRS_PER_CHUNK);
    let chunks: Vec<(Vec<Moments>, Vec<Moments>)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| -> Result<_> {
            let mut sampler = FbmSampler::new(0.5 * alpha, grid)?;
            let mut raw = vec![Moments::default(); n_combo];
            let mut lin = vec![Moments::default(); linear.len()];
            let mut values = vec![0.0; n_combo];
            let mut controlled = vec![0.0; n_combo];
            let first = c * PAIRS_PER_CHUNK;
            for pair in first..(first + PAIRS_PER_CHUNK).min(n_pairs) {
                let mut rng = substream(seed, Purpose::Pickands, pair as u64);
                let (a, b) = sampler.sample_pair(&mut rng);
                let paths: &[&[f64]] = if 2 * pair + 1 < n_paths { &[a, b] } else { &[a] };
                for path in paths {
                    let y = |k: usize| std::f64::consts::SQRT_2 * path[k] - drift[k];
                    for (j, &stride) in strides.iter().enumerate() {
                        // running sup along this step's grid, read off at each horizon
                        let mut sup = f64::NEG_INFINITY;
                        let mut k = 0;
                        for (i, &end) in ends.iter().enumerate() {
                            while k <= end {
                                sup = sup.max(y(k));
                                k += stride;
                            }
                            let c = i * strides.len() + j;
                            values[c] = sup.exp();
                            controlled[c] = if control { values[c] - y(end).exp_m1() } else { values[c] };
                        }
                    }
                    for (m, &v) in raw.iter_mut().zip(&values) {
                        m.push(v);
                    }
                    for (m, w) in lin.iter_mut().zip(linear) {
                        m.push(w.iter().zip(&controlled).map(|(a, b)| a * b).sum());
                    }
                }
            }
            Ok((raw, lin))
        })
        .collect::<Result<_>>()?;

    let mut raw = vec![Moments::default(); n_combo];
    let mut lin = vec![Moments::default(); linear.len()];
    for (r, l) in &chunks {
        raw.iter_mut().zip(r).for_each(|(a, b)| a.merge(b));
        lin.iter_mut().zip(l).for_each(|(a, b)| a.merge(b));
    }
    Ok(LadderSums {
        alpha,
        s: s.to_vec(),
        steps: steps.to_vec(),
        n_paths,
        raw,
        linear: lin,
    })
}

/// On-disk table of Pickands estimates, one row per
/// (alpha, S, step, n_paths, seed).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PickandsCache {
    rows: BTreeMap<CacheKey, CacheRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct CacheKey {
    alpha: u64,
    s: u64,
    step: u64,
    n_paths: usize,
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheRow {
    pub alpha: f64,
    pub s_horizon: f64,
    pub grid_step: f64,
    pub n_paths: usize,
    pub h_rate: f64,
    pub std_error: f64,
    pub seed: u64,
}

pub const CACHE_HEADER: [&str; 7] = ["alpha", "S", "step", "n_paths", "h_rate", "std_error", "seed"];

impl PickandsCache {
    /// Reads `path`, or starts empty when it does not exist.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cache = PickandsCache::default();
        if !path.exists() {
            return Ok(cache);
        }
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
        let header = reader.headers().map_err(csv_err)?.clone();
        if header.iter().collect::<Vec<_>>() != CACHE_HEADER {
            return Err(Error::Config(format!(
                "{}: expected header {}",
                path.display(),
                CACHE_HEADER.join(",")
            )));
        }
        for rec in reader.records() {
            let rec = rec.map_err(csv_err)?;
            let f = |i: usize| -> Result<f64> {
                rec[i].trim().parse().map_err(|_| {
                    Error::Config(format!("{}: bad {} value '{}'", path.display(), CACHE_HEADER[i], &rec[i]))
                })
            };
            let n_paths = f(3)? as usize;
            let seed = rec[6]
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{}: bad seed '{}'", path.display(), &rec[6])))?;
            cache.insert_row(CacheRow {
                alpha: f(0)?,
                s_horizon: f(1)?,
                grid_step: f(2)?,
                n_paths,
                h_rate: f(4)?,
                std_error: f(5)?,
                seed,
            });
        }
        Ok(cache)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(CACHE_HEADER).map_err(csv_err)?;
        for r in self.rows.values() {
            w.write_record([
                r.alpha.to_string(),
                r.s_horizon.to_string(),
                r.grid_step.to_string(),
                r.n_paths.to_string(),
                r.h_rate.to_string(),
                r.std_error.to_string(),
                r.seed.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    fn insert_row(&mut self, row: CacheRow) {
        let key = CacheKey {
            alpha: row.alpha.to_bits(),
            s: row.s_horizon.to_bits(),
            step: row.grid_step.to_bits(),
            n_paths: row.n_paths,
            seed: row.seed,
        };
        self.rows.insert(key, row);
    }

    /// Adds or replaces the row for the estimate's ladder and seed.
    pub fn insert(&mut self, estimate: &PickandsEstimate, seed: u64) {
        self.insert_row(CacheRow {
            alpha: estimate.alpha,
            s_horizon: estimate.s_horizon,
            grid_step: estimate.grid_step,
            n_paths: estimate.n_paths,
            h_rate: estimate.h_rate,
            std_error: estimate.std_error,
            seed,
        });
    }

    pub fn rows(&self) -> impl Iterator<Item = &CacheRow> {
        self.rows.values()
    }

    /// The most precise cached estimate for `alpha`, if any.
    pub fn lookup(&self, alpha: f64) -> Option<&CacheRow> {
        self.rows
            .values()
            .filter(|r| r.alpha == alpha)
            .min_by(|a, b| a.std_error.total_cmp(&b.std_error))
    }
}

/// `H_alpha` from the closed forms, then the cache.
pub fn resolve_h_alpha(alpha: f64, cache: Option<&PickandsCache>) -> Result<f64> {
    check_alpha(alpha)?;
    known_pickands(alpha)
        .or_else(|| cache.and_then(|c| c.lookup(alpha)).map(|r| r.h_rate))
        .ok_or(Error::MissingPickands { alpha })
}
