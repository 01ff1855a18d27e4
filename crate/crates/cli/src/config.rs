//! Experiment configuration (TOML).
//!
//! Relative paths inside the file (tables, the Pickands cache, `out_dir`)
//! resolve against the directory holding the config file.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use gpsup_core::mc::{Crossing, GridPolicy, McSettings, DEFAULT_MEMORY_BUDGET};
use gpsup_core::pickands::{ExtrapolationPolicy, HorizonFit};
use gpsup_core::{CovTable, CovarianceModel, Error, HorizonDistribution, Regime, TailTable};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub u_values: Vec<f64>,
    pub n_trials: Option<usize>,
    pub memory_budget: Option<usize>,
    pub model: ModelSpec,
    pub horizon: Option<HorizonSpec>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub pickands: PickandsSpec,
    #[serde(default)]
    pub lemma43: Lemma43Spec,
    #[serde(default)]
    pub check: CheckSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    StableExp,
    Ou,
    Custom,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: FamilyName,
    pub alpha: Option<f64>,
    pub c: Option<f64>,
    /// CSV with columns `t,r` (custom family).
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HorizonName {
    Deterministic,
    Exponential,
    Pareto,
    LogPareto,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum RegimeName {
    D1,
    D2,
    D3,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonSpec {
    pub kind: HorizonName,
    pub t0: Option<f64>,
    pub mean: Option<f64>,
    pub lambda: Option<f64>,
    pub cap: Option<f64>,
    /// CSV with columns `t,p` giving `P(T > t)` (custom kind).
    pub table: Option<PathBuf>,
    pub regime: Option<RegimeName>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CrossingName {
    #[default]
    Grid,
    Bridge,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub a_coef: f64,
    pub step_cap: f64,
    pub crossing: CrossingName,
}

impl Default for GridSpec {
    fn default() -> Self {
        let p = GridPolicy::default();
        GridSpec {
            a_coef: p.a_coef,
            step_cap: p.step_cap,
            crossing: CrossingName::Grid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitName {
    Slope,
    Curvature,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PickandsSpec {
    /// Defaults to the model's alpha.
    pub alpha: Option<f64>,
    pub s_ladder: Option<Vec<f64>>,
    pub steps: Option<Vec<f64>>,
    pub n_paths: Option<usize>,
    pub tolerance: Option<f64>,
    pub fit: Option<FitName>,
    pub control_variate: Option<bool>,
    /// Defaults to `<out_dir>/pickands_cache.csv`.
    pub cache: Option<PathBuf>,
    /// Explicit `H_alpha`, bypassing closed forms and cache.
    pub h_alpha: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Lemma43Spec {
    /// Defaults to the top-level `u_values`.
    pub u_values: Option<Vec<f64>>,
    pub x_values: Vec<f64>,
    /// Absolute tolerance floor next to `3 * ci95`.
    pub floor: f64,
}

impl Default for Lemma43Spec {
    fn default() -> Self {
        Lemma43Spec {
            u_values: None,
            x_values: vec![0.5, 1.0, 2.0],
            floor: 0.05,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckSpec {
    pub t_max: f64,
    pub n_probe: usize,
}

impl Default for CheckSpec {
    fn default() -> Self {
        CheckSpec {
            t_max: 100.0,
            n_probe: 200,
        }
    }
}

/// Parsed config with its source location and hash.
#[derive(Debug, Clone)]
pub struct Config {
    pub raw: RawConfig,
    pub base_dir: PathBuf,
    /// `sha256("blob <len>\0" + bytes)`, the git object id of the file.
    pub hash: String,
}

pub fn git_blob_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

fn field(path: &str, reason: impl Into<String>) -> CliError {
    CliError::Field {
        path: path.to_string(),
        reason: reason.into(),
    }
}

/// Rewrites a core validation error as a field error under `section`.
fn under(section: &str, e: Error) -> CliError {
    match e {
        Error::InvalidParameter { field: f, reason } if f.starts_with(&format!("{section}.")) => field(&f, reason),
        Error::InvalidParameter { field: f, reason } => field(&format!("{section}.{f}"), reason),
        Error::Config(reason) | Error::Regime(reason) => field(section, reason),
        other => CliError::Core {
            context: format!("building `{section}`"),
            source: other,
        },
    }
}

fn need<T: Copy>(v: Option<T>, path: &str, why: &str) -> Result<T, CliError> {
    v.ok_or_else(|| field(path, format!("required {why}")))
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let text = std::str::from_utf8(&bytes).map_err(|_| field("<file>", "config is not UTF-8"))?;
        Self::parse(text, path.parent().unwrap_or(Path::new(".")), git_blob_hash(&bytes))
    }

    pub fn parse(text: &str, base_dir: &Path, hash: String) -> Result<Config, CliError> {
        let de = toml::Deserializer::parse(text).map_err(|e| field("<file>", e.message().to_string()))?;
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let msg = e.inner().message().to_string();
            field(if path == "." { "<root>" } else { &path }, msg)
        })?;
        Ok(Config {
            raw,
            base_dir: base_dir.to_path_buf(),
            hash,
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn model(&self) -> Result<CovarianceModel, CliError> {
        let m = &self.raw.model;
        let c = m.c.unwrap_or(1.0);
        let built = match m.family {
            FamilyName::StableExp => {
                let alpha = need(m.alpha, "model.alpha", "for family = stable-exp")?;
                CovarianceModel::stable_exp(alpha, c)
            }
            FamilyName::Ou => {
                if m.alpha.is_some_and(|a| a != 1.0) {
                    return Err(field("model.alpha", "the ou family has alpha = 1"));
                }
                CovarianceModel::ornstein_uhlenbeck(c)
            }
            FamilyName::Custom => {
                let alpha = need(m.alpha, "model.alpha", "for family = custom")?;
                let c = need(m.c, "model.c", "for family = custom")?;
                let table = m
                    .table
                    .as_ref()
                    .ok_or_else(|| field("model.table", "required for family = custom"))?;
                let table = CovTable::from_csv(&self.resolve(table)).map_err(|e| under("model.table", e))?;
                CovarianceModel::custom(table, alpha, c)
            }
        };
        built.map_err(|e| under("model", e))
    }

    pub fn horizon(&self) -> Result<HorizonDistribution, CliError> {
        let h = self
            .raw
            .horizon
            .as_ref()
            .ok_or_else(|| field("horizon", "section required by this subcommand"))?;
        let built = match h.kind {
            HorizonName::Deterministic => {
                HorizonDistribution::deterministic(need(h.t0, "horizon.t0", "for kind = deterministic")?)
            }
            HorizonName::Exponential => {
                HorizonDistribution::exponential(need(h.mean, "horizon.mean", "for kind = exponential")?)
            }
            HorizonName::Pareto => HorizonDistribution::pareto(need(h.lambda, "horizon.lambda", "for kind = pareto")?),
            HorizonName::LogPareto => Ok(HorizonDistribution::log_pareto()),
            HorizonName::Custom => {
                let table = h
                    .table
                    .as_ref()
                    .ok_or_else(|| field("horizon.table", "required for kind = custom"))?;
                let regime = match need(h.regime, "horizon.regime", "for kind = custom")? {
                    RegimeName::D1 => Regime::D1,
                    RegimeName::D2 => Regime::D2,
                    RegimeName::D3 => Regime::D3,
                };
                let table = TailTable::from_csv(&self.resolve(table)).map_err(|e| under("horizon.table", e))?;
                HorizonDistribution::custom_tail(table, regime, h.lambda)
            }
        };
        let mut dist = built.map_err(|e| under("horizon", e))?;
        if let Some(cap) = h.cap {
            dist = dist.with_cap(cap).map_err(|e| under("horizon", e))?;
        }
        Ok(dist)
    }

    pub fn u_values(&self) -> Result<&[f64], CliError> {
        check_levels(&self.raw.u_values, "u_values")?;
        Ok(&self.raw.u_values)
    }

    pub fn lemma43_u_values(&self) -> Result<&[f64], CliError> {
        match &self.raw.lemma43.u_values {
            Some(u) => {
                check_levels(u, "lemma43.u_values")?;
                Ok(u)
            }
            None => self.u_values(),
        }
    }

    pub fn mc_settings(&self, seed: u64) -> Result<McSettings, CliError> {
        let n = need(self.raw.n_trials, "n_trials", "for Monte Carlo subcommands")?;
        let g = &self.raw.grid;
        let policy = GridPolicy::new(g.a_coef, g.step_cap).map_err(|e| under("grid", e))?;
        let mut s = McSettings::new(n, policy, seed).with_crossing(match g.crossing {
            CrossingName::Grid => Crossing::Grid,
            CrossingName::Bridge => Crossing::Bridge,
        });
        s.memory_budget = self.raw.memory_budget.unwrap_or(DEFAULT_MEMORY_BUDGET);
        if s.memory_budget < 2 {
            return Err(field("memory_budget", "must allow at least two grid points"));
        }
        if n < gpsup_core::mc::MIN_TRIALS {
            return Err(field(
                "n_trials",
                format!("{n} is below the minimum {}", gpsup_core::mc::MIN_TRIALS),
            ));
        }
        Ok(s)
    }

    pub fn pickands_alpha(&self, model: &CovarianceModel) -> f64 {
        self.raw.pickands.alpha.unwrap_or(model.alpha())
    }

    pub fn pickands_policy(&self, alpha: f64, seed: u64) -> Result<ExtrapolationPolicy, CliError> {
        let p = &self.raw.pickands;
        let mut policy = ExtrapolationPolicy::default_for(alpha, seed).map_err(|e| under("pickands", e))?;
        if let Some(s) = &p.s_ladder {
            policy.s_ladder = s.clone();
        }
        if let Some(s) = &p.steps {
            policy.steps = s.clone();
        }
        if let Some(n) = p.n_paths {
            policy.n_paths = n;
        }
        if let Some(t) = p.tolerance {
            policy.tolerance = t;
        }
        if let Some(f) = p.fit {
            policy.fit = match f {
                FitName::Slope => HorizonFit::Slope,
                FitName::Curvature => HorizonFit::Curvature,
            };
        }
        if let Some(cv) = p.control_variate {
            policy.control_variate = cv;
        }
        policy.validate().map_err(|e| under("pickands", e))?;
        Ok(policy)
    }

    pub fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        match (flag, &self.raw.out_dir) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(p)) => self.resolve(p),
            (None, None) => PathBuf::from("gpsup-out"),
        }
    }

    pub fn cache_path(&self, out_dir: &Path) -> PathBuf {
        match &self.raw.pickands.cache {
            Some(p) => self.resolve(p),
            None => out_dir.join("pickands_cache.csv"),
        }
    }
}

fn check_levels(u: &[f64], path: &str) -> Result<(), CliError> {
    if u.is_empty() {
        return Err(field(path, "must not be empty"));
    }
    if let Some(x) = u.iter().find(|x| !x.is_finite()) {
        return Err(field(path, format!("{x} is not finite")));
    }
    if u.windows(2).any(|w| w[1] <= w[0]) {
        return Err(field(path, "must be strictly increasing"));
    }
    Ok(())
}
