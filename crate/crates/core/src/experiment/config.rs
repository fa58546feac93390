use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix_oracle::GKind;
use crate::torus::{PotentialSpec, TorusGeometry, TorusModel};

/// Top-level experiment file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Overrides the per-experiment default tolerance.
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    pub experiment: Experiment,
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: String,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Identities(IdentitiesParams),
    Torus(TorusParams),
    SumRules(SumRulesParams),
    Bounds(BoundsParams),
    Riesz(RieszParams),
    Lt(LtParams),
    Circle(CircleParams),
    Sphere(SphereParams),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Identities(_) => "identities",
            Experiment::Torus(_) => "torus",
            Experiment::SumRules(_) => "sum-rules",
            Experiment::Bounds(_) => "bounds",
            Experiment::Riesz(_) => "riesz",
            Experiment::Lt(_) => "lt",
            Experiment::Circle(_) => "circle",
            Experiment::Sphere(_) => "sphere",
        }
    }
}

/// Operator `α(-i∇ + k)² + V` on a rectangular torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub geometry: TorusGeometry,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default)]
    pub k: Option<Vec<f64>>,
    /// Box half-width per axis of the plane-wave basis.
    #[serde(default)]
    pub cutoff: Option<usize>,
}

fn one() -> f64 {
    1.0
}

impl ModelSection {
    pub fn to_model(&self) -> Result<TorusModel> {
        let d = self.geometry.d();
        self.potential.check_dimension(d)?;
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        let mut m = TorusModel::new(self.geometry.clone(), self.potential.clone(), self.alpha);
        if let Some(k) = &self.k {
            self.geometry.check_quasimomentum(k)?;
            m = m.with_k(k.clone());
        }
        if let Some(n) = self.cutoff {
            if n == 0 {
                return Err(Error::Config("cutoff must be at least 1".into()));
            }
            m = m.with_half_width(n);
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitiesParams {
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub g_kind: Option<GKind>,
    #[serde(default = "default_f_sigma")]
    pub f_sigma: f64,
}

fn default_trials() -> u64 {
    100
}
fn default_f_sigma() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusParams {
    pub model: ModelSection,
    /// Number of eigenpairs to report; all when absent.
    #[serde(default)]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumRulesParams {
    pub model: ModelSection,
    pub q: Vec<i64>,
    /// Size of the index set in the periodic identity.
    #[serde(rename = "N")]
    pub n: usize,
    /// Energy for the identity; the midpoint of the gap above `λ_N` when absent.
    #[serde(default)]
    pub z: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundCheck {
    LambdaNext,
    MeanRatio,
    Difference,
    GapPolynomial,
    Legendre,
}

pub const ALL_BOUND_CHECKS: [BoundCheck; 5] = [
    BoundCheck::LambdaNext,
    BoundCheck::MeanRatio,
    BoundCheck::Difference,
    BoundCheck::GapPolynomial,
    BoundCheck::Legendre,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsParams {
    pub model: ModelSection,
    #[serde(default = "one_usize")]
    pub n_min: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "all_checks")]
    pub checks: Vec<BoundCheck>,
}

fn one_usize() -> usize {
    1
}
fn default_n_max() -> usize {
    20
}
fn all_checks() -> Vec<BoundCheck> {
    ALL_BOUND_CHECKS.to_vec()
}

/// `count` points from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Geometric,
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        if self.count == 0 || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::Config(format!("invalid grid {self:?}")));
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let n = (self.count - 1) as f64;
        match self.spacing {
            Spacing::Linear => Ok((0..self.count)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / n)
                .collect()),
            Spacing::Geometric => {
                if !(self.start > 0.0 && self.stop > 0.0) {
                    return Err(Error::Config("geometric grids need positive endpoints".into()));
                }
                let r = (self.stop / self.start).ln() / n;
                Ok((0..self.count).map(|i| self.start * (r * i as f64).exp()).collect())
            }
        }
    }

    /// `start:stop:count` or `start:stop:spacing:count`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |x: &str| {
            x.parse::<f64>()
                .map_err(|_| Error::Config(format!("grid '{s}': '{x}' is not a number")))
        };
        let count = |x: &str| {
            x.parse::<usize>()
                .map_err(|_| Error::Config(format!("grid '{s}': '{x}' is not a point count")))
        };
        match parts.as_slice() {
            [a, b, n] => Ok(GridSpec {
                start: num(a)?,
                stop: num(b)?,
                count: count(n)?,
                spacing: Spacing::Linear,
            }),
            [a, b, sp, n] => Ok(GridSpec {
                start: num(a)?,
                stop: num(b)?,
                count: count(n)?,
                spacing: match *sp {
                    "linear" => Spacing::Linear,
                    "geometric" => Spacing::Geometric,
                    other => return Err(Error::Config(format!("grid '{s}': unknown spacing '{other}'"))),
                },
            }),
            _ => Err(Error::Config(format!(
                "grid '{s}' must read start:stop:count or start:stop:spacing:count"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RieszParams {
    pub model: ModelSection,
    /// Shift `τ`; `αgd/4 - inf V` when absent.
    #[serde(default)]
    pub tau: Option<f64>,
    pub z: GridSpec,
    #[serde(default = "two")]
    pub sigma: f64,
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LtParams {
    pub model: ModelSection,
    #[serde(default)]
    pub z: f64,
    #[serde(default = "two")]
    pub sigma: f64,
    pub alpha: GridSpec,
    /// Multiplier on the shift rate `gd/4`; below 1 probes sharpness.
    #[serde(default = "one")]
    pub shift_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleParams {
    #[serde(default = "default_x_max")]
    pub x_max: u64,
    #[serde(default = "default_grid")]
    pub grid: usize,
}

fn default_x_max() -> u64 {
    10_000
}
fn default_grid() -> usize {
    200
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SphereCheck {
    Reilly,
    Geom,
    Monotone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereParams {
    pub d: usize,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_sphere_n_max")]
    pub n_max: usize,
    #[serde(default = "default_geom_samples")]
    pub geom_samples: usize,
    #[serde(default = "all_sphere_checks")]
    pub checks: Vec<SphereCheck>,
}

fn default_levels() -> usize {
    40
}
fn default_sphere_n_max() -> usize {
    50
}
fn default_geom_samples() -> usize {
    100
}
fn all_sphere_checks() -> Vec<SphereCheck> {
    vec![SphereCheck::Reilly, SphereCheck::Geom, SphereCheck::Monotone]
}

/// Parse an experiment file; unknown keys and malformed values are errors.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    validate(&cfg)?;
    Ok(cfg)
}

/// A model file holding only `geometry` and `potential`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub geometry: TorusGeometry,
    #[serde(default)]
    pub potential: PotentialSpec,
}

pub fn parse_model_file(text: &str) -> Result<ModelFile> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

/// Range checks on every numeric field.
pub fn validate(cfg: &ExperimentConfig) -> Result<()> {
    if let Some(t) = cfg.tolerance {
        check(t.is_finite() && t >= 0.0 && t < 1.0, || format!("tolerance {t} outside [0, 1)"))?;
    }
    match &cfg.experiment {
        Experiment::Identities(p) => {
            check((1..=1_000_000).contains(&p.trials), || format!("trials {} outside 1..=1000000", p.trials))?;
            if let Some(d) = p.dim {
                check((2..=64).contains(&d), || format!("dim {d} outside 2..=64"))?;
            }
            check(p.f_sigma >= 1.0 && p.f_sigma <= 20.0, || format!("f_sigma {} outside [1, 20]", p.f_sigma))
        }
        Experiment::Torus(p) => p.model.to_model().map(drop),
        Experiment::SumRules(p) => {
            p.model.to_model()?;
            check(p.q.len() == p.model.geometry.d() && p.q.iter().any(|&x| x != 0), || {
                format!("q = {:?} must be a nonzero vector of length {}", p.q, p.model.geometry.d())
            })?;
            check(p.n >= 1, || "N must be at least 1".into())
        }
        Experiment::Bounds(p) => {
            p.model.to_model()?;
            check(p.n_min >= 1 && p.n_min <= p.n_max, || format!("need 1 ≤ n_min ≤ n_max, got {}..{}", p.n_min, p.n_max))?;
            check(p.n_max <= 5000, || format!("n_max {} above 5000", p.n_max))
        }
        Experiment::Riesz(p) => {
            p.model.to_model()?;
            p.z.points()?;
            check(p.sigma >= 0.0 && p.sigma <= 10.0, || format!("sigma {} outside [0, 10]", p.sigma))
        }
        Experiment::Lt(p) => {
            p.model.to_model()?;
            let a = p.alpha.points()?;
            check(a.iter().all(|&x| x > 0.0), || "alpha grid must be positive".into())?;
            check(p.sigma >= 0.0 && p.sigma <= 10.0, || format!("sigma {} outside [0, 10]", p.sigma))?;
            check(p.shift_factor >= 0.0 && p.shift_factor <= 10.0, || {
                format!("shift_factor {} outside [0, 10]", p.shift_factor)
            })
        }
        Experiment::Circle(p) => {
            check(p.x_max >= 1 && p.x_max <= 10_000_000, || format!("x_max {} outside 1..=1e7", p.x_max))?;
            check((1..=100_000).contains(&p.grid), || format!("grid {} outside 1..=100000", p.grid))
        }
        Experiment::Sphere(p) => {
            check((1..=10).contains(&p.d), || format!("d {} outside 1..=10", p.d))?;
            check(p.r > 0.0 && p.r.is_finite(), || format!("r = {} must be positive", p.r))?;
            check((1..=2000).contains(&p.levels), || format!("levels {} outside 1..=2000", p.levels))?;
            check(p.n_max >= 1, || "n_max must be at least 1".into())
        }
    }
}
