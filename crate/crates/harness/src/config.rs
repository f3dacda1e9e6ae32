//! Experiment configuration.
//!
//! A config file is TOML with four tables: `[system]`, `[observable]`,
//! `[params]` and `[shadow]`. Every omitted parameter is filled from the
//! task defaults, and the fully resolved config is what gets hashed and
//! echoed into every output file.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use fibertherm_counting::{GridSpec, ScanOrder};
use fibertherm::observable::TrigTerm;
use fibertherm::{DrivingSystem, Forcing, FourierTerm, IntMat2, Observable, SkewSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Pressure,
    Spectrum,
    Shadow,
    Katok,
    Crosscheck,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Task::Pressure => "pressure",
            Task::Spectrum => "spectrum",
            Task::Shadow => "shadow",
            Task::Katok => "katok",
            Task::Crosscheck => "crosscheck",
        };
        f.write_str(s)
    }
}

/// Config problem tied to a dotted field path when one is known.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub field: Option<String>,
    pub message: String,
}

impl ConfigError {
    pub fn at(field: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            field: Some(field.to_string()),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.field {
            Some(field) => write!(f, "{field}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    /// `[[2,1],[1,1]]` over a rotation.
    Cat,
    Affine,
    Cocycle,
    Doubling,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseKind {
    Rotation,
    Sturmian,
}

/// Fourier terms `[m, a, b]` of each forcing component.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingConfig {
    #[serde(default)]
    pub x: Vec<[f64; 3]>,
    #[serde(default)]
    pub y: Vec<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub kind: SystemKind,
    pub alpha: Option<f64>,
    pub base: Option<BaseKind>,
    pub matrix: Option<[[i64; 2]; 2]>,
    pub generators: Option<Vec<[[i64; 2]; 2]>>,
    pub forcing: Option<ForcingConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ObservableKindConfig {
    #[default]
    Zero,
    Constant,
    Digit,
    Trig,
    Product,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigConfig {
    pub m: [i32; 2],
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub s: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableConfig {
    #[serde(default)]
    pub kind: ObservableKindConfig,
    pub value: Option<f64>,
    #[serde(default)]
    pub terms: Vec<TrigConfig>,
    #[serde(default)]
    pub base_terms: Vec<[f64; 3]>,
    pub scale: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanConfig {
    Shuffled,
    Lexicographic,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub epsilon: Option<f64>,
    /// Use the expansivity scale η instead of `epsilon` (Katok only).
    pub at_expansivity: Option<bool>,
    pub delta: Option<f64>,
    pub deltas: Option<Vec<f64>>,
    /// `[first, last, step]`.
    pub n_range: Option<[usize; 3]>,
    /// Level-set n range for spectrum tasks, `[first, last, step]`.
    pub level_n_range: Option<[usize; 3]>,
    pub q_grid: Option<Vec<f64>>,
    pub alpha_grid: Option<Vec<f64>>,
    pub omega_samples: Option<usize>,
    pub omega: Option<f64>,
    pub sample_size: Option<usize>,
    pub per_ball: Option<f64>,
    pub max_sample: Option<usize>,
    pub grid_resolution: Option<u64>,
    pub scan: Option<ScanConfig>,
}

/// One interval `[a, b]` and its anchor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalConfig {
    pub a: i64,
    pub b: i64,
    pub anchor: [f64; 2],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadowConfig {
    pub epsilon: Option<f64>,
    /// Declared spacing `m`; defaults to the mixing gap.
    pub spacing: Option<i64>,
    pub omega: Option<f64>,
    #[serde(default)]
    pub intervals: Vec<IntervalConfig>,
    /// Random specifications to generate when no intervals are given.
    pub random: Option<usize>,
    pub max_intervals: Option<usize>,
    pub max_length: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Option<Task>,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    pub out: Option<String>,
    pub threads: Option<usize>,
    pub system: SystemConfig,
    #[serde(default)]
    pub observable: ObservableConfig,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub shadow: ShadowConfig,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            // serde names missing fields as "missing field `x`".
            let field = message
                .split('`')
                .nth(1)
                .filter(|_| message.starts_with("missing field") || message.starts_with("unknown field"))
                .map(str::to_string);
            ConfigError { field, message }
        })
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::at("--config", format!("cannot read {}: {e}", path.display())))?;
        ExperimentConfig::parse(&text)
    }
}

fn matrix(field: &str, m: [[i64; 2]; 2]) -> Result<IntMat2, ConfigError> {
    let t = IntMat2::from_rows(m);
    if t.det().abs() != 1 {
        return Err(ConfigError::at(field, format!("determinant {} is not ±1", t.det())));
    }
    Ok(t)
}

fn fourier(terms: &[[f64; 3]]) -> Vec<FourierTerm> {
    terms
        .iter()
        .map(|t| FourierTerm {
            m: t[0] as i32,
            a: t[1],
            b: t[2],
        })
        .collect()
}

/// Builds the skew product described by `[system]`.
pub fn build_system(c: &SystemConfig) -> Result<SkewSystem, ConfigError> {
    let alpha = || c.alpha.ok_or_else(|| ConfigError::at("system.alpha", "missing rotation number"));
    let forcing = || {
        c.forcing
            .as_ref()
            .map(|f| Forcing {
                components: [fourier(&f.x), fourier(&f.y)],
            })
            .unwrap_or_else(Forcing::zero)
    };
    let err = |field: &'static str| move |e: fibertherm::Error| ConfigError::at(field, e.to_string());
    match c.kind {
        SystemKind::Doubling => Ok(SkewSystem::doubling()),
        SystemKind::Cat => SkewSystem::cat_map(alpha()?, forcing()).map_err(err("system")),
        SystemKind::Affine => {
            let m = c.matrix.ok_or_else(|| ConfigError::at("system.matrix", "missing matrix"))?;
            let t = matrix("system.matrix", m)?;
            let a = alpha()?;
            let driving = match c.base.unwrap_or(BaseKind::Rotation) {
                BaseKind::Rotation => DrivingSystem::Rotation { alpha: a },
                BaseKind::Sturmian => DrivingSystem::Sturmian { alpha: a },
            };
            SkewSystem::affine(driving, t, forcing()).map_err(err("system.matrix"))
        }
        SystemKind::Cocycle => {
            let gens = c
                .generators
                .as_ref()
                .ok_or_else(|| ConfigError::at("system.generators", "missing generators"))?;
            let mats = gens
                .iter()
                .map(|g| matrix("system.generators", *g))
                .collect::<Result<Vec<_>, _>>()?;
            SkewSystem::cocycle(alpha()?, mats).map_err(err("system.generators"))
        }
    }
}

/// Builds the observable described by `[observable]`.
pub fn build_observable(c: &ObservableConfig) -> Result<Observable, ConfigError> {
    let trig: Vec<TrigTerm> = c.terms.iter().map(|t| TrigTerm { m: t.m, c: t.c, s: t.s }).collect();
    let phi = match c.kind {
        ObservableKindConfig::Zero => Observable::zero(),
        ObservableKindConfig::Constant => Observable::constant(
            c.value
                .ok_or_else(|| ConfigError::at("observable.value", "missing constant value"))?,
        ),
        ObservableKindConfig::Digit => Observable::first_digit(),
        ObservableKindConfig::Trig => {
            if trig.is_empty() {
                return Err(ConfigError::at("observable.terms", "a trigonometric observable needs terms"));
            }
            Observable::fiber_trig(trig)
        }
        ObservableKindConfig::Product => {
            if trig.is_empty() || c.base_terms.is_empty() {
                return Err(ConfigError::at("observable.base_terms", "a product observable needs base and fiber terms"));
            }
            Observable::product(fourier(&c.base_terms), trig)
        }
    };
    Ok(phi.scaled(c.scale.unwrap_or(1.0)))
}

/// Every parameter after defaults, as recorded in output metadata.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resolved {
    pub task: Task,
    pub seed: u64,
    pub budget: u64,
    pub system: SystemConfig,
    pub observable: ObservableConfig,
    pub epsilon: f64,
    pub at_expansivity: bool,
    pub delta: f64,
    pub deltas: Vec<f64>,
    pub n_range: [usize; 3],
    pub level_n_range: [usize; 3],
    pub q_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub omega_samples: usize,
    pub omega: f64,
    pub sample_size: usize,
    pub per_ball: f64,
    pub max_sample: usize,
    pub grid_resolution: Option<u64>,
    pub scan: ScanConfig,
    pub shadow: ShadowConfig,
}

fn steps(first: f64, last: f64, step: f64) -> Vec<f64> {
    let count = ((last - first) / step).round() as i64;
    (0..=count).map(|i| ((first + i as f64 * step) * 1e9).round() / 1e9).collect()
}

impl Resolved {
    pub fn new(cfg: &ExperimentConfig, task: Task, seed: u64, budget: u64) -> Resolved {
        let p = &cfg.params;
        let doubling = cfg.system.kind == SystemKind::Doubling;
        let digit = cfg.observable.kind == ObservableKindConfig::Digit;
        let n_default = match (task, doubling) {
            (Task::Katok, true) => [6, 12, 1],
            (Task::Katok, false) => [5, 10, 1],
            (_, true) => [8, 16, 1],
            (_, false) => [6, 12, 1],
        };
        let level_default = if doubling && digit { [20, 120, 20] } else { n_default };
        let q_default = match task {
            Task::Spectrum | Task::Crosscheck => steps(-6.0, 6.0, 0.5),
            _ => steps(-3.0, 3.0, 1.0),
        };
        let alpha_default = if digit { steps(0.1, 0.9, 0.1) } else { steps(-0.5, 0.5, 0.1) };
        Resolved {
            task,
            seed,
            budget,
            system: cfg.system.clone(),
            observable: cfg.observable.clone(),
            epsilon: p.epsilon.unwrap_or(0.1),
            at_expansivity: p.at_expansivity.unwrap_or(false),
            delta: p.delta.unwrap_or(0.1),
            deltas: p.deltas.clone().unwrap_or_else(|| vec![0.1, 0.05, 0.02]),
            n_range: p.n_range.unwrap_or(n_default),
            level_n_range: p.level_n_range.unwrap_or(level_default),
            q_grid: p.q_grid.clone().unwrap_or(q_default),
            alpha_grid: p.alpha_grid.clone().unwrap_or(alpha_default),
            omega_samples: p.omega_samples.unwrap_or(1),
            omega: p.omega.unwrap_or(0.3),
            sample_size: p.sample_size.unwrap_or(2000),
            per_ball: p.per_ball.unwrap_or(8.0),
            max_sample: p.max_sample.unwrap_or(2_500_000),
            grid_resolution: p.grid_resolution,
            scan: p.scan.unwrap_or(ScanConfig::Shuffled),
            shadow: cfg.shadow.clone(),
        }
    }

    pub fn ns(&self) -> Result<Vec<usize>, ConfigError> {
        range("params.n_range", self.n_range)
    }

    pub fn level_ns(&self) -> Result<Vec<usize>, ConfigError> {
        range("params.level_n_range", self.level_n_range)
    }

    /// Explicit lattice when `grid_resolution` is set.
    pub fn grid(&self) -> Option<GridSpec> {
        self.grid_resolution.map(|k| GridSpec {
            resolution: k,
            order: match self.scan {
                ScanConfig::Shuffled => ScanOrder::Shuffled(self.seed),
                ScanConfig::Lexicographic => ScanOrder::Lexicographic,
            },
        })
    }

    /// An experiment config with every default written out; running it
    /// reproduces this resolution.
    pub fn to_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            task: Some(self.task),
            seed: Some(self.seed),
            budget: Some(self.budget),
            out: None,
            threads: None,
            system: self.system.clone(),
            observable: self.observable.clone(),
            params: ParamsConfig {
                epsilon: Some(self.epsilon),
                at_expansivity: Some(self.at_expansivity),
                delta: Some(self.delta),
                deltas: Some(self.deltas.clone()),
                n_range: Some(self.n_range),
                level_n_range: Some(self.level_n_range),
                q_grid: Some(self.q_grid.clone()),
                alpha_grid: Some(self.alpha_grid.clone()),
                omega_samples: Some(self.omega_samples),
                omega: Some(self.omega),
                sample_size: Some(self.sample_size),
                per_ball: Some(self.per_ball),
                max_sample: Some(self.max_sample),
                grid_resolution: self.grid_resolution,
                scan: Some(self.scan),
            },
            shadow: self.shadow.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_config()).expect("resolved config serializes")
    }
}

fn range(field: &str, r: [usize; 3]) -> Result<Vec<usize>, ConfigError> {
    let [first, last, step] = r;
    if first == 0 || step == 0 || last < first {
        return Err(ConfigError::at(field, "expected [first ≥ 1, last ≥ first, step ≥ 1]"));
    }
    Ok((first..=last).step_by(step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_matrix_is_named() {
        let cfg = ExperimentConfig::parse("[system]\nkind = \"affine\"\nalpha = 0.414213562373095\n").unwrap();
        let e = build_system(&cfg.system).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("system.matrix"));
    }

    #[test]
    fn missing_system_kind_is_named() {
        let e = ExperimentConfig::parse("[system]\nalpha = 0.4\n").unwrap_err();
        assert_eq!(e.field.as_deref(), Some("kind"));
    }

    #[test]
    fn defaults_are_filled() {
        let cfg = ExperimentConfig::parse("[system]\nkind = \"doubling\"\n").unwrap();
        let r = Resolved::new(&cfg, Task::Pressure, 1, 10);
        assert_eq!(r.ns().unwrap(), (8..=16).collect::<Vec<_>>());
        assert_eq!(r.q_grid.len(), 7);
        assert!(r.to_toml().contains("epsilon = 0.1"));
    }

    #[test]
    fn step_grids_are_clean() {
        assert_eq!(steps(0.1, 0.9, 0.1)[2], 0.3);
        assert_eq!(steps(-6.0, 6.0, 0.5).len(), 25);
    }
}
