//! Experiment configuration: TOML schema, presets, overrides and validation.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::esc::{BvpConfig, EscConfig, ReferenceConfig};
use crate::numerics::IntegratorConfig;
use crate::optimizer::{rosenbrock, ConstraintSet, PerformanceOracle, PgdConfig};
use crate::plant::ExamplePlant;
use crate::trajectory::SaturationMap;

/// Environment variable that overrides `output.dir`.
pub const OUTPUT_ENV: &str = "NOESC_OUT";

pub const PRESETS: &[&str] = &["s4-default"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub plant: PlantSection,
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub constraints: ConstraintSection,
    pub trajectory: TrajectorySection,
    pub bvp: BvpSection,
    pub sim: SimSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    pub name: String,
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradMode {
    Analytic,
    Fd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub step: f64,
    pub eps0: f64,
    pub max_iter: usize,
    pub grad_mode: GradMode,
    pub fd_step: f64,
    pub x0: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSection {
    pub x1_min: Option<f64>,
    pub x1_max: Option<f64>,
    pub x2_min: Option<f64>,
    pub x2_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySection {
    pub y_min: f64,
    pub y_max: f64,
    pub delta_y: f64,
    /// Sigmoid steepness; defaults to `4 / (y_max - y_min + 2 delta_y)`.
    pub rho_sig: Option<f64>,
    pub gamma: Vec<f64>,
    pub delta_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BvpSection {
    pub tol: f64,
    pub max_newton_iter: usize,
    pub p_init: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub rk4_step: f64,
    pub store_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
}

/// Config problem, anchored to a source line when one is known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source: Option<String>,
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.source, self.line) {
            (Some(src), Some(line)) => write!(f, "{src}:{line}: ")?,
            (Some(src), None) => write!(f, "{src}: ")?,
            (None, Some(line)) => write!(f, "line {line}: ")?,
            (None, None) => {}
        }
        if let Some(key) = &self.key {
            write!(f, "{key}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn new(message: impl Into<String>) -> Self {
        Self {
            source: None,
            line: None,
            key: None,
            message: message.into(),
        }
    }

    fn at_key(key: &str, message: impl Into<String>) -> Self {
        Self {
            key: Some(key.to_string()),
            ..Self::new(message)
        }
    }
}

/// Line (1-based) where `dotted_key` is assigned in a TOML document.
pub fn locate_key(text: &str, dotted_key: &str) -> Option<usize> {
    let (section, leaf) = match dotted_key.rsplit_once('.') {
        Some((s, l)) => (s, l),
        None => ("", dotted_key),
    };
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = header.trim().to_string();
            continue;
        }
        let Some((key, _)) = line.split_once('=') else {
            continue;
        };
        let key = key.trim();
        if (current == section && key == leaf) || (current.is_empty() && key == dotted_key) {
            return Some(i + 1);
        }
    }
    None
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ExperimentConfig {
    /// The worked example: two-state plant, Rosenbrock performance,
    /// `x1 <= 1.5`, saturation bounds (-2, 2) with steepness 4.
    pub fn s4_default() -> Self {
        Self {
            plant: PlantSection {
                name: "example".into(),
                rho: 1.0,
            },
            optimizer: OptimizerSection {
                step: 0.002,
                eps0: 1e-2,
                max_iter: 5000,
                grad_mode: GradMode::Analytic,
                fd_step: 1e-6,
                x0: vec![0.8, 3.0],
            },
            constraints: ConstraintSection {
                x1_min: Some(-1.5),
                x1_max: Some(1.5),
                x2_min: None,
                x2_max: None,
            },
            trajectory: TrajectorySection {
                y_min: -1.5,
                y_max: 1.5,
                delta_y: 0.5,
                rho_sig: Some(4.0),
                gamma: vec![0.01],
                delta_k: 1.0,
            },
            bvp: BvpSection {
                tol: 1e-8,
                max_newton_iter: 50,
                p_init: vec![1.0],
            },
            sim: SimSection {
                rk4_step: 1e-3,
                store_every: 10,
            },
            output: OutputSection {
                dir: "noesc-out".into(),
            },
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "s4-default" => Some(Self::s4_default()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::at_key(key, format!("must be strictly positive, got {v}")))
            }
        };
        if self.plant.name != "example" {
            return Err(ConfigError::at_key(
                "plant.name",
                format!("unknown plant {:?} (available: \"example\")", self.plant.name),
            ));
        }
        if self.plant.rho == 0.0 || !self.plant.rho.is_finite() {
            return Err(ConfigError::at_key("plant.rho", "must be finite and non-zero"));
        }
        positive("optimizer.step", self.optimizer.step)?;
        positive("optimizer.eps0", self.optimizer.eps0)?;
        positive("optimizer.fd_step", self.optimizer.fd_step)?;
        if self.optimizer.max_iter == 0 {
            return Err(ConfigError::at_key("optimizer.max_iter", "must be at least 1"));
        }
        if self.optimizer.x0.len() != 2 || self.optimizer.x0.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::at_key("optimizer.x0", "must hold two finite numbers"));
        }
        let c = &self.constraints;
        for (key, lo, hi) in [("constraints.x1_min", c.x1_min, c.x1_max), ("constraints.x2_min", c.x2_min, c.x2_max)] {
            if let (Some(lo), Some(hi)) = (lo, hi) {
                if lo > hi {
                    return Err(ConfigError::at_key(key, format!("lower bound {lo} exceeds upper bound {hi}")));
                }
            }
        }
        let t = &self.trajectory;
        if !(t.y_min < t.y_max) {
            return Err(ConfigError::at_key("trajectory.y_min", format!("must be below y_max = {}", t.y_max)));
        }
        positive("trajectory.delta_y", t.delta_y)?;
        if let Some(rho_sig) = t.rho_sig {
            positive("trajectory.rho_sig", rho_sig)?;
        }
        positive("trajectory.delta_k", t.delta_k)?;
        if t.gamma.len() != 1 {
            return Err(ConfigError::at_key("trajectory.gamma", "needs one entry per internal state (1)"));
        }
        for &g in &t.gamma {
            positive("trajectory.gamma", g)?;
        }
        positive("bvp.tol", self.bvp.tol)?;
        if self.bvp.max_newton_iter == 0 {
            return Err(ConfigError::at_key("bvp.max_newton_iter", "must be at least 1"));
        }
        if self.bvp.p_init.len() != t.gamma.len() || self.bvp.p_init.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::at_key("bvp.p_init", "needs one finite entry per internal state (1)"));
        }
        positive("sim.rk4_step", self.sim.rk4_step)?;
        if self.sim.store_every == 0 {
            return Err(ConfigError::at_key("sim.store_every", "must be at least 1"));
        }
        if self.output.dir.is_empty() {
            return Err(ConfigError::at_key("output.dir", "must not be empty"));
        }
        Ok(())
    }

    /// Instantiates the plant, performance oracle, constraint set and loop
    /// settings. Call [`validate`](Self::validate) first.
    pub fn build(&self) -> crate::Result<Experiment> {
        let plant = ExamplePlant::new(self.plant.rho)?;
        let mut oracle = rosenbrock().with_fd_step(self.optimizer.fd_step);
        if self.optimizer.grad_mode == GradMode::Fd {
            oracle = oracle.measured_only();
        }
        let c = &self.constraints;
        let set = ConstraintSet::bounded(
            vec![c.x1_min.unwrap_or(f64::NEG_INFINITY), c.x2_min.unwrap_or(f64::NEG_INFINITY)],
            vec![c.x1_max.unwrap_or(f64::INFINITY), c.x2_max.unwrap_or(f64::INFINITY)],
        )?;
        let t = &self.trajectory;
        let mut map = SaturationMap::new(t.y_min, t.y_max, t.delta_y)?;
        if let Some(rho_sig) = t.rho_sig {
            map = map.with_steepness(rho_sig)?;
        }
        let step = IntegratorConfig::new(self.sim.rk4_step)?;
        let esc = EscConfig {
            x0: self.optimizer.x0.clone(),
            t0: 0.0,
            pgd: PgdConfig::fixed(self.optimizer.step, self.optimizer.eps0, self.optimizer.max_iter),
            reference: ReferenceConfig {
                map,
                gamma: t.gamma.clone(),
                delta_k: t.delta_k,
            },
            bvp: BvpConfig {
                tol: self.bvp.tol,
                max_iter: self.bvp.max_newton_iter,
                integrator: step,
            },
            p_init: self.bvp.p_init.clone(),
            sim: step.with_store_every(self.sim.store_every),
        };
        Ok(Experiment {
            plant,
            oracle,
            set,
            esc,
        })
    }
}

/// Ready-to-run experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub plant: ExamplePlant,
    pub oracle: PerformanceOracle,
    pub set: ConstraintSet,
    pub esc: EscConfig,
}

impl Experiment {
    pub fn run(&self) -> crate::Result<crate::esc::EscLog> {
        crate::esc::run_esc(&self.plant, &self.oracle, &self.set, &self.esc)
    }
}

fn merge(base: &mut Table, overlay: Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(existing)), Value::Table(incoming)) => merge(existing, incoming),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

fn parse_literal(raw: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn coerce(existing: Option<&Value>, value: Value) -> Value {
    match (existing, value) {
        (Some(Value::Float(_)), Value::Integer(i)) => Value::Float(i as f64),
        (Some(Value::Array(old)), Value::Array(new)) if old.iter().all(|v| v.is_float()) => Value::Array(
            new.into_iter()
                .map(|v| match v {
                    Value::Integer(i) => Value::Float(i as f64),
                    other => other,
                })
                .collect(),
        ),
        (_, value) => value,
    }
}

/// Applies `key.path=value` to a config tree.
pub fn apply_override(root: &mut Table, assignment: &str) -> Result<(), ConfigError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::new(format!("override {assignment:?} is not of the form key=value")))?;
    let path = path.trim();
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(ConfigError::new(format!("override key {path:?} is malformed")));
    }
    let mut table = root;
    for key in &keys[..keys.len() - 1] {
        let entry = table
            .entry(key.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        table = match entry {
            Value::Table(t) => t,
            _ => return Err(ConfigError::at_key(path, format!("{key} is not a section"))),
        };
    }
    let leaf = keys[keys.len() - 1];
    let value = coerce(table.get(leaf), parse_literal(raw.trim()));
    table.insert(leaf.to_string(), value);
    Ok(())
}

/// Where a config came from.
#[derive(Debug, Clone, Default)]
pub struct ConfigSource<'a> {
    pub preset: Option<&'a str>,
    pub file: Option<&'a Path>,
    pub overrides: &'a [String],
}

/// Preset (if any), then file (if any), then overrides, then `NOESC_OUT`.
pub fn load(source: &ConfigSource<'_>) -> Result<ExperimentConfig, ConfigError> {
    let mut tree = Table::new();
    if let Some(name) = source.preset {
        let preset = ExperimentConfig::preset(name).ok_or_else(|| {
            ConfigError::new(format!("unknown preset {name:?} (available: {})", PRESETS.join(", ")))
        })?;
        tree = Table::try_from(&preset).map_err(|e| ConfigError::new(e.to_string()))?;
    }

    let mut text = None;
    if let Some(path) = source.file {
        let name = path.display().to_string();
        let contents = std::fs::read_to_string(path).map_err(|e| ConfigError {
            source: Some(name.clone()),
            ..ConfigError::new(format!("cannot read config: {e}"))
        })?;
        let table: Table = toml::from_str(&contents).map_err(|e| ConfigError {
            source: Some(name.clone()),
            line: e.span().map(|s| line_of_offset(&contents, s.start)),
            ..ConfigError::new(e.message().to_string())
        })?;
        merge(&mut tree, table);
        text = Some((name, contents));
    }
    if source.preset.is_none() && source.file.is_none() {
        return Err(ConfigError::new("either a config file or a preset is required"));
    }

    for assignment in source.overrides {
        apply_override(&mut tree, assignment)?;
    }
    if let Ok(dir) = std::env::var(OUTPUT_ENV) {
        if !dir.is_empty() {
            apply_override(&mut tree, &format!("output.dir={}", Value::String(dir)))?;
        }
    }

    let anchor = |mut err: ConfigError| {
        if let Some((name, contents)) = &text {
            err.source = Some(name.clone());
            if err.line.is_none() {
                err.line = err.key.as_deref().and_then(|k| locate_key(contents, k));
            }
        }
        err
    };

    let config: ExperimentConfig = Value::Table(tree).try_into().map_err(|e: toml::de::Error| {
        let message = e.message().to_string();
        // serde names the offending field in backticks
        let key = message.split('`').nth(1).map(str::to_string);
        let line = match (&text, &key) {
            (Some((_, contents)), Some(k)) => find_leaf(contents, k),
            _ => None,
        };
        anchor(ConfigError {
            line,
            ..ConfigError::new(message)
        })
    })?;
    config.validate().map_err(anchor)?;
    Ok(config)
}

fn find_leaf(text: &str, leaf: &str) -> Option<usize> {
    text.lines().position(|l| {
        l.split_once('=')
            .map(|(k, _)| k.trim() == leaf)
            .unwrap_or_else(|| l.trim() == format!("[{leaf}]"))
    })
    .map(|i| i + 1)
}
