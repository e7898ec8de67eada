use std::path::{Path, PathBuf};

use emocam_core::analytics::FlattenMode;
use emocam_core::detection::DEFAULT_DET_THRESHOLD;
use emocam_core::importance::DEFAULT_CACT_THRESHOLD;
use emocam_core::CamMethod;
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_GRID_N: usize = 7;
pub const WORKERS_ENV: &str = "EMOCAM_WORKERS";

/// One source of settings (command line or config file). Unset fields fall
/// through to the next layer.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigLayer {
    pub model: Option<PathBuf>,
    pub weights: Option<PathBuf>,
    pub detections: Option<PathBuf>,
    pub images: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub methods: Option<Vec<String>>,
    pub det_threshold: Option<f64>,
    pub cact_threshold: Option<f64>,
    pub grid_n: Option<usize>,
    pub workers: Option<usize>,
    pub positions: Option<PathBuf>,
    pub patches: Option<Vec<PathBuf>>,
    pub classes: Option<PathBuf>,
    pub rsa_input: Option<String>,
    pub cache: Option<bool>,
}

impl ConfigLayer {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    /// Relative paths in a config file are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut layer = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            layer.rebase(base);
        }
        Ok(layer)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(p) = p.as_mut().filter(|p| p.is_relative()) {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.model);
        fix(&mut self.weights);
        fix(&mut self.detections);
        fix(&mut self.images);
        fix(&mut self.out);
        fix(&mut self.positions);
        fix(&mut self.classes);
        if let Some(ps) = &mut self.patches {
            for p in ps.iter_mut().filter(|p| p.is_relative()) {
                *p = base.join(&*p);
            }
        }
    }

    /// Fields set in `self` win over `lower`.
    pub fn over(self, lower: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            model: self.model.or(lower.model),
            weights: self.weights.or(lower.weights),
            detections: self.detections.or(lower.detections),
            images: self.images.or(lower.images),
            out: self.out.or(lower.out),
            methods: self.methods.or(lower.methods),
            det_threshold: self.det_threshold.or(lower.det_threshold),
            cact_threshold: self.cact_threshold.or(lower.cact_threshold),
            grid_n: self.grid_n.or(lower.grid_n),
            workers: self.workers.or(lower.workers),
            positions: self.positions.or(lower.positions),
            patches: self.patches.or(lower.patches),
            classes: self.classes.or(lower.classes),
            rsa_input: self.rsa_input.or(lower.rsa_input),
            cache: self.cache.or(lower.cache),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: Option<PathBuf>,
    pub weights: Option<PathBuf>,
    pub detections: Option<PathBuf>,
    pub images: Option<PathBuf>,
    pub out: PathBuf,
    pub methods: Vec<CamMethod>,
    pub det_threshold: f64,
    pub cact_threshold: f64,
    pub grid_n: usize,
    pub workers: usize,
    pub positions: Option<PathBuf>,
    pub patches: Vec<PathBuf>,
    pub classes: Option<PathBuf>,
    pub rsa_input: FlattenMode,
    pub cache: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: None,
            weights: None,
            detections: None,
            images: None,
            out: PathBuf::from("out"),
            methods: CamMethod::ALL.to_vec(),
            det_threshold: DEFAULT_DET_THRESHOLD,
            cact_threshold: DEFAULT_CACT_THRESHOLD,
            grid_n: DEFAULT_GRID_N,
            workers: 1,
            positions: None,
            patches: Vec::new(),
            classes: None,
            rsa_input: FlattenMode::Counts,
            cache: true,
        }
    }
}

pub fn parse_methods(names: &[String]) -> Result<Vec<CamMethod>, CliError> {
    let mut out = Vec::new();
    for name in names.iter().flat_map(|n| n.split(',')).map(str::trim).filter(|n| !n.is_empty()) {
        let m: CamMethod = name.parse().map_err(|_| {
            CliError::Config(format!("unknown method {name:?} (expected gradcam, ablationcam or occlusion)"))
        })?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    Ok(out)
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn env_workers() -> Result<Option<usize>, CliError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("{WORKERS_ENV}={v:?} is not a worker count"))),
        Err(_) => Ok(None),
    }
}

impl RunConfig {
    /// Resolves a merged layer against defaults. Worker count falls back to
    /// `EMOCAM_WORKERS`, then to the available parallelism.
    pub fn resolve(layer: ConfigLayer) -> Result<Self, CliError> {
        let d = RunConfig::default();
        let methods = match &layer.methods {
            Some(names) => parse_methods(names)?,
            None => d.methods,
        };
        let rsa_input = match layer.rsa_input.as_deref() {
            None | Some("counts") => FlattenMode::Counts,
            Some("percent") => FlattenMode::Percentages,
            Some(other) => return Err(CliError::Config(format!("rsa-input must be counts or percent, got {other:?}"))),
        };
        let workers = match layer.workers {
            Some(w) => w,
            None => env_workers()?.unwrap_or_else(default_workers),
        };
        let cfg = RunConfig {
            model: layer.model,
            weights: layer.weights,
            detections: layer.detections,
            images: layer.images,
            out: layer.out.unwrap_or(d.out),
            methods,
            det_threshold: layer.det_threshold.unwrap_or(d.det_threshold),
            cact_threshold: layer.cact_threshold.unwrap_or(d.cact_threshold),
            grid_n: layer.grid_n.unwrap_or(d.grid_n),
            workers,
            positions: layer.positions,
            patches: layer.patches.unwrap_or_default(),
            classes: layer.classes,
            rsa_input,
            cache: layer.cache.unwrap_or(d.cache),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [("det-threshold", self.det_threshold), ("cact-threshold", self.cact_threshold)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(CliError::Config(format!("{name} must be in [0, 1], got {v}")));
            }
        }
        if self.workers == 0 {
            return Err(CliError::Config("workers must be >= 1".into()));
        }
        if self.grid_n == 0 {
            return Err(CliError::Config("grid-n must be >= 1".into()));
        }
        Ok(())
    }

    pub(crate) fn require<'a>(&self, value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
        value
            .as_deref()
            .ok_or_else(|| CliError::Config(format!("--{flag} is required for this command")))
    }

    pub(crate) fn require_methods(&self) -> Result<(), CliError> {
        if self.methods.is_empty() {
            return Err(CliError::Config("at least one CAM method is required".into()));
        }
        Ok(())
    }
}
