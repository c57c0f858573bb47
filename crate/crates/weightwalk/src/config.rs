//! JSON experiment files.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "model": "er",
//!   "varied": "graph_size",
//!   "grid": [128, 256, 512, 1024, 2048, 4096],
//!   "fixed": { "avg_degree": 16, "er_weights": "uniform" },
//!   "instances": 10,
//!   "kernels": ["RW", "SRW", "WRW"],
//!   "weight_mode": "original",
//!   "walk": { "walks_per_node": 16, "walk_length": 128 },
//!   "train": { "dim": 64, "window": 10, "negatives": 5, "epochs": 5 },
//!   "seed": 0,
//!   "deterministic": true,
//!   "output": "fig4-er.csv"
//! }
//! ```
//!
//! Every key except `schema`, `model`, `varied` and `grid` is optional.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use weightwalk_core::analysis::{NullTarget, WeightMode};
use weightwalk_core::embedder::{Architecture, TrainConfig};
use weightwalk_core::generators::{SbmWeightMode, WeightDist};
use weightwalk_core::walker::{Kernel, WalkConfig};

use crate::edgelist::{DirectedCollapse, DuplicatePolicy, ParseOptions};
use crate::sweep::{Fixed, Model, SweepSpec, Varied};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config: unsupported schema {0}, expected {SCHEMA_VERSION}")]
    Schema(u32),
    #[error("config: {0}")]
    Invalid(String),
    #[error("config: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightModes {
    #[default]
    Original,
    Shuffled,
    Both,
}

impl WeightModes {
    pub fn modes(&self) -> Vec<WeightMode> {
        match self {
            WeightModes::Original => vec![WeightMode::Original],
            WeightModes::Shuffled => vec![WeightMode::Shuffled],
            WeightModes::Both => vec![WeightMode::Original, WeightMode::Shuffled],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixedConfig {
    pub nodes: Option<usize>,
    pub avg_degree: Option<f64>,
    /// `uniform`, `normal` or `exponential`.
    pub er_weights: Option<String>,
    pub sbm_ratio: Option<f64>,
    /// `exact` or `jitter`.
    pub sbm_weights: Option<String>,
    pub waxman_beta: Option<f64>,
    pub features: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkOverrides {
    pub walks_per_node: Option<usize>,
    pub walk_length: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainOverrides {
    pub dim: Option<usize>,
    pub window: Option<usize>,
    pub negatives: Option<usize>,
    pub epochs: Option<usize>,
    pub initial_lr: Option<f64>,
    pub min_lr: Option<f64>,
    /// `skipgram` or `cbow`.
    pub architecture: Option<String>,
    pub subsample: Option<f64>,
    /// Hogwild threads per run; ignored in deterministic mode.
    pub workers: Option<usize>,
}

/// Ingestion options for dataset models.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub cache: Option<PathBuf>,
    /// `sum` or `reject`.
    pub duplicate_policy: Option<String>,
    /// `max`, `sum` or `mean`.
    pub directed_collapse: Option<String>,
    pub weight_column: Option<String>,
    pub min_weight_epsilon: Option<bool>,
    pub largest_component: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    /// `er`, `sbm`, `waxman`, `ba-wsf`, `ba-we`, `complete` or `dataset:<name>`.
    pub model: String,
    pub varied: Varied,
    pub grid: Vec<f64>,
    #[serde(default)]
    pub fixed: FixedConfig,
    #[serde(default)]
    pub instances: Option<usize>,
    #[serde(default)]
    pub kernels: Option<Vec<String>>,
    #[serde(default)]
    pub weight_mode: WeightModes,
    /// `seen` or `original`.
    #[serde(default)]
    pub null_target: Option<String>,
    #[serde(default)]
    pub walk: WalkOverrides,
    #[serde(default)]
    pub train: TrainOverrides,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "yes")]
    pub deterministic: bool,
    /// Concurrent sweep jobs.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub dataset: DatasetConfig,
}

fn yes() -> bool {
    true
}

fn invalid(m: String) -> ConfigError {
    ConfigError::Invalid(m)
}

pub fn parse_weight_dist(s: &str) -> Option<WeightDist> {
    match s {
        "uniform" => Some(WeightDist::uniform()),
        "normal" => Some(WeightDist::normal()),
        "exponential" => Some(WeightDist::exponential()),
        _ => None,
    }
}

pub fn parse_sbm_weights(s: &str) -> Option<SbmWeightMode> {
    match s {
        "exact" => Some(SbmWeightMode::Exact),
        "jitter" => Some(SbmWeightMode::Jitter),
        _ => None,
    }
}

pub fn parse_architecture(s: &str) -> Option<Architecture> {
    match s.to_ascii_lowercase().as_str() {
        "skipgram" | "skip-gram" | "sg" => Some(Architecture::SkipGram),
        "cbow" => Some(Architecture::Cbow),
        _ => None,
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        // check the version before the full schema so old files get a clear error
        let raw: serde_json::Value = serde_json::from_str(text)?;
        match raw.get("schema").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => return Err(ConfigError::Schema(v as u32)),
            None => return Err(invalid("missing integer \"schema\" field".into())),
        }
        let cfg: Self = serde_json::from_value(raw)?;
        cfg.to_spec()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn model(&self) -> Result<Model, ConfigError> {
        Model::parse(&self.model).ok_or_else(|| invalid(format!("unknown model {:?}", self.model)))
    }

    pub fn walk_config(&self) -> WalkConfig {
        let mut w = WalkConfig::default();
        if let Some(v) = self.walk.walks_per_node {
            w.walks_per_node = v;
        }
        if let Some(v) = self.walk.walk_length {
            w.walk_length = v;
        }
        w
    }

    pub fn train_config(&self) -> Result<TrainConfig, ConfigError> {
        let t = &self.train;
        let mut c = TrainConfig::default();
        c.dim = t.dim.unwrap_or(c.dim);
        c.window = t.window.unwrap_or(c.window);
        c.negatives = t.negatives.unwrap_or(c.negatives);
        c.epochs = t.epochs.unwrap_or(c.epochs);
        c.initial_lr = t.initial_lr.unwrap_or(c.initial_lr);
        c.min_lr = t.min_lr.unwrap_or(c.min_lr);
        c.subsample = t.subsample.or(c.subsample);
        if let Some(a) = &t.architecture {
            c.architecture = parse_architecture(a).ok_or_else(|| invalid(format!("unknown architecture {a:?}")))?;
        }
        c.workers = if self.deterministic { 1 } else { t.workers.unwrap_or(1) };
        c.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(c)
    }

    pub fn fixed(&self) -> Result<Fixed, ConfigError> {
        let f = &self.fixed;
        let mut out = Fixed::default();
        out.nodes = f.nodes.unwrap_or(out.nodes);
        out.avg_degree = f.avg_degree.unwrap_or(out.avg_degree);
        out.sbm_ratio = f.sbm_ratio.unwrap_or(out.sbm_ratio);
        out.waxman_beta = f.waxman_beta.unwrap_or(out.waxman_beta);
        out.features = f.features.unwrap_or(out.features);
        if let Some(s) = &f.er_weights {
            out.er_weights = parse_weight_dist(s).ok_or_else(|| invalid(format!("unknown weight distribution {s:?}")))?;
        }
        if let Some(s) = &f.sbm_weights {
            out.sbm_weights = parse_sbm_weights(s).ok_or_else(|| invalid(format!("unknown sbm weights {s:?}")))?;
        }
        Ok(out)
    }

    pub fn parse_options(&self) -> Result<ParseOptions, ConfigError> {
        let d = &self.dataset;
        let mut o = ParseOptions {
            weight_column: d.weight_column.clone(),
            min_weight_epsilon: d.min_weight_epsilon.unwrap_or(false),
            ..ParseOptions::default()
        };
        if let Some(s) = &d.duplicate_policy {
            o.duplicate_policy = DuplicatePolicy::parse(s).ok_or_else(|| invalid(format!("unknown duplicate policy {s:?}")))?;
        }
        if let Some(s) = &d.directed_collapse {
            o.directed_collapse =
                DirectedCollapse::parse(s).ok_or_else(|| invalid(format!("unknown directed collapse {s:?}")))?;
        }
        Ok(o)
    }

    pub fn to_spec(&self) -> Result<SweepSpec, ConfigError> {
        let kernels = match &self.kernels {
            None => Kernel::ALL.to_vec(),
            Some(ks) => ks
                .iter()
                .map(|k| Kernel::parse(k).ok_or_else(|| invalid(format!("unknown kernel {k:?}"))))
                .collect::<Result<_, _>>()?,
        };
        let null_target = match &self.null_target {
            None => NullTarget::Seen,
            Some(s) => NullTarget::parse(s).ok_or_else(|| invalid(format!("unknown null target {s:?}")))?,
        };
        self.parse_options()?;
        let walk = self.walk_config();
        walk.validate().map_err(|e| invalid(e.to_string()))?;
        let spec = SweepSpec {
            model: self.model()?,
            varied: self.varied,
            grid: self.grid.clone(),
            fixed: self.fixed()?,
            instances: self.instances.unwrap_or(10),
            kernels,
            weight_modes: self.weight_mode.modes(),
            null_target,
            walk,
            train: self.train_config()?,
            seed: self.seed,
            workers: self.workers.unwrap_or(1),
        };
        spec.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(spec)
    }
}
