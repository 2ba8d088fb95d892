//! Run configuration.
//!
//! ```toml
//! version = 1
//! seed = 7
//! dense_cap = 4096
//! bond_cap = 4096
//! compress = "none"          # none | tol=1e-12 | maxbond=64
//! pnorms = ["1", "2", "inf"]
//! out = "out"
//!
//! [model]
//! bundled = "tfim-a3"        # or: file = "model.toml", or an [model.inline] table
//! n = 6
//!
//! [build]
//! beta = 0.01                # or: time = 0.5
//! epsilon = 1e-2
//!
//! [verify]
//! m0 = 3                     # forces the truncation order
//!
//! [sweep]
//! kind = "epsilon"           # m0 | epsilon | q | grid
//! values = [1e-1, 1e-2, 1e-3]
//!
//! [fit]
//! alpha = 3.0
//! epsilon = 1e-3
//! ```

use std::path::{Path, PathBuf};

use lrgibbs::model::config::{bundled, ModelConfig};
use lrgibbs::oracle::parse_pnorm;
use lrgibbs::{CompressionPolicy, Error, HamiltonianSpec, Result};
use serde::{Deserialize, Serialize};

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_EPSILON: f64 = 1e-2;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub dense_cap: Option<usize>,
    #[serde(default)]
    pub bond_cap: Option<usize>,
    #[serde(default)]
    pub compress: Option<String>,
    #[serde(default)]
    pub pnorms: Option<Vec<String>>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub model: Option<ModelRef>,
    #[serde(default)]
    pub build: BuildSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub fit: FitSection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRef {
    pub bundled: Option<String>,
    pub file: Option<PathBuf>,
    pub inline: Option<ModelConfig>,
    /// Overrides the site count of a bundled or file model.
    pub n: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildSection {
    pub beta: Option<f64>,
    pub time: Option<f64>,
    pub epsilon: Option<f64>,
    pub m0: Option<usize>,
    pub q: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub epsilon: Option<f64>,
    /// Forced truncation order; below the required one the affected checks
    /// carry the expected-fail marker.
    pub m0: Option<usize>,
    /// Randomized lemma instances per lemma.
    pub instances: Option<usize>,
    /// Highest order in the per-order decay check.
    pub max_order: Option<usize>,
    /// `β` as multiples of the largest admissible `β₀`.
    pub multiples: Option<Vec<usize>>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    M0,
    Epsilon,
    Q,
    Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub kind: SweepKind,
    /// Values of the swept parameter (`m0`, `epsilon` or `q`).
    #[serde(default)]
    pub values: Vec<f64>,
    pub beta: Option<f64>,
    pub epsilon: Option<f64>,
    /// Grid sweeps only.
    #[serde(default)]
    pub n_values: Vec<usize>,
    #[serde(default)]
    pub beta_multiples: Vec<f64>,
    #[serde(default)]
    pub epsilon_values: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub alpha: Option<f64>,
    pub epsilon: Option<f64>,
}

impl RunConfig {
    pub fn empty() -> Self {
        RunConfig { version: CONFIG_VERSION, ..Default::default() }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        // model files are resolved relative to the config
        if let Some(file) = cfg.model.as_mut().and_then(|m| m.file.as_mut()) {
            if file.is_relative() {
                if let Some(dir) = path.parent() {
                    *file = dir.join(&*file);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks that do not need the model.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x.is_finite() && x > 0.0) => Err(Error::Config(format!("{name} must be positive, got {x}"))),
            _ => Ok(()),
        };
        let unit = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x <= 1.0) => Err(Error::Config(format!("{name} must lie in (0, 1], got {x}"))),
            _ => Ok(()),
        };
        positive("build.beta", self.build.beta)?;
        unit("build.epsilon", self.build.epsilon)?;
        unit("verify.epsilon", self.verify.epsilon)?;
        if let Some(t) = self.build.time {
            if !t.is_finite() {
                return Err(Error::Config("build.time must be finite".into()));
            }
        }
        if self.build.beta.is_some() && self.build.time.is_some() {
            return Err(Error::Config("build.beta and build.time are exclusive".into()));
        }
        if matches!(self.build.q, Some(0)) {
            return Err(Error::Config("build.q must be positive".into()));
        }
        if matches!(self.dense_cap, Some(0)) || matches!(self.bond_cap, Some(0)) {
            return Err(Error::Config("caps must be positive".into()));
        }
        if matches!(self.verify.instances, Some(0)) {
            return Err(Error::Config("verify.instances must be positive".into()));
        }
        self.policy()?;
        self.pnorm_values()?;
        if let Some(m) = &self.model {
            let sources = [m.bundled.is_some(), m.file.is_some(), m.inline.is_some()];
            if sources.iter().filter(|&&s| s).count() != 1 {
                return Err(Error::Config("model needs exactly one of bundled, file, inline".into()));
            }
            if m.inline.is_some() && m.n.is_some() {
                return Err(Error::Config("model.n does not apply to an inline model".into()));
            }
        }
        Ok(())
    }

    pub fn policy(&self) -> Result<CompressionPolicy> {
        match &self.compress {
            None => Ok(CompressionPolicy::None),
            Some(s) => CompressionPolicy::parse(s).map_err(|e| Error::Config(e.to_string())),
        }
    }

    pub fn pnorm_values(&self) -> Result<Vec<f64>> {
        match &self.pnorms {
            None => Ok(vec![1.0, 2.0, f64::INFINITY]),
            Some(list) => list
                .iter()
                .map(|s| parse_pnorm(s).map_err(|e| Error::Config(e.to_string())))
                .collect(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn model_config(&self) -> Result<ModelConfig> {
        let m = self
            .model
            .as_ref()
            .ok_or_else(|| Error::Config("no model given (use [model] or --model)".into()))?;
        let mut cfg = if let Some(name) = &m.bundled {
            bundled(name, m.n.unwrap_or(8))?
        } else if let Some(file) = &m.file {
            let text = std::fs::read_to_string(file)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", file.display())))?;
            ModelConfig::from_toml(&text)?
        } else if let Some(inline) = &m.inline {
            inline.clone()
        } else {
            return Err(Error::Config("model needs exactly one of bundled, file, inline".into()));
        };
        if let (Some(n), None) = (m.n, &m.inline) {
            cfg.n = n;
        }
        Ok(cfg)
    }

    pub fn spec(&self) -> Result<HamiltonianSpec> {
        self.model_config()?.to_spec()
    }
}
