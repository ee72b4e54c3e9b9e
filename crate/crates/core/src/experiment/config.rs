use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dual::{NetKind, TrainConfig};
use crate::error::{Error, Result};
use crate::nn::ProjectionInit;
use crate::sde::{make_bsm_model, make_heston_model, HestonParams, ModelSpec};

/// A training run as written in a TOML file. Missing keys take the desk-scale defaults.
///
/// ```toml
/// model = "heston"
/// net = "nvnet"
/// steps = 4
/// iters = 300
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(rename = "S0", default = "default_s0")]
    pub s0: f64,
    #[serde(rename = "U0", default = "default_u0")]
    pub u0: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(rename = "K", default = "default_s0")]
    pub strike: f64,
    #[serde(rename = "T", default = "default_horizon")]
    pub horizon: f64,

    #[serde(default = "default_net")]
    pub net: String,
    /// Defaults to 1024 for ResNet and 4 otherwise.
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default = "default_iters")]
    pub iters: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_bridge")]
    pub bridge: bool,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: usize,
    /// `"zero"` or `"he"` initialisation of the output projection.
    #[serde(default = "default_projection")]
    pub projection: String,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
}

fn default_model() -> String {
    "bsm".into()
}
fn default_s0() -> f64 {
    100.0
}
fn default_u0() -> f64 {
    0.32
}
fn default_sigma() -> f64 {
    0.32
}
fn default_theta() -> f64 {
    0.25
}
fn default_alpha() -> f64 {
    3.0
}
fn default_rho() -> f64 {
    0.3
}
fn default_beta() -> f64 {
    0.4
}
fn default_horizon() -> f64 {
    1.0
}
fn default_net() -> String {
    "nvnet".into()
}
fn default_batch() -> usize {
    512
}
fn default_iters() -> usize {
    300
}
fn default_seed() -> u64 {
    1
}
fn default_bridge() -> bool {
    true
}
fn default_substeps() -> usize {
    1
}
fn default_checkpoint_every() -> usize {
    100
}
fn default_projection() -> String {
    "zero".into()
}
fn default_lr() -> f64 {
    1e-3
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("all keys have defaults")
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn net_kind(&self) -> Result<NetKind> {
        self.net.parse()
    }

    /// Builds the model (and checks its parameters).
    pub fn build_model(&self) -> Result<ModelSpec> {
        let model = match self.model.to_ascii_lowercase().as_str() {
            "bsm" => make_bsm_model(self.s0, self.mu, self.sigma)?,
            "heston" => make_heston_model(HestonParams {
                s0: self.s0,
                u0: self.u0,
                mu: self.mu,
                theta: self.theta,
                alpha: self.alpha,
                rho: self.rho,
                beta: self.beta,
            })?,
            other => {
                return Err(Error::Usage(format!(
                    "unknown model `{other}` (expected bsm or heston)"
                )))
            }
        };
        if !(self.strike > 0.0) {
            return Err(Error::invalid("K", format!("must be positive, got {}", self.strike)));
        }
        Ok(model.with_strike(self.strike))
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let net = self.net_kind()?;
        let projection = match self.projection.as_str() {
            "zero" => ProjectionInit::Zero,
            "he" => ProjectionInit::HeUniform,
            other => return Err(Error::Config(format!("unknown projection init `{other}`"))),
        };
        let mut cfg = TrainConfig::desk(net);
        cfg.horizon = self.horizon;
        if let Some(s) = self.steps {
            cfg.steps = s;
        }
        cfg.batch = self.batch;
        cfg.iterations = self.iters;
        cfg.seed = self.seed;
        cfg.bridge = self.bridge;
        cfg.substeps = self.substeps;
        cfg.checkpoint_every = self.checkpoint_every;
        cfg.projection = projection;
        cfg.adam.alpha = self.learning_rate;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.build_model()?;
        self.train_config()?;
        Ok(())
    }
}
