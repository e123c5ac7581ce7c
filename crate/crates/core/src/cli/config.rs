//! Run configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};
use crate::field::RenormScheme;
use crate::lattice::BoundaryCondition;
use crate::sampler::{critical_constants, Algorithm, SamplerConfig};

pub const SCHEMA_VERSION: &str = "crit-run/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSettings {
    #[serde(default = "default_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_thermalization")]
    pub thermalization_sweeps: usize,
    #[serde(default = "default_decorrelation")]
    pub decorrelation_sweeps: usize,
}

fn default_algorithm() -> Algorithm {
    Algorithm::SwendsenWang
}
fn default_beta() -> f64 {
    critical_constants().0
}
fn default_thermalization() -> usize {
    100
}
fn default_decorrelation() -> usize {
    2
}
fn default_chains() -> usize {
    4
}
fn default_renorm() -> RenormScheme {
    RenormScheme::WuExponent
}

impl Default for SamplerSettings {
    fn default() -> Self {
        SamplerSettings {
            algorithm: default_algorithm(),
            beta: default_beta(),
            thermalization_sweeps: default_thermalization(),
            decorrelation_sweeps: default_decorrelation(),
        }
    }
}

impl SamplerSettings {
    pub fn to_config(&self, seed: u64, stream: u64) -> SamplerConfig {
        SamplerConfig {
            algorithm: self.algorithm,
            beta: self.beta,
            seed,
            stream,
            thermalization_sweeps: self.thermalization_sweeps,
            decorrelation_sweeps: self.decorrelation_sweeps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: String,
    pub experiment: String,
    /// Grid sides; each a power of two, at least 4.
    pub sides: Vec<usize>,
    pub boundary: BoundaryCondition,
    #[serde(default = "default_renorm")]
    pub renorm: RenormScheme,
    #[serde(default)]
    pub sampler: SamplerSettings,
    /// Retained samples per side, split across chains.
    pub samples: usize,
    #[serde(default = "default_chains")]
    pub chains: usize,
    /// Mandatory; `--seed` may supply or override it.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Also write full spin and bond snapshots.
    #[serde(default)]
    pub snapshots: bool,
    /// Adds an `H^{-alpha}` norm column when set.
    #[serde(default)]
    pub sobolev_alpha: Option<f64>,
    #[serde(default)]
    pub sobolev_j_max: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        RunConfig::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return invalid(format!("schema_version must be {SCHEMA_VERSION:?}, got {:?}", self.schema_version));
        }
        if self.experiment.is_empty() || self.experiment.contains(['/', '\\']) {
            return invalid("experiment must be a non-empty name without path separators");
        }
        if self.sides.is_empty() {
            return invalid("sides must not be empty");
        }
        for &n in &self.sides {
            if n < 4 || !n.is_power_of_two() {
                return invalid(format!("side {n} is not a power of two >= 4"));
            }
        }
        if self.samples == 0 || self.chains == 0 {
            return invalid("samples and chains must be positive");
        }
        if self.seed.is_none() {
            return invalid("seed is mandatory (set it in the config or pass --seed)");
        }
        if let Some(a) = self.sobolev_alpha {
            if !(a >= 0.0) {
                return invalid(format!("sobolev_alpha must be non-negative, got {a}"));
            }
        }
        if self.sobolev_j_max == Some(0) {
            return invalid("sobolev_j_max must be positive");
        }
        self.sampler.to_config(0, 0).validate()
    }

    pub fn seed(&self) -> u64 {
        self.seed.expect("validated config has a seed")
    }

    /// SHA-256 of the canonical JSON serialization, without the output
    /// directory so that an archive moved or rerun elsewhere keeps its hash.
    pub fn hash(&self) -> String {
        let content = RunConfig { output_dir: None, ..self.clone() };
        let json = serde_json::to_vec(&content).expect("config serializes");
        format!("{:x}", Sha256::digest(&json))
    }

    /// Samples handled by chain `c`; the remainder goes to the first chains.
    pub fn chain_samples(&self, c: usize) -> usize {
        self.samples / self.chains + usize::from(c < self.samples % self.chains)
    }

    /// Split stream of chain `c` on side number `side_index`.
    pub fn stream(&self, side_index: usize, c: usize) -> u64 {
        (side_index * self.chains + c) as u64
    }
}
