use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{BinConfig, PlantedConfig};
use crate::error::{Error, Result};
use crate::estimators::Estimator;
use crate::ingest::{DupBuckets, DEFAULT_PER_BUCKET};
use crate::memorization::{InferenceEndpoint, SplitSpec, DEFAULT_MAX_FAILURE_RATIO};
use crate::model::DEFAULT_SEQUENCE_LEN;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EndpointConfig {
    pub base_url: Option<String>,
    pub timeout_secs: f64,
    pub max_in_flight: usize,
    pub retries: u32,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            base_url: None,
            timeout_secs: 60.0,
            max_in_flight: 4,
            retries: 2,
        }
    }
}

impl EndpointConfig {
    pub fn endpoint(&self) -> Result<InferenceEndpoint> {
        let base_url = self
            .base_url
            .clone()
            .ok_or_else(|| Error::InvalidParameter("no endpoint base_url configured".into()))?;
        let timeout = Duration::try_from_secs_f64(self.timeout_secs)
            .map_err(|e| Error::InvalidParameter(format!("timeout: {e}")))?;
        let ep = InferenceEndpoint {
            base_url,
            timeout,
            max_in_flight: self.max_in_flight,
            retries: self.retries,
        };
        ep.validate()?;
        Ok(ep)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub clouds: Option<PathBuf>,
    pub sample: Option<PathBuf>,
    pub continuations: Option<PathBuf>,
    pub estimates: Option<PathBuf>,
    pub outcomes: Vec<PathBuf>,
    pub experiments: Option<PathBuf>,
    pub lookup: Option<PathBuf>,
}

/// Everything a run needs. Loaded from a TOML file, then overridden by
/// command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub sequence_length: usize,
    pub split: SplitSpec,
    pub bucket_edges: DupBuckets,
    pub per_bucket_n: usize,
    pub bins: BinConfig,
    pub estimator: Estimator,
    pub model_label: String,
    pub max_failure_ratio: f64,
    pub endpoint: EndpointConfig,
    pub paths: Paths,
    pub planted: PlantedConfig,
    /// Output directory; not part of the config hash.
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            sequence_length: DEFAULT_SEQUENCE_LEN,
            split: SplitSpec::default(),
            bucket_edges: DupBuckets::default(),
            per_bucket_n: DEFAULT_PER_BUCKET,
            bins: BinConfig::default(),
            estimator: Estimator::default(),
            model_label: "model".into(),
            max_failure_ratio: DEFAULT_MAX_FAILURE_RATIO,
            endpoint: EndpointConfig::default(),
            paths: Paths::default(),
            planted: PlantedConfig::default(),
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::parse(path, e.span().map_or(0, |s| line_of(&text, s.start)), e.message()))
    }

    /// First 16 hex digits of SHA-256 over the JSON form, output dir excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        let json = serde_json::to_vec(&c).expect("config serializes");
        let digest = Sha256::digest(&json);
        hex::encode(&digest[..8])
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}
