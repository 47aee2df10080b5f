//! Run configuration, read from TOML.
//!
//! ```toml
//! seed = 0
//!
//! [normalization]
//! multiple_value = 3.0
//!
//! [client]
//! endpoint = "http://localhost:8000/v1/chat/completions"
//! model = "teacher"
//! api_key_env = "OPENAI_API_KEY"
//!
//! [screening]
//! max_passes_with_exemplar = 3
//! max_passes_without = 2
//! concurrency = 8
//!
//! [retry]
//! max_attempts = 3
//! ```
//!
//! Every section is optional. Credentials are never stored here; `[client]`
//! names the environment variable that holds one.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::{ConfigError, NormConfig};
use crate::pipeline::mock::MockProfile;
use crate::pipeline::{HttpClientConfig, RetryPolicy, ScreeningConfig};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub normalization: NormConfig,
    pub client: Option<HttpClientConfig>,
    pub screening: ScreeningConfig,
    pub retry: RetryPolicy,
    pub mock: MockProfile,
}

#[derive(Debug, Error)]
pub enum RunConfigError {
    #[error("{path}: {message}")]
    Read { path: String, message: String },
    #[error(transparent)]
    Normalization(#[from] ConfigError),
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, RunConfigError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| RunConfigError::Read {
            path: "<config>".into(),
            message: e.to_string(),
        })?;
        cfg.normalization.validate()?;
        cfg.screening.retry = cfg.retry;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, RunConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            RunConfigError::Read { message, .. } => RunConfigError::Read {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })
    }

    /// Screening settings with the configured retry policy applied.
    pub fn screening(&self) -> ScreeningConfig {
        ScreeningConfig {
            retry: self.retry,
            ..self.screening
        }
    }
}
