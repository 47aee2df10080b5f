use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::template::SyntheticIdentity;

/// A letter with `@PLACEHOLDER@` tokens plus the identity that fills them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Draft {
    pub text: String,
    pub identity: SyntheticIdentity,
}

/// What the teacher read out of a letter. `label_text` is unparsed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Inference {
    pub label_text: String,
    pub analysis: String,
    pub evidence: Vec<String>,
}

/// Hand-written worked reasoning shown to the teacher on retry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CotExemplar {
    pub id: String,
    #[serde(rename = "template_ids")]
    pub applicable_template_ids: Vec<String>,
    #[serde(rename = "text")]
    pub exemplar_text: String,
}

impl CotExemplar {
    pub fn applies_to(&self, template_id: &str) -> bool {
        self.applicable_template_ids.iter().any(|t| t == template_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClientError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("unexpected response: {0}")]
    Protocol(String),
    #[error("client configuration: {0}")]
    Config(String),
    #[error("gave up after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: Box<ClientError> },
}

impl ClientError {
    /// Worth retrying: network failures, timeouts, rate limits and 5xx.
    pub fn is_transient(&self) -> bool {
        match self {
            ClientError::Transport(_) => true,
            ClientError::Http { status, .. } => matches!(status, 408 | 429 | 500..=599),
            _ => false,
        }
    }
}

/// A teacher model. Implementations must be deterministic when configured
/// for greedy decoding.
pub trait TeacherClient: Send + Sync {
    /// Rewrite `base_letter` around `description`, returning a placeholder
    /// draft and a separate synthetic identity.
    fn draft(&self, base_letter: &str, description: &str) -> Result<Draft, ClientError>;

    /// Read a seizure-frequency label, analysis and evidence out of `letter`.
    fn infer(&self, letter: &str, exemplar: Option<&CotExemplar>) -> Result<Inference, ClientError>;

    /// Requests issued so far.
    fn request_count(&self) -> u64 {
        0
    }
}

impl<T: TeacherClient + ?Sized> TeacherClient for &T {
    fn draft(&self, base_letter: &str, description: &str) -> Result<Draft, ClientError> {
        (**self).draft(base_letter, description)
    }

    fn infer(&self, letter: &str, exemplar: Option<&CotExemplar>) -> Result<Inference, ClientError> {
        (**self).infer(letter, exemplar)
    }

    fn request_count(&self) -> u64 {
        (**self).request_count()
    }
}

impl<T: TeacherClient + ?Sized> TeacherClient for Box<T> {
    fn draft(&self, base_letter: &str, description: &str) -> Result<Draft, ClientError> {
        (**self).draft(base_letter, description)
    }

    fn infer(&self, letter: &str, exemplar: Option<&CotExemplar>) -> Result<Inference, ClientError> {
        (**self).infer(letter, exemplar)
    }

    fn request_count(&self) -> u64 {
        (**self).request_count()
    }
}
