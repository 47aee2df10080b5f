//! Teacher client for OpenAI-compatible chat completion endpoints.
//!
//! The credential is read from the environment variable named in the
//! config, never from the config itself. Prompt templates may reference
//! `{{base_letter}}`, `{{description}}`, `{{letter}}` and `{{exemplar}}`.

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{ClientError, CotExemplar, Draft, Inference, TeacherClient};
use crate::codec::{extract_json_object, parse_cot_fields};
use crate::template::SyntheticIdentity;

pub const DEFAULT_DRAFT_PROMPT: &str = "\
You are given an NHS epilepsy clinic letter and a description of a patient's seizure frequency.
Rewrite the letter so that its seizure paragraph reflects the description, keeping the clinical
structure and tone. Use the tokens @NAME@, @ADDRESS@, @DOB@, @NHS_NUMBER@ and @GP_NAME@ in place
of any personal details. Separately, invent a fully synthetic value for each token.
Reply with a JSON object: {\"letter\": \"...\", \"identity\": {\"NAME\": \"...\", ...}}.

Base letter:
{{base_letter}}

Seizure description:
{{description}}
";

pub const DEFAULT_INFER_PROMPT: &str = "\
Read the clinic letter and extract the patient's current seizure frequency as a label in one of
these forms: \"unknown\"; \"no seizure frequency reference\"; \"seizure free for <n|multiple> <month|year>\";
\"<n|multiple> per <n|multiple> <day|week|month|year>\";
\"<n|multiple> cluster per <n|multiple> <unit>, <n|multiple> per cluster\"; \"unknown, <n|multiple> per cluster\".
Numbers may be ranges such as \"2 to 3\".
Reply with a JSON object: {\"analysis\": \"<step-by-step reasoning>\",
\"seizure_frequency_number\": [\"<label>\", \"<evidence sentence copied verbatim from the letter>\"]}.
{{exemplar}}
Letter:
{{letter}}
";

fn default_api_key_env() -> String {
    "OPENAI_API_KEY".to_string()
}

fn default_timeout() -> u64 {
    120
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpClientConfig {
    /// Full chat-completions URL, e.g. `http://localhost:8000/v1/chat/completions`.
    pub endpoint: String,
    pub model: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_api_key_env")]
    pub api_key_env: String,
    #[serde(default)]
    pub draft_prompt: Option<PathBuf>,
    #[serde(default)]
    pub infer_prompt: Option<PathBuf>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default)]
    pub max_tokens: Option<u32>,
}

impl HttpClientConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        HttpClientConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            temperature: 0.0,
            api_key_env: default_api_key_env(),
            draft_prompt: None,
            infer_prompt: None,
            timeout_secs: default_timeout(),
            max_tokens: None,
        }
    }
}

pub struct HttpTeacherClient {
    config: HttpClientConfig,
    agent: ureq::Agent,
    api_key: Option<String>,
    draft_prompt: String,
    infer_prompt: String,
    requests: AtomicU64,
}

impl std::fmt::Debug for HttpTeacherClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpTeacherClient")
            .field("endpoint", &self.config.endpoint)
            .field("model", &self.config.model)
            .field("has_api_key", &self.api_key.is_some())
            .finish()
    }
}

fn render(template: &str, vars: &[(&str, &str)]) -> String {
    vars.iter().fold(template.to_string(), |acc, (k, v)| {
        acc.replace(&format!("{{{{{k}}}}}"), v)
    })
}

impl HttpTeacherClient {
    pub fn from_config(config: HttpClientConfig) -> Result<Self, ClientError> {
        if config.endpoint.trim().is_empty() {
            return Err(ClientError::Config("endpoint is empty".into()));
        }
        let load = |p: &Option<PathBuf>, default: &str| -> Result<String, ClientError> {
            match p {
                Some(path) => std::fs::read_to_string(path)
                    .map_err(|e| ClientError::Config(format!("{}: {e}", path.display()))),
                None => Ok(default.to_string()),
            }
        };
        let draft_prompt = load(&config.draft_prompt, DEFAULT_DRAFT_PROMPT)?;
        let infer_prompt = load(&config.infer_prompt, DEFAULT_INFER_PROMPT)?;
        let api_key = std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty());
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build();
        Ok(HttpTeacherClient {
            config,
            agent,
            api_key,
            draft_prompt,
            infer_prompt,
            requests: AtomicU64::new(0),
        })
    }

    /// One chat completion; returns the first choice's message content.
    fn complete(&self, prompt: &str) -> Result<String, ClientError> {
        self.requests.fetch_add(1, Ordering::Relaxed);
        let mut body = json!({
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [{"role": "user", "content": prompt}],
        });
        if let Some(n) = self.config.max_tokens {
            body["max_tokens"] = json!(n);
        }
        let mut req = self
            .agent
            .post(&self.config.endpoint)
            .set("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        let resp = match req.send_json(body) {
            Ok(r) => r,
            Err(ureq::Error::Status(status, r)) => {
                let body = r.into_string().unwrap_or_default();
                return Err(ClientError::Http { status, body });
            }
            Err(ureq::Error::Transport(t)) => return Err(ClientError::Transport(t.to_string())),
        };
        let v: Value = resp
            .into_json()
            .map_err(|e| ClientError::Protocol(format!("response is not JSON: {e}")))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| ClientError::Protocol("missing choices[0].message.content".into()))
    }
}

impl TeacherClient for HttpTeacherClient {
    fn draft(&self, base_letter: &str, description: &str) -> Result<Draft, ClientError> {
        let prompt = render(
            &self.draft_prompt,
            &[("base_letter", base_letter), ("description", description)],
        );
        let content = self.complete(&prompt)?;
        let obj = extract_json_object(&content)
            .ok_or_else(|| ClientError::Protocol("draft reply has no JSON object".into()))?;
        let text = obj
            .get("letter")
            .and_then(Value::as_str)
            .ok_or_else(|| ClientError::Protocol("draft reply lacks \"letter\"".into()))?
            .to_string();
        let identity = match obj.get("identity") {
            Some(Value::Object(m)) => m
                .iter()
                .map(|(k, v)| (k.clone(), v.as_str().map_or_else(|| v.to_string(), str::to_string)))
                .collect::<SyntheticIdentity>(),
            _ => return Err(ClientError::Protocol("draft reply lacks \"identity\" object".into())),
        };
        Ok(Draft { text, identity })
    }

    fn infer(&self, letter: &str, exemplar: Option<&CotExemplar>) -> Result<Inference, ClientError> {
        let guidance = exemplar
            .map(|e| format!("\nWorked example of the reasoning required:\n{}\n", e.exemplar_text))
            .unwrap_or_default();
        let prompt = render(&self.infer_prompt, &[("letter", letter), ("exemplar", &guidance)]);
        let content = self.complete(&prompt)?;
        // A reply that is not a well-formed object is still an answer; the
        // caller scores it as an unparseable label.
        Ok(match parse_cot_fields(&content) {
            Ok((analysis, label_text, evidence)) => Inference {
                label_text,
                analysis,
                evidence,
            },
            Err(_) => Inference {
                label_text: content.trim().to_string(),
                ..Default::default()
            },
        })
    }

    fn request_count(&self) -> u64 {
        self.requests.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_prompt_vars() {
        let out = render("a {{x}} b {{y}} {{x}}", &[("x", "1"), ("y", "2")]);
        assert_eq!(out, "a 1 b 2 1");
    }

    #[test]
    fn config_defaults() {
        let c: HttpClientConfig =
            toml::from_str("endpoint = \"http://h/v1/chat/completions\"\nmodel = \"m\"").unwrap();
        assert_eq!(c.temperature, 0.0);
        assert_eq!(c.api_key_env, "OPENAI_API_KEY");
        assert_eq!(c, HttpClientConfig::new("http://h/v1/chat/completions", "m"));
    }

    #[test]
    fn missing_prompt_file_is_config_error() {
        let mut c = HttpClientConfig::new("http://h", "m");
        c.draft_prompt = Some("/nonexistent/prompt.txt".into());
        assert!(matches!(HttpTeacherClient::from_config(c), Err(ClientError::Config(_))));
    }
}
