//! Prompt construction, gating and remote completion.

mod client;
mod prompt;
mod tokenizer;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use client::{extract_response, CompletionClient, HttpCompletionClient};
pub use prompt::{build_prompt, contains_table, default_few_shot, gate, Prompt, RESPONSE_HEADER};
pub use tokenizer::{EstimatingTokenizer, Tokenizer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LlmError {
    #[error("request timed out")]
    Timeout,
    #[error("service answered {status}: {body}")]
    ServiceError { status: u16, body: String },
    #[error("completion is empty")]
    EmptyCompletion,
    #[error("transport error: {0}")]
    Transport(String),
    #[error("environment variable {0} with the API key is not set")]
    MissingCredentials(String),
    #[error("invalid backend configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Settings of one remote model. Every field has a default, so a TOML
/// `[llm]` table only needs what differs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub endpoint: String,
    pub model: String,
    /// Prompts with at least this many tokens are excluded.
    pub max_prompt_tokens: usize,
    pub timeout_secs: u64,
    pub max_retries: u32,
    pub backoff_ms: u64,
    /// Maximum number of requests in flight.
    pub concurrency: usize,
    /// Name of the environment variable holding the API key.
    pub api_key_env: Option<String>,
    /// Prepend the built-in few-shot examples.
    pub few_shot: bool,
    /// JSONL file receiving request and response bodies.
    pub transcript: Option<PathBuf>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://127.0.0.1:8000/v1/completions".into(),
            model: "default".into(),
            max_prompt_tokens: 1024,
            timeout_secs: 120,
            max_retries: 2,
            backoff_ms: 500,
            concurrency: 4,
            api_key_env: None,
            few_shot: false,
            transcript: None,
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<(), LlmError> {
        if self.max_prompt_tokens == 0 {
            return Err(LlmError::InvalidConfig("max_prompt_tokens must be at least 1"));
        }
        if self.concurrency == 0 {
            return Err(LlmError::InvalidConfig("concurrency must be at least 1"));
        }
        if self.model.trim().is_empty() {
            return Err(LlmError::InvalidConfig("model name is empty"));
        }
        Ok(())
    }
}
