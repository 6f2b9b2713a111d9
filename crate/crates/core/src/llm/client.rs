use std::io::Write;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde_json::{json, Value};

use super::prompt::{Prompt, RESPONSE_HEADER};
use super::{BackendConfig, LlmError};

/// Anything that turns a prompt into a completion.
pub trait CompletionClient: Send + Sync {
    fn complete(&self, prompt: &Prompt) -> Result<String, LlmError>;
}

/// Keeps only what follows the last `### Response` header, trimmed at the
/// end. A completion that does not echo the prompt is returned as is.
pub fn extract_response(completion: &str) -> &str {
    let tail = match completion.rfind(RESPONSE_HEADER) {
        Some(at) => &completion[at + RESPONSE_HEADER.len()..],
        None => completion,
    };
    tail.strip_prefix("\r\n")
        .or_else(|| tail.strip_prefix('\n'))
        .unwrap_or(tail)
        .trim_end()
}

const EXCERPT_CHARS: usize = 500;

/// Client for an OpenAI-compatible `/completions` endpoint.
///
/// Requests use temperature 0 and a single sample. Timeouts, 429 and 5xx
/// answers are retried up to `max_retries` times with a linear backoff.
pub struct HttpCompletionClient {
    config: BackendConfig,
    agent: ureq::Agent,
    api_key: Option<String>,
    transcript: Option<Mutex<std::fs::File>>,
}

impl HttpCompletionClient {
    pub fn new(config: BackendConfig) -> Result<Self, LlmError> {
        config.validate()?;
        let api_key = match &config.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| LlmError::MissingCredentials(var.clone()))?),
            None => None,
        };
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self {
            config,
            agent,
            api_key,
            transcript: None,
        })
    }

    /// Appends every request and response body, credentials redacted, to
    /// `path` as JSON lines.
    pub fn with_transcript(mut self, path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        self.transcript = Some(Mutex::new(file));
        Ok(self)
    }

    fn log(&self, entry: Value) {
        let Some(file) = &self.transcript else {
            return;
        };
        let mut line = entry.to_string();
        if let Some(key) = self.api_key.as_deref().filter(|k| !k.is_empty()) {
            line = line.replace(key, "[REDACTED]");
        }
        let mut file = file.lock().unwrap_or_else(|e| e.into_inner());
        if let Err(e) = writeln!(file, "{line}") {
            tracing::warn!("cannot write transcript: {e}");
        }
    }

    fn attempt(&self, body: &Value) -> Result<String, LlmError> {
        let mut request = self.agent.post(&self.config.endpoint);
        if let Some(key) = &self.api_key {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = request.send_json(body).map_err(|e| match e {
            ureq::Error::Timeout(_) => LlmError::Timeout,
            other => LlmError::Transport(other.to_string()),
        })?;
        let status = response.status().as_u16();
        let text = response.body_mut().read_to_string().map_err(|e| match e {
            ureq::Error::Timeout(_) => LlmError::Timeout,
            other => LlmError::Transport(other.to_string()),
        })?;
        self.log(json!({ "direction": "response", "status": status, "body": text }));
        if !(200..300).contains(&status) {
            return Err(LlmError::ServiceError {
                status,
                body: text.chars().take(EXCERPT_CHARS).collect(),
            });
        }
        let parsed: Value = serde_json::from_str(&text).map_err(|_| LlmError::ServiceError {
            status,
            body: text.chars().take(EXCERPT_CHARS).collect(),
        })?;
        let choice = &parsed["choices"][0];
        let completion = choice["text"]
            .as_str()
            .or_else(|| choice["message"]["content"].as_str())
            .unwrap_or_default();
        let answer = extract_response(completion);
        if answer.is_empty() {
            return Err(LlmError::EmptyCompletion);
        }
        Ok(answer.to_owned())
    }
}

fn retryable(err: &LlmError) -> bool {
    match err {
        LlmError::Timeout | LlmError::Transport(_) => true,
        LlmError::ServiceError { status, .. } => *status == 429 || *status >= 500,
        _ => false,
    }
}

impl CompletionClient for HttpCompletionClient {
    fn complete(&self, prompt: &Prompt) -> Result<String, LlmError> {
        let body = json!({
            "model": self.config.model,
            "prompt": prompt.text,
            "temperature": 0,
            "n": 1,
        });
        self.log(json!({ "direction": "request", "endpoint": self.config.endpoint, "body": body }));
        let mut attempt = 0;
        loop {
            match self.attempt(&body) {
                Err(e) if retryable(&e) && attempt < self.config.max_retries => {
                    attempt += 1;
                    tracing::debug!("retrying completion after {e} (attempt {attempt})");
                    std::thread::sleep(Duration::from_millis(
                        self.config.backoff_ms * u64::from(attempt),
                    ));
                }
                other => return other,
            }
        }
    }
}
