//! Chat-completion clients: an HTTP client for OpenAI-compatible endpoints,
//! a record/replay pair keyed by a stable request digest, and a scripted
//! client for offline use.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use log::{debug, warn};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const API_KEY_ENV: &str = "OPINIONKB_API_KEY";
pub const FALLBACK_API_KEY_ENV: &str = "OPENAI_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub base_url: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub timeout_secs: u64,
    pub max_retries: u32,
    /// First retry delay; doubled on each further retry, plus jitter.
    pub backoff_base_ms: u64,
    pub max_in_flight: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            base_url: "http://localhost:30000/v1".into(),
            model_name: "meta-llama/Llama-3.1-8B-Instruct".into(),
            temperature: 0.0,
            max_output_tokens: 4096,
            timeout_secs: 120,
            max_retries: 3,
            backoff_base_ms: 1000,
            max_in_flight: 4,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ClientError> {
        if !(self.temperature >= 0.0) {
            return Err(ClientError::InvalidConfig(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if self.max_output_tokens == 0 {
            return Err(ClientError::InvalidConfig("max_output_tokens must be > 0".into()));
        }
        if self.max_in_flight == 0 {
            return Err(ClientError::InvalidConfig("max_in_flight must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// One request/response pair as persisted by the recording client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub digest: String,
    pub model_name: String,
    pub request_messages: Vec<ChatMessage>,
    pub response_text: String,
    pub latency_ms: u64,
    pub token_usage: Option<TokenUsage>,
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("request rejected with HTTP {status}: {body}")]
    Request { status: u16, body: String },
    #[error("model returned an empty completion")]
    EmptyResponse,
    #[error("no recorded exchange for request digest {digest}")]
    UnknownRequest { digest: String },
    #[error("exchange store {path}: {message}")]
    Store { path: String, message: String },
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("{0}")]
    Other(String),
}

/// Stable digest of a request: model name plus the full message list.
pub fn request_digest(model_name: &str, messages: &[ChatMessage]) -> String {
    let canonical = json!({"model": model_name, "messages": messages});
    let bytes = serde_json::to_vec(&canonical).expect("serializable");
    hex::encode(Sha256::digest(&bytes))
}

pub trait ChatClient: Send + Sync {
    fn config(&self) -> &ModelConfig;

    /// Returns the assistant message content for `messages`.
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, ClientError>;

    /// Upper bound on concurrent requests callers should issue.
    fn max_in_flight(&self) -> usize {
        self.config().max_in_flight.max(1)
    }
}

impl<C: ChatClient + ?Sized> ChatClient for &C {
    fn config(&self) -> &ModelConfig {
        (**self).config()
    }
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, ClientError> {
        (**self).complete(messages)
    }
    fn max_in_flight(&self) -> usize {
        (**self).max_in_flight()
    }
}

impl<C: ChatClient + ?Sized> ChatClient for Box<C> {
    fn config(&self) -> &ModelConfig {
        (**self).config()
    }
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, ClientError> {
        (**self).complete(messages)
    }
    fn max_in_flight(&self) -> usize {
        (**self).max_in_flight()
    }
}

struct Semaphore {
    used: Mutex<usize>,
    cv: Condvar,
    limit: usize,
}

struct Permit<'a>(&'a Semaphore);

impl Semaphore {
    fn new(limit: usize) -> Self {
        Semaphore {
            used: Mutex::new(0),
            cv: Condvar::new(),
            limit: limit.max(1),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut used = self.used.lock().unwrap();
        while *used >= self.limit {
            used = self.cv.wait(used).unwrap();
        }
        *used += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.used.lock().unwrap() -= 1;
        self.0.cv.notify_one();
    }
}

/// Line-delimited audit log, one record per attempted request.
pub struct AuditLog {
    file: Mutex<File>,
}

impl AuditLog {
    pub fn open(path: &Path) -> Result<Self, ClientError> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| ClientError::Store {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        Ok(AuditLog {
            file: Mutex::new(file),
        })
    }

    fn append(&self, record: serde_json::Value) {
        let mut line = record.to_string();
        line.push('\n');
        let mut f = self.file.lock().unwrap();
        if let Err(e) = f.write_all(line.as_bytes()) {
            warn!("audit log write failed: {e}");
        }
    }
}

/// Client for `POST {base_url}/chat/completions`.
pub struct HttpClient {
    config: ModelConfig,
    http: reqwest::blocking::Client,
    api_key: Option<String>,
    audit: Option<AuditLog>,
    in_flight: Semaphore,
}

enum AttemptError {
    Retryable(String),
    Fatal(ClientError),
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<TokenUsage>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    #[serde(default)]
    content: Option<String>,
}

impl HttpClient {
    /// Builds a client; the API key is read from the environment.
    pub fn new(config: ModelConfig) -> Result<Self, ClientError> {
        config.validate()?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| ClientError::InvalidConfig(e.to_string()))?;
        let api_key = std::env::var(API_KEY_ENV)
            .or_else(|_| std::env::var(FALLBACK_API_KEY_ENV))
            .ok()
            .filter(|k| !k.is_empty());
        let in_flight = Semaphore::new(config.max_in_flight);
        Ok(HttpClient {
            config,
            http,
            api_key,
            audit: None,
            in_flight,
        })
    }

    pub fn with_audit_log(mut self, log: AuditLog) -> Self {
        self.audit = Some(log);
        self
    }

    pub fn with_api_key(mut self, key: impl Into<String>) -> Self {
        self.api_key = Some(key.into());
        self
    }

    pub fn request_body(&self, messages: &[ChatMessage]) -> serde_json::Value {
        json!({
            "model": self.config.model_name,
            "messages": messages,
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_output_tokens,
        })
    }

    fn attempt(&self, body: &serde_json::Value) -> Result<(String, Option<TokenUsage>), AttemptError> {
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let mut req = self.http.post(url).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| AttemptError::Retryable(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| AttemptError::Retryable(e.to_string()))?;
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(AttemptError::Retryable(format!("HTTP {}: {}", status.as_u16(), text)));
        }
        if !status.is_success() {
            return Err(AttemptError::Fatal(ClientError::Request {
                status: status.as_u16(),
                body: text,
            }));
        }
        let parsed: CompletionResponse = serde_json::from_str(&text)
            .map_err(|e| AttemptError::Fatal(ClientError::Other(format!("malformed response: {e}"))))?;
        let content = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .unwrap_or_default();
        if content.trim().is_empty() {
            return Err(AttemptError::Fatal(ClientError::EmptyResponse));
        }
        Ok((content, parsed.usage))
    }

    fn backoff(&self, retry: u32) -> Duration {
        let base = self.config.backoff_base_ms as f64 * 2f64.powi(retry as i32 - 1);
        let jitter = rand::thread_rng().gen_range(0.0..0.25);
        Duration::from_micros((base * (1.0 + jitter) * 1000.0) as u64)
    }
}

impl ChatClient for HttpClient {
    fn config(&self) -> &ModelConfig {
        &self.config
    }

    fn complete(&self, messages: &[ChatMessage]) -> Result<String, ClientError> {
        let _permit = self.in_flight.acquire();
        let body = self.request_body(messages);
        let digest = request_digest(&self.config.model_name, messages);
        let mut attempt = 0u32;
        loop {
            attempt += 1;
            let started = Instant::now();
            let outcome = self.attempt(&body);
            let latency_ms = started.elapsed().as_millis() as u64;
            if let Some(log) = &self.audit {
                let (status, detail) = match &outcome {
                    Ok((text, _)) => ("ok", text.clone()),
                    Err(AttemptError::Retryable(m)) => ("retryable_error", m.clone()),
                    Err(AttemptError::Fatal(e)) => ("error", e.to_string()),
                };
                log.append(json!({
                    "timestamp": chrono::Utc::now().to_rfc3339(),
                    "digest": digest,
                    "model": self.config.model_name,
                    "attempt": attempt,
                    "status": status,
                    "latency_ms": latency_ms,
                    "detail": detail,
                }));
            }
            match outcome {
                Ok((text, _usage)) => return Ok(text),
                Err(AttemptError::Fatal(e)) => return Err(e),
                Err(AttemptError::Retryable(message)) => {
                    if attempt > self.config.max_retries {
                        return Err(ClientError::Transport {
                            attempts: attempt,
                            message,
                        });
                    }
                    let delay = self.backoff(attempt);
                    debug!("attempt {attempt} failed ({message}); retrying in {delay:?}");
                    std::thread::sleep(delay);
                }
            }
        }
    }
}

fn load_store(path: &Path) -> Result<HashMap<String, Exchange>, ClientError> {
    let store_err = |message: String| ClientError::Store {
        path: path.display().to_string(),
        message,
    };
    let file = File::open(path).map_err(|e| store_err(e.to_string()))?;
    let mut map = HashMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| store_err(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let ex: Exchange =
            serde_json::from_str(&line).map_err(|e| store_err(format!("line {}: {e}", i + 1)))?;
        map.entry(ex.digest.clone()).or_insert(ex);
    }
    Ok(map)
}

/// Serves completions from a recorded exchange store; unknown requests fail.
pub struct ReplayClient {
    config: ModelConfig,
    exchanges: HashMap<String, Exchange>,
}

impl ReplayClient {
    pub fn open(path: &Path, config: ModelConfig) -> Result<Self, ClientError> {
        Ok(ReplayClient {
            config,
            exchanges: load_store(path)?,
        })
    }

    pub fn from_exchanges(config: ModelConfig, exchanges: impl IntoIterator<Item = Exchange>) -> Self {
        ReplayClient {
            config,
            exchanges: exchanges.into_iter().map(|e| (e.digest.clone(), e)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.exchanges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exchanges.is_empty()
    }
}

impl ChatClient for ReplayClient {
    fn config(&self) -> &ModelConfig {
        &self.config
    }

    fn complete(&self, messages: &[ChatMessage]) -> Result<String, ClientError> {
        let digest = request_digest(&self.config.model_name, messages);
        match self.exchanges.get(&digest) {
            Some(ex) => Ok(ex.response_text.clone()),
            None => Err(ClientError::UnknownRequest { digest }),
        }
    }
}

/// Wraps a live client and appends every new exchange to a store file.
/// Requests already in the store are answered from it.
pub struct RecordingClient<C> {
    inner: C,
    path: PathBuf,
    file: Mutex<(File, HashMap<String, String>)>,
}

impl<C: ChatClient> RecordingClient<C> {
    pub fn open(inner: C, path: &Path) -> Result<Self, ClientError> {
        let known = if path.exists() {
            load_store(path)?
                .into_iter()
                .map(|(digest, ex)| (digest, ex.response_text))
                .collect()
        } else {
            Default::default()
        };
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| ClientError::Store {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        Ok(RecordingClient {
            inner,
            path: path.to_path_buf(),
            file: Mutex::new((file, known)),
        })
    }

    pub fn into_inner(self) -> C {
        self.inner
    }
}

impl<C: ChatClient> ChatClient for RecordingClient<C> {
    fn config(&self) -> &ModelConfig {
        self.inner.config()
    }

    fn max_in_flight(&self) -> usize {
        self.inner.max_in_flight()
    }

    fn complete(&self, messages: &[ChatMessage]) -> Result<String, ClientError> {
        let model_name = self.inner.config().model_name.clone();
        let digest = request_digest(&model_name, messages);
        if let Some(hit) = self.file.lock().unwrap().1.get(&digest) {
            return Ok(hit.clone());
        }
        let started = Instant::now();
        let response = self.inner.complete(messages)?;
        let exchange = Exchange {
            digest: digest.clone(),
            model_name,
            request_messages: messages.to_vec(),
            response_text: response.clone(),
            latency_ms: started.elapsed().as_millis() as u64,
            token_usage: None,
        };
        let mut guard = self.file.lock().unwrap();
        let (file, known) = &mut *guard;
        if !known.contains_key(&digest) {
            known.insert(digest, response.clone());
            let mut line = serde_json::to_string(&exchange).expect("serializable");
            line.push('\n');
            file.write_all(line.as_bytes()).map_err(|e| ClientError::Store {
                path: self.path.display().to_string(),
                message: e.to_string(),
            })?;
        }
        Ok(response)
    }
}

type Script = dyn Fn(&[ChatMessage]) -> Result<String, ClientError> + Send + Sync;

/// Client backed by a closure; handy for offline runs and tests.
pub struct ScriptedClient {
    config: ModelConfig,
    script: Box<Script>,
}

impl ScriptedClient {
    pub fn new<F>(config: ModelConfig, script: F) -> Self
    where
        F: Fn(&[ChatMessage]) -> Result<String, ClientError> + Send + Sync + 'static,
    {
        ScriptedClient {
            config,
            script: Box::new(script),
        }
    }
}

impl ChatClient for ScriptedClient {
    fn config(&self) -> &ModelConfig {
        &self.config
    }

    fn complete(&self, messages: &[ChatMessage]) -> Result<String, ClientError> {
        (self.script)(messages)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_ignores_nothing_but_model_and_messages() {
        let m = vec![ChatMessage::system("s"), ChatMessage::user("u")];
        let a = request_digest("m1", &m);
        assert_eq!(a, request_digest("m1", &m.clone()));
        assert_ne!(a, request_digest("m2", &m));
        assert_ne!(a, request_digest("m1", &m[..1]));
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn config_validation() {
        assert!(ModelConfig::default().validate().is_ok());
        let bad = ModelConfig {
            temperature: -0.1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ModelConfig {
            max_output_tokens: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(ModelConfig::default().temperature, 0.0);
        assert_eq!(ModelConfig::default().max_output_tokens, 4096);
    }

    #[test]
    fn replay_miss_names_digest() {
        let client = ReplayClient::from_exchanges(ModelConfig::default(), []);
        let msgs = [ChatMessage::user("hi")];
        match client.complete(&msgs) {
            Err(ClientError::UnknownRequest { digest }) => {
                assert_eq!(digest, request_digest(&ModelConfig::default().model_name, &msgs))
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
