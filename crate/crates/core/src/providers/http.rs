//! JSON-over-HTTP transport with retries, rate limiting, bounded
//! concurrency and exchange recording.

use std::collections::{HashMap, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::{excerpt, ProviderError};

/// Anything that can POST a JSON body and return a JSON body.
pub trait Transport: Send + Sync {
    fn post_json(&self, path: &str, body: &Value) -> Result<Value, ProviderError>;
    fn endpoint(&self) -> String;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuthScheme {
    #[default]
    Bearer,
    /// `Authorization: DeepL-Auth-Key <key>`
    DeeplAuthKey,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpConfig {
    /// Base URL, e.g. `https://api.openai.com`.
    pub endpoint: String,
    /// Name of the environment variable holding the credential.
    pub api_key_env: Option<String>,
    pub auth: AuthScheme,
    pub max_retries: u32,
    pub initial_backoff_ms: u64,
    pub max_backoff_ms: u64,
    pub timeout_secs: u64,
    pub requests_per_minute: Option<u32>,
    pub max_in_flight: usize,
    /// Directory receiving one JSON file per exchange.
    pub record_dir: Option<PathBuf>,
}

impl Default for HttpConfig {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            api_key_env: None,
            auth: AuthScheme::Bearer,
            max_retries: 5,
            initial_backoff_ms: 500,
            max_backoff_ms: 30_000,
            timeout_secs: 120,
            requests_per_minute: None,
            max_in_flight: 4,
            record_dir: None,
        }
    }
}

impl HttpConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            ..Self::default()
        }
    }

    /// Delay before retry number `retry` (0-based), doubling up to the cap.
    pub fn backoff(&self, retry: u32) -> Duration {
        let factor = 1u64.checked_shl(retry.min(32)).unwrap_or(u64::MAX);
        Duration::from_millis(self.initial_backoff_ms.saturating_mul(factor).min(self.max_backoff_ms))
    }
}

/// Counting semaphore bounding in-flight requests.
struct Semaphore {
    permits: Mutex<usize>,
    cv: Condvar,
}

impl Semaphore {
    fn new(n: usize) -> Self {
        Self {
            permits: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> SemaphoreGuard<'_> {
        let mut p = self.permits.lock().unwrap();
        while *p == 0 {
            p = self.cv.wait(p).unwrap();
        }
        *p -= 1;
        SemaphoreGuard(self)
    }
}

struct SemaphoreGuard<'a>(&'a Semaphore);

impl Drop for SemaphoreGuard<'_> {
    fn drop(&mut self) {
        *self.0.permits.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

/// Token bucket refilled continuously at `per_minute / 60` tokens per second.
pub struct TokenBucket {
    capacity: f64,
    per_sec: f64,
    state: Mutex<(f64, Instant)>,
}

impl TokenBucket {
    pub fn per_minute(per_minute: u32) -> Self {
        let capacity = f64::from(per_minute.max(1));
        Self {
            capacity,
            per_sec: capacity / 60.0,
            state: Mutex::new((capacity, Instant::now())),
        }
    }

    /// Blocks until a token is available.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut st = self.state.lock().unwrap();
                let now = Instant::now();
                let elapsed = now.duration_since(st.1).as_secs_f64();
                st.0 = (st.0 + elapsed * self.per_sec).min(self.capacity);
                st.1 = now;
                if st.0 >= 1.0 {
                    st.0 -= 1.0;
                    return;
                }
                (1.0 - st.0) / self.per_sec
            };
            thread::sleep(Duration::from_secs_f64(wait));
        }
    }
}

/// One retry wait, kept for inspection and logged through `tracing`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackoffEvent {
    pub request_id: u64,
    pub attempt: u32,
    pub status: Option<u16>,
    pub wait: Duration,
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordedExchange {
    request_id: u64,
    path: String,
    request_digest: String,
    request: Value,
    status: u16,
    attempts: u32,
    response: Value,
}

pub(crate) fn request_digest(path: &str, body: &Value) -> String {
    let mut h = Sha256::new();
    h.update(path.as_bytes());
    h.update(b"\n");
    h.update(serde_json::to_string(body).expect("JSON value serializes").as_bytes());
    hex::encode(h.finalize())
}

pub struct HttpTransport {
    client: reqwest::blocking::Client,
    config: HttpConfig,
    api_key: Option<String>,
    next_id: AtomicU64,
    limiter: Option<TokenBucket>,
    in_flight: Semaphore,
    backoffs: Mutex<Vec<BackoffEvent>>,
}

enum Attempt {
    Done(u16, String),
    Retry(Option<u16>, String, Option<Duration>),
    Fatal(ProviderError),
}

impl HttpTransport {
    pub fn new(config: HttpConfig) -> Result<Self, ProviderError> {
        if config.endpoint.is_empty() {
            return Err(ProviderError::Config("provider endpoint is empty".into()));
        }
        let api_key = match &config.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                ProviderError::Config(format!("environment variable `{var}` is not set"))
            })?),
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| ProviderError::Config(e.to_string()))?;
        if let Some(dir) = &config.record_dir {
            fs::create_dir_all(dir).map_err(|e| ProviderError::Config(format!("{}: {e}", dir.display())))?;
        }
        Ok(Self {
            client,
            limiter: config.requests_per_minute.map(TokenBucket::per_minute),
            in_flight: Semaphore::new(config.max_in_flight),
            api_key,
            config,
            next_id: AtomicU64::new(1),
            backoffs: Mutex::new(Vec::new()),
        })
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    pub fn backoff_events(&self) -> Vec<BackoffEvent> {
        self.backoffs.lock().unwrap().clone()
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.config.endpoint.trim_end_matches('/'), path)
    }

    fn attempt(&self, url: &str, body: &Value) -> Attempt {
        let mut req = self.client.post(url).json(body);
        if let Some(key) = &self.api_key {
            req = match self.config.auth {
                AuthScheme::Bearer => req.bearer_auth(key),
                AuthScheme::DeeplAuthKey => req.header("Authorization", format!("DeepL-Auth-Key {key}")),
            };
        }
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(None, e.to_string(), None),
        };
        let status = resp.status().as_u16();
        let retry_after = resp
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Duration::from_secs);
        let text = match resp.text() {
            Ok(t) => t,
            Err(e) => return Attempt::Retry(Some(status), e.to_string(), None),
        };
        match status {
            200..=299 => Attempt::Done(status, text),
            429 | 500..=599 => Attempt::Retry(Some(status), text, retry_after),
            _ => Attempt::Fatal(ProviderError::Http {
                status,
                excerpt: excerpt(&text),
            }),
        }
    }

    fn record(&self, id: u64, path: &str, body: &Value, status: u16, attempts: u32, raw: &str) {
        let Some(dir) = &self.config.record_dir else {
            return;
        };
        let response = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let ex = RecordedExchange {
            request_id: id,
            path: path.to_string(),
            request_digest: request_digest(path, body),
            request: body.clone(),
            status,
            attempts,
            response,
        };
        let file = dir.join(format!("{id:06}.json"));
        let json = serde_json::to_string_pretty(&ex).expect("exchange serializes");
        if let Err(e) = fs::write(&file, json) {
            tracing::warn!("could not record exchange {}: {e}", file.display());
        }
    }
}

impl Transport for HttpTransport {
    fn post_json(&self, path: &str, body: &Value) -> Result<Value, ProviderError> {
        let _permit = self.in_flight.acquire();
        let id = self.next_id.fetch_add(1, Ordering::SeqCst);
        let url = self.url(path);
        tracing::debug!(request_id = id, %url, "request");
        let max_attempts = self.config.max_retries + 1;
        let mut last = String::new();
        for attempt in 1..=max_attempts {
            if let Some(l) = &self.limiter {
                l.acquire();
            }
            match self.attempt(&url, body) {
                Attempt::Done(status, text) => {
                    tracing::debug!(request_id = id, status, attempt, "response");
                    self.record(id, path, body, status, attempt, &text);
                    return serde_json::from_str(&text)
                        .map_err(|e| ProviderError::protocol(format!("response is not JSON: {e}"), &text));
                }
                Attempt::Fatal(e) => {
                    tracing::warn!(request_id = id, "request failed: {e}");
                    return Err(e);
                }
                Attempt::Retry(status, text, retry_after) => {
                    last = match status {
                        Some(s) => format!("HTTP {s}: {}", excerpt(&text)),
                        None => text,
                    };
                    if attempt == max_attempts {
                        break;
                    }
                    let wait = retry_after
                        .map(|d| d.min(Duration::from_millis(self.config.max_backoff_ms)))
                        .unwrap_or_else(|| self.config.backoff(attempt - 1));
                    tracing::warn!(request_id = id, attempt, ?status, ?wait, "transient failure, backing off");
                    self.backoffs.lock().unwrap().push(BackoffEvent {
                        request_id: id,
                        attempt,
                        status,
                        wait,
                    });
                    thread::sleep(wait);
                }
            }
        }
        Err(ProviderError::Unavailable {
            attempts: max_attempts,
            message: last,
        })
    }

    fn endpoint(&self) -> String {
        self.config.endpoint.clone()
    }
}

/// Serves responses from a directory written by [`HttpTransport`]'s
/// recording, matching requests by path and body digest.
pub struct ReplayTransport {
    dir: PathBuf,
    responses: Mutex<HashMap<String, VecDeque<Value>>>,
}

impl ReplayTransport {
    pub fn open(dir: &Path) -> Result<Self, ProviderError> {
        let mut files: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| ProviderError::Config(format!("{}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        let mut responses: HashMap<String, VecDeque<Value>> = HashMap::new();
        for f in files {
            let raw = fs::read_to_string(&f).map_err(|e| ProviderError::Config(format!("{}: {e}", f.display())))?;
            let ex: RecordedExchange = serde_json::from_str(&raw)
                .map_err(|e| ProviderError::protocol(format!("{}: {e}", f.display()), &raw))?;
            responses.entry(ex.request_digest).or_default().push_back(ex.response);
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            responses: Mutex::new(responses),
        })
    }
}

impl Transport for ReplayTransport {
    fn post_json(&self, path: &str, body: &Value) -> Result<Value, ProviderError> {
        let digest = request_digest(path, body);
        self.responses
            .lock()
            .unwrap()
            .get_mut(&digest)
            .and_then(VecDeque::pop_front)
            .ok_or_else(|| ProviderError::Unavailable {
                attempts: 1,
                message: format!("no recorded exchange for {path} ({digest})"),
            })
    }

    fn endpoint(&self) -> String {
        format!("replay:{}", self.dir.display())
    }
}
