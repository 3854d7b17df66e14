//! Text-generation, translation and embedding backends.
//!
//! Augmentation and quality code only sees the [`ChatProvider`],
//! [`TranslationProvider`] and [`EmbeddingProvider`] traits. Concrete
//! implementations are the HTTP clients in [`clients`] (backed by
//! [`http::HttpTransport`] or a recorded [`http::ReplayTransport`]) and the
//! seeded offline [`mock::MockProvider`].

pub mod clients;
pub mod http;
pub mod languages;
pub mod mock;
mod synonyms;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use clients::{DeeplClient, HttpEmbeddingClient, OpenAiChatClient};
pub use languages::{is_supported_language, language_name};
pub use mock::MockProvider;

/// Default sampling temperature for paraphrasing and generation.
pub const GENERATION_TEMPERATURE: f64 = 1.0;
/// Default sampling temperature for LLM-backed translation.
pub const TRANSLATION_TEMPERATURE: f64 = 0.0;

pub const DEFAULT_SYSTEM_MESSAGE: &str = "You are a helpful assistant.";

/// Prompt used by chat-backed translation clients. `{src}` and `{dst}` are
/// replaced by English language names; the text follows on the next line.
pub const TRANSLATION_PROMPT: &str =
    "Translate the following text from {src} to {dst}. Output only the translation.";

pub fn translation_prompt(source_lang: &str, target_lang: &str, text: &str) -> String {
    let src = language_name(source_lang).unwrap_or(source_lang);
    let dst = language_name(target_lang).unwrap_or(target_lang);
    format!(
        "{}\n{}",
        TRANSLATION_PROMPT.replace("{src}", src).replace("{dst}", dst),
        text
    )
}

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("provider unavailable after {attempts} attempt(s): {message}")]
    Unavailable { attempts: u32, message: String },
    #[error("protocol error: {message} (payload: {excerpt})")]
    Protocol { message: String, excerpt: String },
    #[error("HTTP {status}: {excerpt}")]
    Http { status: u16, excerpt: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid request: {0}")]
    Precondition(String),
}

impl ProviderError {
    pub(crate) fn protocol(message: impl Into<String>, payload: &str) -> Self {
        ProviderError::Protocol {
            message: message.into(),
            excerpt: excerpt(payload),
        }
    }
}

pub(crate) fn excerpt(payload: &str) -> String {
    const MAX: usize = 240;
    if payload.len() <= MAX {
        return payload.to_string();
    }
    let mut end = MAX;
    while !payload.is_char_boundary(end) {
        end -= 1;
    }
    format!("{}…", &payload[..end])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub system_message: String,
    pub user_prompt: String,
    pub temperature: f64,
    pub n_choices: usize,
    /// Sampling seed forwarded to backends that accept one. Repeated calls
    /// with the same prompt differ only through this field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ChatRequest {
    pub fn new(model: impl Into<String>, system: impl Into<String>, prompt: impl Into<String>) -> Self {
        Self {
            model: model.into(),
            system_message: system.into(),
            user_prompt: prompt.into(),
            temperature: GENERATION_TEMPERATURE,
            n_choices: 1,
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.n_choices == 0 {
            return Err(ProviderError::Precondition("n_choices must be at least 1".into()));
        }
        if self.user_prompt.trim().is_empty() {
            return Err(ProviderError::Precondition("prompt is empty".into()));
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(ProviderError::Precondition("temperature must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub choices: Vec<String>,
    pub model: String,
}

impl ChatResponse {
    pub(crate) fn check(self, expected: usize, raw: &str) -> Result<Self, ProviderError> {
        if self.choices.len() != expected {
            return Err(ProviderError::protocol(
                format!("expected {expected} choice(s), got {}", self.choices.len()),
                raw,
            ));
        }
        if self.choices.iter().any(|c| c.trim().is_empty()) {
            return Err(ProviderError::protocol("empty choice in response", raw));
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationRequest {
    pub text: String,
    pub source_lang: String,
    pub target_lang: String,
}

impl TranslationRequest {
    pub fn new(text: impl Into<String>, source: &str, target: &str) -> Self {
        Self {
            text: text.into(),
            source_lang: source.to_string(),
            target_lang: target.to_string(),
        }
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        for code in [&self.source_lang, &self.target_lang] {
            if !is_supported_language(code) {
                return Err(ProviderError::Config(format!("unsupported language `{code}`")));
            }
        }
        if self.source_lang == self.target_lang {
            return Err(ProviderError::Precondition(format!(
                "source and target language are both `{}`",
                self.source_lang
            )));
        }
        if self.text.trim().is_empty() {
            return Err(ProviderError::Precondition("text to translate is empty".into()));
        }
        Ok(())
    }
}

/// Sentence embedding plus optional per-token embeddings of the same
/// dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingResult {
    pub sentence_vector: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_vectors: Option<Vec<(String, Vec<f64>)>>,
}

impl EmbeddingResult {
    pub fn dimension(&self) -> usize {
        self.sentence_vector.len()
    }
}

/// Checks the shared-dimension and finiteness invariants of a batch.
pub fn validate_embeddings(results: &[EmbeddingResult], raw: &str) -> Result<(), ProviderError> {
    let Some(first) = results.first() else {
        return Ok(());
    };
    let d = first.dimension();
    if d < 2 {
        return Err(ProviderError::protocol(format!("embedding dimension {d} < 2"), raw));
    }
    for r in results {
        let vectors = std::iter::once(&r.sentence_vector)
            .chain(r.token_vectors.iter().flatten().map(|(_, v)| v));
        for v in vectors {
            if v.len() != d {
                return Err(ProviderError::protocol(
                    format!("dimension mismatch: {} vs {d}", v.len()),
                    raw,
                ));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(ProviderError::protocol("non-finite embedding value", raw));
            }
        }
    }
    Ok(())
}

pub trait ChatProvider: Send + Sync {
    fn chat_complete(&self, request: &ChatRequest) -> Result<ChatResponse, ProviderError>;
    /// Endpoint description recorded in run manifests.
    fn endpoint(&self) -> String;
}

pub trait TranslationProvider: Send + Sync {
    fn translate(&self, request: &TranslationRequest) -> Result<String, ProviderError>;
    fn endpoint(&self) -> String;
}

pub trait EmbeddingProvider: Send + Sync {
    /// One result per input, in input order.
    fn embed(&self, texts: &[String], with_tokens: bool) -> Result<Vec<EmbeddingResult>, ProviderError>;
    fn endpoint(&self) -> String;
}
