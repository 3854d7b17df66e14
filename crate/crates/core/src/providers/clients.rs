//! Provider clients speaking the de-facto JSON wire formats.
//!
//! | client | request | response |
//! |---|---|---|
//! | chat | `{model, messages:[{role,content}], temperature, n}` | `{choices:[{message:{content}}]}` |
//! | translation | `{text:[...], target_lang}` | `{translations:[{text}]}` |
//! | embeddings | `{model, input:[...]}` | `{data:[{embedding:[...]}]}` |
//! | token embeddings | `{input:[...]}` | `{data:[{tokens:[...], vectors:[[...]]}]}` |

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::http::Transport;
use super::{
    translation_prompt, validate_embeddings, ChatProvider, ChatRequest, ChatResponse, EmbeddingProvider,
    EmbeddingResult, ProviderError, TranslationProvider, TranslationRequest, DEFAULT_SYSTEM_MESSAGE,
    TRANSLATION_TEMPERATURE,
};

pub const CHAT_PATH: &str = "/v1/chat/completions";
pub const DEEPL_PATH: &str = "/v2/translate";
pub const EMBEDDINGS_PATH: &str = "/v1/embeddings";
pub const TOKEN_EMBEDDINGS_PATH: &str = "/token-embeddings";

fn decode<T: for<'de> Deserialize<'de>>(value: Value) -> Result<T, ProviderError> {
    let raw = value.to_string();
    serde_json::from_value(value).map_err(|e| ProviderError::protocol(format!("unexpected response shape: {e}"), &raw))
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct WireChatResponse {
    #[serde(default)]
    model: Option<String>,
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireContent,
}

#[derive(Deserialize)]
struct WireContent {
    content: String,
}

/// Chat-completion client; also translates through [`translation_prompt`].
#[derive(Clone)]
pub struct OpenAiChatClient {
    transport: Arc<dyn Transport>,
    /// Model used for translation requests.
    translation_model: String,
}

impl OpenAiChatClient {
    pub fn new(transport: Arc<dyn Transport>, translation_model: impl Into<String>) -> Self {
        Self {
            transport,
            translation_model: translation_model.into(),
        }
    }

    pub fn request_body(request: &ChatRequest) -> Value {
        let messages = [
            WireMessage {
                role: "system",
                content: &request.system_message,
            },
            WireMessage {
                role: "user",
                content: &request.user_prompt,
            },
        ];
        let mut body = json!({
            "model": request.model,
            "messages": messages,
            "temperature": request.temperature,
            "n": request.n_choices,
        });
        if let Some(seed) = request.seed {
            body["seed"] = json!(seed);
        }
        body
    }
}

impl ChatProvider for OpenAiChatClient {
    fn chat_complete(&self, request: &ChatRequest) -> Result<ChatResponse, ProviderError> {
        request.validate()?;
        let value = self.transport.post_json(CHAT_PATH, &Self::request_body(request))?;
        let raw = value.to_string();
        let wire: WireChatResponse = decode(value)?;
        ChatResponse {
            model: wire.model.unwrap_or_else(|| request.model.clone()),
            choices: wire.choices.into_iter().map(|c| c.message.content).collect(),
        }
        .check(request.n_choices, &raw)
    }

    fn endpoint(&self) -> String {
        self.transport.endpoint()
    }
}

impl TranslationProvider for OpenAiChatClient {
    fn translate(&self, request: &TranslationRequest) -> Result<String, ProviderError> {
        request.validate()?;
        let chat = ChatRequest {
            model: self.translation_model.clone(),
            system_message: DEFAULT_SYSTEM_MESSAGE.to_string(),
            user_prompt: translation_prompt(&request.source_lang, &request.target_lang, &request.text),
            temperature: TRANSLATION_TEMPERATURE,
            n_choices: 1,
            seed: None,
        };
        let resp = self.chat_complete(&chat)?;
        let text = resp.choices[0].trim().to_string();
        if text.is_empty() {
            return Err(ProviderError::protocol("empty translation", &resp.choices[0]));
        }
        Ok(text)
    }

    fn endpoint(&self) -> String {
        self.transport.endpoint()
    }
}

#[derive(Deserialize)]
struct WireTranslations {
    translations: Vec<WireTranslation>,
}

#[derive(Deserialize)]
struct WireTranslation {
    text: String,
}

/// DeepL-style translation client.
pub struct DeeplClient {
    transport: Arc<dyn Transport>,
}

impl DeeplClient {
    pub fn new(transport: Arc<dyn Transport>) -> Self {
        Self { transport }
    }

    /// DeepL target codes are upper case; English and Portuguese need a
    /// regional variant.
    pub fn target_code(lang: &str) -> String {
        match lang {
            "en" => "EN-US".to_string(),
            "pt" => "PT-PT".to_string(),
            other => other.to_ascii_uppercase(),
        }
    }
}

impl TranslationProvider for DeeplClient {
    fn translate(&self, request: &TranslationRequest) -> Result<String, ProviderError> {
        request.validate()?;
        let body = json!({
            "text": [request.text],
            "source_lang": request.source_lang.to_ascii_uppercase(),
            "target_lang": Self::target_code(&request.target_lang),
        });
        let value = self.transport.post_json(DEEPL_PATH, &body)?;
        let raw = value.to_string();
        let wire: WireTranslations = decode(value)?;
        let text = wire
            .translations
            .into_iter()
            .next()
            .map(|t| t.text.trim().to_string())
            .unwrap_or_default();
        if text.is_empty() {
            return Err(ProviderError::protocol("empty translation", &raw));
        }
        Ok(text)
    }

    fn endpoint(&self) -> String {
        self.transport.endpoint()
    }
}

#[derive(Deserialize)]
struct WireEmbeddings {
    data: Vec<WireEmbedding>,
}

#[derive(Deserialize)]
struct WireEmbedding {
    embedding: Vec<f64>,
}

#[derive(Deserialize)]
struct WireTokenEmbeddings {
    data: Vec<WireTokenEmbedding>,
}

#[derive(Deserialize)]
struct WireTokenEmbedding {
    tokens: Vec<String>,
    vectors: Vec<Vec<f64>>,
}

/// Client for the sentence and token embedding endpoints.
pub struct HttpEmbeddingClient {
    transport: Arc<dyn Transport>,
    model: String,
}

impl HttpEmbeddingClient {
    pub fn new(transport: Arc<dyn Transport>, model: impl Into<String>) -> Self {
        Self {
            transport,
            model: model.into(),
        }
    }
}

impl EmbeddingProvider for HttpEmbeddingClient {
    fn embed(&self, texts: &[String], with_tokens: bool) -> Result<Vec<EmbeddingResult>, ProviderError> {
        if texts.is_empty() {
            return Err(ProviderError::Precondition("no texts to embed".into()));
        }
        let value = self
            .transport
            .post_json(EMBEDDINGS_PATH, &json!({ "model": self.model, "input": texts }))?;
        let raw = value.to_string();
        let sentences: WireEmbeddings = decode(value)?;
        if sentences.data.len() != texts.len() {
            return Err(ProviderError::protocol(
                format!("expected {} embeddings, got {}", texts.len(), sentences.data.len()),
                &raw,
            ));
        }
        let mut results: Vec<EmbeddingResult> = sentences
            .data
            .into_iter()
            .map(|d| EmbeddingResult {
                sentence_vector: d.embedding,
                token_vectors: None,
            })
            .collect();
        if with_tokens {
            let value = self
                .transport
                .post_json(TOKEN_EMBEDDINGS_PATH, &json!({ "input": texts }))?;
            let raw_tokens = value.to_string();
            let tokens: WireTokenEmbeddings = decode(value)?;
            if tokens.data.len() != texts.len() {
                return Err(ProviderError::protocol(
                    format!("expected {} token sets, got {}", texts.len(), tokens.data.len()),
                    &raw_tokens,
                ));
            }
            for (r, t) in results.iter_mut().zip(tokens.data) {
                if t.tokens.len() != t.vectors.len() {
                    return Err(ProviderError::protocol("tokens and vectors differ in length", &raw_tokens));
                }
                r.token_vectors = Some(t.tokens.into_iter().zip(t.vectors).collect());
            }
        }
        validate_embeddings(&results, &raw)?;
        Ok(results)
    }

    fn endpoint(&self) -> String {
        self.transport.endpoint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    /// Returns canned JSON values in order and remembers request bodies.
    struct Canned {
        replies: Mutex<Vec<Value>>,
        seen: Mutex<Vec<(String, Value)>>,
    }

    impl Canned {
        fn new(replies: Vec<Value>) -> Arc<Self> {
            Arc::new(Self {
                replies: Mutex::new(replies.into_iter().rev().collect()),
                seen: Mutex::new(Vec::new()),
            })
        }
    }

    impl Transport for Canned {
        fn post_json(&self, path: &str, body: &Value) -> Result<Value, ProviderError> {
            self.seen.lock().unwrap().push((path.to_string(), body.clone()));
            Ok(self.replies.lock().unwrap().pop().expect("reply available"))
        }
        fn endpoint(&self) -> String {
            "canned".into()
        }
    }

    #[test]
    fn chat_body_shape() {
        let mut r = ChatRequest::new("gpt-4", "sys", "hi");
        r.n_choices = 2;
        let body = OpenAiChatClient::request_body(&r);
        assert_eq!(
            body,
            json!({"model":"gpt-4","messages":[{"role":"system","content":"sys"},{"role":"user","content":"hi"}],"temperature":1.0,"n":2})
        );
    }

    #[test]
    fn chat_wrong_choice_count_is_protocol_error() {
        let t = Canned::new(vec![json!({"choices":[{"message":{"content":"a"}}]})]);
        let c = OpenAiChatClient::new(t, "m");
        let mut r = ChatRequest::new("m", "s", "p");
        r.n_choices = 2;
        assert!(matches!(c.chat_complete(&r), Err(ProviderError::Protocol { .. })));
    }

    #[test]
    fn malformed_body_carries_excerpt() {
        let t = Canned::new(vec![json!({"unexpected": true})]);
        let c = OpenAiChatClient::new(t, "m");
        match c.chat_complete(&ChatRequest::new("m", "s", "p")) {
            Err(ProviderError::Protocol { excerpt, .. }) => assert!(excerpt.contains("unexpected")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn deepl_fixture() {
        let t = Canned::new(vec![json!({"translations":[{"text":"Guten Tag"}]})]);
        let c = DeeplClient::new(t.clone());
        let out = c.translate(&TranslationRequest::new("Good day", "en", "de")).unwrap();
        assert_eq!(out, "Guten Tag");
        let seen = t.seen.lock().unwrap();
        assert_eq!(seen[0].0, DEEPL_PATH);
        assert_eq!(seen[0].1, json!({"text":["Good day"],"source_lang":"EN","target_lang":"DE"}));
    }

    #[test]
    fn deepl_empty_translation() {
        let t = Canned::new(vec![json!({"translations":[{"text":"  "}]})]);
        let c = DeeplClient::new(t);
        assert!(matches!(
            c.translate(&TranslationRequest::new("x", "en", "de")),
            Err(ProviderError::Protocol { .. })
        ));
    }

    #[test]
    fn chat_translation_uses_template() {
        let t = Canned::new(vec![json!({"choices":[{"message":{"content":" Dzień dobry "}}]})]);
        let c = OpenAiChatClient::new(t.clone(), "gpt-4");
        let out = c.translate(&TranslationRequest::new("Good morning", "en", "pl")).unwrap();
        assert_eq!(out, "Dzień dobry");
        let body = &t.seen.lock().unwrap()[0].1;
        assert_eq!(body["temperature"], json!(0.0));
        assert_eq!(
            body["messages"][1]["content"],
            json!("Translate the following text from English to Polish. Output only the translation.\nGood morning")
        );
    }

    #[test]
    fn embedding_dimension_mismatch() {
        let t = Canned::new(vec![json!({"data":[{"embedding":[1.0,2.0]},{"embedding":[1.0,2.0,3.0]}]})]);
        let c = HttpEmbeddingClient::new(t, "m");
        let r = c.embed(&["a".into(), "b".into()], false);
        assert!(matches!(r, Err(ProviderError::Protocol { .. })));
    }

    #[test]
    fn token_embeddings_are_attached() {
        let t = Canned::new(vec![
            json!({"data":[{"embedding":[1.0,0.0]}]}),
            json!({"data":[{"tokens":["a","b"],"vectors":[[1.0,0.0],[0.0,1.0]]}]}),
        ]);
        let c = HttpEmbeddingClient::new(t, "m");
        let r = c.embed(&["a b".into()], true).unwrap();
        assert_eq!(r[0].token_vectors.as_ref().unwrap().len(), 2);
    }
}
