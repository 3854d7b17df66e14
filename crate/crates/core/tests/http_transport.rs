mod support;

use std::sync::Arc;
use std::time::Duration;

use serde_json::json;
use support::{FakeServer, Reply};
use textaug::providers::clients::{CHAT_PATH, EMBEDDINGS_PATH, TOKEN_EMBEDDINGS_PATH};
use textaug::providers::http::{AuthScheme, HttpConfig, HttpTransport, ReplayTransport, Transport};
use textaug::providers::{
    ChatProvider, ChatRequest, DeeplClient, EmbeddingProvider, HttpEmbeddingClient, OpenAiChatClient,
    ProviderError, TranslationProvider, TranslationRequest,
};

fn chat_reply(text: &str) -> serde_json::Value {
    json!({"model": "gpt-test", "choices": [{"index": 0, "message": {"role": "assistant", "content": text}}]})
}

fn fast(url: &str) -> HttpConfig {
    HttpConfig {
        initial_backoff_ms: 1,
        max_backoff_ms: 5,
        ..HttpConfig::new(url)
    }
}

#[test]
fn retries_rate_limits_then_succeeds() {
    let server = FakeServer::start(|n, _| {
        if n < 2 {
            Reply::json(429, &json!({"error": "slow down"})).with_header("Retry-After", "0")
        } else {
            Reply::json(200, &chat_reply("fine"))
        }
    });
    let transport = Arc::new(HttpTransport::new(fast(&server.url)).unwrap());
    let client = OpenAiChatClient::new(transport.clone(), "gpt-test");
    let resp = client
        .chat_complete(&ChatRequest::new("gpt-test", "sys", "hello"))
        .unwrap();
    assert_eq!(resp.choices, ["fine"]);
    assert_eq!(server.requests().len(), 3);
    let events = transport.backoff_events();
    assert_eq!(events.len(), 2);
    assert!(events.iter().all(|e| e.status == Some(429) && e.wait == Duration::ZERO));
    assert_eq!(events[1].attempt, 2);
}

#[test]
fn server_errors_exhaust_retries() {
    let server = FakeServer::start(|_, _| Reply::json(503, &json!({"error": "down"})));
    let config = HttpConfig {
        max_retries: 2,
        ..fast(&server.url)
    };
    let transport = HttpTransport::new(config).unwrap();
    match transport.post_json(CHAT_PATH, &json!({})) {
        Err(ProviderError::Unavailable { attempts, message }) => {
            assert_eq!(attempts, 3);
            assert!(message.contains("503"));
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(server.requests().len(), 3);
    let waits: Vec<_> = transport.backoff_events().iter().map(|e| e.wait).collect();
    assert_eq!(waits, [Duration::from_millis(1), Duration::from_millis(2)]);
}

#[test]
fn client_errors_are_not_retried() {
    let server = FakeServer::start(|_, _| Reply::json(401, &json!({"error": "bad key"})));
    let transport = HttpTransport::new(fast(&server.url)).unwrap();
    match transport.post_json(CHAT_PATH, &json!({})) {
        Err(ProviderError::Http { status, excerpt }) => {
            assert_eq!(status, 401);
            assert!(excerpt.contains("bad key"));
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(server.requests().len(), 1);
}

#[test]
fn malformed_response_is_protocol_error() {
    let server = FakeServer::start(|_, _| Reply::json(200, &json!({"unexpected": true})));
    let client = OpenAiChatClient::new(Arc::new(HttpTransport::new(fast(&server.url)).unwrap()), "m");
    let err = client.chat_complete(&ChatRequest::new("m", "s", "p")).unwrap_err();
    match err {
        ProviderError::Protocol { excerpt, .. } => assert!(excerpt.contains("unexpected")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_credential_is_config_error() {
    let config = HttpConfig {
        api_key_env: Some("TEXTAUG_TEST_SURELY_UNSET_VAR".into()),
        ..HttpConfig::new("http://127.0.0.1:9")
    };
    assert!(matches!(HttpTransport::new(config), Err(ProviderError::Config(_))));
}

#[test]
fn credentials_go_in_the_expected_header() {
    std::env::set_var("TEXTAUG_TEST_DEEPL_KEY", "k-123");
    let server = FakeServer::start(|_, seen| {
        let text = if seen.body["target_lang"] == "DE" { "Guten Tag" } else { "Good day" };
        Reply::json(200, &json!({"translations": [{"detected_source_language": "EN", "text": text}]}))
    });
    let config = HttpConfig {
        api_key_env: Some("TEXTAUG_TEST_DEEPL_KEY".into()),
        auth: AuthScheme::DeeplAuthKey,
        ..fast(&server.url)
    };
    let client = DeeplClient::new(Arc::new(HttpTransport::new(config).unwrap()));
    let out = client.translate(&TranslationRequest::new("Good day", "en", "de")).unwrap();
    assert_eq!(out, "Guten Tag");
    let seen = &server.requests()[0];
    assert_eq!(seen.path, "/v2/translate");
    assert_eq!(seen.header("authorization"), Some("DeepL-Auth-Key k-123"));
    assert_eq!(seen.body["text"], json!(["Good day"]));
    assert_eq!(seen.body["source_lang"], "EN");
}

#[test]
fn chat_wire_format() {
    let server = FakeServer::start(|_, _| Reply::json(200, &chat_reply("a\nb")));
    let client = OpenAiChatClient::new(Arc::new(HttpTransport::new(fast(&server.url)).unwrap()), "m");
    let mut req = ChatRequest::new("gpt-3.5-turbo", "You are a helpful assistant.", "Say hi");
    req.seed = Some(9);
    client.chat_complete(&req).unwrap();
    let body = &server.requests()[0].body;
    assert_eq!(body["model"], "gpt-3.5-turbo");
    assert_eq!(body["messages"][0]["role"], "system");
    assert_eq!(body["messages"][1]["content"], "Say hi");
    assert_eq!(body["n"], 1);
    assert_eq!(body["seed"], 9);
    assert_eq!(body["temperature"], 1.0);
}

#[test]
fn recorded_exchanges_replay_without_network() {
    let server = FakeServer::start(|n, _| Reply::json(200, &chat_reply(&format!("reply {n}"))));
    let dir = tempfile::tempdir().unwrap();
    let config = HttpConfig {
        record_dir: Some(dir.path().to_path_buf()),
        ..fast(&server.url)
    };
    let live = OpenAiChatClient::new(Arc::new(HttpTransport::new(config).unwrap()), "m");
    let first = ChatRequest::new("m", "s", "one");
    let second = ChatRequest::new("m", "s", "two");
    let a = live.chat_complete(&first).unwrap();
    let b = live.chat_complete(&second).unwrap();
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);

    let replay = OpenAiChatClient::new(Arc::new(ReplayTransport::open(dir.path()).unwrap()), "m");
    assert_eq!(replay.chat_complete(&second).unwrap(), b);
    assert_eq!(replay.chat_complete(&first).unwrap(), a);
    assert!(matches!(
        replay.chat_complete(&ChatRequest::new("m", "s", "three")),
        Err(ProviderError::Unavailable { .. })
    ));
}

fn embedding_server() -> FakeServer {
    FakeServer::start(|_, seen| {
        let input: Vec<String> = serde_json::from_value(seen.body["input"].clone()).unwrap();
        if seen.path == EMBEDDINGS_PATH {
            let data: Vec<_> = input
                .iter()
                .enumerate()
                .map(|(i, t)| json!({"index": i, "embedding": [t.len() as f64, 1.0, 0.5]}))
                .collect();
            Reply::json(200, &json!({"object": "list", "data": data, "model": "mini"}))
        } else if seen.path == TOKEN_EMBEDDINGS_PATH {
            let data: Vec<_> = input
                .iter()
                .map(|t| {
                    let tokens: Vec<&str> = t.split_whitespace().collect();
                    let vectors: Vec<_> = tokens.iter().map(|w| json!([w.len() as f64, 0.0, 1.0])).collect();
                    json!({"tokens": tokens, "vectors": vectors})
                })
                .collect();
            Reply::json(200, &json!({"data": data}))
        } else {
            Reply::json(404, &json!({"error": "no route"}))
        }
    })
}

#[test]
fn embedding_protocol_round_trip() {
    let server = embedding_server();
    let client = HttpEmbeddingClient::new(Arc::new(HttpTransport::new(fast(&server.url)).unwrap()), "mini");
    let texts = vec!["hello there".to_string(), "bye".to_string()];
    let out = client.embed(&texts, true).unwrap();
    assert_eq!(out.len(), 2);
    assert_eq!(out[0].sentence_vector, [11.0, 1.0, 0.5]);
    let toks = out[0].token_vectors.as_ref().unwrap();
    assert_eq!(toks[0].0, "hello");
    assert_eq!(toks[1].1, [5.0, 0.0, 1.0]);
    let paths: Vec<_> = server.requests().iter().map(|s| s.path.clone()).collect();
    assert_eq!(paths, [EMBEDDINGS_PATH, TOKEN_EMBEDDINGS_PATH]);

    let sentence_only = client.embed(&texts, false).unwrap();
    assert!(sentence_only[0].token_vectors.is_none());
}

#[test]
fn committed_embedding_fixtures_replay() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/embedding_protocol");
    if std::env::var_os("TEXTAUG_RECORD_FIXTURES").is_some() {
        let _ = std::fs::remove_dir_all(&dir);
        let server = embedding_server();
        let config = HttpConfig {
            record_dir: Some(dir.clone()),
            ..fast(&server.url)
        };
        let client = HttpEmbeddingClient::new(Arc::new(HttpTransport::new(config).unwrap()), "mini");
        client.embed(&["hello there".to_string(), "bye".to_string()], true).unwrap();
    }
    let client = HttpEmbeddingClient::new(Arc::new(ReplayTransport::open(&dir).unwrap()), "mini");
    let out = client.embed(&["hello there".to_string(), "bye".to_string()], true).unwrap();
    assert_eq!(out[1].sentence_vector, [3.0, 1.0, 0.5]);
    assert_eq!(out[1].token_vectors.as_ref().unwrap()[0].0, "bye");
}

#[test]
fn in_flight_bound_serializes_requests() {
    use std::sync::atomic::{AtomicUsize, Ordering};
    let active = Arc::new(AtomicUsize::new(0));
    let peak = Arc::new(AtomicUsize::new(0));
    let (a, p) = (Arc::clone(&active), Arc::clone(&peak));
    let server = FakeServer::start(move |_, _| {
        let now = a.fetch_add(1, Ordering::SeqCst) + 1;
        p.fetch_max(now, Ordering::SeqCst);
        std::thread::sleep(Duration::from_millis(20));
        a.fetch_sub(1, Ordering::SeqCst);
        Reply::json(200, &json!({}))
    });
    let config = HttpConfig {
        max_in_flight: 2,
        ..fast(&server.url)
    };
    let transport = Arc::new(HttpTransport::new(config).unwrap());
    let handles: Vec<_> = (0..6)
        .map(|_| {
            let t = Arc::clone(&transport);
            std::thread::spawn(move || t.post_json("/x", &json!({})).unwrap())
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    assert_eq!(server.requests().len(), 6);
    assert!(peak.load(Ordering::SeqCst) <= 2);
}
