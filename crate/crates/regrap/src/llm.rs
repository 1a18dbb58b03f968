//! Chat-completions client with live, mock, and replay backends.
//!
//! Every request has a stable content digest covering the system text, user
//! text parts, the bytes of referenced images, the temperature, and the
//! request tag. Fixtures are stored one file per digest, which makes replay
//! runs offline and bit-identical: the same inputs always resolve to the same
//! recorded response.

use std::collections::{HashMap, VecDeque};
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex, MutexGuard};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const ENV_API_BASE: &str = "REGRAP_API_BASE";
pub const ENV_API_KEY: &str = "REGRAP_API_KEY";
pub const DEFAULT_MODEL: &str = "gpt-4o-2024-11-20";
pub const DEFAULT_CONCURRENCY: usize = 4;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("a chat request needs at least one user part")]
    EmptyRequest,
    #[error("temperature {0} is outside [0, 2]")]
    BadTemperature(f64),
    #[error("cannot read image {path}: {source}")]
    ImageRead {
        path: String,
        source: std::io::Error,
    },
    #[error("missing environment variable {0}")]
    MissingEnv(&'static str),
    #[error("live request failed after {attempts} attempt(s): {detail}")]
    Transport { attempts: usize, detail: String },
    #[error("API returned status {status}: {body}")]
    Api { status: u16, body: String },
    #[error("malformed API response: {0}")]
    BadApiResponse(String),
    #[error("no fixture for digest {digest} (tag {tag:?})")]
    FixtureMiss { digest: String, tag: String },
    #[error("fixture store error at {path}: {source}")]
    FixtureIo {
        path: String,
        source: std::io::Error,
    },
    #[error("fixture file {path} is malformed: {detail}")]
    FixtureFormat { path: String, detail: String },
    #[error("mock script has no response for tag {0:?}")]
    MockExhausted(String),
    #[error("no JSON object or array in response")]
    NoJson,
    #[error("unbalanced JSON starting at byte {position}")]
    UnbalancedJson { position: usize },
    #[error("malformed JSON at byte {position}: {detail}")]
    MalformedJson { position: usize, detail: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum UserPart {
    Text(String),
    Image(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub system: String,
    pub parts: Vec<UserPart>,
    pub temperature: f64,
    pub expect_json: bool,
    /// Pipeline stage label; distinguishes otherwise-identical requests and
    /// shows up in fixture files and errors.
    pub tag: String,
}

impl ChatRequest {
    pub fn new(
        system: impl Into<String>,
        parts: Vec<UserPart>,
        temperature: f64,
        tag: impl Into<String>,
    ) -> Result<Self, LlmError> {
        if parts.is_empty() {
            return Err(LlmError::EmptyRequest);
        }
        if !(0.0..=2.0).contains(&temperature) || temperature.is_nan() {
            return Err(LlmError::BadTemperature(temperature));
        }
        Ok(ChatRequest {
            system: system.into(),
            parts,
            temperature,
            expect_json: false,
            tag: tag.into(),
        })
    }

    pub fn expecting_json(mut self) -> Self {
        self.expect_json = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Live,
    Mock,
    Replay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatResponse {
    pub content: String,
    pub backend: BackendKind,
    pub request_digest: String,
}

#[derive(Serialize)]
#[serde(untagged)]
enum DigestPart<'a> {
    Text { text: &'a str },
    Image { image_sha256: String },
}

#[derive(Serialize)]
struct DigestRepr<'a> {
    system: &'a str,
    parts: Vec<DigestPart<'a>>,
    temperature: String,
    tag: &'a str,
}

/// Stable content hash of a request. Image parts hash the file bytes, so the
/// digest changes when an image changes even if its path does not.
pub fn request_digest(req: &ChatRequest) -> Result<String, LlmError> {
    let mut parts = Vec::with_capacity(req.parts.len());
    for part in &req.parts {
        parts.push(match part {
            UserPart::Text(text) => DigestPart::Text { text },
            UserPart::Image(path) => {
                let bytes = std::fs::read(path).map_err(|source| LlmError::ImageRead {
                    path: path.display().to_string(),
                    source,
                })?;
                DigestPart::Image {
                    image_sha256: hex::encode(Sha256::digest(&bytes)),
                }
            }
        });
    }
    let repr = DigestRepr {
        system: &req.system,
        parts,
        temperature: format!("{:?}", req.temperature),
        tag: &req.tag,
    };
    let canonical = serde_json::to_string(&repr).expect("digest serialization cannot fail");
    Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fixture {
    pub tag: String,
    pub content: String,
}

/// One JSON file per request digest.
#[derive(Debug, Clone)]
pub struct FixtureStore {
    dir: PathBuf,
}

impl FixtureStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, digest: &str) -> PathBuf {
        self.dir.join(format!("{digest}.json"))
    }

    pub fn store(&self, digest: &str, tag: &str, content: &str) -> Result<(), LlmError> {
        std::fs::create_dir_all(&self.dir).map_err(|source| LlmError::FixtureIo {
            path: self.dir.display().to_string(),
            source,
        })?;
        let fixture = Fixture {
            tag: tag.to_string(),
            content: content.to_string(),
        };
        let text = serde_json::to_string_pretty(&fixture).expect("fixture serialization");
        let path = self.path_for(digest);
        std::fs::write(&path, text + "\n").map_err(|source| LlmError::FixtureIo {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(&self, digest: &str) -> Result<Option<Fixture>, LlmError> {
        let path = self.path_for(digest);
        let text = match std::fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == ErrorKind::NotFound => return Ok(None),
            Err(source) => {
                return Err(LlmError::FixtureIo {
                    path: path.display().to_string(),
                    source,
                })
            }
        };
        let fixture = serde_json::from_str(&text).map_err(|e| LlmError::FixtureFormat {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        Ok(Some(fixture))
    }
}

/// Scripted responses for tests and fixture recording: per-tag FIFO queues
/// with a default queue fallback.
#[derive(Debug, Default)]
pub struct MockScript {
    by_tag: HashMap<String, VecDeque<String>>,
    default_queue: VecDeque<String>,
}

impl MockScript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, tag: impl Into<String>, content: impl Into<String>) -> &mut Self {
        self.by_tag
            .entry(tag.into())
            .or_default()
            .push_back(content.into());
        self
    }

    pub fn push_default(&mut self, content: impl Into<String>) -> &mut Self {
        self.default_queue.push_back(content.into());
        self
    }

    fn take(&mut self, tag: &str) -> Result<String, LlmError> {
        if let Some(queue) = self.by_tag.get_mut(tag) {
            if let Some(content) = queue.pop_front() {
                return Ok(content);
            }
        }
        self.default_queue
            .pop_front()
            .ok_or_else(|| LlmError::MockExhausted(tag.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct LiveConfig {
    pub api_base: String,
    pub api_key: String,
    pub model: String,
    pub timeout: Duration,
}

impl LiveConfig {
    pub fn new(api_base: impl Into<String>, api_key: impl Into<String>) -> Self {
        LiveConfig {
            api_base: api_base.into(),
            api_key: api_key.into(),
            model: DEFAULT_MODEL.to_string(),
            timeout: Duration::from_secs(60),
        }
    }

    /// Reads `REGRAP_API_BASE` and `REGRAP_API_KEY`.
    pub fn from_env() -> Result<Self, LlmError> {
        let api_base = std::env::var(ENV_API_BASE).map_err(|_| LlmError::MissingEnv(ENV_API_BASE))?;
        let api_key = std::env::var(ENV_API_KEY).map_err(|_| LlmError::MissingEnv(ENV_API_KEY))?;
        Ok(LiveConfig::new(api_base, api_key))
    }

    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.model = model.into();
        self
    }
}

pub enum Backend {
    Live(LiveConfig),
    Mock(Mutex<MockScript>),
    Replay(FixtureStore),
}

impl Backend {
    pub fn mock(script: MockScript) -> Self {
        Backend::Mock(Mutex::new(script))
    }

    pub fn kind(&self) -> BackendKind {
        match self {
            Backend::Live(_) => BackendKind::Live,
            Backend::Mock(_) => BackendKind::Mock,
            Backend::Replay(_) => BackendKind::Replay,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    /// Retries after the first failed attempt.
    pub retries: usize,
    /// First backoff; doubles per retry (1s/2s/4s at the default).
    pub base: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            retries: 3,
            base: Duration::from_secs(1),
        }
    }
}

struct Semaphore {
    permits: Mutex<usize>,
    cv: Condvar,
}

impl Semaphore {
    fn new(permits: usize) -> Self {
        Semaphore {
            permits: Mutex::new(permits.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut permits = lock(&self.permits);
        while *permits == 0 {
            permits = self.cv.wait(permits).unwrap_or_else(|e| e.into_inner());
        }
        *permits -= 1;
        Permit(self)
    }
}

struct Permit<'a>(&'a Semaphore);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *lock(&self.0.permits) += 1;
        self.0.cv.notify_one();
    }
}

fn lock<T>(mutex: &Mutex<T>) -> MutexGuard<'_, T> {
    mutex.lock().unwrap_or_else(|e| e.into_inner())
}

/// Thread-safe client. Live requests pass through a counting semaphore
/// (default four in flight); fixture writes are serialized.
pub struct LlmClient {
    backend: Backend,
    record: Option<Mutex<FixtureStore>>,
    semaphore: Semaphore,
    retry: RetryPolicy,
}

impl LlmClient {
    pub fn new(backend: Backend) -> Self {
        LlmClient {
            backend,
            record: None,
            semaphore: Semaphore::new(DEFAULT_CONCURRENCY),
            retry: RetryPolicy::default(),
        }
    }

    /// Persist every successful response as a fixture, whatever the backend.
    pub fn with_record(mut self, store: FixtureStore) -> Self {
        self.record = Some(Mutex::new(store));
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_concurrency(mut self, permits: usize) -> Self {
        self.semaphore = Semaphore::new(permits);
        self
    }

    pub fn backend_kind(&self) -> BackendKind {
        self.backend.kind()
    }

    pub fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let digest = request_digest(req)?;
        let content = match &self.backend {
            Backend::Mock(script) => lock(script).take(&req.tag)?,
            Backend::Replay(store) => match store.load(&digest)? {
                Some(fixture) => fixture.content,
                None => {
                    return Err(LlmError::FixtureMiss {
                        digest,
                        tag: req.tag.clone(),
                    })
                }
            },
            Backend::Live(cfg) => {
                let _permit = self.semaphore.acquire();
                self.live_complete(cfg, req)?
            }
        };
        if let Some(store) = &self.record {
            lock(store).store(&digest, &req.tag, &content)?;
        }
        Ok(ChatResponse {
            content,
            backend: self.backend.kind(),
            request_digest: digest,
        })
    }

    fn live_complete(&self, cfg: &LiveConfig, req: &ChatRequest) -> Result<String, LlmError> {
        let body = build_api_body(cfg, req)?;
        let url = format!("{}/chat/completions", cfg.api_base.trim_end_matches('/'));
        let http = reqwest::blocking::Client::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| LlmError::Transport {
                attempts: 0,
                detail: e.to_string(),
            })?;
        let mut attempts = 0;
        loop {
            attempts += 1;
            let outcome = http
                .post(&url)
                .bearer_auth(&cfg.api_key)
                .json(&body)
                .send();
            let retry_after = match outcome {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        let value: serde_json::Value = resp
                            .json()
                            .map_err(|e| LlmError::BadApiResponse(e.to_string()))?;
                        return extract_api_content(&value);
                    }
                    let retry_after = resp
                        .headers()
                        .get("retry-after")
                        .and_then(|v| v.to_str().ok())
                        .and_then(|v| v.parse::<u64>().ok())
                        .map(Duration::from_secs);
                    let body_text = resp.text().unwrap_or_default();
                    let retryable = status.as_u16() == 429 || status.is_server_error();
                    if !retryable || attempts > self.retry.retries {
                        return Err(LlmError::Api {
                            status: status.as_u16(),
                            body: body_text,
                        });
                    }
                    retry_after
                }
                Err(e) => {
                    if attempts > self.retry.retries {
                        return Err(LlmError::Transport {
                            attempts,
                            detail: e.to_string(),
                        });
                    }
                    None
                }
            };
            let backoff = self.retry.base * (1 << (attempts - 1).min(16)) as u32;
            std::thread::sleep(retry_after.unwrap_or(backoff));
        }
    }
}

fn build_api_body(cfg: &LiveConfig, req: &ChatRequest) -> Result<serde_json::Value, LlmError> {
    let mut content = Vec::new();
    for part in &req.parts {
        match part {
            UserPart::Text(text) => content.push(serde_json::json!({
                "type": "text",
                "text": text,
            })),
            UserPart::Image(path) => {
                let bytes = std::fs::read(path).map_err(|source| LlmError::ImageRead {
                    path: path.display().to_string(),
                    source,
                })?;
                use base64::Engine as _;
                let data = base64::engine::general_purpose::STANDARD.encode(bytes);
                let mime = match path.extension().and_then(|e| e.to_str()) {
                    Some("png") => "image/png",
                    Some("jpg") | Some("jpeg") => "image/jpeg",
                    Some("gif") => "image/gif",
                    Some("webp") => "image/webp",
                    _ => "application/octet-stream",
                };
                content.push(serde_json::json!({
                    "type": "image_url",
                    "image_url": { "url": format!("data:{mime};base64,{data}") },
                }));
            }
        }
    }
    let mut messages = Vec::new();
    if !req.system.is_empty() {
        messages.push(serde_json::json!({ "role": "system", "content": req.system }));
    }
    messages.push(serde_json::json!({ "role": "user", "content": content }));
    let mut body = serde_json::json!({
        "model": cfg.model,
        "temperature": req.temperature,
        "messages": messages,
    });
    if req.expect_json {
        body["response_format"] = serde_json::json!({ "type": "json_object" });
    }
    Ok(body)
}

fn extract_api_content(value: &serde_json::Value) -> Result<String, LlmError> {
    value["choices"][0]["message"]["content"]
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| LlmError::BadApiResponse("missing choices[0].message.content".into()))
}

/// Pulls the first top-level JSON object or array out of a model response,
/// tolerating markdown fences and surrounding prose.
pub fn extract_json(text: &str) -> Result<serde_json::Value, LlmError> {
    let candidate = match fenced_block(text) {
        Some(inner) => inner,
        None => text,
    };
    let start = candidate.find(['{', '[']).ok_or(LlmError::NoJson)?;
    let end = balanced_end(candidate, start)?;
    let slice = &candidate[start..end];
    serde_json::from_str(slice).map_err(|e| LlmError::MalformedJson {
        position: start,
        detail: e.to_string(),
    })
}

fn fenced_block(text: &str) -> Option<&str> {
    let open = text.find("```")?;
    let after_open = &text[open + 3..];
    let body_start = after_open.find('\n')? + 1;
    let body = &after_open[body_start..];
    let close = body.find("```")?;
    Some(&body[..close])
}

fn balanced_end(text: &str, start: usize) -> Result<usize, LlmError> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in text[start..].char_indices() {
        if in_string {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            continue;
        }
        match c {
            '"' => in_string = true,
            '{' | '[' => depth += 1,
            '}' | ']' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or(LlmError::UnbalancedJson { position: start })?;
                if depth == 0 {
                    return Ok(start + i + c.len_utf8());
                }
            }
            _ => {}
        }
    }
    Err(LlmError::UnbalancedJson { position: start })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text_request(text: &str, tag: &str) -> ChatRequest {
        ChatRequest::new("sys", vec![UserPart::Text(text.into())], 0.0, tag).unwrap()
    }

    #[test]
    fn requests_validate_parts_and_temperature() {
        assert!(matches!(
            ChatRequest::new("s", vec![], 0.0, "t"),
            Err(LlmError::EmptyRequest)
        ));
        assert!(matches!(
            ChatRequest::new("s", vec![UserPart::Text("x".into())], 2.5, "t"),
            Err(LlmError::BadTemperature(_))
        ));
    }

    #[test]
    fn digest_is_stable_and_content_sensitive() {
        let a = request_digest(&text_request("hello", "t")).unwrap();
        let b = request_digest(&text_request("hello", "t")).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
        assert_ne!(a, request_digest(&text_request("hello!", "t")).unwrap());
        assert_ne!(a, request_digest(&text_request("hello", "u")).unwrap());
        let mut warm = text_request("hello", "t");
        warm.temperature = 0.7;
        assert_ne!(a, request_digest(&warm).unwrap());
    }

    #[test]
    fn digest_tracks_image_bytes_not_paths() {
        let dir = tempfile::tempdir().unwrap();
        let img = dir.path().join("a.png");
        std::fs::write(&img, b"pixels-one").unwrap();
        let req = ChatRequest::new(
            "s",
            vec![UserPart::Text("look".into()), UserPart::Image(img.clone())],
            0.0,
            "t",
        )
        .unwrap();
        let before = request_digest(&req).unwrap();
        std::fs::write(&img, b"pixels-two").unwrap();
        let after = request_digest(&req).unwrap();
        assert_ne!(before, after);
    }

    #[test]
    fn mock_backend_scripts_by_tag_in_order() {
        let mut script = MockScript::new();
        script.push("qa", "first").push("qa", "second").push_default("fallback");
        let client = LlmClient::new(Backend::mock(script));
        let req = text_request("x", "qa");
        assert_eq!(client.complete(&req).unwrap().content, "first");
        assert_eq!(client.complete(&req).unwrap().content, "second");
        assert_eq!(client.complete(&req).unwrap().content, "fallback");
        assert!(matches!(
            client.complete(&req),
            Err(LlmError::MockExhausted(tag)) if tag == "qa"
        ));
    }

    #[test]
    fn record_then_replay_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let store = FixtureStore::new(dir.path());
        let mut script = MockScript::new();
        script.push_default("recorded response");
        let recorder = LlmClient::new(Backend::mock(script)).with_record(store.clone());
        let req = text_request("ping", "round");
        let recorded = recorder.complete(&req).unwrap();

        let replayer = LlmClient::new(Backend::Replay(store));
        let replayed = replayer.complete(&req).unwrap();
        assert_eq!(replayed.content, "recorded response");
        assert_eq!(replayed.request_digest, recorded.request_digest);
        assert_eq!(replayed.backend, BackendKind::Replay);
    }

    #[test]
    fn replay_miss_names_digest_and_tag() {
        let dir = tempfile::tempdir().unwrap();
        let client = LlmClient::new(Backend::Replay(FixtureStore::new(dir.path())));
        let req = text_request("never recorded", "builder");
        match client.complete(&req) {
            Err(LlmError::FixtureMiss { digest, tag }) => {
                assert_eq!(digest.len(), 64);
                assert_eq!(tag, "builder");
            }
            other => panic!("expected fixture miss, got {other:?}"),
        }
    }

    #[test]
    fn extract_json_handles_prose_and_fences() {
        let v = extract_json("Sure! Here it is: {\"x\": [1, 2]}").unwrap();
        assert_eq!(v, serde_json::json!({"x": [1, 2]}));
        let fenced = "Some prose.\n```json\n{\"a\": \"b\"}\n```\nTrailing.";
        assert_eq!(extract_json(fenced).unwrap(), serde_json::json!({"a": "b"}));
        let array = "the list: [1, {\"two\": 2}] extra ] noise";
        assert_eq!(
            extract_json(array).unwrap(),
            serde_json::json!([1, {"two": 2}])
        );
    }

    #[test]
    fn extract_json_respects_braces_inside_strings() {
        let v = extract_json("{\"s\": \"a } b\", \"t\": \"\\\" } [\"}").unwrap();
        assert_eq!(v["s"], "a } b");
    }

    #[test]
    fn extract_json_reports_failures_with_positions() {
        assert!(matches!(extract_json("no json here"), Err(LlmError::NoJson)));
        assert!(matches!(
            extract_json("start {\"open\": ["),
            Err(LlmError::UnbalancedJson { position: 6 })
        ));
        match extract_json("x {broken: yes}") {
            Err(LlmError::MalformedJson { position, .. }) => assert_eq!(position, 2),
            other => panic!("expected malformed JSON, got {other:?}"),
        }
    }

    #[test]
    fn live_backend_retries_through_transient_failures() {
        use std::io::{Read, Write};
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = std::thread::spawn(move || {
            let mut hits = 0;
            for stream in listener.incoming() {
                let mut stream = stream.unwrap();
                hits += 1;
                let mut buf = [0u8; 65536];
                let mut seen = Vec::new();
                loop {
                    let n = stream.read(&mut buf).unwrap();
                    seen.extend_from_slice(&buf[..n]);
                    if let Some(split) = seen.windows(4).position(|w| w == b"\r\n\r\n") {
                        let head = String::from_utf8_lossy(&seen[..split]).to_string();
                        let length = head
                            .lines()
                            .find_map(|l| {
                                let lower = l.to_ascii_lowercase();
                                let rest = lower.strip_prefix("content-length:")?;
                                rest.trim().parse::<usize>().ok()
                            })
                            .unwrap_or(0);
                        while seen.len() < split + 4 + length {
                            let n = stream.read(&mut buf).unwrap();
                            seen.extend_from_slice(&buf[..n]);
                        }
                        break;
                    }
                }
                let body = if hits < 3 {
                    let payload = "slow down";
                    format!(
                        "HTTP/1.1 429 Too Many Requests\r\nretry-after: 0\r\ncontent-length: {}\r\n\r\n{}",
                        payload.len(),
                        payload
                    )
                } else {
                    let payload =
                        "{\"choices\":[{\"message\":{\"content\":\"live says hi\"}}]}";
                    format!(
                        "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\n\r\n{}",
                        payload.len(),
                        payload
                    )
                };
                stream.write_all(body.as_bytes()).unwrap();
                if hits == 3 {
                    break;
                }
            }
            hits
        });

        let cfg = LiveConfig::new(format!("http://{addr}"), "test-key");
        let client = LlmClient::new(Backend::Live(cfg)).with_retry(RetryPolicy {
            retries: 3,
            base: Duration::from_millis(1),
        });
        let resp = client.complete(&text_request("hello", "live")).unwrap();
        assert_eq!(resp.content, "live says hi");
        assert_eq!(handle.join().unwrap(), 3);
    }

    #[test]
    fn live_backend_gives_up_after_retry_budget() {
        use std::io::{Read, Write};
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let mut stream = stream.unwrap();
                let mut buf = [0u8; 65536];
                let _ = stream.read(&mut buf);
                let _ = stream.write_all(
                    b"HTTP/1.1 500 Internal Server Error\r\ncontent-length: 4\r\n\r\noops",
                );
            }
        });
        let cfg = LiveConfig::new(format!("http://{addr}"), "test-key");
        let client = LlmClient::new(Backend::Live(cfg)).with_retry(RetryPolicy {
            retries: 1,
            base: Duration::from_millis(1),
        });
        match client.complete(&text_request("hello", "live")) {
            Err(LlmError::Api { status, .. }) => assert_eq!(status, 500),
            other => panic!("expected API error, got {other:?}"),
        }
    }
}
