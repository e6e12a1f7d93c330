//! Chat-completion endpoints behind one cache-first client.
//!
//! Every request is identified by `request_hash`, a SHA-256 digest over the
//! endpoint id, model name, decoding parameters and the rendered system and
//! user prompts. Real endpoints consult the on-disk cache before the
//! network; replay endpoints serve only from a replay script and never
//! touch the network.

mod http;
mod prompts;
mod store;
mod tasks;

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use prompts::{default_template, Bindings, PromptSet, PromptTemplate, Task, TemplateError, INTENT_DESCRIPTIONS};
pub use store::{ExchangeStore, StoredExchange};
pub use tasks::{
    classify_intents, generate_comments, generate_method_specs, generate_pseudocode, parse_intents, translate_code,
    translate_comments_nl, verify_injection_fidelity, Classification, CommentOptions, Commented, Density, Fidelity,
    IntentLabel, NaturalLanguage, Rejection, TaskError,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoding {
    /// 0 selects greedy decoding.
    #[serde(default)]
    pub temperature: f64,
    /// `None` leaves the provider maximum in place.
    #[serde(default)]
    pub max_output_tokens: Option<u32>,
}

impl Default for Decoding {
    fn default() -> Self {
        Decoding {
            temperature: 0.0,
            max_output_tokens: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointKind {
    #[default]
    Real,
    Replay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEndpoint {
    pub id: String,
    #[serde(default)]
    pub base_url: String,
    pub model_name: String,
    /// Environment variable holding the API key; empty for keyless servers.
    #[serde(default)]
    pub auth_ref: String,
    #[serde(default)]
    pub decoding: Decoding,
    #[serde(default)]
    pub kind: EndpointKind,
    #[serde(default)]
    pub requests_per_minute: Option<u32>,
}

impl ModelEndpoint {
    pub fn replay(id: &str, model_name: &str) -> Self {
        ModelEndpoint {
            id: id.into(),
            base_url: String::new(),
            model_name: model_name.into(),
            auth_ref: String::new(),
            decoding: Decoding::default(),
            kind: EndpointKind::Replay,
            requests_per_minute: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Prompt {
    pub system: String,
    pub user: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServedBy {
    Network,
    Cache,
    Replay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub request_hash: String,
    pub endpoint_id: String,
    pub model_name: String,
    pub decoding: Decoding,
    /// `task@version` of the template that produced the prompt.
    pub template: Option<String>,
    pub prompt: Prompt,
    pub response: String,
    pub usage: Usage,
    pub latency_ms: u64,
    pub cached: bool,
    pub served_by: ServedBy,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GatewayError {
    #[error("unknown endpoint `{0}`")]
    UnknownEndpoint(String),
    #[error("endpoint {endpoint}: environment variable {var} is not set")]
    MissingKey { endpoint: String, var: String },
    #[error("endpoint {endpoint}: request failed after {attempts} attempt(s): {}{message}", .status.map(|s| format!("HTTP {s}: ")).unwrap_or_default())]
    Http {
        endpoint: String,
        status: Option<u16>,
        message: String,
        attempts: u32,
    },
    #[error("endpoint {endpoint}: no replay record for request {hash}")]
    ReplayMiss { endpoint: String, hash: String },
    #[error("endpoint {endpoint}: network access is disabled and request {hash} is not cached")]
    NetworkDisabled { endpoint: String, hash: String },
    #[error("request hash {0} maps to two different prompts")]
    HashCollision(String),
    #[error("exchange store: {0}")]
    Store(String),
}

pub fn request_hash(ep: &ModelEndpoint, prompt: &Prompt) -> String {
    let mut h = Sha256::new();
    let temperature = format!("{:?}", ep.decoding.temperature);
    let max_tokens = ep.decoding.max_output_tokens.map(|m| m.to_string()).unwrap_or_default();
    for part in [
        ep.id.as_str(),
        &ep.model_name,
        &temperature,
        &max_tokens,
        &prompt.system,
        &prompt.user,
    ] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatewayOptions {
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    pub http_timeout_s: u64,
    /// When false, a cache miss on a real endpoint is an error.
    pub allow_network: bool,
}

impl Default for GatewayOptions {
    fn default() -> Self {
        GatewayOptions {
            max_retries: 3,
            backoff_base_ms: 500,
            http_timeout_s: 300,
            allow_network: true,
        }
    }
}

/// Counts of how requests were served.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GatewayStats {
    pub network_calls: usize,
    pub cache_hits: usize,
    pub replay_hits: usize,
}

/// Answers prompts in place of the HTTP transport, for offline simulations.
/// Responses still pass through the cache, so a run driven by a backend can
/// be resumed or replayed from its recorded exchanges.
pub trait ModelBackend: Send + Sync {
    fn respond(&self, endpoint: &ModelEndpoint, prompt: &Prompt) -> Result<String, String>;
}

pub struct Gateway {
    backend: Option<Arc<dyn ModelBackend>>,
    endpoints: BTreeMap<String, ModelEndpoint>,
    prompts: PromptSet,
    cache: ExchangeStore,
    replay: ExchangeStore,
    opts: GatewayOptions,
    transport: OnceLock<Result<http::HttpTransport, String>>,
    next_slot: HashMap<String, Mutex<Instant>>,
    in_flight: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    network_calls: AtomicUsize,
    cache_hits: AtomicUsize,
    replay_hits: AtomicUsize,
}

impl Gateway {
    pub fn new(endpoints: Vec<ModelEndpoint>, cache: ExchangeStore, replay: ExchangeStore) -> Self {
        let now = Instant::now();
        let next_slot = endpoints.iter().map(|e| (e.id.clone(), Mutex::new(now))).collect();
        Gateway {
            backend: None,
            endpoints: endpoints.into_iter().map(|e| (e.id.clone(), e)).collect(),
            prompts: PromptSet::default(),
            cache,
            replay,
            opts: GatewayOptions::default(),
            transport: OnceLock::new(),
            next_slot,
            in_flight: Mutex::new(HashMap::new()),
            network_calls: AtomicUsize::new(0),
            cache_hits: AtomicUsize::new(0),
            replay_hits: AtomicUsize::new(0),
        }
    }

    /// Gateway whose endpoints all serve from `script`.
    pub fn replay_only(endpoints: Vec<ModelEndpoint>, script: ExchangeStore) -> Self {
        let endpoints = endpoints
            .into_iter()
            .map(|e| ModelEndpoint {
                kind: EndpointKind::Replay,
                ..e
            })
            .collect();
        Gateway::new(endpoints, ExchangeStore::in_memory(), script).with_options(GatewayOptions {
            allow_network: false,
            ..GatewayOptions::default()
        })
    }

    pub fn with_options(mut self, opts: GatewayOptions) -> Self {
        self.opts = opts;
        self
    }

    pub fn with_backend(mut self, backend: Arc<dyn ModelBackend>) -> Self {
        self.backend = Some(backend);
        self
    }

    pub fn with_prompts(mut self, prompts: PromptSet) -> Self {
        self.prompts = prompts;
        self
    }

    pub fn prompts(&self) -> &PromptSet {
        &self.prompts
    }

    pub fn endpoint(&self, id: &str) -> Result<&ModelEndpoint, GatewayError> {
        self.endpoints
            .get(id)
            .ok_or_else(|| GatewayError::UnknownEndpoint(id.to_string()))
    }

    pub fn endpoints(&self) -> impl Iterator<Item = &ModelEndpoint> {
        self.endpoints.values()
    }

    pub fn cache(&self) -> &ExchangeStore {
        &self.cache
    }

    pub fn stats(&self) -> GatewayStats {
        GatewayStats {
            network_calls: self.network_calls.load(Ordering::SeqCst),
            cache_hits: self.cache_hits.load(Ordering::SeqCst),
            replay_hits: self.replay_hits.load(Ordering::SeqCst),
        }
    }

    /// Renders `task` with `bindings` and completes it on `endpoint_id`.
    pub fn run_task(&self, endpoint_id: &str, task: Task, bindings: &Bindings) -> Result<Exchange, tasks::TaskError> {
        let template = self.prompts.get(task);
        let prompt = template.render(bindings)?;
        let mut ex = self.complete(endpoint_id, &prompt)?;
        ex.template = Some(template.id());
        Ok(ex)
    }

    pub fn complete(&self, endpoint_id: &str, prompt: &Prompt) -> Result<Exchange, GatewayError> {
        let ep = self.endpoint(endpoint_id)?;
        let hash = request_hash(ep, prompt);
        let exchange = |rec: StoredExchange, served_by: ServedBy| Exchange {
            request_hash: hash.clone(),
            endpoint_id: ep.id.clone(),
            model_name: ep.model_name.clone(),
            decoding: ep.decoding.clone(),
            template: None,
            prompt: prompt.clone(),
            response: rec.response,
            usage: rec.usage,
            latency_ms: rec.latency_ms,
            cached: served_by == ServedBy::Cache,
            served_by,
        };
        if ep.kind == EndpointKind::Replay {
            return match self.replay.get(&hash, prompt)? {
                Some(rec) => {
                    self.replay_hits.fetch_add(1, Ordering::SeqCst);
                    Ok(exchange(rec, ServedBy::Replay))
                }
                None => Err(GatewayError::ReplayMiss {
                    endpoint: ep.id.clone(),
                    hash,
                }),
            };
        }
        if let Some(rec) = self.cache.get(&hash, prompt)? {
            self.cache_hits.fetch_add(1, Ordering::SeqCst);
            return Ok(exchange(rec, ServedBy::Cache));
        }
        // one network request per hash even when workers race
        let gate = {
            let mut map = self.in_flight.lock().unwrap();
            map.entry(hash.clone()).or_default().clone()
        };
        let _held = gate.lock().unwrap();
        if let Some(rec) = self.cache.get(&hash, prompt)? {
            self.cache_hits.fetch_add(1, Ordering::SeqCst);
            return Ok(exchange(rec, ServedBy::Cache));
        }
        if !self.opts.allow_network {
            return Err(GatewayError::NetworkDisabled {
                endpoint: ep.id.clone(),
                hash,
            });
        }
        let rec = self.fetch(ep, &hash, prompt)?;
        self.cache.put(rec.clone())?;
        Ok(exchange(rec, ServedBy::Network))
    }

    fn wait_for_slot(&self, ep: &ModelEndpoint) {
        let Some(rpm) = ep.requests_per_minute.filter(|&r| r > 0) else {
            return;
        };
        let interval = Duration::from_secs_f64(60.0 / rpm as f64);
        let start = {
            let mut next = self.next_slot[&ep.id].lock().unwrap();
            let now = Instant::now();
            let start = (*next).max(now);
            *next = start + interval;
            start
        };
        let now = Instant::now();
        if start > now {
            thread::sleep(start - now);
        }
    }

    fn fetch(&self, ep: &ModelEndpoint, hash: &str, prompt: &Prompt) -> Result<StoredExchange, GatewayError> {
        if let Some(backend) = &self.backend {
            self.network_calls.fetch_add(1, Ordering::SeqCst);
            let response = backend.respond(ep, prompt).map_err(|message| GatewayError::Http {
                endpoint: ep.id.clone(),
                status: None,
                message,
                attempts: 1,
            })?;
            return Ok(StoredExchange {
                hash: hash.to_string(),
                prompt: prompt.clone(),
                response,
                usage: Usage::default(),
                latency_ms: 0,
            });
        }
        let key = if ep.auth_ref.is_empty() {
            None
        } else {
            Some(std::env::var(&ep.auth_ref).map_err(|_| GatewayError::MissingKey {
                endpoint: ep.id.clone(),
                var: ep.auth_ref.clone(),
            })?)
        };
        let transport = self
            .transport
            .get_or_init(|| http::HttpTransport::new(Duration::from_secs(self.opts.http_timeout_s)))
            .as_ref()
            .map_err(|e| GatewayError::Http {
                endpoint: ep.id.clone(),
                status: None,
                message: e.clone(),
                attempts: 0,
            })?;
        let mut attempt = 0u32;
        loop {
            attempt += 1;
            self.wait_for_slot(ep);
            let started = Instant::now();
            self.network_calls.fetch_add(1, Ordering::SeqCst);
            match transport.send(ep, key.as_deref(), prompt) {
                Ok((response, usage)) => {
                    return Ok(StoredExchange {
                        hash: hash.to_string(),
                        prompt: prompt.clone(),
                        response,
                        usage,
                        latency_ms: started.elapsed().as_millis() as u64,
                    });
                }
                Err(e) if e.retryable() && attempt <= self.opts.max_retries => {
                    let backoff = self.opts.backoff_base_ms.saturating_mul(1 << (attempt - 1).min(10));
                    log::warn!("endpoint {}: attempt {attempt} failed ({}), retrying", ep.id, e.message);
                    thread::sleep(Duration::from_millis(backoff.min(30_000)));
                }
                Err(e) => {
                    return Err(GatewayError::Http {
                        endpoint: ep.id.clone(),
                        status: e.status,
                        message: e.message,
                        attempts: attempt,
                    })
                }
            }
        }
    }
}
