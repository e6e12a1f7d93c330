//! Chat-completion wire protocol over blocking HTTP.

use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::{ModelEndpoint, Prompt, Usage};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct TransportError {
    pub status: Option<u16>,
    pub message: String,
}

impl TransportError {
    /// Rate limits, server errors and connection problems are worth retrying.
    pub fn retryable(&self) -> bool {
        match self.status {
            None => true,
            Some(s) => s == 408 || s == 429 || s >= 500,
        }
    }
}

#[derive(Deserialize)]
struct WireMessage {
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize, Default)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

pub(crate) fn completions_url(base_url: &str) -> String {
    let base = base_url.trim_end_matches('/');
    if base.ends_with("/chat/completions") {
        base.to_string()
    } else {
        format!("{base}/chat/completions")
    }
}

pub(crate) struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Result<Self, String> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| e.to_string())?;
        Ok(HttpTransport { client })
    }

    pub fn send(
        &self,
        ep: &ModelEndpoint,
        key: Option<&str>,
        prompt: &Prompt,
    ) -> Result<(String, Usage), TransportError> {
        let mut messages = Vec::new();
        if !prompt.system.is_empty() {
            messages.push(json!({"role": "system", "content": prompt.system}));
        }
        messages.push(json!({"role": "user", "content": prompt.user}));
        let mut body = json!({
            "model": ep.model_name,
            "messages": messages,
            "temperature": ep.decoding.temperature,
        });
        if let Some(max) = ep.decoding.max_output_tokens {
            body["max_tokens"] = json!(max);
        }
        let mut req = self.client.post(completions_url(&ep.base_url)).json(&body);
        if let Some(key) = key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| TransportError {
            status: None,
            message: e.to_string(),
        })?;
        let status = resp.status();
        let text = resp.text().map_err(|e| TransportError {
            status: Some(status.as_u16()),
            message: e.to_string(),
        })?;
        if !status.is_success() {
            let snippet: String = text.chars().take(300).collect();
            return Err(TransportError {
                status: Some(status.as_u16()),
                message: snippet,
            });
        }
        let wire: WireResponse = serde_json::from_str(&text).map_err(|e| TransportError {
            status: Some(status.as_u16()),
            message: format!("malformed response: {e}"),
        })?;
        let content = wire
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| TransportError {
                status: Some(status.as_u16()),
                message: "response has no choices".into(),
            })?;
        let usage = wire.usage.unwrap_or_default();
        Ok((
            content,
            Usage {
                prompt_tokens: usage.prompt_tokens,
                completion_tokens: usage.completion_tokens,
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn url_joining() {
        assert_eq!(completions_url("http://h/v1"), "http://h/v1/chat/completions");
        assert_eq!(completions_url("http://h/v1/"), "http://h/v1/chat/completions");
        assert_eq!(
            completions_url("http://h/v1/chat/completions"),
            "http://h/v1/chat/completions"
        );
    }

    #[test]
    fn retry_classes() {
        let e = |s| TransportError {
            status: s,
            message: String::new(),
        };
        assert!(e(None).retryable());
        assert!(e(Some(429)).retryable());
        assert!(e(Some(503)).retryable());
        assert!(!e(Some(401)).retryable());
        assert!(!e(Some(400)).retryable());
    }
}
