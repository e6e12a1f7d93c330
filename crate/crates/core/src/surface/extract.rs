//! Pulls program text out of a model response.

use serde::{Deserialize, Serialize};

use crate::lang::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionMethod {
    /// First fenced block whose info string names the target language.
    TaggedFence,
    /// First fenced block of any kind.
    FirstFence,
    /// The whole response lexed cleanly as the target language.
    WholeOutput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extracted {
    pub code: String,
    pub method: ExtractionMethod,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("model output is empty")]
    Empty,
    #[error("no fenced block and the output does not lex as {0}")]
    NotCode(Language),
}

struct Fence {
    tag: String,
    body: String,
}

fn fences(text: &str) -> Vec<Fence> {
    let mut out = Vec::new();
    let mut current: Option<(String, String, String)> = None; // (marker, tag, body)
    for line in text.lines() {
        let trimmed = line.trim_start();
        match current.as_mut() {
            None => {
                for marker in ["```", "~~~"] {
                    if let Some(rest) = trimmed.strip_prefix(marker) {
                        let rest = rest.trim_start_matches(marker.chars().next().unwrap());
                        current = Some((marker.to_string(), rest.trim().to_string(), String::new()));
                        break;
                    }
                }
            }
            Some((marker, _, body)) => {
                if trimmed.starts_with(marker.as_str())
                    && trimmed
                        .trim_start_matches(marker.chars().next().unwrap())
                        .trim()
                        .is_empty()
                {
                    let (_, tag, body) = current.take().unwrap();
                    out.push(Fence { tag, body });
                } else {
                    body.push_str(line);
                    body.push('\n');
                }
            }
        }
    }
    // an unclosed final fence still counts: responses are often cut short
    if let Some((_, tag, body)) = current {
        out.push(Fence { tag, body });
    }
    out
}

pub fn extract_code_block(model_output: &str, target: Language) -> Result<Extracted, ExtractError> {
    if model_output.trim().is_empty() {
        return Err(ExtractError::Empty);
    }
    let blocks: Vec<Fence> = fences(model_output)
        .into_iter()
        .filter(|f| !f.body.trim().is_empty())
        .collect();
    if let Some(f) = blocks.iter().find(|f| Language::from_fence_tag(&f.tag) == Some(target)) {
        return Ok(Extracted {
            code: f.body.clone(),
            method: ExtractionMethod::TaggedFence,
        });
    }
    if let Some(f) = blocks.first() {
        return Ok(Extracted {
            code: f.body.clone(),
            method: ExtractionMethod::FirstFence,
        });
    }
    if super::lex_normalize(model_output, target).is_ok() {
        let mut code = model_output.trim_matches('\n').to_string();
        code.push('\n');
        return Ok(Extracted {
            code,
            method: ExtractionMethod::WholeOutput,
        });
    }
    Err(ExtractError::NotCode(target))
}
