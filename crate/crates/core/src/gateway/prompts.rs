//! Versioned prompt templates.
//!
//! A template body may contain `{name}` placeholders, optional sections
//! `{clause:name}` that expand to the named clause only when the caller
//! activates it, and `{{`/`}}` for literal braces. Values are substituted
//! in a single pass, so braces inside program text are never reinterpreted.
//! Rendering fails on any placeholder without a binding.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Prompt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    CommentGen,
    Translate,
    CommentNlTranslate,
    Pseudocode,
    MethodSpec,
    IntentClassify,
}

impl Task {
    pub const ALL: [Task; 6] = [
        Task::CommentGen,
        Task::Translate,
        Task::CommentNlTranslate,
        Task::Pseudocode,
        Task::MethodSpec,
        Task::IntentClassify,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Task::CommentGen => "comment_gen",
            Task::Translate => "translate",
            Task::CommentNlTranslate => "comment_nl_translate",
            Task::Pseudocode => "pseudocode",
            Task::MethodSpec => "method_spec",
            Task::IntentClassify => "intent_classify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub task: Task,
    pub version: String,
    #[serde(default)]
    pub system: String,
    pub user: String,
    #[serde(default)]
    pub clauses: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("{task}: placeholder {{{name}}} has no binding")]
    Unbound { task: &'static str, name: String },
    #[error("{task}: template refers to undefined clause `{name}`")]
    UnknownClause { task: &'static str, name: String },
    #[error("{task}: unterminated placeholder")]
    Unterminated { task: &'static str },
}

/// Values and active clauses for one rendering.
#[derive(Debug, Clone, Default)]
pub struct Bindings {
    vars: BTreeMap<String, String>,
    clauses: BTreeSet<String>,
}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn set(mut self, name: &str, value: impl Into<String>) -> Self {
        self.vars.insert(name.to_string(), value.into());
        self
    }

    pub fn clause(mut self, name: &str) -> Self {
        self.clauses.insert(name.to_string());
        self
    }

    pub fn clause_if(self, name: &str, on: bool) -> Self {
        if on {
            self.clause(name)
        } else {
            self
        }
    }
}

impl PromptTemplate {
    pub fn id(&self) -> String {
        format!("{}@{}", self.task.key(), self.version)
    }

    /// Digest of the template text, recorded with each exchange.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for part in [self.task.key(), &self.version, &self.system, &self.user] {
            h.update((part.len() as u64).to_le_bytes());
            h.update(part.as_bytes());
        }
        for (k, v) in &self.clauses {
            h.update((k.len() as u64).to_le_bytes());
            h.update(k.as_bytes());
            h.update((v.len() as u64).to_le_bytes());
            h.update(v.as_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }

    pub fn render(&self, b: &Bindings) -> Result<Prompt, TemplateError> {
        Ok(Prompt {
            system: self.expand(&self.system, b, true)?,
            user: self.expand(&self.user, b, true)?,
        })
    }

    fn expand(&self, text: &str, b: &Bindings, allow_clauses: bool) -> Result<String, TemplateError> {
        let task = self.task.key();
        let mut out = String::with_capacity(text.len());
        let mut rest = text;
        while let Some(pos) = rest.find(['{', '}']) {
            out.push_str(&rest[..pos]);
            let c = rest.as_bytes()[pos];
            let after = &rest[pos + 1..];
            if after.as_bytes().first() == Some(&c) {
                out.push(c as char);
                rest = &after[1..];
                continue;
            }
            if c == b'}' {
                out.push('}');
                rest = after;
                continue;
            }
            let end = after.find('}').ok_or(TemplateError::Unterminated { task })?;
            let name = &after[..end];
            rest = &after[end + 1..];
            if let Some(clause) = name.strip_prefix("clause:") {
                let body =
                    self.clauses
                        .get(clause)
                        .filter(|_| allow_clauses)
                        .ok_or_else(|| TemplateError::UnknownClause {
                            task,
                            name: clause.to_string(),
                        })?;
                if b.clauses.contains(clause) {
                    out.push_str(&self.expand(body, b, false)?);
                }
                continue;
            }
            let value = b.vars.get(name).ok_or_else(|| TemplateError::Unbound {
                task,
                name: name.to_string(),
            })?;
            out.push_str(value);
        }
        out.push_str(rest);
        Ok(out)
    }
}

/// The intent categories with short descriptions for the classification prompt.
pub const INTENT_DESCRIPTIONS: [(&str, &str); 5] = [
    ("Descriptive", "says what the code does"),
    (
        "Explanatory",
        "gives the reason a piece of code exists or why it is written this way",
    ),
    (
        "Informative",
        "adds background such as references, complexity notes or authorship",
    ),
    (
        "Analytical",
        "reasons about behaviour, edge cases, correctness or performance",
    ),
    (
        "Precautionary",
        "warns about pitfalls, assumptions or conditions that must hold",
    ),
];

fn template(task: Task, system: &str, user: &str, clauses: &[(&str, &str)]) -> PromptTemplate {
    PromptTemplate {
        task,
        version: "v1".into(),
        system: system.into(),
        user: user.into(),
        clauses: clauses.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
    }
}

/// Shipped templates. They deliberately name no comment intent, density,
/// language or placement unless the matching clause is switched on.
pub fn default_template(task: Task) -> PromptTemplate {
    match task {
        Task::CommentGen => template(
            task,
            "You are an expert {source_pl} programmer.",
            "Add comments to the following {source_pl} code.{clause:density}{clause:language}{clause:strict} \
             Return the complete commented code in a single code block.\n\n```\n{code}\n```\n",
            &[
                (
                    "density",
                    " Comment only the most complex {density_fraction} of the lines; decide for yourself which lines those are.",
                ),
                ("language", " Write the comments in {natural_language}."),
                (
                    "strict",
                    " Keep every line of code exactly as it is, including names and literals; only add comments.",
                ),
            ],
        ),
        Task::Translate => template(
            task,
            "You are an expert programmer in {source_pl} and {target_pl}.",
            "Translate the following {source_pl} code to {target_pl}. The program reads from standard input \
             and writes to standard output. Return only the translated code in a single code block.\n\n\
             ```\n{code}\n```\n{clause:pseudocode}",
            &[("pseudocode", "\nPseudocode of the program:\n\n{pseudocode}\n")],
        ),
        Task::CommentNlTranslate => template(
            task,
            "You are an expert {source_pl} programmer and translator.",
            "Translate every comment in the following {source_pl} code into {natural_language}. \
             Do not change the code itself. Return the complete code in a single code block.\n\n```\n{code}\n```\n",
            &[],
        ),
        Task::Pseudocode => template(
            task,
            "You are an expert {source_pl} programmer.",
            "Write pseudocode for the following {source_pl} program. Return only the pseudocode.\n\n```\n{code}\n```\n",
            &[],
        ),
        Task::MethodSpec => template(
            task,
            "You are an expert {source_pl} programmer.",
            "{clause:methods}{clause:whole} Do not change the code itself. \
             Return the complete code in a single code block.\n\n```\n{code}\n```\n",
            &[
                (
                    "methods",
                    "Write a specification comment for each method or function in the following {source_pl} code \
                     and place it directly above the definition. Definitions start on lines {method_lines}.",
                ),
                (
                    "whole",
                    "Write one specification comment for the following {source_pl} program and place it at the top of the code.",
                ),
            ],
        ),
        Task::IntentClassify => template(
            task,
            "You classify source code comments.",
            "Classify the code comment below into one or more of these intent categories:\n\
             {intent_category_list}\n\
             Answer with the matching category names only, separated by commas.\n\nComment:\n{comment}\n",
            &[],
        ),
    }
}

/// One template per task, defaults unless overridden.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    templates: BTreeMap<Task, PromptTemplate>,
}

impl Default for PromptSet {
    fn default() -> Self {
        PromptSet {
            templates: Task::ALL.iter().map(|&t| (t, default_template(t))).collect(),
        }
    }
}

impl PromptSet {
    pub fn with_override(mut self, t: PromptTemplate) -> Self {
        self.templates.insert(t.task, t);
        self
    }

    pub fn get(&self, task: Task) -> &PromptTemplate {
        &self.templates[&task]
    }

    pub fn iter(&self) -> impl Iterator<Item = &PromptTemplate> {
        self.templates.values()
    }
}
