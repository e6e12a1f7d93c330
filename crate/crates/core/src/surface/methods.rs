//! Best-effort detection of method/function definitions.
//!
//! Heuristics per language, all driven by the comment-free token stream:
//!
//! * Go: every `func` keyword that opens a line at brace depth 0.
//! * Java: a `{` whose header (tokens since the previous `;`, `{` or `}`)
//!   looks like `... name(...) [throws ...]` and whose enclosing brace is a
//!   class, interface, enum or record body.
//! * C and C++: the same signature shape at file scope or directly inside a
//!   `namespace`, `class`, `struct` or `extern "C"` body. Preprocessor lines
//!   are skipped.
//! * Python: `def` statements at module level or directly inside a
//!   module-level class body. Decorators move the insertion point up.
//!
//! The returned line is where a specification comment would be inserted:
//! the first line of the definition header, annotations and decorators
//! included.

use std::collections::BTreeSet;

use super::lexer::{self, Token, TokenClass, PY_DEDENT, PY_INDENT, PY_NEWLINE};
use super::ScanOptions;
use crate::lang::Language;

const CONTROL_WORDS: &[&str] = &[
    "if",
    "for",
    "while",
    "switch",
    "catch",
    "return",
    "else",
    "do",
    "try",
    "synchronized",
    "sizeof",
    "new",
    "throw",
    "case",
    "defer",
    "go",
    "select",
];

pub fn find_method_boundaries(code: &str, pl: Language) -> Vec<usize> {
    let Ok(lexed) = lexer::lex(code, pl, &ScanOptions::default()) else {
        return Vec::new();
    };
    let points: BTreeSet<usize> = match pl {
        Language::Python => python_boundaries(&lexed.tokens),
        Language::Go => go_boundaries(&lexed.tokens),
        Language::Java | Language::C | Language::Cpp => brace_boundaries(&lexed.tokens, pl),
    };
    points.into_iter().collect()
}

fn go_boundaries(tokens: &[Token]) -> BTreeSet<usize> {
    let mut depth = 0usize;
    let mut out = BTreeSet::new();
    let mut prev_line = 0;
    for t in tokens {
        match t.text.as_str() {
            "{" => depth += 1,
            "}" => depth = depth.saturating_sub(1),
            "func" if depth == 0 && t.class == TokenClass::Keyword && t.line != prev_line => {
                out.insert(t.line);
            }
            _ => {}
        }
        prev_line = t.line;
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Scope {
    Container,
    Function,
    Other,
}

fn brace_boundaries(tokens: &[Token], pl: Language) -> BTreeSet<usize> {
    // file scope acts as a container
    let mut stack = vec![Scope::Container];
    let mut header: Vec<&Token> = Vec::new();
    let mut out = BTreeSet::new();
    let mut skip_line = 0usize;
    let mut prev_line = 0usize;
    for (i, t) in tokens.iter().enumerate() {
        let line_start = t.line != prev_line;
        prev_line = t.line;
        if matches!(pl, Language::C | Language::Cpp) {
            if line_start && t.text == "#" {
                skip_line = t.line;
                header.clear();
                continue;
            }
            if t.line == skip_line {
                continue;
            }
        }
        match t.text.as_str() {
            "{" => {
                let parent = *stack.last().unwrap();
                let scope = classify_header(&header, pl);
                // Java methods live in type bodies; C and C++ also allow file scope
                let allowed = parent == Scope::Container && (pl != Language::Java || stack.len() > 1);
                if scope == Scope::Function && allowed {
                    if let Some(first) = header.first() {
                        out.insert(first.line);
                    }
                }
                let pushed = match scope {
                    Scope::Container if parent == Scope::Container => Scope::Container,
                    Scope::Function => Scope::Function,
                    _ => Scope::Other,
                };
                stack.push(pushed);
                header.clear();
            }
            "}" => {
                if stack.len() > 1 {
                    stack.pop();
                }
                header.clear();
            }
            ";" => header.clear(),
            ":" if pl == Language::Cpp
                && header.len() == 1
                && matches!(header[0].text.as_str(), "public" | "private" | "protected") =>
            {
                header.clear()
            }
            _ => header.push(&tokens[i]),
        }
    }
    out
}

fn classify_header(header: &[&Token], pl: Language) -> Scope {
    if header.is_empty() {
        return Scope::Other;
    }
    let words: Vec<&str> = header.iter().map(|t| t.text.as_str()).collect();
    let containers: &[&str] = match pl {
        Language::Java => &["class", "interface", "enum", "record"],
        _ => &["namespace", "class", "struct", "union", "extern"],
    };
    let has_assign = words.contains(&"=") || words.contains(&"->") && pl == Language::Java;
    if !has_assign && !words.contains(&"new") && words.iter().any(|w| containers.contains(w)) && !words.contains(&"(") {
        return Scope::Container;
    }
    // Java record headers carry a parameter list
    if pl == Language::Java && words.contains(&"record") {
        return Scope::Container;
    }
    if CONTROL_WORDS.contains(&words[0]) || has_assign {
        return Scope::Other;
    }
    // find the first top-level `(` preceded by a name
    let open = words.iter().position(|&w| w == "(");
    let Some(open) = open else {
        return Scope::Other;
    };
    if open == 0 {
        return Scope::Other;
    }
    let name = header[open - 1];
    let name_ok = name.class == TokenClass::Identifier
        || (pl == Language::Cpp && (words[..open].contains(&"operator") || name.text == "~"));
    if !name_ok || CONTROL_WORDS.contains(&name.text.as_str()) {
        return Scope::Other;
    }
    // a bare call `foo(...)` has nothing in front of the name
    let qualifier_only = open == 1 && pl != Language::Cpp;
    if qualifier_only && pl != Language::Java {
        return Scope::Other;
    }
    let mut depth = 0i32;
    let mut close = None;
    for (j, w) in words.iter().enumerate().skip(open) {
        match *w {
            "(" => depth += 1,
            ")" => {
                depth -= 1;
                if depth == 0 {
                    close = Some(j);
                    break;
                }
            }
            _ => {}
        }
    }
    let Some(close) = close else {
        return Scope::Other;
    };
    let trailer = &words[close + 1..];
    let trailer_ok = match pl {
        Language::Java => trailer.is_empty() || trailer[0] == "throws",
        _ => {
            trailer.iter().all(|w| {
                matches!(
                    *w,
                    "const" | "noexcept" | "override" | "final" | "volatile" | "&" | "&&"
                )
            }) || trailer.first().is_some_and(|w| *w == "->" || *w == ":")
        }
    };
    if trailer_ok {
        Scope::Function
    } else {
        Scope::Other
    }
}

fn python_boundaries(tokens: &[Token]) -> BTreeSet<usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Block {
        Module,
        Class,
        Other,
    }
    let mut blocks = vec![Block::Module];
    let mut pending: Option<Block> = None;
    let mut out = BTreeSet::new();
    let mut at_start = true;
    let mut decorator_line: Option<usize> = None;
    let mut i = 0;
    while i < tokens.len() {
        let t = &tokens[i];
        let marker = t.class == TokenClass::Punctuation;
        if marker && t.text == PY_INDENT {
            blocks.push(pending.take().unwrap_or(Block::Other));
            i += 1;
            continue;
        }
        if marker && t.text == PY_DEDENT {
            if blocks.len() > 1 {
                blocks.pop();
            }
            i += 1;
            continue;
        }
        if marker && t.text == PY_NEWLINE {
            at_start = true;
            i += 1;
            continue;
        }
        if at_start {
            at_start = false;
            let current = *blocks.last().unwrap();
            let text = t.text.as_str();
            let is_def = text == "def" || (text == "async" && tokens.get(i + 1).is_some_and(|n| n.text == "def"));
            if text == "@" {
                decorator_line.get_or_insert(t.line);
            } else {
                if is_def && matches!(current, Block::Module | Block::Class) && blocks.len() <= 2 {
                    out.insert(decorator_line.unwrap_or(t.line));
                }
                decorator_line = None;
                pending = Some(if text == "class" && current == Block::Module {
                    Block::Class
                } else {
                    Block::Other
                });
            }
        }
        i += 1;
    }
    out
}
