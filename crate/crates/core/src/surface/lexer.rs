//! Single-pass lexer shared by the comment scanner, the stripper and the
//! token-stream normalizer.
//!
//! The lexer only needs to be right about where literals and comments begin
//! and end; everything else is bucketed into coarse token classes. Python
//! additionally gets `NEWLINE`/`INDENT`/`DEDENT` markers so that two programs
//! with different block structure never normalize to the same stream.

use serde::{Deserialize, Serialize};

use super::{CommentKind, LexError, LexErrorKind, ScanOptions};
use crate::lang::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenClass {
    Identifier,
    Keyword,
    Literal,
    Operator,
    Punctuation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub class: TokenClass,
    pub text: String,
    pub line: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RawComment {
    pub start: usize,
    pub end: usize,
    pub start_line: usize,
    pub end_line: usize,
    pub kind: CommentKind,
    pub text: String,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Lexed {
    pub tokens: Vec<Token>,
    pub comments: Vec<RawComment>,
}

pub(crate) const PY_NEWLINE: &str = "<NEWLINE>";
pub(crate) const PY_INDENT: &str = "<INDENT>";
pub(crate) const PY_DEDENT: &str = "<DEDENT>";

const C_FAMILY_OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->*", "<=>", "&^=", "::", "->", "++", "--", "<<", ">>", "<=", ">=", "==",
    "!=", "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "&^", ":=", "<-", ".*",
];

const PYTHON_OPERATORS: &[&str] = &[
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=", ">=", "==", "!=", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "@=",
];

const C_KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else", "enum", "extern", "float",
    "for", "goto", "if", "inline", "int", "long", "register", "restrict", "return", "short", "signed", "sizeof",
    "static", "struct", "switch", "typedef", "union", "unsigned", "void", "volatile", "while", "_Bool", "bool",
];

const CPP_EXTRA_KEYWORDS: &[&str] = &[
    "class",
    "namespace",
    "template",
    "typename",
    "public",
    "private",
    "protected",
    "virtual",
    "override",
    "final",
    "new",
    "delete",
    "this",
    "throw",
    "try",
    "catch",
    "using",
    "operator",
    "friend",
    "constexpr",
    "nullptr",
    "true",
    "false",
    "noexcept",
    "static_cast",
    "dynamic_cast",
    "reinterpret_cast",
    "const_cast",
    "decltype",
    "mutable",
    "explicit",
];

const GO_KEYWORDS: &[&str] = &[
    "break",
    "case",
    "chan",
    "const",
    "continue",
    "default",
    "defer",
    "else",
    "fallthrough",
    "for",
    "func",
    "go",
    "goto",
    "if",
    "import",
    "interface",
    "map",
    "package",
    "range",
    "return",
    "select",
    "struct",
    "switch",
    "type",
    "var",
];

const JAVA_KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
    "true",
    "false",
    "null",
    "var",
    "record",
];

const PYTHON_KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue", "def", "del",
    "elif", "else", "except", "finally", "for", "from", "global", "if", "import", "in", "is", "lambda", "nonlocal",
    "not", "or", "pass", "raise", "return", "try", "while", "with", "yield",
];

pub(crate) fn is_keyword(pl: Language, word: &str) -> bool {
    match pl {
        Language::C => C_KEYWORDS.contains(&word),
        Language::Cpp => C_KEYWORDS.contains(&word) || CPP_EXTRA_KEYWORDS.contains(&word),
        Language::Go => GO_KEYWORDS.contains(&word),
        Language::Java => JAVA_KEYWORDS.contains(&word),
        Language::Python => PYTHON_KEYWORDS.contains(&word),
    }
}

fn is_ident_start(b: u8, pl: Language) -> bool {
    b.is_ascii_alphabetic() || b == b'_' || b >= 0x80 || (b == b'$' && pl == Language::Java)
}

fn is_ident_continue(b: u8, pl: Language) -> bool {
    is_ident_start(b, pl) || b.is_ascii_digit()
}

fn is_punctuation(b: u8) -> bool {
    matches!(b, b'(' | b')' | b'[' | b']' | b'{' | b'}' | b',' | b';')
}

fn count_newlines(bytes: &[u8]) -> usize {
    bytes.iter().filter(|&&b| b == b'\n').count()
}

/// Strips delimiters and the conventional leading `*` gutter from a comment.
fn comment_payload(raw: &str, kind: CommentKind) -> String {
    match kind {
        CommentKind::Line => raw.trim().to_string(),
        CommentKind::Block => raw
            .lines()
            .map(|l| {
                let t = l.trim();
                let t = t.strip_prefix('*').unwrap_or(t);
                t.trim()
            })
            .filter(|l| !l.is_empty())
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

struct Cursor<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    pl: Language,
    out: Lexed,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, pl: Language) -> Self {
        Cursor {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            line: 1,
            pl,
            out: Lexed::default(),
        }
    }

    fn peek(&self, off: usize) -> Option<u8> {
        self.bytes.get(self.pos + off).copied()
    }

    fn starts_with(&self, s: &str) -> bool {
        self.bytes[self.pos..].starts_with(s.as_bytes())
    }

    fn err(&self, line: usize, kind: LexErrorKind) -> LexError {
        LexError { line, kind }
    }

    fn push_token(&mut self, class: TokenClass, start: usize, end: usize, line: usize) {
        self.out.tokens.push(Token {
            class,
            text: self.src[start..end].to_string(),
            line,
            start,
            end,
        });
    }

    fn push_marker(&mut self, text: &str) {
        self.out.tokens.push(Token {
            class: TokenClass::Punctuation,
            text: text.to_string(),
            line: self.line,
            start: self.pos,
            end: self.pos,
        });
    }

    fn push_comment(&mut self, start: usize, end: usize, start_line: usize, kind: CommentKind, body: &str) {
        let end_line = start_line + count_newlines(&self.bytes[start..end]);
        // a line comment never includes its terminating newline
        self.out.comments.push(RawComment {
            start,
            end,
            start_line,
            end_line,
            kind,
            text: comment_payload(body, kind),
        });
    }

    /// Consumes a `//` comment. C and C++ honour backslash-newline splicing.
    fn line_comment(&mut self, delim_len: usize) {
        let start = self.pos;
        let start_line = self.line;
        let mut i = self.pos + delim_len;
        let splices = matches!(self.pl, Language::C | Language::Cpp);
        let mut extra_lines = 0;
        while i < self.bytes.len() {
            if self.bytes[i] == b'\n' {
                let prev = if i > 0 { self.bytes[i - 1] } else { 0 };
                let prev = if prev == b'\r' && i > 1 {
                    self.bytes[i - 2]
                } else {
                    prev
                };
                if splices && prev == b'\\' {
                    extra_lines += 1;
                    i += 1;
                    continue;
                }
                break;
            }
            i += 1;
        }
        let mut end = i;
        if end > start && self.bytes[end - 1] == b'\r' {
            end -= 1;
        }
        let body = &self.src[start + delim_len..end];
        self.push_comment(start, end, start_line, CommentKind::Line, body);
        self.line += extra_lines;
        self.pos = end;
    }

    fn block_comment(&mut self) -> Result<(), LexError> {
        let start = self.pos;
        let start_line = self.line;
        let rest = &self.src[start + 2..];
        let Some(close) = rest.find("*/") else {
            return Err(self.err(start_line, LexErrorKind::UnterminatedBlockComment));
        };
        let end = start + 2 + close + 2;
        let body = &self.src[start + 2..end - 2];
        self.push_comment(start, end, start_line, CommentKind::Block, body);
        self.line += count_newlines(&self.bytes[start..end]);
        self.pos = end;
        Ok(())
    }

    /// Scans a quoted literal starting at `self.pos` (which points at the
    /// opening quote). Escapes skip the following byte.
    fn quoted(&mut self, token_start: usize, quote: u8, multiline: bool) -> Result<(), LexError> {
        let start_line = self.line;
        let kind = if quote == b'\'' {
            LexErrorKind::UnterminatedChar
        } else {
            LexErrorKind::UnterminatedString
        };
        let splices = matches!(self.pl, Language::C | Language::Cpp | Language::Python);
        let mut i = self.pos + 1;
        let mut lines = 0;
        loop {
            let Some(&b) = self.bytes.get(i) else {
                return Err(self.err(start_line, kind));
            };
            match b {
                b'\\' => {
                    if let Some(&n) = self.bytes.get(i + 1) {
                        if n == b'\n' {
                            if !(splices || multiline) {
                                return Err(self.err(start_line, kind));
                            }
                            lines += 1;
                        }
                    }
                    i += 2;
                }
                b'\n' if !multiline => return Err(self.err(start_line, kind)),
                b'\n' => {
                    lines += 1;
                    i += 1;
                }
                _ if b == quote => {
                    i += 1;
                    break;
                }
                _ => i += 1,
            }
        }
        self.pos = i;
        self.push_token(TokenClass::Literal, token_start, i, start_line);
        self.line += lines;
        Ok(())
    }

    /// Triple-delimited literal: Python `'''`/`"""` strings and Java text blocks.
    fn triple_quoted(&mut self, token_start: usize, quote: u8) -> Result<(), LexError> {
        let start_line = self.line;
        let closing = [quote; 3];
        let mut i = self.pos + 3;
        loop {
            if i >= self.bytes.len() {
                return Err(self.err(start_line, LexErrorKind::UnterminatedString));
            }
            if self.bytes[i] == b'\\' {
                i += 2;
                continue;
            }
            if self.bytes[i..].starts_with(&closing) {
                i += 3;
                break;
            }
            i += 1;
        }
        let end = i.min(self.bytes.len());
        self.line += count_newlines(&self.bytes[self.pos..end]);
        self.pos = end;
        self.push_token(TokenClass::Literal, token_start, end, start_line);
        Ok(())
    }

    fn go_raw_string(&mut self) -> Result<(), LexError> {
        let start = self.pos;
        let start_line = self.line;
        let Some(close) = self.src[start + 1..].find('`') else {
            return Err(self.err(start_line, LexErrorKind::UnterminatedRawString));
        };
        let end = start + 1 + close + 1;
        self.line += count_newlines(&self.bytes[start..end]);
        self.pos = end;
        self.push_token(TokenClass::Literal, start, end, start_line);
        Ok(())
    }

    /// C++ `R"delim( ... )delim"`; `self.pos` points at the opening quote.
    fn cpp_raw_string(&mut self, token_start: usize) -> Result<(), LexError> {
        let start_line = self.line;
        let after_quote = self.pos + 1;
        let Some(paren) = self.src[after_quote..].find('(') else {
            return Err(self.err(start_line, LexErrorKind::UnterminatedRawString));
        };
        let delim = &self.src[after_quote..after_quote + paren];
        if delim.len() > 16 || delim.contains(|c: char| c.is_whitespace() || c == ')' || c == '\\') {
            return Err(self.err(start_line, LexErrorKind::UnterminatedRawString));
        }
        let terminator = format!("){delim}\"");
        let body_start = after_quote + paren + 1;
        let Some(close) = self.src[body_start..].find(&terminator) else {
            return Err(self.err(start_line, LexErrorKind::UnterminatedRawString));
        };
        let end = body_start + close + terminator.len();
        self.line += count_newlines(&self.bytes[self.pos..end]);
        self.pos = end;
        self.push_token(TokenClass::Literal, token_start, end, start_line);
        Ok(())
    }

    fn number(&mut self) {
        let start = self.pos;
        let hex = self.starts_with("0x") || self.starts_with("0X");
        let separators = matches!(self.pl, Language::C | Language::Cpp);
        let mut i = self.pos;
        while i < self.bytes.len() {
            let b = self.bytes[i];
            let prev = if i > start { self.bytes[i - 1] } else { 0 };
            let ok = b.is_ascii_alphanumeric()
                || b == b'_'
                || b == b'.'
                || ((b == b'+' || b == b'-')
                    && ((!hex && matches!(prev, b'e' | b'E')) || (hex && matches!(prev, b'p' | b'P'))))
                || (b == b'\'' && separators && self.bytes.get(i + 1).is_some_and(|n| n.is_ascii_alphanumeric()));
            if !ok {
                break;
            }
            i += 1;
        }
        self.pos = i;
        self.push_token(TokenClass::Literal, start, i, self.line);
    }

    fn operator(&mut self) {
        let table = if self.pl == Language::Python {
            PYTHON_OPERATORS
        } else {
            C_FAMILY_OPERATORS
        };
        let start = self.pos;
        let len = table
            .iter()
            .find(|op| self.starts_with(op))
            .map(|op| op.len())
            .unwrap_or_else(|| {
                // one whole UTF-8 character
                self.src[start..].chars().next().map(char::len_utf8).unwrap_or(1)
            });
        self.pos += len;
        let class = if len == 1 && is_punctuation(self.bytes[start]) {
            TokenClass::Punctuation
        } else {
            TokenClass::Operator
        };
        self.push_token(class, start, self.pos, self.line);
    }

    fn identifier_end(&self) -> usize {
        let mut i = self.pos;
        while i < self.bytes.len() && is_ident_continue(self.bytes[i], self.pl) {
            i += 1;
        }
        i
    }
}

pub(crate) fn lex(src: &str, pl: Language, opts: &ScanOptions) -> Result<Lexed, LexError> {
    if pl == Language::Python {
        lex_python(src, opts)
    } else {
        lex_c_family(src, pl)
    }
}

fn lex_c_family(src: &str, pl: Language) -> Result<Lexed, LexError> {
    let mut c = Cursor::new(src, pl);
    while c.pos < c.bytes.len() {
        let b = c.bytes[c.pos];
        match b {
            b'\n' => {
                c.line += 1;
                c.pos += 1;
            }
            _ if b.is_ascii_whitespace() => c.pos += 1,
            b'\\' if matches!(c.peek(1), Some(b'\n')) => {
                c.line += 1;
                c.pos += 2;
            }
            b'/' if c.peek(1) == Some(b'/') => c.line_comment(2),
            b'/' if c.peek(1) == Some(b'*') => c.block_comment()?,
            b'"' if pl == Language::Java && c.starts_with("\"\"\"") => {
                let start = c.pos;
                c.triple_quoted(start, b'"')?
            }
            b'"' | b'\'' => {
                let start = c.pos;
                c.quoted(start, b, false)?
            }
            b'`' if pl == Language::Go => c.go_raw_string()?,
            _ if b.is_ascii_digit() || (b == b'.' && c.peek(1).is_some_and(|n| n.is_ascii_digit())) => c.number(),
            _ if is_ident_start(b, pl) => {
                let start = c.pos;
                let end = c.identifier_end();
                let word = &src[start..end];
                let next = c.bytes.get(end).copied();
                let cpp_like = matches!(pl, Language::C | Language::Cpp);
                if cpp_like
                    && next == Some(b'"')
                    && matches!(word, "R" | "LR" | "uR" | "UR" | "u8R")
                    && pl == Language::Cpp
                {
                    c.pos = end;
                    c.cpp_raw_string(start)?;
                } else if cpp_like && matches!(next, Some(b'"') | Some(b'\'')) && matches!(word, "L" | "u" | "U" | "u8")
                {
                    c.pos = end;
                    c.quoted(start, next.unwrap(), false)?;
                } else {
                    let class = if is_keyword(pl, word) {
                        TokenClass::Keyword
                    } else {
                        TokenClass::Identifier
                    };
                    c.pos = end;
                    c.push_token(class, start, end, c.line);
                }
            }
            _ => c.operator(),
        }
    }
    Ok(c.out)
}

fn python_string_prefix(word: &str) -> bool {
    word.len() <= 2
        && word
            .chars()
            .all(|ch| matches!(ch.to_ascii_lowercase(), 'r' | 'b' | 'u' | 'f'))
}

fn lex_python(src: &str, opts: &ScanOptions) -> Result<Lexed, LexError> {
    let mut c = Cursor::new(src, Language::Python);
    let mut depth: usize = 0;
    let mut indents: Vec<usize> = vec![0];
    let mut at_line_start = true;
    let mut line_indent = 0usize;
    let mut logical_has_tokens = false;
    // (index of first token, index one past the NEWLINE marker) per logical line
    let mut logical_lines: Vec<(usize, usize)> = Vec::new();
    let mut logical_start = 0usize;

    while c.pos < c.bytes.len() {
        if at_line_start {
            // measure indentation of this physical line
            let mut width = 0;
            while let Some(b) = c.peek(0) {
                match b {
                    b' ' => width += 1,
                    b'\t' => width = (width / 8 + 1) * 8,
                    b'\x0c' => width = 0,
                    _ => break,
                }
                c.pos += 1;
            }
            line_indent = width;
            at_line_start = false;
            continue;
        }
        let b = c.bytes[c.pos];
        match b {
            b'\n' => {
                if depth == 0 && logical_has_tokens {
                    c.push_marker(PY_NEWLINE);
                    logical_lines.push((logical_start, c.out.tokens.len()));
                    logical_has_tokens = false;
                }
                c.line += 1;
                c.pos += 1;
                at_line_start = depth == 0;
            }
            _ if b.is_ascii_whitespace() => c.pos += 1,
            b'\\' if matches!(c.peek(1), Some(b'\n')) || (c.peek(1) == Some(b'\r') && c.peek(2) == Some(b'\n')) => {
                c.pos += if c.peek(1) == Some(b'\r') { 3 } else { 2 };
                c.line += 1;
            }
            b'#' => c.line_comment(1),
            _ => {
                if !logical_has_tokens {
                    // first token of a logical line: settle indentation
                    if depth == 0 {
                        if line_indent > *indents.last().unwrap() {
                            indents.push(line_indent);
                            c.push_marker(PY_INDENT);
                        } else {
                            while line_indent < *indents.last().unwrap() {
                                indents.pop();
                                c.push_marker(PY_DEDENT);
                            }
                            if line_indent > *indents.last().unwrap() {
                                indents.push(line_indent);
                                c.push_marker(PY_INDENT);
                            }
                        }
                    }
                    logical_start = c.out.tokens.len();
                    logical_has_tokens = true;
                }
                match b {
                    b'"' | b'\'' => {
                        let start = c.pos;
                        if c.starts_with(if b == b'"' { "\"\"\"" } else { "'''" }) {
                            c.triple_quoted(start, b)?;
                        } else {
                            c.quoted(start, b, false)?;
                        }
                    }
                    _ if b.is_ascii_digit() || (b == b'.' && c.peek(1).is_some_and(|n| n.is_ascii_digit())) => {
                        c.number()
                    }
                    _ if is_ident_start(b, Language::Python) => {
                        let start = c.pos;
                        let end = c.identifier_end();
                        let word = &src[start..end];
                        let next = c.bytes.get(end).copied();
                        if matches!(next, Some(b'"') | Some(b'\'')) && python_string_prefix(word) {
                            let q = next.unwrap();
                            c.pos = end;
                            let triple = if q == b'"' { "\"\"\"" } else { "'''" };
                            if c.starts_with(triple) {
                                c.triple_quoted(start, q)?;
                            } else {
                                c.quoted(start, q, false)?;
                            }
                        } else {
                            let class = if is_keyword(Language::Python, word) {
                                TokenClass::Keyword
                            } else {
                                TokenClass::Identifier
                            };
                            c.pos = end;
                            c.push_token(class, start, end, c.line);
                        }
                    }
                    _ => {
                        c.operator();
                        match b {
                            b'(' | b'[' | b'{' => depth += 1,
                            b')' | b']' | b'}' => depth = depth.saturating_sub(1),
                            _ => {}
                        }
                    }
                }
            }
        }
    }
    if logical_has_tokens {
        c.push_marker(PY_NEWLINE);
        logical_lines.push((logical_start, c.out.tokens.len()));
    }
    while indents.len() > 1 {
        indents.pop();
        c.push_marker(PY_DEDENT);
    }

    let mut out = c.out;
    if opts.python_docstrings {
        docstrings_to_comments(src, &mut out, &logical_lines);
    }
    Ok(out)
}

/// Reclassifies module, class and function docstrings as block comments.
fn docstrings_to_comments(src: &str, out: &mut Lexed, logical_lines: &[(usize, usize)]) {
    let mut drop = vec![false; out.tokens.len()];
    let mut prev_header = true; // the module start behaves like a block header
    for &(first, end) in logical_lines {
        let body: Vec<usize> = (first..end)
            .filter(|&i| {
                !matches!(out.tokens[i].text.as_str(), PY_INDENT | PY_DEDENT | PY_NEWLINE)
                    || out.tokens[i].class != TokenClass::Punctuation
            })
            .collect();
        let is_doc = prev_header
            && !body.is_empty()
            && body
                .iter()
                .all(|&i| out.tokens[i].class == TokenClass::Literal && is_string_token(&out.tokens[i].text));
        if is_doc {
            for &i in &body {
                let t = &out.tokens[i];
                let start_line = t.line;
                let end_line = start_line + count_newlines(&src.as_bytes()[t.start..t.end]);
                out.comments.push(RawComment {
                    start: t.start,
                    end: t.end,
                    start_line,
                    end_line,
                    kind: CommentKind::Block,
                    text: comment_payload(string_body(&t.text), CommentKind::Block),
                });
                drop[i] = true;
            }
            // the docstring's NEWLINE goes with it
            if end > 0 && out.tokens[end - 1].text == PY_NEWLINE {
                drop[end - 1] = true;
            }
        }
        let words: Vec<&str> = body.iter().map(|&i| out.tokens[i].text.as_str()).collect();
        prev_header =
            matches!(words.first(), Some(&"def") | Some(&"class") | Some(&"async")) && words.last() == Some(&":");
    }
    let mut idx = 0;
    out.tokens.retain(|_| {
        let keep = !drop[idx];
        idx += 1;
        keep
    });
    out.comments.sort_by_key(|c| c.start);
}

fn is_string_token(text: &str) -> bool {
    let trimmed = text.trim_start_matches(|c: char| c.is_ascii_alphabetic());
    trimmed.starts_with('"') || trimmed.starts_with('\'')
}

fn string_body(text: &str) -> &str {
    let t = text.trim_start_matches(|c: char| c.is_ascii_alphabetic());
    for q in ["\"\"\"", "'''", "\"", "'"] {
        if t.starts_with(q) && t.ends_with(q) && t.len() >= 2 * q.len() {
            return &t[q.len()..t.len() - q.len()];
        }
    }
    t
}
