//! Expected/actual stdout comparison.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Per-line equality after trimming line ends and trailing empty lines.
    #[default]
    LineTrimmed,
    /// Whitespace-separated token sequences must match.
    Tokenwise,
}

fn normalized_lines(text: &str) -> Vec<&str> {
    let mut lines: Vec<&str> = text.lines().map(str::trim_end).collect();
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines
}

pub fn outputs_match(expected: &str, actual: &str, mode: Comparison) -> bool {
    match mode {
        Comparison::LineTrimmed => normalized_lines(expected) == normalized_lines(actual),
        Comparison::Tokenwise => expected.split_whitespace().eq(actual.split_whitespace()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Comparison::*;

    #[test]
    fn trailing_newline_is_ignored() {
        assert!(outputs_match("3\n", "3", LineTrimmed));
        assert!(outputs_match("a\nb\n\n\n", "a  \r\nb", LineTrimmed));
    }

    #[test]
    fn internal_spacing_matters() {
        assert!(!outputs_match("1 2", "1  2", LineTrimmed));
        assert!(!outputs_match("x", " x", LineTrimmed));
        assert!(!outputs_match("a\n\nb", "a\nb", LineTrimmed));
    }

    #[test]
    fn tokenwise_ignores_layout() {
        assert!(outputs_match("1 2\n3", "1  2 3\n", Tokenwise));
        assert!(!outputs_match("1 2", "1 3", Tokenwise));
    }
}
