//! The five subject languages a program can be written in.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Language {
    C,
    #[serde(rename = "C++", alias = "Cpp", alias = "cpp")]
    Cpp,
    Go,
    Java,
    Python,
}

impl Language {
    pub const ALL: [Language; 5] = [
        Language::C,
        Language::Cpp,
        Language::Go,
        Language::Java,
        Language::Python,
    ];

    /// Display name used in prompts and reports.
    pub fn name(self) -> &'static str {
        match self {
            Language::C => "C",
            Language::Cpp => "C++",
            Language::Go => "Go",
            Language::Java => "Java",
            Language::Python => "Python",
        }
    }

    /// Lowercase identifier used in file names and config keys.
    pub fn key(self) -> &'static str {
        match self {
            Language::C => "c",
            Language::Cpp => "cpp",
            Language::Go => "go",
            Language::Java => "java",
            Language::Python => "python",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Language::C => "c",
            Language::Cpp => "cpp",
            Language::Go => "go",
            Language::Java => "java",
            Language::Python => "py",
        }
    }

    /// Short direction code as used in pair labels such as `P2J`.
    pub fn initial(self) -> &'static str {
        match self {
            Language::C => "C",
            Language::Cpp => "C++",
            Language::Go => "G",
            Language::Java => "J",
            Language::Python => "P",
        }
    }

    pub fn is_c_family(self) -> bool {
        !matches!(self, Language::Python)
    }

    /// Maps a markdown fence info string to a language.
    pub fn from_fence_tag(tag: &str) -> Option<Language> {
        let tag = tag.split_whitespace().next().unwrap_or("").to_ascii_lowercase();
        match tag.as_str() {
            "c" | "h" => Some(Language::C),
            "cpp" | "c++" | "cc" | "cxx" | "hpp" => Some(Language::Cpp),
            "go" | "golang" => Some(Language::Go),
            "java" => Some(Language::Java),
            "python" | "py" | "python3" | "py3" => Some(Language::Python),
            _ => None,
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown subject language tag `{0}`")]
pub struct UnknownLanguage(pub String);

impl FromStr for Language {
    type Err = UnknownLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "c" => Ok(Language::C),
            "c++" | "cpp" | "cxx" => Ok(Language::Cpp),
            "go" | "golang" => Ok(Language::Go),
            "java" => Ok(Language::Java),
            "python" | "py" | "python3" => Ok(Language::Python),
            _ => Err(UnknownLanguage(s.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tags_case_insensitively() {
        assert_eq!("C++".parse::<Language>().unwrap(), Language::Cpp);
        assert_eq!("python".parse::<Language>().unwrap(), Language::Python);
        assert_eq!("JAVA".parse::<Language>().unwrap(), Language::Java);
        assert!("rust".parse::<Language>().is_err());
    }

    #[test]
    fn serde_uses_display_names() {
        let json = serde_json::to_string(&Language::Cpp).unwrap();
        assert_eq!(json, "\"C++\"");
        let back: Language = serde_json::from_str("\"cpp\"").unwrap();
        assert_eq!(back, Language::Cpp);
    }

    #[test]
    fn fence_tags() {
        assert_eq!(Language::from_fence_tag("golang"), Some(Language::Go));
        assert_eq!(Language::from_fence_tag("py"), Some(Language::Python));
        assert_eq!(Language::from_fence_tag("text"), None);
    }
}
