//! Per-language compile and run command templates.
//!
//! Templates are split on whitespace and may use three placeholders:
//!
//! * `{src}`: absolute path of the materialized source file
//! * `{bin}`: `<workdir>/<stem>`, the executable for C, C++ and Go; for
//!   Java the class to launch
//! * `{workdir}`: the fresh per-judgment directory

use std::collections::BTreeMap;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::process::{self, ProcessSpec};
use crate::lang::Language;
use crate::surface;

pub const PLACEHOLDERS: [&str; 3] = ["src", "bin", "workdir"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SourceNameRule {
    Fixed {
        file: String,
    },
    /// `<Name>.java` after the first `public class <Name>`, else `Main.java`.
    JavaPublicClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Toolchain {
    pub pl: Language,
    /// Empty for interpret-only flows.
    #[serde(default)]
    pub compile_cmd: String,
    pub run_cmd: String,
    pub source_name_rule: SourceNameRule,
    pub compile_timeout_s: f64,
    pub run_timeout_s: f64,
    pub memory_limit_mb: u64,
    #[serde(default)]
    pub version_cmd: String,
    #[serde(default)]
    pub env: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ToolchainError {
    #[error("{pl} toolchain: unknown placeholder {{{name}}} in `{template}`")]
    UnknownPlaceholder {
        pl: Language,
        name: String,
        template: String,
    },
    #[error("{pl} toolchain: {what} must be positive")]
    NonPositive { pl: Language, what: &'static str },
    #[error("{pl} toolchain: empty run command")]
    EmptyRun { pl: Language },
}

fn placeholder_re() -> &'static Regex {
    static RE: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([A-Za-z_]*)\}").unwrap())
}

impl Toolchain {
    pub fn default_for(pl: Language) -> Toolchain {
        let fixed = |f: &str| SourceNameRule::Fixed { file: f.to_string() };
        let (compile, run, rule, version) = match pl {
            Language::C => (
                "gcc -O2 -std=gnu11 -o {bin} {src} -lm",
                "{bin}",
                fixed("main.c"),
                "gcc --version",
            ),
            Language::Cpp => (
                "g++ -O2 -std=gnu++17 -o {bin} {src}",
                "{bin}",
                fixed("main.cpp"),
                "g++ --version",
            ),
            Language::Go => ("go build -o {bin} {src}", "{bin}", fixed("main.go"), "go version"),
            Language::Java => (
                "javac -d {workdir} {src}",
                "java -cp {workdir} {bin}",
                SourceNameRule::JavaPublicClass,
                "javac -version",
            ),
            Language::Python => (
                "python3 -m py_compile {src}",
                "python3 {src}",
                fixed("main.py"),
                "python3 --version",
            ),
        };
        let mut env = BTreeMap::new();
        if pl == Language::Go {
            env.insert("GOTOOLCHAIN".into(), "local".into());
            env.insert("CGO_ENABLED".into(), "0".into());
            env.insert("GOFLAGS".into(), "-buildvcs=false".into());
        }
        Toolchain {
            pl,
            compile_cmd: compile.into(),
            run_cmd: run.into(),
            source_name_rule: rule,
            compile_timeout_s: 30.0,
            run_timeout_s: 10.0,
            memory_limit_mb: 512,
            version_cmd: version.into(),
            env,
        }
    }

    pub fn validate(&self) -> Result<(), ToolchainError> {
        for template in [&self.compile_cmd, &self.run_cmd, &self.version_cmd] {
            for cap in placeholder_re().captures_iter(template) {
                let name = &cap[1];
                if !PLACEHOLDERS.contains(&name) {
                    return Err(ToolchainError::UnknownPlaceholder {
                        pl: self.pl,
                        name: name.to_string(),
                        template: template.clone(),
                    });
                }
            }
        }
        if self.run_cmd.trim().is_empty() {
            return Err(ToolchainError::EmptyRun { pl: self.pl });
        }
        let checks = [
            ("compile_timeout_s", self.compile_timeout_s > 0.0),
            ("run_timeout_s", self.run_timeout_s > 0.0),
            ("memory_limit_mb", self.memory_limit_mb > 0),
        ];
        for (what, ok) in checks {
            if !ok {
                return Err(ToolchainError::NonPositive { pl: self.pl, what });
            }
        }
        Ok(())
    }

    /// Programs the templates invoke directly, for environment probing.
    pub fn programs(&self) -> Vec<String> {
        let mut out = Vec::new();
        for template in [&self.compile_cmd, &self.run_cmd] {
            if let Some(first) = template.split_whitespace().next() {
                if !first.contains('{') && !out.iter().any(|p| p == first) {
                    out.push(first.to_string());
                }
            }
        }
        out
    }
}

pub(crate) fn render(template: &str, vars: &BTreeMap<&str, String>) -> Vec<String> {
    template
        .split_whitespace()
        .map(|word| {
            placeholder_re()
                .replace_all(word, |c: &regex::Captures| vars.get(&c[1]).cloned().unwrap_or_default())
                .into_owned()
        })
        .collect()
}

/// Class name from the first `public class <Name>` outside comments.
pub fn java_public_class(code: &str) -> Option<String> {
    static RE: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(r"\bpublic\s+(?:(?:final|abstract|static|strictfp)\s+)*class\s+([A-Za-z_$][A-Za-z0-9_$]*)").unwrap()
    });
    let stripped = surface::strip_comments(code, Language::Java).unwrap_or_else(|_| code.to_string());
    re.captures(&stripped).map(|c| c[1].to_string())
}

/// Class declaring `main`, used to launch Java code without a public class.
fn java_main_class(code: &str) -> Option<String> {
    static CLASS: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    let class =
        CLASS.get_or_init(|| Regex::new(r"\b(?:class|enum|interface|record)\s+([A-Za-z_$][A-Za-z0-9_$]*)").unwrap());
    let stripped = surface::strip_comments(code, Language::Java).unwrap_or_else(|_| code.to_string());
    let main_at = stripped.find("static void main")?;
    class
        .captures_iter(&stripped[..main_at])
        .last()
        .map(|c| c[1].to_string())
}

/// File name and launch name for `code` under `rule`.
pub(crate) fn source_names(code: &str, rule: &SourceNameRule, pl: Language) -> (String, String) {
    match rule {
        SourceNameRule::Fixed { file } => {
            let stem = Path::new(file)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "main".into());
            (file.clone(), stem)
        }
        SourceNameRule::JavaPublicClass => match java_public_class(code) {
            Some(name) => (format!("{name}.{}", pl.extension()), name),
            None => {
                let main = java_main_class(code).unwrap_or_else(|| "Main".into());
                (format!("Main.{}", pl.extension()), main)
            }
        },
    }
}

/// Availability of one configured toolchain on this machine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolchainStatus {
    pub pl: Language,
    pub available: bool,
    pub missing: Vec<String>,
    pub version: Option<String>,
}

pub fn probe(tc: &Toolchain) -> ToolchainStatus {
    let missing: Vec<String> = tc
        .programs()
        .into_iter()
        .filter(|p| process::find_in_path(p).is_none())
        .collect();
    let version = if missing.is_empty() && !tc.version_cmd.trim().is_empty() {
        version_of(tc)
    } else {
        None
    };
    ToolchainStatus {
        pl: tc.pl,
        available: missing.is_empty(),
        missing,
        version,
    }
}

fn version_of(tc: &Toolchain) -> Option<String> {
    let dir = tempfile::tempdir().ok()?;
    let argv = render(&tc.version_cmd, &BTreeMap::new());
    let out = process::run(&ProcessSpec {
        argv,
        cwd: dir.path(),
        env: &tc.env,
        stdin: b"",
        timeout: std::time::Duration::from_secs(20),
        memory_limit_mb: None,
        isolate_network: false,
        output_limit: 64 * 1024,
    })
    .ok()?;
    let text = if out.stdout.is_empty() { out.stderr } else { out.stdout };
    String::from_utf8_lossy(&text)
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .map(str::to_string)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for pl in Language::ALL {
            Toolchain::default_for(pl).validate().unwrap();
        }
    }

    #[test]
    fn rejects_unknown_placeholder_and_zero_timeout() {
        let mut tc = Toolchain::default_for(Language::C);
        tc.run_cmd = "{bin} {input}".into();
        assert!(matches!(tc.validate(), Err(ToolchainError::UnknownPlaceholder { .. })));
        let mut tc = Toolchain::default_for(Language::C);
        tc.run_timeout_s = 0.0;
        assert!(matches!(tc.validate(), Err(ToolchainError::NonPositive { .. })));
    }

    #[test]
    fn renders_placeholders_per_word() {
        let mut vars = BTreeMap::new();
        vars.insert("src", "/w/main.c".to_string());
        vars.insert("bin", "/w/main".to_string());
        assert_eq!(
            render("gcc -o {bin} {src} -lm", &vars),
            vec!["gcc", "-o", "/w/main", "/w/main.c", "-lm"]
        );
    }

    #[test]
    fn java_file_names() {
        let rule = SourceNameRule::JavaPublicClass;
        let main = "public class Main { public static void main(String[] a) {} }";
        assert_eq!(
            source_names(main, &rule, Language::Java),
            ("Main.java".into(), "Main".into())
        );
        let sol = "import java.util.*;\n// public class Decoy\npublic final class Solution {\n public static void main(String[] a) {}\n}\n";
        assert_eq!(
            source_names(sol, &rule, Language::Java),
            ("Solution.java".into(), "Solution".into())
        );
        let hidden = "class Helper {}\nclass Prog {\n public static void main(String[] a) {}\n}\n";
        assert_eq!(
            source_names(hidden, &rule, Language::Java),
            ("Main.java".into(), "Prog".into())
        );
    }

    #[test]
    fn python_and_go_use_fixed_names() {
        let py = Toolchain::default_for(Language::Python);
        assert_eq!(
            source_names("print(1)", &py.source_name_rule, Language::Python).0,
            "main.py"
        );
        let go = Toolchain::default_for(Language::Go);
        assert_eq!(
            source_names("package main", &go.source_name_rule, Language::Go).0,
            "main.go"
        );
    }

    #[test]
    fn probe_reports_missing_program() {
        let mut tc = Toolchain::default_for(Language::C);
        tc.compile_cmd = "no-such-compiler-xyz {src}".into();
        let st = probe(&tc);
        assert!(!st.available);
        assert_eq!(st.missing, vec!["no-such-compiler-xyz".to_string()]);
    }
}
