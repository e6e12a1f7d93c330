#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use codetrans::corpus::{load_corpus_dir, CodeSample};
use codetrans::sim::{comment_lines, fenced, ScriptedModel, SimRequest, SimTask};
use codetrans::surface;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn golden_dir() -> PathBuf {
    fixtures().join("golden")
}

pub fn mini_corpus() -> Vec<CodeSample> {
    load_corpus_dir(&fixtures().join("mini-corpus")).expect("mini corpus loads")
}

/// Commenting and translating model behind the golden replay script.
/// Translations come from `golden/translations/<id>.<base|commented>.<ext>`.
pub fn golden_model() -> Arc<ScriptedModel> {
    let corpus = mini_corpus();
    let dir = golden_dir().join("translations");
    ScriptedModel::new(move |r: &SimRequest| {
        let pl = r.source_pl.ok_or("no source language")?;
        match r.task {
            SimTask::CommentGen => Ok(fenced(&comment_lines(&r.code, pl, 3, "what the next lines do"), pl)),
            SimTask::Translate => {
                let target = r.target_pl.ok_or("no target language")?;
                let want = surface::lex_normalize(&r.code, pl).map_err(|e| e.to_string())?;
                let sample = corpus
                    .iter()
                    .filter(|s| s.source_pl == pl)
                    .find(|s| surface::lex_normalize(&s.code, pl).ok().as_ref() == Some(&want))
                    .ok_or("unknown program")?;
                let commented = !surface::scan_comments(&r.code, pl)
                    .map_err(|e| e.to_string())?
                    .is_empty();
                let kind = if commented { "commented" } else { "base" };
                let path = dir.join(format!("{}.{kind}.{}", sample.id, target.extension()));
                let code = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
                Ok(format!("Here is the translation.\n\n{}", fenced(&code, target)))
            }
            other => Err(format!("unexpected task {other:?}")),
        }
    })
}

pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("codetrans").chain(args.iter().copied());
    let code = codetrans::cli::run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Runs the golden cascade through the CLI into `out` and returns the
/// exit code and stderr.
pub fn golden_cli_run(out: &Path) -> (i32, String) {
    let cfg = golden_dir().join("run.toml");
    let (code, _, err) = run_cli(&[
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
        "run-cascade",
    ]);
    (code, err)
}

/// Files of a report directory, sorted by name.
pub fn report_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}
