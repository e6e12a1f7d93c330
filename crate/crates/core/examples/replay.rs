//! Record model exchanges from a scripted model, export them as a replay
//! script and serve the same requests again without any model.

use codetrans::corpus::{CodeSample, Origin, TestCase};
use codetrans::gateway::{self, CommentOptions, ExchangeStore, ModelEndpoint};
use codetrans::sim::{self, fenced, ScriptedModel, SimTask};
use codetrans::surface::extract_code_block;
use codetrans::Language;

fn main() {
    let sample = CodeSample::new(
        "double",
        Origin::Custom,
        Language::Python,
        "n = int(input())\nprint(n * 2)\n",
        vec![TestCase {
            index: 0,
            stdin: "4\n".into(),
            expected_stdout: "8\n".into(),
        }],
    );
    let model = ScriptedModel::new(|r| match r.task {
        SimTask::CommentGen => Ok(fenced(
            &sim::comment_lines(&r.code, Language::Python, 1, "step"),
            Language::Python,
        )),
        SimTask::Translate => Ok(fenced(
            "package main\n\nimport \"fmt\"\n\nfunc main() {\n\tvar n int\n\tfmt.Scan(&n)\n\tfmt.Println(n * 2)\n}",
            Language::Go,
        )),
        _ => Err("unsupported".into()),
    });
    let live = sim::scripted_gateway(&["m"], model.clone());
    let commented = gateway::generate_comments(&live, "m", &sample, &CommentOptions::default(), false).unwrap();
    println!("commented ({:?}):\n{}", commented.fidelity, commented.code);
    let ex = gateway::translate_code(&live, "m", &commented.code, Language::Python, Language::Go, None).unwrap();
    println!(
        "translation:\n{}\n",
        extract_code_block(&ex.response, Language::Go).unwrap().code
    );

    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("replay.jsonl");
    let n = live.cache().export(&script).unwrap();
    println!("exported {n} exchanges; model calls so far: {}", model.calls());

    let endpoint = ModelEndpoint {
        id: "m".into(),
        base_url: String::new(),
        model_name: "m-sim".into(),
        auth_ref: String::new(),
        decoding: Default::default(),
        kind: Default::default(),
        requests_per_minute: None,
    };
    let replay = gateway::Gateway::replay_only(vec![endpoint], ExchangeStore::open_read_only(&script).unwrap());
    let again = gateway::generate_comments(&replay, "m", &sample, &CommentOptions::default(), false).unwrap();
    assert_eq!(again.code, commented.code);
    println!("replayed: {:?}; model calls still {}", replay.stats(), model.calls());
}
