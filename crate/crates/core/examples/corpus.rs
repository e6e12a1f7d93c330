//! Write a small corpus to disk, load it back and print its statistics.

use std::collections::BTreeMap;

use codetrans::corpus::{self, CodeSample, DeclaredStats, Origin, TestCase};
use codetrans::Language;

fn main() {
    let tc = |k: usize, i: &str, o: &str| TestCase {
        index: k,
        stdin: i.into(),
        expected_stdout: o.into(),
    };
    let samples = vec![
        CodeSample::new("py-double", Origin::Avatar, Language::Python, "print(int(input()) * 2)\n", vec![tc(0, "2\n", "4\n"), tc(1, "5\n", "10\n")]),
        CodeSample::new(
            "c-echo",
            Origin::Codenet,
            Language::C,
            "#include <stdio.h>\nint main(void) {\n    int n;\n    scanf(\"%d\", &n);\n    printf(\"%d\\n\", n);\n    return 0;\n}\n",
            vec![tc(0, "7\n", "7\n")],
        ),
    ];
    let declared: BTreeMap<String, DeclaredStats> = [
        (
            "Python".to_string(),
            DeclaredStats {
                samples: 1,
                min_loc: 1,
                max_loc: 1,
                avg_testcases: 2,
            },
        ),
        (
            "C".to_string(),
            DeclaredStats {
                samples: 1,
                min_loc: 7,
                max_loc: 7,
                avg_testcases: 1,
            },
        ),
    ]
    .into();
    let dir = tempfile::tempdir().unwrap();
    corpus::write_corpus_declared(dir.path(), &samples, declared).unwrap();

    let loaded = corpus::load_corpus_dir(dir.path()).unwrap();
    assert_eq!(loaded, samples);
    let stats = corpus::corpus_stats(&loaded).unwrap();
    for (pl, s) in &stats.per_pl {
        println!(
            "{:<7} {} sample(s), LOC {}-{}, {} testcase(s) on average",
            pl.name(),
            s.sample_count,
            s.min_loc,
            s.max_loc,
            s.avg_testcases
        );
    }
    let manifest = corpus::read_manifest(&dir.path().join(corpus::MANIFEST_FILE)).unwrap();
    let mismatches = corpus::declared_mismatches(&manifest, &stats);
    println!(
        "declared statistics {}",
        if mismatches.is_empty() {
            "match".to_string()
        } else {
            mismatches.join("; ")
        }
    );
}
