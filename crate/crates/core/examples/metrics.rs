//! Success rates, gains, verdict transitions and success-set overlaps on
//! hand-made numbers.

use std::collections::{BTreeMap, BTreeSet};

use codetrans::analysis::{compute_gain, compute_overlaps, Rate, TransitionMatrix};
use codetrans::harness::Bucket;

fn main() {
    let baseline = Rate::new(152, 200);
    println!("baseline rate {}", baseline.render(2));
    for (name, s) in [("D", 155), ("G", 161), ("M", 113)] {
        let g = compute_gain(baseline, Rate::new(s, 200));
        println!(
            "{name}: {s}/200  gain {} (from rounded rates {})",
            g.render(),
            g.render_rounded_rate()
        );
    }

    let pairs = [
        (Bucket::Success, Bucket::Success, 40),
        (Bucket::Success, Bucket::CompileFail, 3),
        (Bucket::CompileFail, Bucket::Success, 9),
        (Bucket::CompileFail, Bucket::CompileFail, 30),
        (Bucket::TestcaseFail, Bucket::Success, 4),
        (Bucket::TestcaseFail, Bucket::TestcaseFail, 10),
        (Bucket::Other, Bucket::Other, 4),
    ];
    let m = TransitionMatrix::from_pairs(pairs.iter().flat_map(|&(a, b, n)| std::iter::repeat_n((a, b), n)));
    println!(
        "\n{:<14}{}",
        "",
        Bucket::ALL.map(|b| format!("{:>14}", b.label())).concat()
    );
    for from in Bucket::ALL {
        let row: String = Bucket::ALL
            .iter()
            .map(|&to| format!("{:>14}", m.count(from, to)))
            .collect();
        println!("{:<14}{row}   = {}", from.label(), m.row_sum(from));
    }
    println!("total {}", m.total());

    let set = |r: std::ops::Range<u32>| r.map(|i| format!("p{i}")).collect::<BTreeSet<_>>();
    let sets: BTreeMap<String, BTreeSet<String>> = [
        ("none".to_string(), set(0..50)),
        ("D".to_string(), set(5..60)),
        ("G".to_string(), set(0..40).into_iter().chain(set(70..75)).collect()),
    ]
    .into();
    let o = compute_overlaps(&sets, "none").unwrap();
    println!("\nsizes {:?}", o.sizes);
    for p in &o.pairs {
        println!("|{} & {}| = {}", p.a, p.b, p.intersection);
    }
    println!("added over baseline {:?}, lost {:?}", o.added_value, o.lost);
    println!("inclusion-exclusion holds: {}", o.inclusion_exclusion_holds());
}
