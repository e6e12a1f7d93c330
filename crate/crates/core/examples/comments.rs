//! Scan, strip and measure comments in a small Java program.

use codetrans::surface::{comment_density, find_method_boundaries, lex_normalize, scan_comments, strip_comments};
use codetrans::Language;

const PROGRAM: &str = r#"import java.util.Scanner;

public class Main {
    // read two numbers and print their sum
    public static void main(String[] args) {
        Scanner in = new Scanner(System.in);
        int a = in.nextInt(); /* first */
        int b = in.nextInt();
        System.out.println("// " + (a + b));
    }
}
"#;

fn main() {
    let pl = Language::Java;
    for span in scan_comments(PROGRAM, pl).unwrap() {
        println!(
            "{:?} comment on lines {}-{}: {:?}",
            span.kind,
            span.start_line,
            span.end_line,
            span.text.trim()
        );
    }
    println!("density {:.4}", comment_density(PROGRAM, pl).unwrap());
    println!("methods start on lines {:?}", find_method_boundaries(PROGRAM, pl));

    let stripped = strip_comments(PROGRAM, pl).unwrap();
    println!("\n{stripped}");
    let same = lex_normalize(&stripped, pl).unwrap() == lex_normalize(PROGRAM, pl).unwrap();
    println!("token streams equal after stripping: {same}");
}
