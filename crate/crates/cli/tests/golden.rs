use std::fs;
use std::io::Cursor;
use std::path::PathBuf;
use std::thread;

use transseries_cli::{run, Outcome};

const CASES: &[(&str, &[&str])] = &[
    ("eval_geometric", &["eval", "1/(1 - 1/x)"]),
    ("eval_exp_of_inverse", &["eval", "exp(1/x)", "--terms", "6"]),
    ("eval_log_shift", &["eval", "log(x + 1)", "--terms", "5"]),
    ("eval_sqrt", &["eval", "(x + 1)^(1/2)", "--terms", "5"]),
    ("eval_tower", &["eval", "exp(x^2) * log(x) + x"]),
    ("eval_float_backend", &["eval", "1/(3 - 1/x)", "--backend", "float", "--terms", "4"]),
    ("eval_partial_constant", &["eval", "exp(1)"]),
    ("eval_syntax_error", &["eval", "x^^2"]),
    ("eval_json", &["eval", "exp(x) + x", "--json"]),
    ("eval_stdin", &["eval", "-"]),
    ("derive_log", &["derive", "log(x)", "--n", "2"]),
    ("derive_exp_square", &["derive", "exp(x^2)"]),
    ("compose_exp_log", &["compose", "exp(x)", "log(x)"]),
    ("compose_inverse", &["compose", "1/(1 - 1/x)", "x^2 + x"]),
    ("taylor_inverse", &["taylor", "1/x", "x", "1", "--terms", "6"]),
    ("taylor_exp_divergent", &["taylor", "exp(x)", "x", "1"]),
    ("taylor_exp_flat_shift", &["taylor", "exp(x)", "x", "1/x", "--terms", "5"]),
    ("taylor_log", &["taylor", "log(x)", "x^2", "x", "--terms", "5"]),
    ("locus_compose", &["locus", "exp(x)", "--op", "compose:x^2", "--delta", "1/x"]),
    ("locus_divergent", &["locus", "exp(x^2)", "--delta", "1", "--json"]),
    ("cutcheck_geometric", &["cutcheck", "geometric:x^-1", "--cut", "above:1"]),
    ("cutcheck_separating", &["cutcheck", "geometric:x", "--cut", "above:1"]),
    ("cutcheck_lacunary", &["cutcheck", "doubling", "--cut", "empty"]),
    ("identity_log", &["identity-check", "log", "x + 1", "--delta", "1"]),
    ("identity_chain", &["identity-check", "chain", "x^2", "--op", "compose:x^2", "--delta", "1/x"]),
];

fn invoke(args: &[&str]) -> Outcome {
    let mut argv = vec!["tsx".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    thread::Builder::new()
        .stack_size(256 << 20)
        .spawn(move || run(argv, &mut Cursor::new(b"x^3 - 1/x\n".to_vec())))
        .unwrap()
        .join()
        .unwrap()
}

fn expected_code(o: &Outcome) -> i32 {
    if !o.stderr.is_empty() {
        return 3;
    }
    match o.stdout.lines().last() {
        Some(l) if l.starts_with("UNEQUAL") => 2,
        Some(l) if l.starts_with("SKIPPED") => 4,
        _ => 0,
    }
}

fn transcript(o: &Outcome) -> String {
    format!("exit: {}\n--- stdout\n{}--- stderr\n{}", o.code, o.stdout, o.stderr)
}

#[test]
fn golden_transcripts() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let bless = std::env::var_os("TSX_BLESS").is_some();
    let mut failures = Vec::new();
    for (name, args) in CASES {
        let outcome = invoke(args);
        if outcome.code != expected_code(&outcome) {
            failures.push(format!("{name}: exit code {} does not match the reported verdict", outcome.code));
        }
        let first = transcript(&outcome);
        let second = transcript(&invoke(args));
        if first != second {
            failures.push(format!("{name}: output differs between runs"));
            continue;
        }
        let path = dir.join(format!("{name}.txt"));
        if bless {
            fs::write(&path, &first).unwrap();
            continue;
        }
        match fs::read_to_string(&path) {
            Ok(expected) if expected == first => {}
            Ok(expected) => failures.push(format!("{name}: expected\n{expected}got\n{first}")),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    let ok = failures.is_empty();
    println!(
        "{} cli_golden: {} transcripts, byte-identical across two runs",
        if ok { "PASS" } else { "FAIL" },
        CASES.len()
    );
    assert!(ok, "{}", failures.join("\n"));
}
