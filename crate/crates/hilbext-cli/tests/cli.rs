//! End-to-end checks of the command-line surface against the shipped
//! fixtures: outputs, determinism, and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hilbext"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    let mut cmd = bin();
    for a in args {
        match a.strip_prefix('@') {
            // fixture shorthand: "@trivial" -> fixtures/trivial.ctx,
            // "@outer.cls" -> fixtures/outer.cls
            Some(name) if name.contains('.') => cmd.arg(fixture(name)),
            Some(name) => cmd.arg(fixture(&format!("{name}.ctx"))),
            None => cmd.arg(a),
        };
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

#[test]
fn ext_taut_taut_on_trivial_fixture() {
    let out = run(&[
        "ext", "--ctx", "@trivial", "--n", "2", "--source", "taut:E,L", "--target", "taut:F,M",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(
        text,
        "0 | 1 | EF ; {LM}\n0 | 2 | EM ; LF ; {}\npoincare: 2\n"
    );
}

#[test]
fn ext_is_byte_stable() {
    let args = [
        "ext", "--ctx", "@trivial", "--n", "3", "--source", "taut:E,L", "--target", "det:M",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn det_det_listing() {
    let out = run(&[
        "ext", "--ctx", "@trivial", "--n", "2", "--source", "det:L", "--target", "det:M",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "0 | - | {LM,LM}\npoincare: 1\n");
}

#[test]
fn cohom_on_k3like() {
    let out = run(&[
        "cohom", "--ctx", "@k3like", "--n", "2", "--source", "taut:E,L",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("poincare: 1 + 2*t^2 + t^4"), "{text}");
}

#[test]
fn spherical_on_k3like_is_neither() {
    let out = run(&[
        "spherical",
        "--ctx",
        "@k3like",
        "--n",
        "2",
        "--source",
        "taut:E,L",
        "--assume-serre",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("dims: {0:2, 2:4, 4:2}"), "{text}");
    assert!(text.contains("verdict: neither"), "{text}");
    assert!(
        text.contains("witness degrees (dim >= 2): [2, 4]"),
        "{text}"
    );
    assert!(text.contains("verdict guaranteed: yes"), "{text}");
}

#[test]
fn yoneda_with_oracle_check() {
    let out = run(&[
        "yoneda",
        "--ctx",
        "@compose",
        "--class",
        "@outer.cls",
        "--class",
        "@inner.cls",
        "--oracle",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("\"coeff\": \"2\""), "{text}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("agrees"));
}

#[test]
fn verify_suites_exit_zero() {
    for suite in ["reps", "complex", "yoneda", "graded"] {
        let out = run(&["verify", "--suite", suite, "--max-n", "3", "--seed", "1"]);
        assert!(
            out.status.success(),
            "suite {suite}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(stdout(&out).contains("checks passed"));
    }
}

#[test]
fn verify_is_deterministic_for_fixed_seed() {
    let args = ["verify", "--suite", "yoneda", "--max-n", "3", "--seed", "9"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn errors_exit_one() {
    // missing file
    let out = run(&[
        "ext",
        "--ctx",
        "no-such-file.ctx",
        "--n",
        "2",
        "--source",
        "taut:E,L",
        "--target",
        "taut:F,M",
    ]);
    assert_eq!(out.status.code(), Some(1));
    // unknown object symbol
    let out = run(&[
        "ext", "--ctx", "@trivial", "--n", "2", "--source", "taut:Z,L", "--target", "taut:F,M",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown object symbol"));
    // n below 2 for a Hilbert-scheme query
    let out = run(&[
        "ext", "--ctx", "@trivial", "--n", "1", "--source", "taut:E,L", "--target", "taut:F,M",
    ]);
    assert_eq!(out.status.code(), Some(1));
    // malformed spec
    let out = run(&[
        "ext", "--ctx", "@trivial", "--n", "2", "--source", "bogus", "--target", "det:M",
    ]);
    assert_eq!(out.status.code(), Some(1));
}
