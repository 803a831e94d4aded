//! End-to-end command tests: exit codes, witness files, report shape.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn seqsl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqsl"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, content: &str) {
    fs::write(dir.join(name), content).unwrap();
}

#[test]
fn check_verdicts_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "empty.json", r#"{"stack":{},"seq":{},"heap":{}}"#);
    write(d, "bound.json", r#"{"stack":{"x":1},"seq":{"@a":[2]},"heap":{}}"#);
    write(d, "emp.sl", "emp");
    write(d, "cell.sl", "x |-> @a");

    let out = seqsl(d, &["check", "empty.json", "emp.sl"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("True"));

    let out = seqsl(d, &["check", "bound.json", "cell.sl"]);
    assert_eq!(code(&out), 1);

    // tightly bounded quantifier over an open universe stays unknown
    write(d, "tight.sl", "forall x. x = x");
    let out = seqsl(d, &["check", "empty.json", "tight.sl", "--seq-bound", "0", "--loc-extra", "1"]);
    assert_eq!(code(&out), 2, "expected unknown, got: {out:?}");

    // parse failures are usage errors
    write(d, "bad.sl", "x |->");
    let out = seqsl(d, &["check", "empty.json", "bad.sl"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn sat_writes_witnesses_that_recheck() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "alloc.sl", "(x |-> nil) -* false");
    let out = seqsl(d, &["sat", "alloc.sl", "--witness", "w.json"]);
    assert_eq!(code(&out), 0);

    let out = seqsl(d, &["check", "w.json", "alloc.sl"]);
    assert_eq!(code(&out), 0, "witness fails to re-check: {out:?}");

    write(d, "contradiction.sl", "emp /\\ x |-> @a");
    let out = seqsl(d, &["sat", "contradiction.sl"]);
    assert_eq!(code(&out), 1);

    write(d, "quantified.sl", "exists x. emp");
    let out = seqsl(d, &["sat", "quantified.sl"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn validity_and_countermodels() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "refl.sl", "forall @a. @a == @a");
    assert_eq!(code(&seqsl(d, &["valid", "refl.sl"])), 0);

    write(d, "nil.sl", "forall @a. @a == nil");
    let out = seqsl(d, &["valid", "nil.sl", "--witness", "counter.json"]);
    assert_eq!(code(&out), 1);
    assert!(d.join("counter.json").exists());
}

#[test]
fn word_equation_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "sat.eq", "@a == 1 ^ 2");
    let out = seqsl(d, &["we", "solve", "sat.eq"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("@a = 1 ^ 2"));

    write(d, "unsat.eq", "@a ^ 2 == 1 ^ @a");
    assert_eq!(code(&seqsl(d, &["we", "solve", "unsat.eq"])), 1);

    write(d, "conj.eq", "@a == 1 & @b == 2");
    let out = seqsl(d, &["we", "transform", "conj.eq"]);
    assert_eq!(code(&out), 0);
    let report = String::from_utf8_lossy(&out.stdout);
    // the pairing equation has one == and mentions both variables
    assert_eq!(report.matches("==").count(), 1, "{report}");
    assert!(report.contains("@a") && report.contains("@b"));
}

#[test]
fn minsky_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "m1.mm", "1: inc C1 goto 2\n2: halt\n");
    write(d, "loop.mm", "1: test C1 zero 1 dec 1\n2: halt\n");

    let out = seqsl(d, &["minsky", "run", "m1.mm"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("halted after 1 step"));

    assert_eq!(code(&seqsl(d, &["minsky", "run", "loop.mm", "--max-steps", "100"])), 2);

    assert_eq!(code(&seqsl(d, &["minsky", "validate", "m1.mm"])), 0);

    let out = seqsl(d, &["minsky", "encode", "m1.mm", "--classify", "--weak-scope"]);
    assert_eq!(code(&out), 0);
    let report = String::from_utf8_lossy(&out.stdout);
    assert!(report.contains("shape: Ax*Aa* ∩ Ax*Ex*Ea*"), "{report}");

    write(d, "bad.mm", "1: jump nowhere\n");
    assert_eq!(code(&seqsl(d, &["minsky", "encode", "bad.mm"])), 3);
}

#[test]
fn trace_prints_satisfying_choices() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "m.json", r#"{"stack":{"x":1,"y":2},"seq":{},"heap":{"1":[2],"2":[1]}}"#);
    write(d, "f.sl", "x |-> 2 * true");
    let out = seqsl(d, &["check", "m.json", "f.sl", "--trace"]);
    assert_eq!(code(&out), 0);
    let report = String::from_utf8_lossy(&out.stdout);
    assert!(report.contains("split"), "{report}");
}

#[test]
fn json_reports_are_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "empty.json", r#"{"stack":{},"seq":{},"heap":{}}"#);
    write(d, "emp.sl", "emp");
    let out = seqsl(d, &["check", "empty.json", "emp.sl", "--json"]);
    let v: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("json report parses");
    assert_eq!(v["verdict"], "true");
}
