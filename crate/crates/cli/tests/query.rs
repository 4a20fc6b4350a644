mod common;

use std::process::Command;

use common::{engine, text, Broken};
use semnav_cli::{commands, exit, BackendChoice};
use semnav_core::kb::reference;
use semnav_core::{Method, Reasoner, RelationalReasoner};

fn query(backend: BackendChoice, method: &str, inputs: &[&str]) -> (i32, String, String) {
    let inputs: Vec<String> = inputs.iter().map(|s| s.to_string()).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = commands::query(&engine(), backend, method, &inputs, &mut out, &mut err);
    (code, text(out), text(err))
}

#[test]
fn probable_location_of_soft_drink() {
    let (code, out, _) = query(BackendChoice::Relational, "probable_locations", &["soft_drink"]);
    assert_eq!(code, exit::OK);
    assert_eq!(out.trim(), "kitchen (via refrigerator)");
    let (code, out, _) = query(BackendChoice::Ontology, "probable_locations", &["Soft drink"]);
    assert_eq!(code, exit::OK);
    assert_eq!(out.trim(), "kitchen (via refrigerator)");
}

#[test]
fn unknown_room_is_a_reasoner_error() {
    let (code, out, err) = query(BackendChoice::Relational, "room_class_of", &["room9"]);
    assert_eq!(code, exit::REASONER);
    assert!(out.is_empty());
    assert!(err.contains("UnknownEntity"), "{err}");
}

#[test]
fn both_backends_agree_on_all_object_classes() {
    let (code, out, _) = query(BackendChoice::Both, "all_object_classes", &[]);
    assert_eq!(code, exit::OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    for line in &lines[..2] {
        let (_, names) = line.split_once(": ").unwrap();
        assert_eq!(names.split(", ").count(), 8, "{line}");
    }
    assert_eq!(lines[2], "EQUAL");
}

#[test]
fn both_backends_share_errors() {
    let (code, out, _) = query(BackendChoice::Both, "room_class_of", &["room9"]);
    assert_eq!(code, exit::REASONER);
    assert!(out.ends_with("EQUAL\n"));
}

#[test]
fn unknown_method_is_a_usage_error() {
    let (code, _, err) = query(BackendChoice::Relational, "teleport", &[]);
    assert_eq!(code, exit::LOAD);
    assert!(err.contains("teleport"));
}

#[test]
fn broken_backend_forces_differ() {
    let engine = engine();
    let broken = Broken(RelationalReasoner::new(&engine.kb));
    let reasoners: [&dyn Reasoner; 2] = [engine.relational.as_ref(), &broken];
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = commands::query_with(&reasoners, Method::AllObjectClasses, &[], &mut out, &mut err);
    assert_eq!(code, exit::DIFFER);
    assert!(text(out).ends_with("DIFFER\n"));

    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = commands::bench(
        &engine,
        &reasoners,
        reference::REFERENCE_CASES,
        1,
        None,
        &mut out,
        &mut err,
    );
    assert_eq!(code, exit::DIFFER);
    assert!(text(err).contains("all_object_classes"));
}

#[test]
fn bench_single_repetition_is_valid() {
    let engine = engine();
    let dir = tempfile::tempdir().unwrap();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = commands::bench(
        &engine,
        &engine.both(),
        reference::REFERENCE_CASES,
        1,
        Some(dir.path()),
        &mut out,
        &mut err,
    );
    assert_eq!(code, exit::OK, "{}", text(err));
    let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    assert_eq!(csv.lines().count(), 27);
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(4) == Some("1")));
    assert!(dir.path().join("bench.md").exists());
}

#[test]
fn bench_rejects_zero_repetitions() {
    let engine = engine();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = commands::bench(
        &engine,
        &engine.both(),
        reference::REFERENCE_CASES,
        0,
        None,
        &mut out,
        &mut err,
    );
    assert_eq!(code, exit::LOAD);
}

fn semnav(args: &[&str]) -> (i32, String, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_semnav"))
        .args(args)
        .env_remove("SEMNAV_LISTEN")
        .output()
        .expect("run semnav");
    (
        output.status.code().unwrap_or(-1),
        text(output.stdout),
        text(output.stderr),
    )
}

#[test]
fn binary_exit_codes() {
    let (code, out, _) = semnav(&["query", "probable_locations", "soft_drink"]);
    assert_eq!((code, out.trim()), (0, "kitchen (via refrigerator)"));
    assert_eq!(semnav(&["query", "room_class_of", "room9"]).0, 2);
    let (code, out, _) = semnav(&["--backend", "both", "query", "all_object_classes"]);
    assert_eq!(code, 0);
    assert!(out.contains("EQUAL"));
    assert_eq!(semnav(&["frobnicate"]).0, 1);
    assert_eq!(semnav(&["--help"]).0, 0);
    assert_eq!(semnav(&["--backend", "both", "repl"]).0, 1);
    assert_eq!(semnav(&["--backend", "ontology", "bench", "--reps", "1"]).0, 1);
    assert_eq!(
        semnav(&["--conceptual", "/nonexistent.skb", "query", "all_utilities"]).0,
        1
    );
}
