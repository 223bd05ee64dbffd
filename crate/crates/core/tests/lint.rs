mod common;

use std::fs;
use std::path::Path;

use common::*;
use modlog::engine::{Engine, Flags};
use modlog::lint::{lint, Diagnostic, LintOptions, Rule};
use modlog::moduledb::{load_files, Database};

fn lint_sources(sources: &[(&str, &str)]) -> Vec<Diagnostic> {
    let mut db = Database::new();
    load_files(&mut db, sources.iter().copied()).expect("fixture loads");
    lint(&db, &LintOptions::default())
}

fn records(sources: &[(&str, &str)]) -> String {
    lint_sources(sources).iter().map(|d| d.record() + "\n").collect()
}

#[test]
fn fixtures_match_expected_records() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/lint");
    let mut names: Vec<String> =
        fs::read_dir(&dir).unwrap().filter_map(|e| e.ok()?.file_name().into_string().ok()).filter(|n| n.ends_with(".pl")).collect();
    names.sort();
    assert!(names.len() >= 12, "only {} fixtures", names.len());
    let mut failures = Vec::new();
    for name in &names {
        let text = fs::read_to_string(dir.join(name)).unwrap();
        let expected = fs::read_to_string(dir.join(name.replace(".pl", ".expected"))).unwrap();
        let got = records(&[(name, &text)]);
        if got != expected {
            failures.push(format!("{name}:\n--- expected\n{expected}--- got\n{got}"));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn example_modules_have_no_sr_diagnostics() {
    let clean: &[&[(&str, &str)]] = &[
        &[("library.pl", LIBRARY), ("client.pl", CLIENT_V1)],
        &[("library.pl", LIBRARY), ("client.pl", CLIENT_V2)],
        &[("library.pl", LIBRARY), ("client.pl", CLIENT_V3)],
        &[("client.pl", FICTITIOUS)],
        &[("m.pl", STRIP_M)],
        &[("m.pl", PATTERN_M)],
    ];
    for sources in clean {
        assert_eq!(records(sources), "", "{:?}", sources.iter().map(|s| s.0).collect::<Vec<_>>());
    }
}

#[test]
fn transparent_and_tool_modules_yield_only_d1() {
    assert_eq!(
        records(&[("m.pl", TOOL_M)]),
        "m.pl:4:1 D1 warning mp/2 is a tool interface: no template, cross-reference and closure checking unavailable\n"
    );
    let d = lint_sources(&[("tm.pl", TRANSPARENT)]);
    assert_eq!(d.len(), 2);
    assert!(d.iter().all(|d| d.rule == Rule::D1));
}

#[test]
fn lint_is_deterministic() {
    let text = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/lint/sr3_stray.pl")).unwrap();
    let a = lint_sources(&[("a.pl", &text)]);
    let b = lint_sources(&[("a.pl", &text)]);
    assert_eq!(a, b);
}

#[test]
fn portability_ceiling_is_configurable() {
    let src = "q :- call(f, 1, 2).\nf(_, _).\n";
    let mut db = Database::new();
    load_files(&mut db, [("c.pl", src)]).unwrap();
    assert!(lint(&db, &LintOptions::default()).is_empty());
    let out = lint(&db, &LintOptions { portability_ceiling: 2 });
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].rule, Rule::P1);
}

// Runtime counterparts: each flagged definition misbehaves when run.

fn run_error(sources: &[(&str, &str)], goal: &str) -> String {
    let mut e = Engine::from_sources(sources.iter().copied(), Flags::calling(), false).unwrap().0;
    match e.solve_all(goal) {
        Err(modlog::EngineError::Uncaught(ball)) => modlog::engine::write::to_canonical(&ball),
        other => format!("{other:?}"),
    }
}

fn fixture(name: &str) -> String {
    fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/lint").join(name)).unwrap()
}

#[test]
fn sr1_runtime_calls_unintended_clause() {
    // the argument arrives as `user:foo`, so the `my_call(foo)` clause never matches
    let text = fixture("sr1_nonvar.pl");
    let mut e =
        Engine::from_sources([("f.pl", text.as_str()), ("u.pl", "foo :- write(called_foo).\n")], Flags::calling(), false).unwrap().0;
    assert!(e.solve_once("my_call(foo)").unwrap().is_some());
    assert_eq!(e.take_output(), "called_foo");
}

#[test]
fn sr3_runtime_errors() {
    let bare = fixture("sr3_bare.pl");
    let with_pred = format!("{bare}\nok(_).\n");
    assert_eq!(run_error(&[("b.pl", &with_pred)], "apply_to(ok, X)"), "error(existence_error(procedure,user:ok/0),user:ok/0)");
    let arity = fixture("sr3_arity.pl");
    let with_pred = format!("{arity}\nok2(_, _).\n");
    assert_eq!(run_error(&[("a.pl", &with_pred)], "apply2(ok2, 1)"), "error(existence_error(procedure,user:ok2/1),user:ok2/1)");
}

#[test]
fn sr2_runtime_context_leak() {
    let text = fixture("sr2_unresolved.pl");
    let client = ":- module(c, []).\n:- use_module(lib, [run/1]).\nclient_only(_).\ngo :- run(true).\n";
    assert_eq!(
        run_error(&[("lib.pl", &text), ("c.pl", client)], "c:go"),
        "error(existence_error(procedure,lib:client_only/1),lib:client_only/1)"
    );
}
