//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

mod common;

use std::cell::{Cell, RefCell};
use std::sync::Arc;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use common::*;
use modlog::bench::{bench, Variant};
use modlog::engine::write::to_canonical;
use modlog::engine::{Engine, Flags};
use modlog::expander::propagate_control;
use modlog::lint::{lint, LintOptions, Rule};
use modlog::moduledb::{load_files, Database};
use modlog::specializer::specialize;
use modlog::term::{Atom, Term};
use modlog::EngineError;

const TRANSCRIPT_LIMIT: Duration = Duration::from_secs(1);
const CONTROL_TREES: u32 = 250;
const CALL_N_CASES: u32 = 128;
const AGREEMENT_PAIRS: usize = 300;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type Program = Vec<(String, String)>;

fn main() {
    let criteria: [Criterion; 10] = [
        ("transcript fidelity", transcripts),
        ("semantics differential", semantics_differential),
        ("late binding", late_binding),
        ("control-construct equivalences", control_equivalences),
        ("builtin equivalences", builtin_equivalences),
        ("reflection", reflection),
        ("secure-definition lint", secure_lint),
        ("call/1-N", call_n),
        ("expansion agreement", expansion_agreement),
        ("specialization", specialization),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {}", i + 1, detail.replace('\n', " "));
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli(args: &[&str]) -> (i32, String) {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/");
    let argv: Vec<String> = std::iter::once("modlog".to_string()).chain(args.iter().map(|a| a.replace("@/", dir))).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = modlog::cli::run(argv, &mut &b""[..], &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

/// Fixed seed so every run checks the same cases.
fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn flags_for(calling: bool) -> Flags {
    if calling {
        Flags::calling()
    } else {
        Flags::lookup()
    }
}

fn multiset(engine: &mut Engine, goal: &str) -> Result<Vec<String>, String> {
    let r = answers(engine, goal);
    engine.take_output();
    r
}

fn transcripts() -> Outcome {
    let start = Instant::now();
    let cases = [
        ("@/corpus/client_v1.pl", "Calling: client:me(_N)\nMe = client\nyes\n"),
        ("@/corpus/client_v2.pl", "Calling: library:me(_N)\nMe = library\nyes\n"),
    ];
    for (client, golden) in cases {
        let (code, out) = cli(&["run", "@/corpus/library.pl", client, "-g", "client:test(Me)", "--semantics=calling"]);
        ensure(code == 0 && wildcard(&out) == golden, || format!("{client}: exit {code}, output {out:?}"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < TRANSCRIPT_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("2 goldens matched in {:.1} ms (limit 1 s)", elapsed.as_secs_f64() * 1e3))
}

fn semantics_differential() -> Outcome {
    let cases = [("calling", "Calling: library:me(_N)\nMe = library\nyes\n"), ("lookup", "Calling: client:me(_N)\nMe = client\nyes\n")];
    for (semantics, golden) in cases {
        let flag = format!("--semantics={semantics}");
        let (code, out) = cli(&["run", "@/corpus/library.pl", "@/corpus/client_v2.pl", "-g", "client:test(Me)", &flag]);
        ensure(code == 0 && wildcard(&out) == golden, || format!("{semantics}: exit {code}, output {out:?}"))?;
    }
    Ok("client v2 binds Me=library (calling) and Me=client (lookup)".into())
}

fn late_binding() -> Outcome {
    let (mut engine, notices) = Engine::from_sources([("client.pl", FICTITIOUS)], Flags::calling(), true).map_err(|e| e.to_string())?;
    ensure(notices.is_empty(), || format!("load notices: {notices:?}"))?;
    let mut db = Database::new();
    load_files(&mut db, [("client.pl", FICTITIOUS)]).map_err(|e| e.to_string())?;
    let diagnostics = lint(&db, &LintOptions::default());
    ensure(diagnostics.is_empty(), || format!("lint: {diagnostics:?}"))?;
    match engine.solve_all("client:test(X)") {
        Err(EngineError::Uncaught(ball)) => {
            let text = to_canonical(&ball);
            ensure(text.starts_with("error(existence_error(procedure,fictitious:predicate/1)"), || text.clone())?;
            Ok(format!("clean load, runtime {text}"))
        }
        other => Err(format!("expected an existence error, got {other:?}")),
    }
}

const CONTROL_PROGRAM: &[(&str, &str)] = &[
    ("user.pl", "probe(user).\npa(1).\npa(2).\n"),
    ("m1.pl", ":- module(m1, []).\nprobe(m1).\npa(10).\npa(11).\n"),
    ("m2.pl", ":- module(m2, []).\nprobe(m2).\npa(20).\n"),
];

fn var(id: usize) -> Term {
    Term::var(&format!("V{id}"), id)
}

fn control_tree() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        (0usize..3).prop_map(|v| Term::compound("probe", vec![var(v)])),
        (0usize..3).prop_map(|v| Term::compound("pa", vec![var(v)])),
        (0usize..3).prop_map(|v| Term::qualified(&Atom::new("m2"), Term::compound("probe", vec![var(v)]))),
        Just(Term::compound("probe", vec![Term::atom("m1")])),
        Just(Term::atom("true")),
        Just(Term::atom("fail")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        (prop::sample::select(&[",", ";", "->"][..]), inner.clone(), inner)
            .prop_map(|(op, a, b)| Term::Compound(Atom::new(op), Arc::from(vec![a, b])))
    })
}

fn solutions_of(engine: &mut Engine, goal: &Term) -> Result<Vec<String>, TestCaseError> {
    let result: Result<Vec<_>, EngineError> = engine.solve(goal, 3).collect();
    engine.take_warnings();
    let mut lines: Vec<String> =
        result.map_err(|e| TestCaseError::fail(format!("{}: {e}", to_canonical(goal))))?.iter().map(|s| s.lines().join(", ")).collect();
    lines.sort();
    Ok(lines)
}

fn control_equivalences() -> Outcome {
    let calling = RefCell::new(engine(CONTROL_PROGRAM, Flags::calling()));
    let lookup = RefCell::new(engine(CONTROL_PROGRAM, Flags::lookup()));
    let m1 = Atom::new("m1");
    let controls = Cell::new(0);
    let mut runner = runner(CONTROL_TREES);
    runner
        .run(&control_tree(), |g| {
            let qualified = Term::qualified(&m1, g.clone());
            let direct = solutions_of(&mut calling.borrow_mut(), &qualified)?;
            let distributed = solutions_of(&mut calling.borrow_mut(), &propagate_control(&m1, &g))?;
            prop_assert_eq!(&direct, &distributed, "calling: {}", to_canonical(&g));
            // A bare leaf under lookup semantics resolves in m1; only control
            // constructs hand their arguments back to the caller.
            if [",", ";", "->"].iter().any(|op| g.is_functor(op, 2)) {
                let lookup_qualified = solutions_of(&mut lookup.borrow_mut(), &qualified)?;
                let in_caller = solutions_of(&mut lookup.borrow_mut(), &g)?;
                prop_assert_eq!(&lookup_qualified, &in_caller, "lookup: {}", to_canonical(&g));
                controls.set(controls.get() + 1);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let mut probe = engine(CONTROL_PROGRAM, Flags::lookup());
    let identity = multiset(&mut probe, "m1:(probe(A), probe(B))")?;
    ensure(identity == ["A = user, B = user"], || format!("lookup probe identity: {identity:?}"))?;
    Ok(format!("{CONTROL_TREES} trees under calling, {} control-rooted trees under lookup; lookup probes answer from user", controls.get()))
}

fn builtin_equivalences() -> Outcome {
    let src = ":- module(m, []).\ng(1).\ng(2).\n";
    let mut e = engine(&[("m.pl", src)], Flags::calling());
    let left = multiset(&mut e, "m:findall(T, g(T), L)")?;
    let right = multiset(&mut e, "findall(T, m:g(T), L)")?;
    ensure(left == right && left == ["L = [1,2]"], || format!("{left:?} vs {right:?}"))?;
    let asserted = multiset(&mut e, "m:assertz(f(1))")?;
    let provable = multiset(&mut e, "m:f(1)")?;
    ensure(asserted == [""] && provable == [""], || format!("assertz {asserted:?}, m:f(1) {provable:?}"))?;
    Ok("findall solutions identical, m:assertz(f(1)) makes m:f(1) provable".into())
}

fn reflection() -> Outcome {
    let cases: [(&str, &str, Flags, [&str; 2]); 4] = [
        ("strip_module", STRIP_M, Flags::calling(), ["user", "m"]),
        ("qualifier pattern", PATTERN_M, Flags::calling(), ["user", "m"]),
        ("tool (calling)", TOOL_M, Flags::calling(), ["user", "user"]),
        ("tool (lookup)", TOOL_M, Flags::lookup(), ["user", "user"]),
    ];
    for (name, src, flags, expected) in cases {
        let mut e = engine(&[("m.pl", src)], flags);
        for (goal, want) in ["mp(true, Caller)", "m:mp(true, Caller)"].iter().zip(expected) {
            let got = multiset(&mut e, goal)?;
            ensure(got == [format!("Caller = {want}")], || format!("{name}: {goal} gave {got:?}"))?;
        }
    }
    Ok("strip_module and qualifier pattern give user/m; tool gives user/user under both semantics".into())
}

fn secure_lint() -> Outcome {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/lint");
    let mut fixtures: Vec<_> = std::fs::read_dir(&dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pl"))
        .collect();
    fixtures.sort();
    ensure(fixtures.len() >= 12, || format!("only {} fixtures", fixtures.len()))?;
    let mut sr_fixtures = 0;
    for path in &fixtures {
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let expected = std::fs::read_to_string(path.with_extension("expected")).map_err(|e| format!("{name}: {e}"))?;
        let mut db = Database::new();
        load_files(&mut db, [(name.as_str(), text.as_str())]).map_err(|e| format!("{name}: {e}"))?;
        let got: String = lint(&db, &LintOptions::default()).iter().map(|d| d.record() + "\n").collect();
        ensure(got == expected, || format!("{name}: got {got:?}, expected {expected:?}"))?;
        if name.starts_with("sr") {
            sr_fixtures += 1;
        }
    }
    let clean: [&[(&str, &str)]; 5] = [
        &[("library.pl", LIBRARY), ("client.pl", CLIENT_V1)],
        &[("library.pl", LIBRARY), ("client.pl", CLIENT_V2)],
        &[("library.pl", LIBRARY), ("client.pl", CLIENT_V3)],
        &[("m.pl", STRIP_M)],
        &[("m.pl", PATTERN_M)],
    ];
    for sources in clean {
        let mut db = Database::new();
        load_files(&mut db, sources.iter().copied()).map_err(|e| e.to_string())?;
        let sr: Vec<_> =
            lint(&db, &LintOptions::default()).into_iter().filter(|d| matches!(d.rule, Rule::SR1 | Rule::SR2 | Rule::SR3)).collect();
        ensure(sr.is_empty(), || format!("{}: {sr:?}", sources[sources.len() - 1].0))?;
    }
    Ok(format!("{} fixtures byte-exact ({sr_fixtures} SR), 5 clean modules with zero SR diagnostics", fixtures.len()))
}

const UNIV: &str = "append([], L, L).
append([H|T], L, [H|R]) :- append(T, L, R).
univ_call(C, Extra) :- C =.. L0, append(L0, Extra, L), G =.. L, call(G).
f(a, 1, x). f(a, 2, y). f(b, 1, z).
g(1). g(2).
h(a, b, c, d).
";

fn call_n() -> Outcome {
    let mut flags = Flags::calling();
    flags.semantics.max_call_n = 8;
    let mut e = engine(&[], flags);
    match e.solve_all("call(p, 1, 2, 3, 4, 5, 6, 7, 8)") {
        Err(EngineError::Uncaught(ball)) if to_canonical(&ball) == "error(representation_error(max_call_n_exceeded),call/9)" => {}
        other => return Err(format!("call/9 with max 8: {other:?}")),
    }
    let mut e = engine(&[("p.pl", "p(_, _, _, _, _, _, _, _, _, _, _).\n")], Flags::calling());
    let twelve = multiset(&mut e, "call(p, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11)")?;
    ensure(twelve == [""], || format!("call/12: {twelve:?}"))?;

    let e = RefCell::new(engine(&[("univ.pl", UNIV)], Flags::calling()));
    let closures = prop::sample::select(&["f", "f(a)", "f(b)", "f(a, 1)", "g", "h(a)", "h(a, b)", "h(a, b, c)", "f(A)", "h(A, b)"][..]);
    let extras = prop::collection::vec(prop::sample::select(&["X", "Y", "Z", "a", "1", "x", "b", "A"][..]), 0..4);
    let mut runner = runner(CALL_N_CASES);
    runner
        .run(&(closures, extras), |(closure, extra)| {
            let call = if extra.is_empty() { format!("call({closure})") } else { format!("call({closure}, {})", extra.join(", ")) };
            let univ = format!("univ_call({closure}, [{}])", extra.join(", "));
            let mut e = e.borrow_mut();
            prop_assert_eq!(multiset(&mut e, &call), multiset(&mut e, &univ), "{}", call);
            Ok(())
        })
        .map_err(|err| err.to_string())?;
    Ok(format!("call/9 rejected at max 8, call/12 succeeds at 255, {CALL_N_CASES} call/N vs =.. cases agree"))
}

const META_LIBRARY: &str = ":- module(library, [my_call/1, map1/2, twice/2, each/3]).
:- meta_predicate(my_call(0)).
my_call(G) :- call(G).
:- meta_predicate(map1(1, ?)).
map1(_, []).
map1(C, [X|Xs]) :- call(C, X), map1(C, Xs).
:- meta_predicate(twice(0, ?)).
twice(G, done) :- call(G), call(G).
:- meta_predicate(each(2, ?, ?)).
each(_, [], []).
each(C, [X|Xs], [Y|Ys]) :- call(C, X, Y), each(C, Xs, Ys).
";

const AGREEMENT_GOALS: &[&str] = &[
    "my_call(p(X))",
    "my_call(library:p(X))",
    "my_call((p(X), q(Y)))",
    "map1(p, [a, b])",
    "twice(my_call(q(Y)), _)",
    "each(r, [a], L)",
    "library:my_call(p(X))",
    "findall(X, my_call(p(X)), L)",
    "\\+ my_call(q(a))",
    "my_call(G)",
    "my_call((p(X) -> q(X) ; r(X, Y)))",
    "library:map1(client:p, [a])",
];

fn generated_client(body: &str) -> String {
    format!(":- module(client, [t/3]).\n:- use_module(library).\nt(X, Y, L) :- G = true, {body}.\np(a). p(b). q(a). r(a, b).\n")
}

/// Bodies of one or two goals from `goals`, in a fixed order.
fn bodies(goals: &[&str]) -> Vec<String> {
    let mut out: Vec<String> = goals.iter().map(|g| g.to_string()).collect();
    for a in goals {
        for b in goals {
            out.push(format!("{a}, {b}"));
        }
    }
    out
}

fn expansion_agreement() -> Outcome {
    let mut programs: Vec<(Program, Vec<&str>)> = vec![
        (vec![("library.pl".into(), LIBRARY.into()), ("client.pl".into(), CLIENT_V1.into())], vec!["client:test(Me)"]),
        (vec![("library.pl".into(), LIBRARY.into()), ("client.pl".into(), CLIENT_V2.into())], vec!["client:test(Me)"]),
        (vec![("library.pl".into(), LIBRARY.into()), ("client.pl".into(), CLIENT_V3.into())], vec!["client:test(Me)"]),
        (vec![("m.pl".into(), STRIP_M.into())], vec!["mp(true, C)", "m:mp(true, C)"]),
        (vec![("m.pl".into(), PATTERN_M.into())], vec!["mp(true, C)", "m:mp(true, C)"]),
        (vec![("m.pl".into(), TOOL_M.into())], vec!["mp(true, C)", "m:mp(true, C)"]),
        (vec![("tm.pl".into(), TRANSPARENT.into())], vec!["tm:whereami(M)", "tm:run(true, M)"]),
        (
            CONTROL_PROGRAM.iter().map(|(f, s)| (f.to_string(), s.to_string())).collect(),
            vec!["m1:(probe(A), pa(B))", "m1:(probe(A) ; m2:probe(A))"],
        ),
    ];
    for body in bodies(AGREEMENT_GOALS) {
        programs.push((
            vec![("library.pl".into(), META_LIBRARY.into()), ("client.pl".into(), generated_client(&body))],
            vec!["client:t(X, Y, L)"],
        ));
    }
    let mut pairs = 0;
    for (sources, queries) in &programs {
        for calling in [true, false] {
            let srcs = sources.iter().map(|(f, s)| (f.as_str(), s.as_str()));
            let mut plain = Engine::from_sources(srcs.clone(), flags_for(calling), false).map_err(|e| e.to_string())?.0;
            let mut expanded = Engine::from_sources(srcs, flags_for(calling), true).map_err(|e| e.to_string())?.0;
            for q in queries {
                let a = multiset(&mut plain, q).map(|v| v.iter().map(|s| wildcard(s)).collect::<Vec<_>>());
                let b = multiset(&mut expanded, q).map(|v| v.iter().map(|s| wildcard(s)).collect::<Vec<_>>());
                ensure(a == b, || format!("{q} with calling={calling} on {}: {a:?} vs {b:?}", sources[sources.len() - 1].1))?;
                pairs += 1;
            }
        }
    }
    ensure(pairs >= AGREEMENT_PAIRS, || format!("only {pairs} pairs"))?;
    Ok(format!("{pairs} program/query pairs agree under both semantics"))
}

const SPECIALIZABLE_GOALS: &[&str] =
    &["my_call(p(X))", "my_call(library:p(X))", "map1(p, [a, b])", "twice(my_call(q(Y)), _)", "each(r, [a], L)", "library:my_call(p(X))"];

fn specialization() -> Outcome {
    let mut programs: Vec<(Program, &str)> = vec![
        (vec![("library.pl".into(), LIBRARY.into()), ("client.pl".into(), CLIENT_V1.into())], "client:test(Me)"),
        (vec![("library.pl".into(), LIBRARY.into()), ("client.pl".into(), CLIENT_V2.into())], "client:test(Me)"),
        (vec![("library.pl".into(), LIBRARY.into()), ("client.pl".into(), CLIENT_V3.into())], "client:test(Me)"),
    ];
    for body in bodies(SPECIALIZABLE_GOALS) {
        programs
            .push((vec![("library.pl".into(), META_LIBRARY.into()), ("client.pl".into(), generated_client(&body))], "client:t(X, Y, L)"));
    }
    let mut runs = 0;
    let mut sites = 0;
    for (sources, query) in &programs {
        for calling in [true, false] {
            let flags = flags_for(calling);
            let mut db = Database::new();
            load_files(&mut db, sources.iter().map(|(f, s)| (f.as_str(), s.as_str()))).map_err(|e| e.to_string())?;
            let (spec, report) = specialize(&db, flags.semantics).map_err(|e| e.to_string())?;
            let what = || format!("{query} calling={calling} on {}", sources[sources.len() - 1].1);
            ensure(!report.sites.is_empty(), || format!("no specialized sites: {}", what()))?;
            sites += report.sites.len();
            let mut original = Engine::new(db, flags);
            let mut specialized = Engine::new(spec, flags);
            let a = multiset(&mut original, query);
            let b = multiset(&mut specialized, query);
            ensure(a == b, || format!("{}: {a:?} vs {b:?}", what()))?;
            ensure(specialized.meta_call_count() == 0, || format!("{}: {} meta-calls", what(), specialized.meta_call_count()))?;
            runs += 1;
        }
    }
    let report = bench([("library.pl", LIBRARY), ("client.pl", CLIENT_V1)], "client:test(Me)", 50, &Variant::ALL, Flags::calling())
        .map_err(|e| e.to_string())?;
    ensure(report.rows.len() == 4 && report.to_string().lines().count() == 5, || format!("bench table:\n{report}"))?;
    print!("{report}");
    Ok(format!("{runs} runs over {sites} sites preserve solutions with 0 meta-calls; 4-variant bench table above"))
}
