"""Smoke test for the pymodlog extension.

Build first with `cargo build -p modlog-py`, then run
`python3 python/smoke_test.py` (or under pytest).
Set PYMODLOG_LIB to point at a different build of the shared library.
"""

import importlib.util
import os
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[1]
CORPUS = ROOT / "crates" / "core" / "tests" / "corpus"


def load_extension():
    lib = os.environ.get("PYMODLOG_LIB")
    if lib is None:
        candidates = [ROOT / "target" / profile / "libpymodlog.so" for profile in ("debug", "release")]
        found = [c for c in candidates if c.exists()]
        if not found:
            raise RuntimeError("libpymodlog.so not found; run `cargo build -p modlog-py` first")
        lib = max(found, key=lambda p: p.stat().st_mtime)
    target = pathlib.Path(tempfile.mkdtemp()) / "pymodlog.so"
    shutil.copy(lib, target)
    spec = importlib.util.spec_from_file_location("pymodlog", target)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


pm = load_extension()


def sources(*names):
    return [(name, (CORPUS / name).read_text()) for name in names]


def test_transcripts():
    e = pm.Engine(sources("library.pl", "client_v1.pl"))
    assert e.query("client:test(Me)") == [{"Me": "client"}]
    assert e.take_output().startswith("Calling: client:me(_")

    e = pm.Engine(sources("library.pl", "client_v2.pl"), semantics="calling")
    assert e.once("client:test(Me)") == {"Me": "library"}

    e = pm.Engine(sources("library.pl", "client_v2.pl"), semantics="lookup")
    assert e.semantics == "lookup"
    assert e.once("client:test(Me)") == {"Me": "client"}


def test_errors():
    e = pm.Engine(sources("fictitious.pl"))
    try:
        e.query("client:test(X)")
    except pm.PrologError as err:
        assert "existence_error(procedure,fictitious:predicate/1)" in str(err)
    else:
        raise AssertionError("expected PrologError")

    try:
        pm.Engine([("bad.pl", "p(.\n")])
    except pm.LoadError:
        pass
    else:
        raise AssertionError("expected LoadError")

    try:
        pm.Engine([], semantics="both")
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")


def test_reflection():
    for src in ("strip_m.pl", "pattern_m.pl"):
        e = pm.Engine(sources(src))
        assert e.once("mp(true, C)") == {"C": "user"}
        assert e.once("m:mp(true, C)") == {"C": "m"}
    e = pm.Engine(sources("tool_m.pl"))
    assert e.once("m:mp(true, C)") == {"C": "user"}


def test_lint():
    bad = ":- meta_predicate(apply_to(1, ?)).\napply_to(C, X) :-\n    call(C),\n    X = done.\n"
    diags = pm.lint([("bad.pl", bad)])
    assert [d.rule for d in diags] == ["SR3"]
    assert diags[0].severity == "error"
    assert diags[0].record.startswith("bad.pl:2:1 SR3 error")
    assert pm.lint(sources("library.pl", "client_v1.pl")) == []


def test_expand_and_specialize():
    clauses = pm.expand(sources("library.pl", "client_v1.pl"))
    assert "test(Me) :- my_call(client:me(Me))." in clauses

    program, notes = pm.specialize(sources("library.pl", "client_v1.pl"))
    assert "test(Me) :- my_call__spec1(Me)." in program
    assert notes == []

    e = pm.Engine([("spec.pl", program)], expand=False)
    assert e.once("client:test(Me)") == {"Me": "client"}
    assert e.meta_call_count == 0


def test_bench():
    rows = pm.bench(sources("library.pl", "client_v1.pl"), "client:test(Me)", reps=5)
    assert [r[0] for r in rows] == ["runtime-propagation", "expanded", "specialized", "univ"]
    assert all(r[3] == 1 for r in rows)
    assert rows[2][4] == 0


if __name__ == "__main__":
    tests = [(name, fn) for name, fn in sorted(globals().items()) if name.startswith("test_")]
    for name, fn in tests:
        fn()
        print(f"ok {name}")
    print(f"{len(tests)} passed")
    sys.exit(0)
