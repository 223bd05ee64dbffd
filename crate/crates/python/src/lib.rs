//! Python bindings: an `Engine` class plus `lint`, `expand`, `specialize`
//! and `bench` over in-memory sources.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use modlog::bench::Variant;
use modlog::engine::write::{format_clause, to_canonical};
use modlog::engine::Flags;
use modlog::expander::expand_database;
use modlog::lint::LintOptions;
use modlog::moduledb::{load_files, render_program, Database};
use modlog::EngineError;

create_exception!(pymodlog, PrologError, PyException, "An uncaught Prolog exception; `args[0]` is the ball in canonical syntax.");
create_exception!(pymodlog, LoadError, PyException, "A program failed to parse or load.");

type Sources = Vec<(String, String)>;
type BenchRow = (String, f64, usize, usize, u64);

fn flags(semantics: &str, max_call_n: usize, occurs_check: bool, strict_scope: bool) -> PyResult<Flags> {
    let mut f = match semantics {
        "calling" => Flags::calling(),
        "lookup" => Flags::lookup(),
        other => return Err(PyValueError::new_err(format!("semantics must be 'calling' or 'lookup', not {other:?}"))),
    };
    f.semantics.max_call_n = max_call_n;
    f.occurs_check = occurs_check;
    f.strict_scope = strict_scope;
    Ok(f)
}

fn load(sources: &Sources) -> PyResult<Database> {
    let mut db = Database::new();
    load_files(&mut db, sources.iter().map(|(f, t)| (f.as_str(), t.as_str()))).map_err(|e| LoadError::new_err(e.to_string()))?;
    Ok(db)
}

fn engine_error(e: EngineError) -> PyErr {
    match e {
        EngineError::Uncaught(ball) => PrologError::new_err(to_canonical(&ball)),
        EngineError::Syntax(s) => PyValueError::new_err(s.to_string()),
        EngineError::Load(l) => LoadError::new_err(l.to_string()),
    }
}

fn solution_dict<'py>(py: Python<'py>, s: &modlog::Solution) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (name, value) in &s.bindings {
        d.set_item(name, to_canonical(value))?;
    }
    Ok(d)
}

/// A loaded program with a query interface.
///
/// `sources` is a list of `(file_name, text)` pairs loaded in order.
#[pyclass(unsendable)]
struct Engine {
    inner: modlog::Engine,
    notices: Vec<String>,
}

#[pymethods]
impl Engine {
    #[new]
    #[pyo3(signature = (sources, semantics = "calling", expand = true, max_call_n = 255, occurs_check = false, strict_scope = false))]
    fn new(sources: Sources, semantics: &str, expand: bool, max_call_n: usize, occurs_check: bool, strict_scope: bool) -> PyResult<Self> {
        let flags = flags(semantics, max_call_n, occurs_check, strict_scope)?;
        let (inner, notices) = modlog::Engine::from_sources(sources.iter().map(|(f, t)| (f.as_str(), t.as_str())), flags, expand)
            .map_err(|e| LoadError::new_err(e.to_string()))?;
        Ok(Engine { inner, notices: notices.iter().map(|n| n.to_string()).collect() })
    }

    /// All solutions of `goal`, each a dict from variable name to its value
    /// in canonical syntax.
    fn query<'py>(&mut self, py: Python<'py>, goal: &str) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let solutions = self.inner.solve_all(goal).map_err(engine_error)?;
        solutions.iter().map(|s| solution_dict(py, s)).collect()
    }

    /// The first solution, or `None`.
    fn once<'py>(&mut self, py: Python<'py>, goal: &str) -> PyResult<Option<Bound<'py, PyDict>>> {
        let s = self.inner.solve_once(goal).map_err(engine_error)?;
        s.map(|s| solution_dict(py, &s)).transpose()
    }

    /// Text written by the program since the last call.
    fn take_output(&mut self) -> String {
        self.inner.take_output()
    }

    fn take_warnings(&mut self) -> Vec<String> {
        self.inner.take_warnings()
    }

    #[getter]
    fn notices(&self) -> Vec<String> {
        self.notices.clone()
    }

    /// Meta-calls executed by the most recent query.
    #[getter]
    fn meta_call_count(&self) -> u64 {
        self.inner.meta_call_count()
    }

    #[getter]
    fn semantics(&self) -> &'static str {
        if self.inner.flags().semantics.colon_sets_calling_context {
            "calling"
        } else {
            "lookup"
        }
    }
}

#[pyclass(frozen, get_all)]
struct Diagnostic {
    rule: String,
    severity: String,
    file: String,
    line: usize,
    column: usize,
    message: String,
    module: String,
    predicate: String,
    record: String,
}

#[pymethods]
impl Diagnostic {
    fn __repr__(&self) -> String {
        format!("Diagnostic({:?})", self.record)
    }
}

#[pyfunction]
#[pyo3(signature = (sources, portability_ceiling = 8))]
fn lint(sources: Sources, portability_ceiling: usize) -> PyResult<Vec<Diagnostic>> {
    let db = load(&sources)?;
    let opts = LintOptions { portability_ceiling };
    Ok(modlog::lint::lint(&db, &opts)
        .into_iter()
        .map(|d| Diagnostic {
            rule: d.rule.to_string(),
            severity: d.severity.to_string(),
            file: d.location.file.to_string(),
            line: d.location.line,
            column: d.location.column,
            message: d.message.clone(),
            module: d.module.to_string(),
            predicate: d.predicate.to_string(),
            record: d.record(),
        })
        .collect())
}

/// Expanded clauses, one per line.
#[pyfunction]
fn expand(sources: Sources) -> PyResult<Vec<String>> {
    let mut db = load(&sources)?;
    expand_database(&mut db);
    Ok(db.all_clauses().map(|(_, _, c)| format_clause(&c.to_term())).collect())
}

/// Returns the specialized program text and the notes about skipped sites.
#[pyfunction]
#[pyo3(signature = (sources, semantics = "calling"))]
fn specialize(sources: Sources, semantics: &str) -> PyResult<(String, Vec<String>)> {
    let db = load(&sources)?;
    let flags = flags(semantics, 255, false, false)?;
    let (spec, report) = modlog::specializer::specialize(&db, flags.semantics).map_err(|e| LoadError::new_err(e.to_string()))?;
    Ok((render_program(&spec), report.notes.iter().map(|n| n.to_string()).collect()))
}

/// Per-variant rows `(variant, median_us, reps, solutions, meta_calls)`.
#[pyfunction]
#[pyo3(name = "bench", signature = (sources, goal, reps = 100, variants = None, semantics = "calling"))]
fn run_bench(sources: Sources, goal: &str, reps: usize, variants: Option<Vec<String>>, semantics: &str) -> PyResult<Vec<BenchRow>> {
    let variants = match variants {
        None => Variant::ALL.to_vec(),
        Some(names) => {
            names.iter().map(|n| n.parse::<Variant>()).collect::<Result<_, _>>().map_err(|e| PyValueError::new_err(e.to_string()))?
        }
    };
    let flags = flags(semantics, 255, false, false)?;
    let report =
        modlog::bench::bench(sources.iter().map(|(f, t)| (f.as_str(), t.as_str())), goal, reps, &variants, flags).map_err(|e| match e {
            modlog::bench::BenchError::Load(l) => LoadError::new_err(l.to_string()),
            modlog::bench::BenchError::Query { error, .. } => engine_error(error),
        })?;
    Ok(report
        .rows
        .iter()
        .map(|r| (r.variant.name().to_string(), r.median.as_secs_f64() * 1e6, r.reps, r.solutions, r.meta_calls))
        .collect())
}

#[pymodule]
fn pymodlog(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Engine>()?;
    m.add_class::<Diagnostic>()?;
    m.add_function(wrap_pyfunction!(lint, m)?)?;
    m.add_function(wrap_pyfunction!(expand, m)?)?;
    m.add_function(wrap_pyfunction!(specialize, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    m.add("PrologError", m.py().get_type::<PrologError>())?;
    m.add("LoadError", m.py().get_type::<LoadError>())?;
    Ok(())
}
