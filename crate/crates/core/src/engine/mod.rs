//! Resolution engine: unification, backtracking, builtins and runtime
//! qualification under either semantics.

mod bindings;
mod builtins;
mod machine;
pub mod write;

use std::fmt;

pub use bindings::{normalize_vars, rename, Bindings};
pub use builtins::error_term;

use crate::error::{EngineError, LoadError, SyntaxError};
use crate::expander::{expand_database, SemanticsFlag};
use crate::moduledb::{load_files, Database, LoaderNotice};
use crate::reader::{read_term, OperatorTable};
use crate::term::{Atom, Term, Var};
use machine::Machine;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Flags {
    pub semantics: SemanticsFlag,
    pub occurs_check: bool,
    /// Explicitly qualified calls to non-exported predicates raise a
    /// permission error instead of a warning.
    pub strict_scope: bool,
}

impl Flags {
    pub fn calling() -> Self {
        Flags::default()
    }

    pub fn lookup() -> Self {
        let mut f = Flags::default();
        f.semantics.colon_sets_calling_context = false;
        f
    }
}

/// Test-harness guards; all off by default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Limits {
    pub max_depth: Option<usize>,
    pub max_inferences: Option<u64>,
    pub max_solutions: Option<usize>,
}

/// The modules governing one call: where meta-arguments are qualified,
/// where the clauses live, and where unqualified lookups start.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecutionContext {
    pub calling: Atom,
    pub definition: Atom,
    pub lookup: Atom,
}

impl ExecutionContext {
    pub fn top_level() -> Self {
        let user = Atom::new("user");
        ExecutionContext { calling: user.clone(), definition: user.clone(), lookup: user }
    }
}

/// An answer: query variables with their fully dereferenced values.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub bindings: Vec<(String, Term)>,
}

impl Solution {
    pub fn get(&self, name: &str) -> Option<&Term> {
        self.bindings.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    /// Answer lines in `Var = Term` form, skipping variables left unbound.
    /// Values refer to other query variables by name.
    pub fn lines(&self) -> Vec<String> {
        self.bindings
            .iter()
            .filter(|(name, value)| !matches!(value, Term::Var(v) if *v.name == **name))
            .map(|(name, value)| {
                let text = write::write_term(value, write::WriteOptions { quoted: true, var_names: true });
                format!("{name} = {text}")
            })
            .collect()
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lines().join("\n"))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Stats {
    pub meta_calls: u64,
    pub inferences: u64,
}

pub struct Engine {
    db: Database,
    flags: Flags,
    limits: Limits,
    output: String,
    stats: Stats,
    warnings: Vec<String>,
}

impl Engine {
    pub fn new(db: Database, flags: Flags) -> Self {
        Engine { db, flags, limits: Limits::default(), output: String::new(), stats: Stats::default(), warnings: Vec::new() }
    }

    /// Loads sources in order and optionally expands meta-arguments at load time.
    pub fn from_sources<'a>(
        sources: impl IntoIterator<Item = (&'a str, &'a str)>,
        flags: Flags,
        expand: bool,
    ) -> Result<(Engine, Vec<LoaderNotice>), LoadError> {
        let mut db = Database::new();
        let notices = load_files(&mut db, sources)?;
        if expand {
            expand_database(&mut db);
        }
        Ok((Engine::new(db, flags), notices))
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn set_limits(&mut self, limits: Limits) {
        self.limits = limits;
    }

    pub fn flags(&self) -> &Flags {
        &self.flags
    }

    pub fn db(&self) -> &Database {
        &self.db
    }

    pub fn db_mut(&mut self) -> &mut Database {
        &mut self.db
    }

    pub fn into_db(self) -> Database {
        self.db
    }

    /// Everything written by `write/1` and friends since the last call.
    pub fn take_output(&mut self) -> String {
        std::mem::take(&mut self.output)
    }

    pub fn take_warnings(&mut self) -> Vec<String> {
        std::mem::take(&mut self.warnings)
    }

    /// Meta-calls executed by the most recent query.
    pub fn meta_call_count(&self) -> u64 {
        self.stats.meta_calls
    }

    pub fn inference_count(&self) -> u64 {
        self.stats.inferences
    }

    /// Parses `text` as a goal and solves it in module `user`.
    pub fn query(&mut self, text: &str) -> Result<Solutions<'_>, SyntaxError> {
        let (goal, count) = read_term(text, &OperatorTable::default())?;
        Ok(self.solve(&goal, count))
    }

    /// Solves `goal`, whose variable ids must lie in `0..var_count`.
    pub fn solve(&mut self, goal: &Term, var_count: usize) -> Solutions<'_> {
        let var_count = var_count.max(goal.max_var_id().map_or(0, |m| m + 1));
        let query_vars: Vec<Var> = goal.variables().into_iter().filter(|v| !v.name.starts_with('_')).collect();
        self.stats = Stats::default();
        let limits = self.limits;
        let machine =
            Machine::new(&mut self.db, &self.flags, limits, &mut self.output, &mut self.stats, &mut self.warnings, goal, var_count);
        Solutions { machine, query_vars, started: false, done: false, produced: 0, max_solutions: limits.max_solutions }
    }

    /// Collects every solution, stopping at the first error.
    pub fn solve_all(&mut self, text: &str) -> Result<Vec<Solution>, EngineError> {
        let solutions = self.query(text)?;
        solutions.collect()
    }

    /// The first solution, if any.
    pub fn solve_once(&mut self, text: &str) -> Result<Option<Solution>, EngineError> {
        let mut solutions = self.query(text)?;
        solutions.next().transpose()
    }
}

/// Lazy sequence of answers to one query.
pub struct Solutions<'e> {
    machine: Machine<'e>,
    query_vars: Vec<Var>,
    started: bool,
    done: bool,
    produced: usize,
    max_solutions: Option<usize>,
}

impl Solutions<'_> {
    /// Output written so far by this query.
    pub fn take_output(&mut self) -> String {
        std::mem::take(self.machine.output)
    }

    pub fn take_warnings(&mut self) -> Vec<String> {
        std::mem::take(self.machine.warnings)
    }
}

impl Iterator for Solutions<'_> {
    type Item = Result<Solution, EngineError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if self.max_solutions.is_some_and(|max| self.produced >= max) {
            self.done = true;
            return None;
        }
        if self.started && !self.machine.backtrack() {
            self.done = true;
            return None;
        }
        self.started = true;
        match self.machine.run() {
            Ok(true) => {
                self.produced += 1;
                let values: Vec<Term> = self.query_vars.iter().map(|v| self.machine.resolve(&Term::Var(v.clone()))).collect();
                let names = &self.query_vars;
                let bindings = names
                    .iter()
                    .zip(values)
                    .map(|(v, value)| {
                        let named = value.map_vars(&mut |x| {
                            let name = names.iter().find(|q| q.id == x.id).map_or("_", |q| &*q.name);
                            Term::var(name, x.id)
                        });
                        (v.name.to_string(), named)
                    })
                    .collect();
                Some(Ok(Solution { bindings }))
            }
            Ok(false) => {
                self.done = true;
                None
            }
            Err(ball) => {
                self.done = true;
                Some(Err(EngineError::Uncaught(ball)))
            }
        }
    }
}
