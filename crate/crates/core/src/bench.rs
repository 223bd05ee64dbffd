//! Timing of one query across four ways of running meta-calls.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::engine::{Engine, Flags};
use crate::error::{EngineError, LoadError};
use crate::expander::expand_database;
use crate::moduledb::{load_files, Clause, Database, LoadOptions};
use crate::specializer::specialize;
use crate::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Qualification of meta-arguments happens when they are called.
    RuntimePropagation,
    /// Meta-arguments are qualified at load time.
    Expanded,
    /// Call sites with known meta-arguments use auxiliary predicates.
    Specialized,
    /// `call/N` for `N >= 2` goes through `=../2` and list append.
    Univ,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::RuntimePropagation, Variant::Expanded, Variant::Specialized, Variant::Univ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::RuntimePropagation => "runtime-propagation",
            Variant::Expanded => "expanded",
            Variant::Specialized => "specialized",
            Variant::Univ => "univ",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown bench variant `{0}` (expected runtime-propagation, expanded, specialized or univ)")]
pub struct UnknownVariant(pub String);

impl FromStr for Variant {
    type Err = UnknownVariant;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| UnknownVariant(s.to_string()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{variant}: {error}")]
    Query { variant: Variant, error: EngineError },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchRow {
    pub variant: Variant,
    pub median: Duration,
    pub reps: usize,
    pub solutions: usize,
    pub meta_calls: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows.is_empty() {
            return Ok(());
        }
        writeln!(f, "{:<20} {:>12} {:>8} {:>10} {:>10}", "variant", "median_us", "reps", "solutions", "meta_calls")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<20} {:>12.1} {:>8} {:>10} {:>10}",
                r.variant.name(),
                r.median.as_secs_f64() * 1e6,
                r.reps,
                r.solutions,
                r.meta_calls
            )?;
        }
        Ok(())
    }
}

/// Builds the database for one variant from an unexpanded load.
pub fn prepare(db: &Database, variant: Variant, flags: Flags) -> Result<Database, LoadError> {
    match variant {
        Variant::RuntimePropagation => Ok(db.clone()),
        Variant::Expanded => {
            let mut db = db.clone();
            expand_database(&mut db);
            Ok(db)
        }
        Variant::Specialized => Ok(specialize(db, flags.semantics)?.0),
        Variant::Univ => univ_database(db),
    }
}

const UNIV_HELPERS: &str = "'$add_args'(M:C, As, M:G) :- !, '$add_args'(C, As, G).
'$add_args'(C, As, G) :- C =.. L0, '$append'(L0, As, L), G =.. L.
'$append'([], L, L).
'$append'([H|T], L, [H|R]) :- '$append'(T, L, R).
";

/// Rewrites every `call(C, A1, ..., An)` goal into
/// `user:'$add_args'(C, [A1, ..., An], G), call(G)`.
pub fn univ_database(db: &Database) -> Result<Database, LoadError> {
    let mut out = db.clone();
    let mut updates = Vec::new();
    for module in db.modules() {
        for (ind, pred) in &module.predicates {
            let clauses: Vec<Clause> = pred
                .clauses
                .iter()
                .map(|c| {
                    let mut next = c.var_count;
                    let body = univ_goal(&c.body, &mut next);
                    Clause { body, var_count: next, ..c.clone() }
                })
                .collect();
            if clauses[..] != pred.clauses[..] {
                updates.push((module.name.clone(), ind.clone(), clauses));
            }
        }
    }
    for (module, ind, clauses) in updates {
        *out.predicate_mut(&module, &ind).expect("predicate exists").clauses_mut() = clauses;
    }
    out.load_source(UNIV_HELPERS, "<univ>", LoadOptions { defer_validation: true })?;
    Ok(out)
}

fn univ_goal(goal: &Term, next: &mut usize) -> Term {
    let Term::Compound(f, args) = goal else {
        return goal.clone();
    };
    let control = matches!((f.as_str(), args.len()), (",", 2) | (";", 2) | ("->", 2) | ("\\+", 1) | ("call", 1));
    if control {
        return Term::Compound(f.clone(), args.iter().map(|a| univ_goal(a, next)).collect());
    }
    match (f.as_str(), args.len()) {
        ("findall", 3) => Term::compound("findall", vec![args[0].clone(), univ_goal(&args[1], next), args[2].clone()]),
        ("catch", 3) => Term::compound("catch", vec![univ_goal(&args[0], next), args[1].clone(), univ_goal(&args[2], next)]),
        ("call", n) if n >= 2 => {
            let g = Term::var("_G", *next);
            *next += 1;
            let build = Term::compound("$add_args", vec![args[0].clone(), Term::list(args[1..].to_vec()), g.clone()]);
            Term::compound(",", vec![Term::qualified(&crate::term::Atom::new("user"), build), Term::compound("call", vec![g])])
        }
        _ => goal.clone(),
    }
}

/// Runs `goal` `reps` times per variant, collecting all solutions each time.
pub fn bench<'a>(
    sources: impl IntoIterator<Item = (&'a str, &'a str)>,
    goal: &str,
    reps: usize,
    variants: &[Variant],
    flags: Flags,
) -> Result<BenchReport, BenchError> {
    if reps == 0 {
        return Ok(BenchReport::default());
    }
    let mut db = Database::new();
    load_files(&mut db, sources)?;
    let mut report = BenchReport::default();
    for &variant in variants {
        let mut engine = Engine::new(prepare(&db, variant, flags)?, flags);
        let mut times = Vec::with_capacity(reps);
        let mut solutions = 0;
        for _ in 0..reps {
            let start = Instant::now();
            let result = engine.solve_all(goal);
            times.push(start.elapsed());
            solutions = result.map_err(|error| BenchError::Query { variant, error })?.len();
            engine.take_output();
            engine.take_warnings();
        }
        times.sort();
        report.rows.push(BenchRow { variant, median: times[times.len() / 2], reps, solutions, meta_calls: engine.meta_call_count() });
    }
    Ok(report)
}
