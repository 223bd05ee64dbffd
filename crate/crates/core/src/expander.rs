//! Qualifier normalization, load-time qualification of meta-arguments and
//! the control-construct distribution rewrite.

use crate::moduledb::{Clause, Database, MetaArgSpec, MetaTemplate};
use crate::term::{Atom, Term};

/// The read-only qualification settings of an engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SemanticsFlag {
    /// `true`: `M:G` sets both the lookup module and the calling context.
    /// `false`: `M:G` only sets where the lookup of `G` starts.
    pub colon_sets_calling_context: bool,
    /// Largest `N` accepted by `call/N`.
    pub max_call_n: usize,
}

impl Default for SemanticsFlag {
    fn default() -> Self {
        SemanticsFlag { colon_sets_calling_context: true, max_call_n: 255 }
    }
}

/// A goal with its qualifier chain peeled off.
#[derive(Clone, Debug, PartialEq)]
pub struct QualifiedGoal {
    /// An atom, or an unbound variable kept for later binding.
    pub qualifier: Option<Term>,
    pub plain: Term,
}

impl QualifiedGoal {
    pub fn to_term(&self) -> Term {
        match &self.qualifier {
            Some(q) => Term::compound(":", vec![q.clone(), self.plain.clone()]),
            None => self.plain.clone(),
        }
    }
}

/// Peels nested `:/2`; the innermost qualifier wins. A qualifier that is
/// neither an atom nor a variable is returned as the error culprit.
pub fn normalize_qualifiers(t: &Term) -> Result<QualifiedGoal, Term> {
    let mut qualifier = None;
    let mut cur = t;
    while let Some((q, g)) = cur.as_qualified() {
        match q {
            Term::Atom(_) | Term::Var(_) => qualifier = Some(q.clone()),
            other => return Err(other.clone()),
        }
        cur = g;
    }
    Ok(QualifiedGoal { qualifier, plain: cur.clone() })
}

/// Wraps every unqualified meta-argument of `goal` as `context:Arg`.
pub fn qualify_meta_args(goal: &Term, template: &MetaTemplate, context: &Atom) -> Term {
    match goal {
        Term::Compound(f, args) if args.len() == template.arity() => {
            let args = args
                .iter()
                .zip(&template.specs)
                .map(
                    |(arg, spec)| {
                        if spec.is_meta() && arg.as_qualified().is_none() {
                            Term::qualified(context, arg.clone())
                        } else {
                            arg.clone()
                        }
                    },
                )
                .collect();
            Term::Compound(f.clone(), args)
        }
        other => other.clone(),
    }
}

/// Distributes a qualifier over control constructs, leaving qualified
/// subgoals alone. Non-control goals are simply qualified.
pub fn propagate_control(qualifier: &Atom, goal: &Term) -> Term {
    let recurse = |g: &Term| propagate_control(qualifier, g);
    match goal {
        g if g.as_qualified().is_some() => g.clone(),
        Term::Compound(f, args) => match (f.as_str(), args.len()) {
            (",", 2) | (";", 2) | ("->", 2) => Term::Compound(f.clone(), args.iter().map(recurse).collect()),
            ("\\+", 1) => Term::compound("\\+", vec![recurse(&args[0])]),
            ("catch", 3) => Term::compound("catch", vec![recurse(&args[0]), args[1].clone(), recurse(&args[2])]),
            ("call", 1) => Term::compound("call", vec![recurse(&args[0])]),
            ("call", _) => {
                let mut new_args = args.to_vec();
                if new_args[0].as_qualified().is_none() {
                    new_args[0] = Term::qualified(qualifier, new_args[0].clone());
                }
                Term::Compound(f.clone(), new_args.into())
            }
            _ => Term::qualified(qualifier, goal.clone()),
        },
        _ => Term::qualified(qualifier, goal.clone()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetaCallClass {
    /// The goal is a head meta-variable and arrives qualified by the caller.
    CallerQualified,
    /// Anything else runs in the definition module.
    Local,
}

/// Variable ids at meta-argument positions of a clause head.
pub fn head_meta_vars(head: &Term, template: &MetaTemplate) -> Vec<usize> {
    head.args()
        .iter()
        .zip(&template.specs)
        .filter_map(|(arg, spec)| match arg {
            Term::Var(v) if spec.is_meta() => Some(v.id),
            _ => None,
        })
        .collect()
}

pub fn classify_meta_call(clause: &Clause, template: &MetaTemplate, body_goal: &Term) -> MetaCallClass {
    match body_goal {
        Term::Var(v) if head_meta_vars(&clause.head, template).contains(&v.id) => MetaCallClass::CallerQualified,
        _ => MetaCallClass::Local,
    }
}

/// Qualifies the meta-arguments of every call in the clause body with the
/// static calling context `module`. Explicitly qualified goals are left for
/// the runtime because their meaning depends on the semantics flag.
pub fn expand_clause(db: &Database, module: &Atom, clause: &Clause) -> Clause {
    let meta_vars = match db.predicate(module, &clause.indicator()).and_then(|p| p.template.as_ref()) {
        Some(t) => head_meta_vars(&clause.head, t),
        None => Vec::new(),
    };
    let body = expand_goal(db, module, &clause.body, &meta_vars);
    Clause { body, ..clause.clone() }
}

/// Expands a single body goal in the static context `module`.
pub fn expand_goal(db: &Database, module: &Atom, goal: &Term, meta_vars: &[usize]) -> Term {
    let Term::Compound(f, args) = goal else {
        return goal.clone();
    };
    if goal.as_qualified().is_some() {
        return goal.clone();
    }
    if matches!((f.as_str(), args.len()), (",", 2) | (";", 2) | ("->", 2)) {
        return Term::Compound(f.clone(), args.iter().map(|a| expand_goal(db, module, a, meta_vars)).collect());
    }
    let Some(ind) = goal.indicator() else {
        return goal.clone();
    };
    let Some(template) = db.template_for(module, &ind) else {
        return goal.clone();
    };
    let new_args = args.iter().zip(&template.specs).map(|(arg, spec)| expand_meta_arg(db, module, arg, *spec, meta_vars)).collect();
    Term::Compound(f.clone(), new_args)
}

fn expand_meta_arg(db: &Database, module: &Atom, arg: &Term, spec: MetaArgSpec, meta_vars: &[usize]) -> Term {
    if !spec.is_meta() {
        return arg.clone();
    }
    if let Term::Var(v) = arg {
        if meta_vars.contains(&v.id) {
            return arg.clone();
        }
    }
    let (qualifier, inner) = match arg.as_qualified() {
        Some((q, g)) => (q.clone(), g),
        None => (Term::Atom(module.clone()), arg),
    };
    let inner = match (&qualifier, spec) {
        (Term::Atom(q), MetaArgSpec::Closure(0)) => expand_goal(db, q, inner, meta_vars),
        _ => inner.clone(),
    };
    Term::compound(":", vec![qualifier, inner])
}

/// Expands every clause of every non-transparent predicate in place.
pub fn expand_database(db: &mut Database) {
    let mut updates = Vec::new();
    for module in db.modules() {
        for (ind, pred) in &module.predicates {
            if pred.transparent {
                continue;
            }
            let clauses: Vec<Clause> = pred.clauses.iter().map(|c| expand_clause(db, &module.name, c)).collect();
            if clauses[..] != pred.clauses[..] {
                updates.push((module.name.clone(), ind.clone(), clauses));
            }
        }
    }
    for (module, ind, clauses) in updates {
        if let Some(pred) = db.predicate_mut(&module, &ind) {
            *pred.clauses_mut() = clauses;
        }
    }
}
