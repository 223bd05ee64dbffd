//! Reflection over the execution context and the module database.
//!
//! The engine exposes these as `strip_module/3`, `context_module/1` and
//! `predicate_property/2`. The functions here hold the logic that does not
//! depend on bindings, so it can be tested and reused directly.

use std::collections::HashSet;

use crate::engine::ExecutionContext;
use crate::expander::normalize_qualifiers;
use crate::moduledb::{builtin_template, builtins::builtin_indicators, Database, Resolution};
use crate::term::{Atom, Indicator, Term};

/// Splits `goal` into its effective module and plain part. The innermost
/// qualifier wins; an unqualified goal gets the frame's calling module.
/// A qualifier that is neither an atom nor a variable is returned as `Err`.
pub fn strip_module(goal: &Term, ctx: &ExecutionContext) -> Result<(Term, Term), Term> {
    let q = normalize_qualifiers(goal)?;
    let module = q.qualifier.unwrap_or_else(|| Term::Atom(ctx.calling.clone()));
    Ok((module, q.plain))
}

pub fn context_module(ctx: &ExecutionContext) -> Atom {
    ctx.calling.clone()
}

/// Predicates visible from `module`: local, then imported, then builtin.
pub fn visible_indicators(db: &Database, module: &Atom) -> Vec<Indicator> {
    let mut out: Vec<Indicator> = Vec::new();
    if let Some(m) = db.module(module.as_str()) {
        out.extend(m.predicates.keys().cloned());
        out.extend(m.tools.keys().cloned());
        out.extend(m.imports.keys().cloned());
        for src in &m.import_all {
            if let Some(s) = db.module(src.as_str()) {
                out.extend(s.exports.iter().cloned());
            }
        }
    }
    out.extend(builtin_indicators());
    let mut seen = HashSet::new();
    out.retain(|i| seen.insert(i.clone()));
    out
}

/// Properties of `ind` as seen from `module`, in enumeration order.
/// Unknown predicates have none.
pub fn properties(db: &Database, module: &Atom, ind: &Indicator) -> Vec<Term> {
    let mut props = Vec::new();
    let exported = |def: &Atom| db.module(def.as_str()).is_some_and(|m| m.exports.contains(ind));
    match db.lookup(module, ind) {
        Ok(Resolution::User { module: def }) => {
            let pred = db.predicate(&def, ind).expect("resolved");
            props.push(Term::atom("defined"));
            if exported(&def) {
                props.push(Term::atom("exported"));
            }
            if def != *module {
                props.push(Term::compound("imported_from", vec![Term::Atom(def.clone())]));
            }
            if let Some(t) = &pred.template {
                props.push(Term::compound("meta_predicate", vec![t.to_term()]));
            }
            if pred.dynamic {
                props.push(Term::atom("dynamic"));
            }
            if pred.transparent {
                props.push(Term::atom("transparent"));
            }
        }
        Ok(Resolution::Tool { module: def, .. }) => {
            props.push(Term::atom("defined"));
            if exported(&def) {
                props.push(Term::atom("exported"));
            }
            if def != *module {
                props.push(Term::compound("imported_from", vec![Term::Atom(def)]));
            }
        }
        Ok(Resolution::Builtin) => {
            props.push(Term::atom("built_in"));
            props.push(Term::atom("defined"));
            if let Some(t) = builtin_template(ind) {
                props.push(Term::compound("meta_predicate", vec![t.to_term()]));
            }
        }
        _ => {}
    }
    props
}
