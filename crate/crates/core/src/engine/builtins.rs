//! Deterministic builtins, reflection and error terms.

use super::bindings::normalize_vars;
use super::machine::{Ball, Env, Machine};
use super::write::{to_canonical, to_text};
use crate::expander::normalize_qualifiers;
use crate::moduledb::{is_builtin, Clause};
use crate::reflect;
use crate::term::{Atom, Indicator, Term};

/// `error(Formal, Context)`.
pub fn error_term(formal: Term, context: Term) -> Term {
    Term::compound("error", vec![formal, context])
}

pub(super) fn pi(name: &str, arity: usize) -> Term {
    Indicator::new(name, arity).to_term()
}

/// `M:Name/Arity`, read as `(M:Name)/Arity`.
pub(super) fn qualified_pi(module: &Atom, ind: &Indicator) -> Term {
    Term::compound("/", vec![Term::qualified(module, Term::Atom(ind.name.clone())), Term::Int(ind.arity as i64)])
}

pub(super) fn instantiation_error(context: Term) -> Ball {
    error_term(Term::atom("instantiation_error"), context)
}

pub(super) fn type_error(kind: &str, culprit: &Term, context: Term) -> Ball {
    error_term(Term::compound("type_error", vec![Term::atom(kind), culprit.clone()]), context)
}

pub(super) fn existence_error(module: &Atom, ind: &Indicator) -> Ball {
    let culprit = qualified_pi(module, ind);
    error_term(Term::compound("existence_error", vec![Term::atom("procedure"), culprit.clone()]), culprit)
}

pub(super) fn permission_error(action: &str, kind: &str, culprit: Term) -> Ball {
    error_term(Term::compound("permission_error", vec![Term::atom(action), Term::atom(kind), culprit.clone()]), culprit)
}

pub(super) fn resource_error(what: &str) -> Ball {
    error_term(Term::compound("resource_error", vec![Term::atom(what)]), Term::atom("engine"))
}

fn evaluation_error(what: &str, context: Term) -> Ball {
    error_term(Term::compound("evaluation_error", vec![Term::atom(what)]), context)
}

impl Machine<'_> {
    fn eval(&self, t: &Term, context: &Term) -> Result<i64, Ball> {
        match self.b.deref(t) {
            Term::Int(n) => Ok(n),
            Term::Var(_) => Err(instantiation_error(context.clone())),
            Term::Atom(a) => Err(type_error("evaluable", &pi(a.as_str(), 0), context.clone())),
            Term::Compound(f, args) => {
                let overflow = || evaluation_error("int_overflow", context.clone());
                let vals = args.iter().map(|a| self.eval(a, context)).collect::<Result<Vec<_>, _>>()?;
                match (f.as_str(), vals.as_slice()) {
                    ("+", [x, y]) => x.checked_add(*y).ok_or_else(overflow),
                    ("-", [x, y]) => x.checked_sub(*y).ok_or_else(overflow),
                    ("*", [x, y]) => x.checked_mul(*y).ok_or_else(overflow),
                    ("//", [_, 0]) | ("mod", [_, 0]) => Err(evaluation_error("zero_divisor", context.clone())),
                    ("//", [x, y]) => x.checked_div(*y).ok_or_else(overflow),
                    ("mod", [x, y]) => x.checked_rem_euclid(*y).map(|r| if *y < 0 && r != 0 { r + y } else { r }).ok_or_else(overflow),
                    ("min", [x, y]) => Ok(*x.min(y)),
                    ("max", [x, y]) => Ok(*x.max(y)),
                    ("-", [x]) => x.checked_neg().ok_or_else(overflow),
                    ("+", [x]) => Ok(*x),
                    ("abs", [x]) => x.checked_abs().ok_or_else(overflow),
                    _ => Err(type_error("evaluable", &pi(f.as_str(), args.len()), context.clone())),
                }
            }
        }
    }

    /// Builtins that succeed at most once and need no control over the
    /// continuation.
    pub(super) fn deterministic(&mut self, ind: &Indicator, args: &[Term], env: &Env) -> Result<bool, Ball> {
        let context = ind.to_term();
        match (ind.name.as_str(), ind.arity) {
            ("=", 2) => Ok(self.b.unify(&args[0], &args[1])),
            ("\\=", 2) => {
                let mark = self.b.trail_len();
                let unifies = self.b.unify(&args[0], &args[1]);
                self.b.undo_to(mark);
                Ok(!unifies)
            }
            ("==", 2) => Ok(self.b.resolve(&args[0]) == self.b.resolve(&args[1])),
            ("\\==", 2) => Ok(self.b.resolve(&args[0]) != self.b.resolve(&args[1])),
            ("var", 1) => Ok(self.b.deref(&args[0]).is_var()),
            ("nonvar", 1) => Ok(!self.b.deref(&args[0]).is_var()),
            ("atom", 1) => Ok(matches!(self.b.deref(&args[0]), Term::Atom(_))),
            ("integer", 1) => Ok(matches!(self.b.deref(&args[0]), Term::Int(_))),
            ("atomic", 1) => Ok(matches!(self.b.deref(&args[0]), Term::Atom(_) | Term::Int(_))),
            ("callable", 1) => Ok(self.b.deref(&args[0]).is_callable()),
            ("=..", 2) => self.univ(&args[0], &args[1], context),
            ("functor", 3) => self.functor(args, context),
            ("arg", 3) => {
                let n = match self.b.deref(&args[0]) {
                    Term::Int(n) => n,
                    Term::Var(_) => return Err(instantiation_error(context)),
                    other => return Err(type_error("integer", &other, context)),
                };
                match self.b.deref(&args[1]) {
                    Term::Compound(_, xs) => match usize::try_from(n) {
                        Ok(i) if i >= 1 && i <= xs.len() => Ok(self.b.unify(&xs[i - 1], &args[2])),
                        _ => Ok(false),
                    },
                    Term::Var(_) => Err(instantiation_error(context)),
                    other => Err(type_error("compound", &other, context)),
                }
            }
            ("copy_term", 2) => {
                let copy = self.b.copy(&args[0]);
                Ok(self.b.unify(&copy, &args[1]))
            }
            ("is", 2) => {
                let value = self.eval(&args[1], &context)?;
                Ok(self.b.unify(&args[0], &Term::Int(value)))
            }
            ("<" | ">" | "=<" | ">=" | "=:=" | "=\\=", 2) => {
                let x = self.eval(&args[0], &context)?;
                let y = self.eval(&args[1], &context)?;
                Ok(match ind.name.as_str() {
                    "<" => x < y,
                    ">" => x > y,
                    "=<" => x <= y,
                    ">=" => x >= y,
                    "=:=" => x == y,
                    _ => x != y,
                })
            }
            ("assertz", 1) => self.assertz(&args[0], env, context),
            ("retract", 1) => self.retract(&args[0], env, context),
            ("write", 1) => {
                let text = to_text(&self.b.resolve(&args[0]));
                self.output.push_str(&text);
                Ok(true)
            }
            ("writeq", 1) => {
                let text = to_canonical(&self.b.resolve(&args[0]));
                self.output.push_str(&text);
                Ok(true)
            }
            ("nl", 0) => {
                self.output.push('\n');
                Ok(true)
            }
            ("strip_module", 3) => {
                let t = self.b.resolve(&args[0]);
                let (module, plain) = reflect::strip_module(&t, &env.context()).map_err(|bad| type_error("atom", &bad, context))?;
                Ok(self.b.unify(&args[1], &module) && self.b.unify(&args[2], &plain))
            }
            ("context_module", 1) => {
                let calling = reflect::context_module(&env.context());
                Ok(self.b.unify(&args[0], &Term::Atom(calling)))
            }
            _ => Err(existence_error(&env.home, ind)),
        }
    }

    fn univ(&mut self, t: &Term, list: &Term, context: Term) -> Result<bool, Ball> {
        match self.b.deref(t) {
            Term::Var(_) => {
                let items = self.b.resolve(list).list_items().ok_or_else(|| instantiation_error(context.clone()))?;
                let Some((head, rest)) = items.split_first() else {
                    return Err(error_term(Term::compound("domain_error", vec![Term::atom("non_empty_list"), Term::nil()]), context));
                };
                let built = match head {
                    Term::Atom(f) => Term::from_parts(f.clone(), rest.to_vec()),
                    Term::Int(_) if rest.is_empty() => head.clone(),
                    Term::Var(_) => return Err(instantiation_error(context)),
                    other => return Err(type_error("atom", other, context)),
                };
                Ok(self.b.unify(t, &built))
            }
            Term::Compound(f, args) => {
                let mut items = vec![Term::Atom(f.clone())];
                items.extend(args.iter().cloned());
                Ok(self.b.unify(list, &Term::list(items)))
            }
            atomic => Ok(self.b.unify(list, &Term::list(vec![atomic]))),
        }
    }

    fn functor(&mut self, args: &[Term], context: Term) -> Result<bool, Ball> {
        match self.b.deref(&args[0]) {
            Term::Var(_) => {
                let name = self.b.deref(&args[1]);
                let arity = match self.b.deref(&args[2]) {
                    Term::Int(n) if n >= 0 => n as usize,
                    Term::Var(_) => return Err(instantiation_error(context)),
                    other => return Err(type_error("integer", &other, context)),
                };
                let built = match (&name, arity) {
                    (Term::Var(_), _) => return Err(instantiation_error(context)),
                    (_, 0) => name.clone(),
                    (Term::Atom(f), n) => {
                        let base = self.b.alloc(n);
                        Term::from_parts(f.clone(), (0..n).map(|i| Term::var("_", base + i)).collect())
                    }
                    (other, _) => return Err(type_error("atomic", other, context)),
                };
                Ok(self.b.unify(&args[0], &built))
            }
            Term::Compound(f, xs) => Ok(self.b.unify(&args[1], &Term::Atom(f)) && self.b.unify(&args[2], &Term::Int(xs.len() as i64))),
            atomic => Ok(self.b.unify(&args[1], &atomic) && self.b.unify(&args[2], &Term::Int(0))),
        }
    }

    /// Splits a possibly qualified clause term into its module and clause.
    fn clause_target(&self, t: &Term, env: &Env, context: &Term) -> Result<(Atom, Term, Term), Ball> {
        let t = self.b.resolve(t);
        let q = normalize_qualifiers(&t).map_err(|bad| type_error("atom", &bad, context.clone()))?;
        let mut module = match q.qualifier {
            Some(Term::Atom(m)) => m,
            Some(_) => return Err(instantiation_error(context.clone())),
            None => env.calling.clone(),
        };
        let (head, body) = match &q.plain {
            Term::Compound(f, args) if f == ":-" && args.len() == 2 => (args[0].clone(), args[1].clone()),
            other => (other.clone(), Term::atom("true")),
        };
        let head = match normalize_qualifiers(&head) {
            Ok(hq) => {
                if let Some(Term::Atom(m)) = hq.qualifier {
                    module = m;
                }
                hq.plain
            }
            Err(bad) => return Err(type_error("atom", &bad, context.clone())),
        };
        match &head {
            Term::Var(_) => return Err(instantiation_error(context.clone())),
            Term::Int(_) => return Err(type_error("callable", &head, context.clone())),
            _ => {}
        }
        if matches!(body, Term::Int(_)) {
            return Err(type_error("callable", &body, context.clone()));
        }
        Ok((module, head, body))
    }

    fn assertz(&mut self, t: &Term, env: &Env, context: Term) -> Result<bool, Ball> {
        let (module, head, body) = self.clause_target(t, env, &context)?;
        let ind = head.indicator().expect("checked callable");
        let culprit = qualified_pi(&module, &ind);
        if is_builtin(&ind) {
            return Err(permission_error("modify", "static_procedure", culprit));
        }
        if let Some(p) = self.db.predicate(&module, &ind) {
            if !p.dynamic && !p.clauses.is_empty() {
                return Err(permission_error("modify", "static_procedure", culprit));
            }
        }
        let body = if body.is_var() { Term::compound("call", vec![body]) } else { body };
        let (term, var_count) = normalize_vars(&Term::compound(":-", vec![head, body]));
        let location = crate::error::Location::new("<assertz>", 0, 0);
        let clause = Clause::from_term(&term, var_count, location).expect("checked callable");
        let pred = self.db.ensure_module(&module).predicate_mut(&ind);
        pred.dynamic = true;
        pred.clauses_mut().push(clause);
        Ok(true)
    }

    fn retract(&mut self, t: &Term, env: &Env, context: Term) -> Result<bool, Ball> {
        let (module, head, body) = self.clause_target(t, env, &context)?;
        let ind = head.indicator().expect("checked callable");
        let Some(pred) = self.db.predicate(&module, &ind) else {
            return Ok(false);
        };
        if !pred.dynamic {
            return Err(permission_error("modify", "static_procedure", qualified_pi(&module, &ind)));
        }
        let clauses = std::sync::Arc::clone(&pred.clauses);
        for (i, clause) in clauses.iter().enumerate() {
            let mark = self.b.trail_len();
            let base = self.b.alloc(clause.var_count);
            let stored_head = super::bindings::rename(&clause.head, base);
            let stored_body = super::bindings::rename(&clause.body, base);
            if self.b.unify(&head, &stored_head) && self.b.unify(&body, &stored_body) {
                if let Some(p) = self.db.predicate_mut(&module, &ind) {
                    p.clauses_mut().remove(i);
                }
                return Ok(true);
            }
            self.b.undo_to(mark);
        }
        Ok(false)
    }

    /// Builds a disjunction enumerating `Pred`/`Prop` pairs.
    pub(super) fn predicate_property(&mut self, pred: &Term, prop: &Term, env: &Env) -> Result<Term, Ball> {
        let context = pi("predicate_property", 2);
        let t = self.b.resolve(pred);
        let q = normalize_qualifiers(&t).map_err(|bad| type_error("atom", &bad, context.clone()))?;
        let module = match q.qualifier {
            Some(Term::Atom(m)) => m,
            Some(_) => return Err(instantiation_error(context)),
            None => env.calling.clone(),
        };
        let candidates: Vec<(Indicator, Term)> = match &q.plain {
            Term::Var(_) => reflect::visible_indicators(self.db, &module)
                .into_iter()
                .map(|ind| {
                    let base = self.b.alloc(ind.arity);
                    let head = Term::from_parts(ind.name.clone(), (0..ind.arity).map(|i| Term::var("_", base + i)).collect());
                    (ind, head)
                })
                .collect(),
            Term::Int(_) => return Err(type_error("callable", &q.plain, context)),
            plain => vec![(plain.indicator().expect("callable"), plain.clone())],
        };
        let mut alternatives = Vec::new();
        for (ind, head) in candidates {
            for p in reflect::properties(self.db, &module, &ind) {
                alternatives.push(Term::compound(
                    ",",
                    vec![Term::compound("=", vec![q.plain.clone(), head.clone()]), Term::compound("=", vec![prop.clone(), p])],
                ));
            }
        }
        Ok(alternatives.into_iter().rev().reduce(|acc, alt| Term::compound(";", vec![alt, acc])).unwrap_or_else(|| Term::atom("fail")))
    }
}
