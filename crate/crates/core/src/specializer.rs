//! Call-site specialization of meta-predicates.
//!
//! A call such as `my_call(me(X))` whose meta-arguments are known at load
//! time is replaced by a call to an auxiliary predicate `my_call__spec1(X)`
//! in the caller's module. The auxiliary clauses are copies of the
//! meta-predicate's clauses in which the meta-parameters are replaced by the
//! qualified arguments and `call/N` on them becomes a direct call.

use std::collections::HashMap;

use indexmap::IndexMap;

use crate::engine::normalize_vars;
use crate::engine::write::to_canonical;
use crate::error::{LoadError, Location};
use crate::expander::{expand_goal, normalize_qualifiers, SemanticsFlag};
use crate::moduledb::builtins::{is_builtin, is_context_sensitive};
use crate::moduledb::{Clause, Database, MetaArgSpec, PredicateDef, Resolution};
use crate::term::{Atom, Indicator, Term};

/// Nesting limit for specializing inside auxiliary bodies.
pub const MAX_DEPTH: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecNote {
    pub location: Location,
    pub message: String,
}

impl std::fmt::Display for SpecNote {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: info: {}", self.location, self.message)
    }
}

/// A specialized call site.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecSite {
    pub module: Atom,
    pub location: Location,
    pub original: Term,
    pub rewritten: Term,
}

#[derive(Clone, Debug, Default)]
pub struct SpecReport {
    pub sites: Vec<SpecSite>,
    pub notes: Vec<SpecNote>,
}

/// Specializes every eligible call site of `db`. Contexts are resolved
/// statically under `semantics`.
pub fn specialize(db: &Database, semantics: SemanticsFlag) -> Result<(Database, SpecReport), LoadError> {
    let mut s = Specializer {
        db,
        calling: semantics.colon_sets_calling_context,
        memo: HashMap::new(),
        counters: HashMap::new(),
        aux: IndexMap::new(),
        report: SpecReport::default(),
        location: Location::new("<none>", 0, 0),
    };
    let mut rewritten: Vec<(Atom, Indicator, usize, Term)> = Vec::new();
    for module in db.modules() {
        for (ind, pred) in &module.predicates {
            if pred.transparent {
                continue;
            }
            for (i, clause) in pred.clauses.iter().enumerate() {
                if clause.generated {
                    continue;
                }
                s.location = clause.location.clone();
                let body = s.rewrite(&module.name, &clause.body, 0)?;
                if body != clause.body {
                    rewritten.push((module.name.clone(), ind.clone(), i, body));
                }
            }
        }
    }
    let mut out = db.clone();
    for (module, ind, i, body) in rewritten {
        let pred = out.predicate_mut(&module, &ind).expect("rewritten predicate exists");
        pred.clauses_mut()[i].body = body;
    }
    for ((module, ind), clauses) in s.aux {
        let def = out.ensure_module(&module).predicate_mut(&ind);
        *def.clauses_mut() = clauses;
    }
    Ok((out, s.report))
}

struct Specializer<'a> {
    db: &'a Database,
    calling: bool,
    /// Canonical key of a specialization to its auxiliary indicator.
    memo: HashMap<(Atom, String), Indicator>,
    counters: HashMap<Atom, usize>,
    aux: IndexMap<(Atom, Indicator), Vec<Clause>>,
    report: SpecReport,
    location: Location,
}

fn is_control(t: &Term) -> bool {
    matches!(t.indicator(), Some(i) if matches!((i.name.as_str(), i.arity), (",", 2) | (";", 2) | ("->", 2)))
}

impl Specializer<'_> {
    fn note(&mut self, message: String) {
        let note = SpecNote { location: self.location.clone(), message };
        if !self.report.notes.contains(&note) {
            self.report.notes.push(note);
        }
    }

    /// Rewrites the call sites of a body running with calling context `module`.
    fn rewrite(&mut self, module: &Atom, goal: &Term, depth: usize) -> Result<Term, LoadError> {
        let Term::Compound(f, args) = goal else {
            return Ok(goal.clone());
        };
        if is_control(goal) || f == "\\+" && args.len() == 1 {
            let args = args.iter().map(|a| self.rewrite(module, a, depth)).collect::<Result<Vec<_>, _>>()?;
            return Ok(Term::Compound(f.clone(), args.into()));
        }
        if (f == "findall" && args.len() == 3) || (f == "catch" && args.len() == 3) {
            let mut args = args.to_vec();
            let positions: &[usize] = if f == "findall" { &[1] } else { &[0, 2] };
            for &p in positions {
                args[p] = self.rewrite(module, &args[p], depth)?;
            }
            return Ok(Term::Compound(f.clone(), args.into()));
        }
        let (start, ctx, plain) = match normalize_qualifiers(goal) {
            Ok(q) => match q.qualifier {
                Some(Term::Atom(m)) => {
                    let ctx = if self.calling { m.clone() } else { module.clone() };
                    (m, ctx, q.plain)
                }
                None => (module.clone(), module.clone(), q.plain),
                Some(_) => return Ok(goal.clone()),
            },
            Err(_) => return Ok(goal.clone()),
        };
        match self.site(module, &start, &ctx, &plain, depth)? {
            Some(call) => {
                if depth == 0 {
                    self.report.sites.push(SpecSite {
                        module: module.clone(),
                        location: self.location.clone(),
                        original: goal.clone(),
                        rewritten: call.clone(),
                    });
                }
                Ok(call)
            }
            None => Ok(goal.clone()),
        }
    }

    /// Tries to specialize one call; `None` leaves it untouched.
    fn site(&mut self, caller: &Atom, start: &Atom, ctx: &Atom, goal: &Term, depth: usize) -> Result<Option<Term>, LoadError> {
        let Some(ind) = goal.indicator() else { return Ok(None) };
        let def_module = match self.db.lookup(start, &ind) {
            Ok(Resolution::User { module }) => module,
            Ok(Resolution::Tool { .. }) => {
                self.note(format!("{start}:{ind} is a tool interface without a template; not specializable"));
                return Ok(None);
            }
            _ => return Ok(None),
        };
        let pred = self.db.predicate(&def_module, &ind).expect("resolved predicate");
        if pred.transparent {
            self.note(format!("{def_module}:{ind} is module transparent without a template; not specializable"));
            return Ok(None);
        }
        let Some(template) = pred.template.clone() else { return Ok(None) };
        if pred.dynamic || pred.clauses.is_empty() {
            return Ok(None);
        }
        // qualified meta-argument values, as they arrive at run time
        let mut values = Vec::new();
        for (arg, spec) in goal.args().iter().zip(&template.specs) {
            if !spec.is_meta() {
                continue;
            }
            if arg.is_var() {
                return Ok(None);
            }
            let q = match normalize_qualifiers(arg) {
                Ok(q) => q,
                Err(_) => return Ok(None),
            };
            let qualifier = match q.qualifier {
                Some(Term::Atom(m)) => m,
                None => ctx.clone(),
                Some(_) => return Ok(None),
            };
            if let MetaArgSpec::Closure(_) = spec {
                if !q.plain.is_callable() {
                    return Ok(None);
                }
                if is_control(&q.plain) || q.plain.is_functor("!", 0) {
                    self.note(format!("{ind}: control construct as meta-argument; not specialized"));
                    return Ok(None);
                }
            }
            values.push(Term::qualified(&qualifier, q.plain));
        }
        if depth >= MAX_DEPTH {
            self.note(format!("{ind}: nested specialization deeper than {MAX_DEPTH}; left as a meta-call"));
            return Ok(None);
        }
        if let Some(reason) = self.unspecializable(&def_module, pred) {
            self.note(format!("{def_module}:{ind}: {reason}; not specialized"));
            return Ok(None);
        }

        let key_term = Term::compound("k", vec![Term::Atom(def_module.clone()), ind.to_term(), Term::list(values.clone())]);
        let (key_norm, nfree) = normalize_vars(&key_term);
        let free: Vec<Term> = key_term.variables().into_iter().map(Term::Var).collect();
        let key = (caller.clone(), to_canonical(&key_norm));
        let call_args = |aux_name: &Atom| {
            let mut call_args: Vec<Term> =
                goal.args().iter().zip(&template.specs).filter(|(_, s)| !s.is_meta()).map(|(a, _)| a.clone()).collect();
            call_args.extend(free.iter().cloned());
            Term::from_parts(aux_name.clone(), call_args)
        };
        if let Some(aux) = self.memo.get(&key) {
            return Ok(Some(call_args(&aux.name)));
        }

        let k = self.counters.entry(caller.clone()).or_insert(0);
        *k += 1;
        let aux_name = Atom::new(&format!("{}__spec{}", ind.name, k));
        let aux_arity = template.specs.iter().filter(|s| !s.is_meta()).count() + nfree;
        let aux_ind = Indicator::new(aux_name.as_str(), aux_arity);
        if self.db.predicate(caller, &aux_ind).is_some() {
            return Err(LoadError::SpecializationCollision { module: caller.to_string(), indicator: aux_ind });
        }
        self.memo.insert(key, aux_ind.clone());
        self.aux.insert((caller.clone(), aux_ind.clone()), Vec::new());

        let Term::Compound(_, norm_args) = &key_norm else { unreachable!() };
        let norm_values = norm_args[2].list_items().expect("key holds a list");
        let free_norm: Vec<Term> = key_norm.variables().into_iter().map(Term::Var).collect();
        let mut clauses = Vec::new();
        for clause in pred.clauses.iter() {
            let base = nfree;
            let head = crate::engine::rename(&clause.head, base);
            let meta_vars: Vec<usize> = head
                .args()
                .iter()
                .zip(&template.specs)
                .filter(|(_, s)| s.is_meta())
                .map(|(a, _)| match a {
                    Term::Var(v) => v.id,
                    _ => unreachable!("checked by unspecializable"),
                })
                .collect();
            let body = crate::engine::rename(&clause.body, base);
            let body = expand_goal(self.db, &def_module, &body, &meta_vars);
            let map: HashMap<usize, Term> = meta_vars.iter().copied().zip(norm_values.iter().cloned()).collect();
            let head = head.substitute(&map);
            let body = self.localize(&def_module, &body.substitute(&map));
            let saved = std::mem::replace(&mut self.location, clause.location.clone());
            let body = self.rewrite(caller, &body, depth + 1)?;
            self.location = saved;
            let mut head_args: Vec<Term> =
                head.args().iter().zip(&template.specs).filter(|(_, s)| !s.is_meta()).map(|(a, _)| a.clone()).collect();
            head_args.extend(free_norm.iter().cloned());
            let term = Term::compound(":-", vec![Term::from_parts(aux_name.clone(), head_args), body]);
            let (term, var_count) = normalize_vars(&term);
            let mut aux_clause = Clause::from_term(&term, var_count, clause.location.clone())?;
            aux_clause.generated = true;
            clauses.push(aux_clause);
        }
        self.aux.insert((caller.clone(), aux_ind), clauses);
        Ok(Some(call_args(&aux_name)))
    }

    /// Why the clauses of `pred` cannot be copied into another module.
    fn unspecializable(&self, def_module: &Atom, pred: &PredicateDef) -> Option<String> {
        let template = pred.template.as_ref()?;
        for clause in pred.clauses.iter() {
            let mut seen = Vec::new();
            for (arg, spec) in clause.head.args().iter().zip(&template.specs) {
                if !spec.is_meta() {
                    continue;
                }
                match arg {
                    Term::Var(v) if !seen.contains(&v.id) => seen.push(v.id),
                    _ => return Some("a clause head has a non-variable or repeated meta-argument".into()),
                }
            }
            if let Some(reason) = self.context_dependence(def_module, &clause.body) {
                return Some(reason);
            }
        }
        None
    }

    /// Goals whose meaning depends on the module the body runs in, beyond
    /// what explicit qualification can capture.
    fn context_dependence(&self, module: &Atom, goal: &Term) -> Option<String> {
        if is_control(goal) || goal.is_functor("\\+", 1) {
            return goal.args().iter().find_map(|a| self.context_dependence(module, a));
        }
        let (start, plain) = match goal.as_qualified() {
            Some((Term::Atom(q), g)) => (q.clone(), g),
            Some(_) => return None,
            None => (module.clone(), goal),
        };
        let ind = plain.indicator()?;
        if is_context_sensitive(&ind) {
            return Some(format!("body reads its context through {ind}"));
        }
        match self.db.lookup(&start, &ind) {
            Ok(Resolution::Tool { .. }) => Some(format!("body calls tool interface {ind}")),
            Ok(Resolution::User { module: m }) if self.db.predicate(&m, &ind).is_some_and(|p| p.transparent) => {
                Some(format!("body calls module transparent {ind}"))
            }
            _ => None,
        }
    }

    /// Makes a body copied out of `def_module` mean the same in any module:
    /// local calls get a `def_module:` prefix and `call/N` on a known
    /// qualified closure becomes a direct call.
    fn localize(&self, def_module: &Atom, goal: &Term) -> Term {
        match goal {
            Term::Var(_) => Term::compound("call", vec![Term::qualified(def_module, goal.clone())]),
            Term::Compound(f, args) if is_control(goal) || goal.is_functor("\\+", 1) => {
                Term::Compound(f.clone(), args.iter().map(|a| self.localize(def_module, a)).collect())
            }
            _ if goal.as_qualified().is_some() => {
                let q = normalize_qualifiers(goal).expect("atom or variable qualifier");
                match (q.qualifier, self.calling) {
                    (Some(Term::Atom(m)), true) => Term::qualified(&m, expand_goal(self.db, &m, &q.plain, &[])),
                    (Some(Term::Atom(m)), false) => Term::qualified(&m, expand_goal(self.db, def_module, &q.plain, &[])),
                    _ => goal.clone(),
                }
            }
            Term::Compound(f, args) if f == "call" => {
                if let Some(direct) = self.direct_call(&args[0], &args[1..]) {
                    return direct;
                }
                goal.clone()
            }
            _ => match goal.indicator() {
                Some(ind) if is_builtin(&ind) => goal.clone(),
                Some(_) => Term::qualified(def_module, goal.clone()),
                None => goal.clone(),
            },
        }
    }

    /// `call(Q:G, A...)` as the direct goal `Q:G'` where `G'` is `G` with
    /// the extra arguments and its own meta-arguments qualified with `Q`.
    fn direct_call(&self, closure: &Term, extra: &[Term]) -> Option<Term> {
        let q = normalize_qualifiers(closure).ok()?;
        let Some(Term::Atom(m)) = q.qualifier else { return None };
        if !q.plain.is_callable() || is_control(&q.plain) || q.plain.is_functor("!", 0) {
            return None;
        }
        let goal = q.plain.with_extra_args(extra)?;
        if goal.is_functor("call", goal.args().len()) {
            return None;
        }
        if self.context_dependence(&m, &goal).is_some() {
            return None;
        }
        Some(Term::qualified(&m, expand_goal(self.db, &m, &goal, &[])))
    }
}
