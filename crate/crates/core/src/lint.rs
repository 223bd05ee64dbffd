//! Static checks for meta-predicate definitions, directive hygiene and
//! portability of `call/N`.
//!
//! The three secure-definition rules:
//!
//! * `SR1`: meta-argument positions of a clause head hold variables;
//! * `SR2`: meta-calls on anything but a head meta-variable resolve in the
//!   definition module;
//! * `SR3`: a closure head variable is only used through a `call/N` (or a
//!   meta position) matching its declared closure arity.

use std::fmt;

use crate::error::Location;
use crate::moduledb::template::template_terms;
use crate::moduledb::{
    normalize_template, normalize_template_lenient, Clause, Database, MetaArgSpec, MetaTemplate, ModuleDef, Resolution, TemplateError,
};
use crate::reader::DirectiveForm;
use crate::term::{Atom, Indicator, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    SR1,
    SR2,
    SR3,
    D1,
    D2,
    D3,
    D4,
    P1,
    P2,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Info,
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub rule: Rule,
    pub severity: Severity,
    pub location: Location,
    pub message: String,
    pub module: Atom,
    pub predicate: Indicator,
}

impl Diagnostic {
    /// `file:line:col RULE severity message`
    pub fn record(&self) -> String {
        format!("{}:{}:{} {} {} {}", self.location.file, self.location.line, self.location.column, self.rule, self.severity, self.message)
    }

    /// Human-oriented form.
    pub fn text(&self) -> String {
        format!(
            "{}:{}:{}: {}: {} [{}] ({}:{})",
            self.location.file,
            self.location.line,
            self.location.column,
            self.severity,
            self.message,
            self.rule,
            self.module,
            self.predicate
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LintOptions {
    /// Largest `call/K` considered portable.
    pub portability_ceiling: usize,
}

impl Default for LintOptions {
    fn default() -> Self {
        LintOptions { portability_ceiling: 8 }
    }
}

/// Lints every module of `db`. The result is sorted by file, line, column
/// and rule.
pub fn lint(db: &Database, options: &LintOptions) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for module in db.modules() {
        out.extend(check_directives(db, module));
        for pred in module.predicates.values() {
            for clause in pred.clauses.iter() {
                if let Some(t) = &pred.template {
                    out.extend(check_sr1(&module.name, clause, t));
                    out.extend(check_sr2(db, &module.name, clause, t));
                    out.extend(check_sr3(db, &module.name, clause, t));
                }
                out.extend(check_portability(db, &module.name, clause, options));
            }
        }
    }
    sort(&mut out);
    out
}

pub fn sort(diagnostics: &mut [Diagnostic]) {
    diagnostics.sort_by(|a, b| {
        (&a.location.file, a.location.line, a.location.column, a.rule, &a.message).cmp(&(
            &b.location.file,
            b.location.line,
            b.location.column,
            b.rule,
            &b.message,
        ))
    });
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(|d| d.severity == Severity::Error)
}

fn diag(rule: Rule, severity: Severity, module: &Atom, clause: &Clause, message: String) -> Diagnostic {
    Diagnostic { rule, severity, location: clause.location.clone(), message, module: module.clone(), predicate: clause.indicator() }
}

fn is_closure_or_context(spec: &MetaArgSpec) -> bool {
    matches!(spec, MetaArgSpec::Closure(_) | MetaArgSpec::ContextAware)
}

pub fn check_sr1(module: &Atom, clause: &Clause, template: &MetaTemplate) -> Vec<Diagnostic> {
    let ind = clause.indicator();
    let mut out = Vec::new();
    let mut seen: Vec<(usize, usize)> = Vec::new();
    for (i, (arg, spec)) in clause.head.args().iter().zip(&template.specs).enumerate() {
        if !is_closure_or_context(spec) {
            continue;
        }
        match arg {
            Term::Var(v) => {
                if let Some((first, _)) = seen.iter().find(|(_, id)| *id == v.id) {
                    out.push(diag(
                        Rule::SR1,
                        Severity::Warning,
                        module,
                        clause,
                        format!("{ind}: meta-arguments {} and {} share variable {}", first + 1, i + 1, v.name),
                    ));
                } else {
                    seen.push((i, v.id));
                }
            }
            other => out.push(diag(
                Rule::SR1,
                Severity::Error,
                module,
                clause,
                format!(
                    "{ind}: meta-argument {} of the clause head is not a variable: {}",
                    i + 1,
                    crate::engine::write::to_canonical(other)
                ),
            )),
        }
    }
    out
}

/// Variables at meta positions of the clause head, with their specs.
fn head_meta_vars(clause: &Clause, template: &MetaTemplate) -> Vec<(usize, MetaArgSpec)> {
    clause
        .head
        .args()
        .iter()
        .zip(&template.specs)
        .filter_map(|(arg, spec)| match arg {
            Term::Var(v) if spec.is_meta() => Some((v.id, *spec)),
            _ => None,
        })
        .collect()
}

/// A goal found in a meta position of the body, with the number of extra
/// arguments the callee adds.
struct MetaCall<'a> {
    goal: &'a Term,
    extra: usize,
}

fn is_control(t: &Term) -> bool {
    matches!(t.indicator(), Some(ind) if matches!((ind.name.as_str(), ind.arity), (",", 2) | (";", 2) | ("->", 2)))
}

/// Walks goal positions of a body: control constructs are entered, and the
/// meta-arguments of templated callees are reported through `on_meta`.
fn walk_goals<'a>(db: &Database, module: &Atom, goal: &'a Term, on_goal: &mut dyn FnMut(&'a Term), on_meta: &mut dyn FnMut(MetaCall<'a>)) {
    on_goal(goal);
    if goal.is_var() {
        on_meta(MetaCall { goal, extra: 0 });
        return;
    }
    if is_control(goal) {
        for arg in goal.args() {
            walk_goals(db, module, arg, on_goal, on_meta);
        }
        return;
    }
    if goal.as_qualified().is_some() {
        return;
    }
    let Some(ind) = goal.indicator() else { return };
    let Some(template) = db.template_for(module, &ind) else { return };
    for (arg, spec) in goal.args().iter().zip(&template.specs) {
        if let MetaArgSpec::Closure(n) = spec {
            on_meta(MetaCall { goal: arg, extra: *n });
            if *n == 0 && !arg.is_var() {
                walk_goals(db, module, arg, on_goal, on_meta);
            }
        }
    }
}

fn body_meta_calls<'a>(db: &Database, module: &Atom, clause: &'a Clause) -> Vec<MetaCall<'a>> {
    let mut calls = Vec::new();
    walk_goals(db, module, &clause.body, &mut |_| {}, &mut |m| calls.push(m));
    calls
}

pub fn check_sr2(db: &Database, module: &Atom, clause: &Clause, template: &MetaTemplate) -> Vec<Diagnostic> {
    let ind = clause.indicator();
    let meta_vars = head_meta_vars(clause, template);
    let mut out = Vec::new();
    for call in body_meta_calls(db, module, clause) {
        match call.goal {
            Term::Var(v) if meta_vars.iter().any(|(id, _)| *id == v.id) => {}
            Term::Var(v) => out.push(diag(
                Rule::SR2,
                Severity::Warning,
                module,
                clause,
                format!(
                    "{ind}: meta-call on {} which is not a head meta-argument; its target cannot be resolved locally (possible context leak)",
                    v.name
                ),
            )),
            g if g.as_qualified().is_some() || is_control(g) && call.extra == 0 => {}
            g => {
                let Some(gi) = g.indicator() else { continue };
                let target = Indicator::new(gi.name.as_str(), gi.arity + call.extra);
                match db.lookup(module, &target) {
                    Ok(Resolution::Unresolved) | Err(_) => out.push(diag(
                        Rule::SR2,
                        Severity::Warning,
                        module,
                        clause,
                        format!("{ind}: meta-call target {target} does not resolve in module {module} (possible context leak)"),
                    )),
                    Ok(_) => out.push(diag(
                        Rule::SR2,
                        Severity::Info,
                        module,
                        clause,
                        format!("{ind}: meta-call on {target} compiled as local call"),
                    )),
                }
            }
        }
    }
    out
}

pub fn check_sr3(db: &Database, module: &Atom, clause: &Clause, template: &MetaTemplate) -> Vec<Diagnostic> {
    let ind = clause.indicator();
    let closures: Vec<(usize, usize, String)> = clause
        .head
        .args()
        .iter()
        .zip(&template.specs)
        .filter_map(|(arg, spec)| match (arg, spec) {
            (Term::Var(v), MetaArgSpec::Closure(n)) if *n >= 1 => Some((v.id, *n, v.name.to_string())),
            _ => None,
        })
        .collect();
    if closures.is_empty() {
        return Vec::new();
    }
    // occurrences in compliant meta positions, keyed by pointer identity
    let mut compliant: Vec<*const Term> = Vec::new();
    let mut out = Vec::new();
    for call in body_meta_calls(db, module, clause) {
        let Term::Var(v) = call.goal else { continue };
        let Some((_, n, name)) = closures.iter().find(|(id, _, _)| *id == v.id) else {
            continue;
        };
        compliant.push(call.goal as *const Term);
        if call.extra != *n {
            out.push(diag(
                Rule::SR3,
                Severity::Error,
                module,
                clause,
                format!("{ind}: closure {name} is declared with {n} extra argument(s) but called with {}", call.extra),
            ));
        }
    }
    for (id, _, name) in &closures {
        let mut stray = false;
        visit_occurrences(&clause.body, *id, &mut |t| {
            if !compliant.contains(&(t as *const Term)) {
                stray = true;
            }
        });
        if stray {
            out.push(diag(
                Rule::SR3,
                Severity::Error,
                module,
                clause,
                format!("{ind}: closure {name} is used outside a call/N complying with its template"),
            ));
        }
    }
    out
}

fn visit_occurrences<'a>(t: &'a Term, id: usize, f: &mut dyn FnMut(&'a Term)) {
    match t {
        Term::Var(v) if v.id == id => f(t),
        Term::Compound(_, args) => args.iter().for_each(|a| visit_occurrences(a, id, f)),
        _ => {}
    }
}

pub fn check_directives(db: &Database, module: &ModuleDef) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mk = |rule, severity, location: &Location, predicate: Indicator, message: String| Diagnostic {
        rule,
        severity,
        location: location.clone(),
        message,
        module: module.name.clone(),
        predicate,
    };
    for record in &module.directives {
        match record.form {
            DirectiveForm::MetaPredicate | DirectiveForm::MetapredicateIso => {
                for raw in template_terms(&record.term.args()[0]) {
                    let pred = raw.indicator().unwrap_or_else(|| Indicator::new("?", 0));
                    match (normalize_template(record.form, &raw), normalize_template_lenient(record.form, &raw)) {
                        (_, Err(e)) => out.push(mk(
                            Rule::D2,
                            Severity::Error,
                            &record.location,
                            pred,
                            format!("malformed meta-predicate template: {e}"),
                        )),
                        (Err(TemplateError::UnknownAtom(a)), Ok(t)) => out.push(mk(
                            Rule::D3,
                            Severity::Warning,
                            &record.location,
                            t.indicator(),
                            format!("{}: mode atom `{a}` is outside the basic set +, ?, @, -, *", t.indicator()),
                        )),
                        (_, Ok(t)) => {
                            let ind = t.indicator();
                            let defined = module.predicates.get(&ind).is_some_and(|p| !p.clauses.is_empty() || p.dynamic);
                            if !defined {
                                out.push(mk(
                                    Rule::D4,
                                    Severity::Warning,
                                    &record.location,
                                    ind.clone(),
                                    format!("meta-predicate directive for {ind} has no matching clauses"),
                                ));
                            }
                        }
                    }
                }
            }
            DirectiveForm::ModuleTransparent => {
                if let Some(inds) = indicators(&record.term.args()[0]) {
                    for ind in inds {
                        out.push(mk(
                            Rule::D1,
                            Severity::Warning,
                            &record.location,
                            ind.clone(),
                            format!("{ind} is module transparent: no template, cross-reference and closure checking unavailable"),
                        ));
                    }
                }
            }
            DirectiveForm::Tool => {
                if let Some(ind) = Indicator::from_term(&record.term.args()[0]) {
                    out.push(mk(
                        Rule::D1,
                        Severity::Warning,
                        &record.location,
                        ind.clone(),
                        format!("{ind} is a tool interface: no template, cross-reference and closure checking unavailable"),
                    ));
                }
            }
            _ => {}
        }
    }
    let _ = db;
    out
}

fn indicators(t: &Term) -> Option<Vec<Indicator>> {
    let items = t.list_items().unwrap_or_else(|| crate::term::conjuncts(t));
    items.iter().map(Indicator::from_term).collect()
}

pub fn check_portability(db: &Database, module: &Atom, clause: &Clause, options: &LintOptions) -> Vec<Diagnostic> {
    let ind = clause.indicator();
    let mut out = Vec::new();
    let mut goals: Vec<&Term> = Vec::new();
    walk_goals(db, module, &clause.body, &mut |g| goals.push(g), &mut |_| {});
    let mut univ_vars: Vec<usize> = Vec::new();
    visit_univ(&clause.body, &mut univ_vars);
    for g in &goals {
        let Term::Compound(f, args) = g else { continue };
        if f.as_str() != "call" {
            continue;
        }
        if args.len() > options.portability_ceiling {
            out.push(diag(
                Rule::P1,
                Severity::Warning,
                module,
                clause,
                format!("{ind}: call/{} exceeds the portable maximum call/{}", args.len(), options.portability_ceiling),
            ));
        }
        if let Term::Var(v) = &args[0] {
            if univ_vars.contains(&v.id) {
                out.push(diag(
                    Rule::P2,
                    Severity::Info,
                    module,
                    clause,
                    format!("{ind}: goal {} is built with =../2 before call/{}; temporary argument lists are slow", v.name, args.len()),
                ));
            }
        }
    }
    out
}

/// Variables appearing as the left side of `=../2` anywhere in `t`.
fn visit_univ(t: &Term, out: &mut Vec<usize>) {
    if let Term::Compound(f, args) = t {
        if f.as_str() == "=.." && args.len() == 2 {
            if let Term::Var(v) = &args[0] {
                out.push(v.id);
            }
        }
        args.iter().for_each(|a| visit_univ(a, out));
    }
}
