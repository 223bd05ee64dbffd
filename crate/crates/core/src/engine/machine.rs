//! The solver: a goal continuation plus a choicepoint stack.
//!
//! Every pending goal carries an [`Env`] recording the modules it runs
//! under. Qualification, meta-calls and clause entry only ever produce new
//! environments; nothing is mutated in place, so backtracking restores
//! contexts for free.

use std::rc::Rc;
use std::sync::Arc;

use super::bindings::{rename, Bindings};
use super::builtins as err;
use super::{ExecutionContext, Flags, Limits, Stats};
use crate::moduledb::{is_builtin, Clause, Database, Resolution};
use crate::term::{Atom, Indicator, Term};

/// A thrown ball.
pub(super) type Ball = Term;

#[derive(Debug)]
struct CatchLink {
    id: usize,
    next: Option<Rc<CatchLink>>,
}

#[derive(Clone, Debug)]
pub(super) struct Env {
    /// Module that unqualified meta-arguments are qualified with.
    pub calling: Atom,
    /// Module where unqualified goals are looked up.
    pub home: Atom,
    /// Module holding the clause being executed.
    pub definition: Atom,
    /// Module reported to tool predicates as their caller.
    pub origin: Atom,
    pub cut_barrier: usize,
    catches: Option<Rc<CatchLink>>,
    depth: usize,
    /// The clause was produced by a transformation; skip the scope check.
    scope_exempt: bool,
}

impl Env {
    fn top_level() -> Self {
        let user = Atom::new("user");
        Env {
            calling: user.clone(),
            home: user.clone(),
            definition: user.clone(),
            origin: user,
            cut_barrier: 0,
            catches: None,
            depth: 0,
            scope_exempt: false,
        }
    }

    pub fn context(&self) -> ExecutionContext {
        ExecutionContext { calling: self.calling.clone(), definition: self.definition.clone(), lookup: self.home.clone() }
    }

    /// Environment for a goal executed as a meta-call: it runs in the
    /// calling context and is opaque to cut.
    fn meta(&self, cut_barrier: usize) -> Rc<Env> {
        Rc::new(Env { home: self.calling.clone(), origin: self.calling.clone(), cut_barrier, ..self.clone() })
    }
}

enum Frame {
    Goal { goal: Term, env: Rc<Env>, meta: bool },
    CutTo(usize),
}

struct ContNode {
    frame: Frame,
    next: Cont,
}

type Cont = Option<Rc<ContNode>>;

fn push(frame: Frame, next: Cont) -> Cont {
    Some(Rc::new(ContNode { frame, next }))
}

fn goal(goal: Term, env: Rc<Env>, meta: bool, next: Cont) -> Cont {
    push(Frame::Goal { goal, env, meta }, next)
}

enum Alt {
    Resume(Cont),
    Clauses { goal: Term, clauses: Arc<Vec<Clause>>, next: usize, env: Rc<Env>, cont: Cont },
    Catch { id: usize, catcher: Term, recovery: Term, env: Rc<Env>, cont: Cont },
}

struct Choice {
    trail: usize,
    alt: Alt,
}

pub(super) struct Machine<'e> {
    pub db: &'e mut Database,
    pub flags: &'e Flags,
    limits: Limits,
    pub output: &'e mut String,
    stats: &'e mut Stats,
    pub warnings: &'e mut Vec<String>,
    pub b: Bindings,
    cont: Cont,
    choices: Vec<Choice>,
    next_catch: usize,
}

/// Cheap first-argument test to skip clauses that cannot match.
fn may_match(b: &Bindings, goal: &Term, head: &Term) -> bool {
    let (Some(g), Some(h)) = (goal.args().first(), head.args().first()) else {
        return true;
    };
    match (b.deref(g), h) {
        (Term::Var(_), _) | (_, Term::Var(_)) => true,
        (Term::Atom(x), Term::Atom(y)) => &x == y,
        (Term::Int(x), Term::Int(y)) => x == *y,
        (Term::Compound(f, xs), Term::Compound(g, ys)) => &f == g && xs.len() == ys.len(),
        _ => false,
    }
}

impl<'e> Machine<'e> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        db: &'e mut Database,
        flags: &'e Flags,
        limits: Limits,
        output: &'e mut String,
        stats: &'e mut Stats,
        warnings: &'e mut Vec<String>,
        query: &Term,
        var_count: usize,
    ) -> Self {
        let mut b = Bindings::new();
        b.occurs_check = flags.occurs_check;
        b.alloc(var_count);
        let cont = goal(query.clone(), Rc::new(Env::top_level()), false, None);
        Machine { db, flags, limits, output, stats, warnings, b, cont, choices: Vec::new(), next_catch: 0 }
    }

    pub fn resolve(&self, t: &Term) -> Term {
        self.b.resolve(t)
    }

    fn cut(&mut self, height: usize) {
        self.choices.truncate(height);
    }

    /// Runs until the continuation is empty (a solution) or no choicepoint
    /// is left. An uncaught ball is returned as the error.
    pub fn run(&mut self) -> Result<bool, Ball> {
        loop {
            let Some(node) = self.cont.take() else {
                return Ok(true);
            };
            self.cont = node.next.clone();
            let outcome = match &node.frame {
                Frame::CutTo(h) => {
                    self.cut(*h);
                    Ok(true)
                }
                Frame::Goal { goal, env, meta } => self.step(goal, env, *meta),
            };
            match outcome {
                Ok(true) => {}
                Ok(false) => {
                    if !self.backtrack() {
                        return Ok(false);
                    }
                }
                Err(ball) => {
                    let Frame::Goal { env, .. } = &node.frame else { unreachable!("cuts do not throw") };
                    self.handle_throw(ball, env)?;
                }
            }
        }
    }

    /// Resumes the most recent alternative. Returns false when none is left.
    pub fn backtrack(&mut self) -> bool {
        while let Some(choice) = self.choices.pop() {
            self.b.undo_to(choice.trail);
            match choice.alt {
                Alt::Resume(cont) => {
                    self.cont = cont;
                    return true;
                }
                Alt::Catch { .. } => {}
                Alt::Clauses { goal, clauses, next, env, cont } => {
                    if self.try_clauses(goal, clauses, next, env, cont) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn next_candidate(&self, goal: &Term, clauses: &[Clause], from: usize) -> Option<usize> {
        (from..clauses.len()).find(|&i| may_match(&self.b, goal, &clauses[i].head))
    }

    /// Tries clauses from index `from`, leaving a choicepoint when more
    /// candidates remain.
    fn try_clauses(&mut self, goal: Term, clauses: Arc<Vec<Clause>>, from: usize, env: Rc<Env>, cont: Cont) -> bool {
        let mut current = self.next_candidate(&goal, &clauses, from);
        while let Some(i) = current {
            let after = self.next_candidate(&goal, &clauses, i + 1);
            let mark = self.b.trail_len();
            if let Some(next) = after {
                self.choices.push(Choice {
                    trail: mark,
                    alt: Alt::Clauses { goal: goal.clone(), clauses: Arc::clone(&clauses), next, env: Rc::clone(&env), cont: cont.clone() },
                });
            }
            let clause = &clauses[i];
            let base = self.b.alloc(clause.var_count);
            let head = rename(&clause.head, base);
            if self.b.unify(&goal, &head) {
                self.cont = if clause.is_fact() {
                    cont
                } else {
                    let body_env = if clause.generated { Rc::new(Env { scope_exempt: true, ..(*env).clone() }) } else { env };
                    self::goal(rename(&clause.body, base), body_env, false, cont)
                };
                return true;
            }
            if after.is_some() {
                self.choices.pop();
            }
            current = after;
        }
        false
    }

    /// Unwinds to the innermost active `catch/3` whose catcher unifies with
    /// the ball.
    fn handle_throw(&mut self, ball: Ball, env: &Env) -> Result<(), Ball> {
        let mut link = env.catches.clone();
        while let Some(node) = link {
            link = node.next.clone();
            let Some(pos) = self.choices.iter().rposition(|c| matches!(&c.alt, Alt::Catch { id, .. } if *id == node.id)) else {
                continue;
            };
            self.choices.truncate(pos + 1);
            let choice = self.choices.pop().expect("catch choicepoint");
            self.b.undo_to(choice.trail);
            let Alt::Catch { catcher, recovery, env: catch_env, cont, .. } = choice.alt else { unreachable!("located by id") };
            if self.b.unify(&catcher, &ball) {
                let recovery_env = catch_env.meta(self.choices.len());
                self.cont = goal(recovery, recovery_env, true, cont);
                return Ok(());
            }
        }
        Err(ball)
    }

    fn meta_call(&mut self) {
        self.stats.meta_calls += 1;
    }

    /// Executes one goal. `Ok(false)` means failure.
    fn step(&mut self, raw: &Term, env: &Rc<Env>, meta: bool) -> Result<bool, Ball> {
        let mut env = Rc::clone(env);
        let mut meta = meta;
        let mut goal = self.b.deref(raw);
        if raw.is_var() && !goal.is_var() {
            // a variable body goal behaves as call/1
            self.meta_call();
            env = env.meta(self.choices.len());
            meta = true;
        }
        let mut lookup: Option<Atom> = None;
        let mut explicit: Option<Atom> = None;
        while let Some((q, g)) = goal.as_qualified() {
            let module = match self.b.deref(q) {
                Term::Atom(m) => m,
                Term::Var(_) => return Err(err::instantiation_error(err::pi(":", 2))),
                other => return Err(err::type_error("atom", &other, err::pi(":", 2))),
            };
            let inner = self.b.deref(g);
            if meta || self.flags.semantics.colon_sets_calling_context {
                let origin = if meta { module.clone() } else { env.origin.clone() };
                env = Rc::new(Env { calling: module.clone(), home: module.clone(), origin, ..(*env).clone() });
                lookup = None;
            } else {
                lookup = Some(module.clone());
            }
            if !meta {
                explicit = Some(module);
            }
            goal = inner;
        }
        let ind = match &goal {
            Term::Var(_) => return Err(err::instantiation_error(err::pi("call", 1))),
            Term::Int(_) => return Err(err::type_error("callable", &goal, err::pi("call", 1))),
            g => g.indicator().expect("callable"),
        };
        if is_builtin(&ind) {
            return self.builtin(goal, &ind, &env, meta);
        }
        let start = lookup.unwrap_or_else(|| env.home.clone());
        match self.db.lookup(&start, &ind) {
            Ok(Resolution::User { module }) => self.call_user(goal, &ind, &start, module, &env, explicit),
            Ok(Resolution::Tool { module, implementation }) => {
                let mut args = goal.args().to_vec();
                args.push(Term::Atom(env.origin.clone()));
                let impl_goal = Term::from_parts(implementation.name.clone(), args);
                match self.db.lookup(&module, &implementation) {
                    Ok(Resolution::User { module: def }) => self.call_user(impl_goal, &implementation, &module, def, &env, None),
                    _ => Err(err::existence_error(&module, &implementation)),
                }
            }
            Ok(Resolution::Builtin) => unreachable!("builtins are dispatched first"),
            Ok(Resolution::Unresolved) | Err(_) => Err(err::existence_error(&start, &ind)),
        }
    }

    fn call_user(
        &mut self,
        goal: Term,
        ind: &Indicator,
        start: &Atom,
        def_module: Atom,
        env: &Rc<Env>,
        explicit: Option<Atom>,
    ) -> Result<bool, Ball> {
        self.stats.inferences += 1;
        if let Some(max) = self.limits.max_inferences {
            if self.stats.inferences > max {
                return Err(err::resource_error("inferences"));
            }
        }
        if let Some(max) = self.limits.max_depth {
            if env.depth + 1 > max {
                return Err(err::resource_error("depth"));
            }
        }
        if let Some(q) = explicit {
            self.check_scope(&q, start, ind, env)?;
        }
        let pred = self.db.predicate(&def_module, ind).expect("resolved predicates exist");
        let clauses = Arc::clone(&pred.clauses);
        let transparent = pred.transparent;
        let goal = match &pred.template {
            Some(t) if t.has_meta_args() => {
                let args: Vec<Term> = goal
                    .args()
                    .iter()
                    .zip(&t.specs)
                    .map(|(arg, spec)| {
                        let arg = self.b.deref(arg);
                        if spec.is_meta() && arg.as_qualified().is_none() {
                            Term::qualified(&env.calling, arg)
                        } else {
                            arg
                        }
                    })
                    .collect();
                Term::from_parts(ind.name.clone(), args)
            }
            _ => goal,
        };
        let context = if transparent { env.calling.clone() } else { def_module.clone() };
        let body_env = Rc::new(Env {
            calling: context.clone(),
            home: def_module.clone(),
            definition: def_module,
            origin: context,
            cut_barrier: self.choices.len(),
            catches: env.catches.clone(),
            depth: env.depth + 1,
            scope_exempt: false,
        });
        let cont = self.cont.take();
        Ok(self.try_clauses(goal, clauses, 0, body_env, cont))
    }

    fn check_scope(&mut self, qualifier: &Atom, start: &Atom, ind: &Indicator, env: &Env) -> Result<(), Ball> {
        if env.scope_exempt || *qualifier == env.definition || qualifier == "user" {
            return Ok(());
        }
        let exported = self.db.module(start.as_str()).is_some_and(|m| m.exports.contains(ind));
        if exported {
            return Ok(());
        }
        if self.flags.strict_scope {
            return Err(err::permission_error("access", "private_procedure", err::qualified_pi(qualifier, ind)));
        }
        let message =
            format!("warning: `{qualifier}:{ind}` is not exported; called from module `{}` by explicit qualification", env.definition);
        if !self.warnings.contains(&message) {
            self.warnings.push(message);
        }
        Ok(())
    }

    fn builtin(&mut self, goal: Term, ind: &Indicator, env: &Rc<Env>, meta: bool) -> Result<bool, Ball> {
        let args = goal.args();
        match (ind.name.as_str(), ind.arity) {
            ("true", 0) => Ok(true),
            ("fail", 0) | ("false", 0) => Ok(false),
            ("!", 0) => {
                self.cut(env.cut_barrier);
                Ok(true)
            }
            (",", 2) => {
                let next = self.cont.take();
                let next = self::goal(args[1].clone(), Rc::clone(env), meta, next);
                self.cont = self::goal(args[0].clone(), Rc::clone(env), meta, next);
                Ok(true)
            }
            (";", 2) => {
                let left = self.b.deref(&args[0]);
                let next = self.cont.take();
                if left.is_functor("->", 2) {
                    let height = self.choices.len();
                    self.choices.push(Choice {
                        trail: self.b.trail_len(),
                        alt: Alt::Resume(self::goal(args[1].clone(), Rc::clone(env), meta, next.clone())),
                    });
                    self.if_then(&left.args()[0], &left.args()[1], env, meta, height, next);
                } else {
                    self.choices.push(Choice {
                        trail: self.b.trail_len(),
                        alt: Alt::Resume(self::goal(args[1].clone(), Rc::clone(env), meta, next.clone())),
                    });
                    self.cont = self::goal(left, Rc::clone(env), meta, next);
                }
                Ok(true)
            }
            ("->", 2) => {
                let next = self.cont.take();
                let height = self.choices.len();
                self.if_then(&args[0], &args[1], env, meta, height, next);
                Ok(true)
            }
            ("\\+", 1) => {
                self.meta_call();
                let next = self.cont.take();
                let height = self.choices.len();
                self.choices.push(Choice { trail: self.b.trail_len(), alt: Alt::Resume(next) });
                let fail = self::goal(Term::atom("fail"), Rc::clone(env), false, None);
                let after = push(Frame::CutTo(height), fail);
                self.cont = self::goal(args[0].clone(), env.meta(height + 1), true, after);
                Ok(true)
            }
            ("call", n) => {
                self.meta_call();
                if n > self.flags.semantics.max_call_n {
                    return Err(err::error_term(
                        Term::compound("representation_error", vec![Term::atom("max_call_n_exceeded")]),
                        err::pi("call", n),
                    ));
                }
                let target = if n == 1 { args[0].clone() } else { self.extend_closure(&args[0], &args[1..], n)? };
                let next = self.cont.take();
                self.cont = self::goal(target, env.meta(self.choices.len()), true, next);
                Ok(true)
            }
            ("catch", 3) => {
                self.meta_call();
                let id = self.next_catch;
                self.next_catch += 1;
                let next = self.cont.take();
                let height = self.choices.len();
                self.choices.push(Choice {
                    trail: self.b.trail_len(),
                    alt: Alt::Catch { id, catcher: args[1].clone(), recovery: args[2].clone(), env: Rc::clone(env), cont: next.clone() },
                });
                let mut inner = (*env.meta(height + 1)).clone();
                inner.catches = Some(Rc::new(CatchLink { id, next: env.catches.clone() }));
                self.cont = self::goal(args[0].clone(), Rc::new(inner), true, next);
                Ok(true)
            }
            ("throw", 1) => {
                let ball = self.b.resolve(&args[0]);
                if ball.is_var() {
                    return Err(err::instantiation_error(err::pi("throw", 1)));
                }
                Err(ball)
            }
            ("findall", 3) => {
                self.meta_call();
                let results = self.find_all(&args[0], &args[1], env)?;
                Ok(self.b.unify(&args[2], &Term::list(results)))
            }
            ("predicate_property", 2) => {
                let alternatives = self.predicate_property(&args[0], &args[1], env)?;
                let next = self.cont.take();
                self.cont = self::goal(alternatives, Rc::clone(env), false, next);
                Ok(true)
            }
            _ => self.deterministic(ind, args, env),
        }
    }

    /// `(C -> T)`: the condition is opaque to cut and is committed to on
    /// first success.
    fn if_then(&mut self, cond: &Term, then: &Term, env: &Rc<Env>, meta: bool, height: usize, next: Cont) {
        let then_goal = self::goal(then.clone(), Rc::clone(env), meta, next);
        let commit = push(Frame::CutTo(height), then_goal);
        let cond_env = Rc::new(Env { cut_barrier: self.choices.len(), ..(**env).clone() });
        self.cont = self::goal(cond.clone(), cond_env, meta, commit);
    }

    /// Builds the goal for `call/N`: the closure's qualifier is kept and the
    /// extra arguments are appended to its plain part.
    fn extend_closure(&self, closure: &Term, extra: &[Term], n: usize) -> Result<Term, Ball> {
        let context = err::pi("call", n);
        let mut qualifier = None;
        let mut cur = self.b.deref(closure);
        while let Some((q, g)) = cur.as_qualified() {
            qualifier = Some(q.clone());
            let g = self.b.deref(g);
            cur = g;
        }
        let plain = match &cur {
            Term::Var(_) => return Err(err::instantiation_error(context)),
            Term::Int(_) => return Err(err::type_error("callable", &cur, context)),
            t => t.with_extra_args(extra).expect("callable"),
        };
        Ok(match qualifier {
            Some(q) => Term::compound(":", vec![q, plain]),
            None => plain,
        })
    }

    /// Runs `goal` to exhaustion in a nested search and collects copies of
    /// `template`.
    fn find_all(&mut self, template: &Term, goal_term: &Term, env: &Rc<Env>) -> Result<Vec<Term>, Ball> {
        let saved_cont = self.cont.take();
        let saved_choices = std::mem::take(&mut self.choices);
        let mark = self.b.trail_len();
        self.cont = goal(goal_term.clone(), env.meta(0), true, None);
        let mut results = Vec::new();
        let outcome = loop {
            match self.run() {
                Ok(true) => {
                    results.push(self.b.copy(template));
                    if !self.backtrack() {
                        break Ok(());
                    }
                }
                Ok(false) => break Ok(()),
                Err(ball) => break Err(ball),
            }
        };
        self.b.undo_to(mark);
        self.cont = saved_cont;
        self.choices = saved_choices;
        outcome.map(|_| results)
    }
}
