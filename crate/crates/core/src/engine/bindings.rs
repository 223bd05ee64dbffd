use std::collections::HashMap;
use std::sync::Arc;

use crate::term::{Term, Var};

/// Variable store with a trail for undoing bindings on backtracking.
#[derive(Clone, Debug, Default)]
pub struct Bindings {
    slots: Vec<Option<Term>>,
    trail: Vec<usize>,
    /// Run the occurs check when binding a variable.
    pub occurs_check: bool,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of allocated variables.
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Reserves `n` fresh variables, returning the id of the first.
    pub fn alloc(&mut self, n: usize) -> usize {
        let base = self.slots.len();
        self.slots.resize(base + n, None);
        base
    }

    pub fn fresh(&mut self, name: &str) -> Term {
        let id = self.alloc(1);
        Term::var(name, id)
    }

    pub fn trail_len(&self) -> usize {
        self.trail.len()
    }

    pub fn lookup(&self, id: usize) -> Option<&Term> {
        self.slots.get(id).and_then(|s| s.as_ref())
    }

    /// Follows variable bindings until an unbound variable or a non-variable.
    pub fn deref(&self, t: &Term) -> Term {
        let mut cur = t;
        while let Term::Var(v) = cur {
            match self.lookup(v.id) {
                Some(next) => cur = next,
                None => break,
            }
        }
        cur.clone()
    }

    fn bind(&mut self, id: usize, value: Term) {
        if id >= self.slots.len() {
            self.slots.resize(id + 1, None);
        }
        self.slots[id] = Some(value);
        self.trail.push(id);
    }

    /// Undoes every binding made after the trail had length `mark`.
    pub fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let id = self.trail.pop().expect("trail longer than mark");
            self.slots[id] = None;
        }
    }

    fn occurs(&self, id: usize, t: &Term) -> bool {
        match self.deref(t) {
            Term::Var(v) => v.id == id,
            Term::Compound(_, args) => args.iter().any(|a| self.occurs(id, a)),
            _ => false,
        }
    }

    /// Extends the bindings with a most general unifier of `a` and `b`.
    /// On failure all bindings made by this call are undone.
    pub fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let mark = self.trail.len();
        let mut stack = vec![(a.clone(), b.clone())];
        while let Some((x, y)) = stack.pop() {
            let x = self.deref(&x);
            let y = self.deref(&y);
            let ok = match (&x, &y) {
                (Term::Var(v), Term::Var(w)) => {
                    if v.id != w.id {
                        // the younger variable points at the older one
                        if v.id > w.id {
                            self.bind(v.id, y.clone());
                        } else {
                            self.bind(w.id, x.clone());
                        }
                    }
                    true
                }
                (Term::Var(v), other) | (other, Term::Var(v)) => {
                    if self.occurs_check && self.occurs(v.id, other) {
                        false
                    } else {
                        self.bind(v.id, other.clone());
                        true
                    }
                }
                (Term::Atom(p), Term::Atom(q)) => p == q,
                (Term::Int(p), Term::Int(q)) => p == q,
                (Term::Compound(f, xs), Term::Compound(g, ys)) if f == g && xs.len() == ys.len() => {
                    stack.extend(xs.iter().cloned().zip(ys.iter().cloned()));
                    true
                }
                _ => false,
            };
            if !ok {
                self.undo_to(mark);
                return false;
            }
        }
        true
    }

    /// Substitutes all bindings, producing a fully dereferenced term.
    pub fn resolve(&self, t: &Term) -> Term {
        match self.deref(t) {
            Term::Compound(f, args) => Term::Compound(f, args.iter().map(|a| self.resolve(a)).collect()),
            other => other,
        }
    }

    /// Copies `t` with fresh variables.
    pub fn copy(&mut self, t: &Term) -> Term {
        let resolved = self.resolve(t);
        let mut map: HashMap<usize, Term> = HashMap::new();
        let vars = resolved.variables();
        let base = self.alloc(vars.len());
        for (i, v) in vars.iter().enumerate() {
            map.insert(v.id, Term::Var(Var { name: Arc::clone(&v.name), id: base + i }));
        }
        resolved.substitute(&map)
    }
}

/// Shifts every variable id of a stored clause term by `base`.
pub fn rename(t: &Term, base: usize) -> Term {
    match t {
        Term::Var(v) => Term::Var(Var { name: Arc::clone(&v.name), id: v.id + base }),
        Term::Compound(f, args) if args.iter().any(has_vars) => Term::Compound(f.clone(), args.iter().map(|a| rename(a, base)).collect()),
        other => other.clone(),
    }
}

fn has_vars(t: &Term) -> bool {
    match t {
        Term::Var(_) => true,
        Term::Compound(_, args) => args.iter().any(has_vars),
        _ => false,
    }
}

/// Renumbers the variables of `t` as `0..n`, returning the term and `n`.
pub fn normalize_vars(t: &Term) -> (Term, usize) {
    let vars = t.variables();
    let map: HashMap<usize, Term> =
        vars.iter().enumerate().map(|(i, v)| (v.id, Term::Var(Var { name: Arc::clone(&v.name), id: i }))).collect();
    (t.substitute(&map), vars.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(args: Vec<Term>) -> Term {
        Term::compound("f", args)
    }

    #[test]
    fn unify_binds_both_sides() {
        let mut b = Bindings::new();
        b.alloc(2);
        let x = Term::var("X", 0);
        let y = Term::var("Y", 1);
        assert!(b.unify(&f(vec![x.clone(), Term::atom("a")]), &f(vec![Term::atom("b"), y.clone()])));
        assert_eq!(b.resolve(&x), Term::atom("b"));
        assert_eq!(b.resolve(&y), Term::atom("a"));
    }

    #[test]
    fn unify_failure_leaves_no_bindings() {
        let mut b = Bindings::new();
        b.alloc(1);
        let x = Term::var("X", 0);
        assert!(!b.unify(&Term::atom("a"), &Term::atom("b")));
        assert!(!b.unify(&f(vec![x.clone(), Term::atom("a")]), &f(vec![Term::atom("c"), Term::atom("b")])));
        assert_eq!(b.trail_len(), 0);
        assert_eq!(b.resolve(&x), x);
    }

    #[test]
    fn unify_me_client() {
        let mut b = Bindings::new();
        b.alloc(1);
        let me = Term::var("Me", 0);
        assert!(b.unify(&Term::compound("me", vec![me.clone()]), &Term::compound("me", vec![Term::atom("client")])));
        assert_eq!(b.resolve(&me), Term::atom("client"));
    }

    #[test]
    fn occurs_check_flag() {
        let mut b = Bindings::new();
        b.alloc(1);
        let x = Term::var("X", 0);
        b.occurs_check = true;
        assert!(!b.unify(&x, &f(vec![x.clone()])));
        b.occurs_check = false;
        assert!(b.unify(&x, &f(vec![x.clone()])));
    }

    #[test]
    fn undo_restores() {
        let mut b = Bindings::new();
        b.alloc(2);
        let mark = b.trail_len();
        assert!(b.unify(&Term::var("X", 0), &Term::var("Y", 1)));
        assert!(b.unify(&Term::var("Y", 1), &Term::Int(3)));
        assert_eq!(b.resolve(&Term::var("X", 0)), Term::Int(3));
        b.undo_to(mark);
        assert!(b.lookup(0).is_none() && b.lookup(1).is_none());
    }

    #[test]
    fn copy_is_fresh() {
        let mut b = Bindings::new();
        b.alloc(1);
        let t = f(vec![Term::var("X", 0), Term::var("X", 0)]);
        let c = b.copy(&t);
        let vars = c.variables();
        assert_eq!(vars.len(), 1);
        assert_ne!(vars[0].id, 0);
    }

    #[test]
    fn renaming() {
        let t = f(vec![Term::var("X", 0), Term::atom("a"), Term::var("Y", 1)]);
        assert_eq!(rename(&t, 10), f(vec![Term::var("X", 10), Term::atom("a"), Term::var("Y", 11)]));
        let (n, count) = normalize_vars(&rename(&t, 10));
        assert_eq!((n, count), (t, 2));
    }
}
