//! Terms: the universal value of the language.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// An interned-by-value atom name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom(Arc<str>);

impl Atom {
    pub fn new(name: &str) -> Self {
        Atom(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Atom {
    fn from(s: &str) -> Self {
        Atom::new(s)
    }
}

impl PartialEq<str> for Atom {
    fn eq(&self, other: &str) -> bool {
        &*self.0 == other
    }
}

impl PartialEq<&str> for Atom {
    fn eq(&self, other: &&str) -> bool {
        &*self.0 == *other
    }
}

/// A logic variable. `id` identifies the variable; `name` is kept for
/// printing answers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Var {
    pub name: Arc<str>,
    pub id: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Atom(Atom),
    Int(i64),
    /// Functor and arguments. The argument list is never empty.
    Compound(Atom, Arc<[Term]>),
}

/// `Name/Arity`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Indicator {
    pub name: Atom,
    pub arity: usize,
}

impl Indicator {
    pub fn new(name: &str, arity: usize) -> Self {
        Indicator { name: Atom::new(name), arity }
    }

    /// Reads a `Name/Arity` term.
    pub fn from_term(t: &Term) -> Option<Indicator> {
        match t {
            Term::Compound(f, args) if f == "/" && args.len() == 2 => match (&args[0], &args[1]) {
                (Term::Atom(name), Term::Int(n)) if *n >= 0 => Some(Indicator { name: name.clone(), arity: *n as usize }),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn to_term(&self) -> Term {
        Term::compound("/", vec![Term::Atom(self.name.clone()), Term::Int(self.arity as i64)])
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl Term {
    pub fn atom(name: &str) -> Term {
        Term::Atom(Atom::new(name))
    }

    pub fn var(name: &str, id: usize) -> Term {
        Term::Var(Var { name: Arc::from(name), id })
    }

    /// Builds a compound; an empty argument list yields the atom.
    pub fn compound(name: &str, args: Vec<Term>) -> Term {
        Term::from_parts(Atom::new(name), args)
    }

    pub fn from_parts(functor: Atom, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::Atom(functor)
        } else {
            Term::Compound(functor, args.into())
        }
    }

    /// `M:G`.
    pub fn qualified(module: &Atom, goal: Term) -> Term {
        Term::Compound(Atom::new(":"), vec![Term::Atom(module.clone()), goal].into())
    }

    pub fn nil() -> Term {
        Term::atom("[]")
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::compound(".", vec![head, tail])
    }

    pub fn list(items: Vec<Term>) -> Term {
        Term::list_with_tail(items, Term::nil())
    }

    pub fn list_with_tail(items: Vec<Term>, tail: Term) -> Term {
        items.into_iter().rev().fold(tail, |acc, item| Term::cons(item, acc))
    }

    pub fn is_callable(&self) -> bool {
        matches!(self, Term::Atom(_) | Term::Compound(..))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_atom(&self) -> Option<&Atom> {
        match self {
            Term::Atom(a) => Some(a),
            _ => None,
        }
    }

    /// Functor name of a callable term.
    pub fn name(&self) -> Option<&Atom> {
        match self {
            Term::Atom(a) | Term::Compound(a, _) => Some(a),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, args) => args,
            _ => &[],
        }
    }

    pub fn indicator(&self) -> Option<Indicator> {
        match self {
            Term::Atom(a) => Some(Indicator { name: a.clone(), arity: 0 }),
            Term::Compound(f, args) => Some(Indicator { name: f.clone(), arity: args.len() }),
            _ => None,
        }
    }

    /// True for a compound with the given functor name and arity.
    pub fn is_functor(&self, name: &str, arity: usize) -> bool {
        match self {
            Term::Compound(f, args) => f == name && args.len() == arity,
            Term::Atom(a) => arity == 0 && a == name,
            _ => false,
        }
    }

    /// Splits `M:G` into its parts.
    pub fn as_qualified(&self) -> Option<(&Term, &Term)> {
        match self {
            Term::Compound(f, args) if f == ":" && args.len() == 2 => Some((&args[0], &args[1])),
            _ => None,
        }
    }

    /// Appends extra arguments, as closures are extended into goals.
    pub fn with_extra_args(&self, extra: &[Term]) -> Option<Term> {
        match self {
            Term::Atom(a) => Some(Term::from_parts(a.clone(), extra.to_vec())),
            Term::Compound(f, args) => {
                let mut all = args.to_vec();
                all.extend_from_slice(extra);
                Some(Term::Compound(f.clone(), all.into()))
            }
            _ => None,
        }
    }

    /// Reads a proper list into its elements.
    pub fn list_items(&self) -> Option<Vec<Term>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::Atom(a) if a == "[]" => return Some(out),
                Term::Compound(f, args) if f == "." && args.len() == 2 => {
                    out.push(args[0].clone());
                    cur = &args[1];
                }
                _ => return None,
            }
        }
    }

    /// Visits every variable, left to right, including repeats.
    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a Var)) {
        match self {
            Term::Var(v) => f(v),
            Term::Compound(_, args) => args.iter().for_each(|a| a.for_each_var(f)),
            _ => {}
        }
    }

    /// Distinct variables in order of first occurrence.
    pub fn variables(&self) -> Vec<Var> {
        let mut seen = Vec::<Var>::new();
        self.for_each_var(&mut |v| {
            if !seen.iter().any(|s| s.id == v.id) {
                seen.push(v.clone());
            }
        });
        seen
    }

    pub fn contains_var(&self, id: usize) -> bool {
        let mut found = false;
        self.for_each_var(&mut |v| found |= v.id == id);
        found
    }

    pub fn max_var_id(&self) -> Option<usize> {
        let mut max = None;
        self.for_each_var(&mut |v| max = Some(max.map_or(v.id, |m: usize| m.max(v.id))));
        max
    }

    /// Rewrites every variable through `f`.
    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Compound(name, args) => Term::Compound(name.clone(), args.iter().map(|a| a.map_vars(f)).collect()),
            other => other.clone(),
        }
    }

    /// Replaces variables by id.
    pub fn substitute(&self, map: &HashMap<usize, Term>) -> Term {
        self.map_vars(&mut |v| map.get(&v.id).cloned().unwrap_or(Term::Var(v.clone())))
    }
}

/// Structural equality up to a consistent renaming of variables.
pub fn is_variant(a: &Term, b: &Term) -> bool {
    fn go(a: &Term, b: &Term, fwd: &mut HashMap<usize, usize>, back: &mut HashMap<usize, usize>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                let f = *fwd.entry(x.id).or_insert(y.id);
                let g = *back.entry(y.id).or_insert(x.id);
                f == y.id && g == x.id
            }
            (Term::Atom(x), Term::Atom(y)) => x == y,
            (Term::Int(x), Term::Int(y)) => x == y,
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| go(x, y, fwd, back))
            }
            _ => false,
        }
    }
    go(a, b, &mut HashMap::new(), &mut HashMap::new())
}

/// Splits a `','/2` tree into its conjuncts.
pub fn conjuncts(t: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    let mut cur = t;
    while let Term::Compound(f, args) = cur {
        if f == "," && args.len() == 2 {
            out.push(args[0].clone());
            cur = &args[1];
        } else {
            break;
        }
    }
    out.push(cur.clone());
    out
}

/// Joins goals into a right-nested conjunction; empty gives `true`.
pub fn conjunction(goals: Vec<Term>) -> Term {
    let mut iter = goals.into_iter().rev();
    match iter.next() {
        None => Term::atom("true"),
        Some(last) => iter.fold(last, |acc, g| Term::compound(",", vec![g, acc])),
    }
}
