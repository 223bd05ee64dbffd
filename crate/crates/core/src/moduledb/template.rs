//! Meta-predicate templates and their normalization across directive dialects.

use std::fmt;

use crate::reader::DirectiveForm;
use crate::term::{Atom, Indicator, Term};

/// Instantiation mode of a normal argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Plus,
    Question,
    At,
    Minus,
    Star,
}

impl Mode {
    pub fn from_atom(name: &str) -> Option<Mode> {
        Some(match name {
            "+" => Mode::Plus,
            "?" => Mode::Question,
            "@" => Mode::At,
            "-" => Mode::Minus,
            "*" => Mode::Star,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Plus => "+",
            Mode::Question => "?",
            Mode::At => "@",
            Mode::Minus => "-",
            Mode::Star => "*",
        }
    }
}

/// What one argument position of a template accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MetaArgSpec {
    /// A closure needing `n` additional arguments; `Closure(0)` is a goal.
    Closure(usize),
    /// Module-sensitive but not necessarily a goal (`:` in `meta_predicate/1`).
    ContextAware,
    Normal(Mode),
}

impl MetaArgSpec {
    pub fn is_meta(self) -> bool {
        !matches!(self, MetaArgSpec::Normal(_))
    }

    pub fn to_term(self) -> Term {
        match self {
            MetaArgSpec::Closure(n) => Term::Int(n as i64),
            MetaArgSpec::ContextAware => Term::atom(":"),
            MetaArgSpec::Normal(m) => Term::atom(m.as_str()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MetaTemplate {
    pub name: Atom,
    pub specs: Vec<MetaArgSpec>,
}

impl MetaTemplate {
    pub fn new(name: &str, specs: Vec<MetaArgSpec>) -> Self {
        MetaTemplate { name: Atom::new(name), specs }
    }

    pub fn arity(&self) -> usize {
        self.specs.len()
    }

    pub fn indicator(&self) -> Indicator {
        Indicator { name: self.name.clone(), arity: self.specs.len() }
    }

    pub fn has_meta_args(&self) -> bool {
        self.specs.iter().any(|s| s.is_meta())
    }

    /// Renders back in `meta_predicate/1` surface syntax.
    pub fn to_term(&self) -> Term {
        Term::from_parts(self.name.clone(), self.specs.iter().map(|s| s.to_term()).collect())
    }
}

impl fmt::Display for MetaTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::engine::write::to_canonical(&self.to_term()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("negative closure arity {0}")]
    NegativeArity(i64),
    #[error("unknown argument specifier `{0}`")]
    UnknownAtom(String),
    #[error("argument specifier must be an integer or an atom, found `{0}`")]
    NonAtomic(String),
    #[error("template must be an atom or compound, found `{0}`")]
    NotCallable(String),
}

/// Normalizes one predicate template written in the given directive dialect.
pub fn normalize_template(form: DirectiveForm, raw: &Term) -> Result<MetaTemplate, TemplateError> {
    normalize(form, raw, false)
}

/// As [`normalize_template`], but unknown mode atoms (extended mode sets)
/// become `Normal(?)` instead of failing.
pub fn normalize_template_lenient(form: DirectiveForm, raw: &Term) -> Result<MetaTemplate, TemplateError> {
    normalize(form, raw, true)
}

fn normalize(form: DirectiveForm, raw: &Term, lenient: bool) -> Result<MetaTemplate, TemplateError> {
    let (name, args) = match raw {
        Term::Atom(a) => (a.clone(), &[][..]),
        Term::Compound(f, args) => (f.clone(), &args[..]),
        other => return Err(TemplateError::NotCallable(crate::engine::write::to_canonical(other))),
    };
    let specs = args
        .iter()
        .map(|arg| match arg {
            Term::Int(n) if *n >= 0 => Ok(MetaArgSpec::Closure(*n as usize)),
            Term::Int(n) => Err(TemplateError::NegativeArity(*n)),
            Term::Atom(a) => match a.as_str() {
                ":" if form == DirectiveForm::MetapredicateIso => Ok(MetaArgSpec::Closure(0)),
                ":" => Ok(MetaArgSpec::ContextAware),
                "::" => Ok(MetaArgSpec::Closure(0)),
                other => match Mode::from_atom(other) {
                    Some(m) => Ok(MetaArgSpec::Normal(m)),
                    None if lenient => Ok(MetaArgSpec::Normal(Mode::Question)),
                    None => Err(TemplateError::UnknownAtom(other.to_string())),
                },
            },
            other => Err(TemplateError::NonAtomic(crate::engine::write::to_canonical(other))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MetaTemplate { name, specs })
}

/// Splits the argument of a template directive, which may be a single
/// template, a comma sequence, or a list.
pub fn template_terms(arg: &Term) -> Vec<Term> {
    if let Some(items) = arg.list_items() {
        return items;
    }
    crate::term::conjuncts(arg)
}
