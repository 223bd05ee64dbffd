//! The table of built-in predicates known to the resolver.

use super::template::{MetaArgSpec, MetaTemplate, Mode};
use crate::term::Indicator;

use MetaArgSpec::{Closure, ContextAware, Normal};

const Q: MetaArgSpec = Normal(Mode::Question);

/// Fixed-arity builtins with their templates, in listing order.
const TABLE: &[(&str, usize, &[MetaArgSpec])] = &[
    ("true", 0, &[]),
    ("fail", 0, &[]),
    ("false", 0, &[]),
    ("!", 0, &[]),
    (",", 2, &[Closure(0), Closure(0)]),
    (";", 2, &[Closure(0), Closure(0)]),
    ("->", 2, &[Closure(0), Closure(0)]),
    ("\\+", 1, &[Closure(0)]),
    ("catch", 3, &[Closure(0), Q, Closure(0)]),
    ("throw", 1, &[]),
    ("findall", 3, &[Q, Closure(0), Normal(Mode::Minus)]),
    ("=", 2, &[]),
    ("\\=", 2, &[]),
    ("==", 2, &[]),
    ("\\==", 2, &[]),
    ("=..", 2, &[]),
    ("var", 1, &[]),
    ("nonvar", 1, &[]),
    ("atom", 1, &[]),
    ("integer", 1, &[]),
    ("atomic", 1, &[]),
    ("callable", 1, &[]),
    ("functor", 3, &[]),
    ("arg", 3, &[]),
    ("copy_term", 2, &[]),
    ("is", 2, &[]),
    ("<", 2, &[]),
    (">", 2, &[]),
    ("=<", 2, &[]),
    (">=", 2, &[]),
    ("=:=", 2, &[]),
    ("=\\=", 2, &[]),
    ("assertz", 1, &[ContextAware]),
    ("retract", 1, &[ContextAware]),
    ("write", 1, &[]),
    ("writeq", 1, &[]),
    ("nl", 0, &[]),
    ("strip_module", 3, &[]),
    ("context_module", 1, &[]),
    ("predicate_property", 2, &[]),
];

pub fn is_builtin(ind: &Indicator) -> bool {
    (ind.name == "call" && ind.arity >= 1) || TABLE.iter().any(|(n, a, _)| ind.name == *n && ind.arity == *a)
}

/// Template of a builtin, if it has meta-arguments.
pub fn builtin_template(ind: &Indicator) -> Option<MetaTemplate> {
    if ind.name == "call" && ind.arity >= 1 {
        let mut specs = vec![Closure(ind.arity - 1)];
        specs.resize(ind.arity, Q);
        return Some(MetaTemplate::new("call", specs));
    }
    TABLE
        .iter()
        .find(|(n, a, specs)| ind.name == *n && ind.arity == *a && !specs.is_empty())
        .map(|(n, _, specs)| MetaTemplate::new(n, specs.to_vec()))
}

/// Builtins that read the calling context directly instead of through a template.
pub fn is_context_sensitive(ind: &Indicator) -> bool {
    matches!((ind.name.as_str(), ind.arity), ("strip_module", 3) | ("context_module", 1) | ("predicate_property", 2))
}

/// Goals whose arguments are executed as part of the enclosing body.
pub fn is_control(ind: &Indicator) -> bool {
    matches!((ind.name.as_str(), ind.arity), (",", 2) | (";", 2) | ("->", 2) | ("!", 0))
}

/// Builtin indicators in table order, with `call/1` standing for the family.
pub fn builtin_indicators() -> impl Iterator<Item = Indicator> {
    TABLE.iter().map(|(n, a, _)| Indicator::new(n, *a)).chain(std::iter::once(Indicator::new("call", 1)))
}
