//! Reading program text: tokens, terms, clauses and directives.

mod lexer;
mod ops;
mod parser;

use std::fmt;

pub use lexer::{end_location, is_alnum, is_symbol_char, tokenize, Token, TokenKind};
pub use ops::{OpClass, OpDef, OpType, OperatorTable};

use crate::error::{Location, SyntaxError};
use crate::term::Term;
use parser::Parser;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ItemKind {
    Clause,
    Directive,
}

/// One clause or directive of a source file.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceItem {
    pub kind: ItemKind,
    pub term: Term,
    pub location: Location,
    /// Number of distinct variable ids used by `term` (ids are `0..var_count`).
    pub var_count: usize,
}

impl SourceItem {
    /// The argument of a `:- D` item.
    pub fn directive_body(&self) -> Option<&Term> {
        match (&self.kind, &self.term) {
            (ItemKind::Directive, Term::Compound(_, args)) => Some(&args[0]),
            _ => None,
        }
    }
}

/// Parses a complete token list as a single term. A trailing end token is
/// allowed.
pub fn parse_term(tokens: &[Token], ops: &OperatorTable) -> Result<Term, SyntaxError> {
    let eof = tokens.last().map(|t| t.location.clone()).unwrap_or_else(|| Location::new("<input>", 1, 1));
    let mut p = Parser::new(tokens, ops, eof);
    let (term, _) = p.parse(1200)?;
    if !p.at_eof() {
        p.expect_end()?;
        if !p.at_eof() {
            return Err(SyntaxError::new("unexpected text after end of term", p.location()));
        }
    }
    Ok(term)
}

/// Reads a single term from text, returning it with its variable count.
pub fn read_term(text: &str, ops: &OperatorTable) -> Result<(Term, usize), SyntaxError> {
    let file = "<input>";
    let tokens = tokenize(text, file)?;
    let mut p = Parser::new(&tokens, ops, end_location(text, file));
    let (term, _) = p.parse(1200)?;
    if !p.at_eof() {
        p.expect_end()?;
        if !p.at_eof() {
            return Err(SyntaxError::new("unexpected text after end of term", p.location()));
        }
    }
    Ok((term, p.var_count()))
}

/// Parses a whole program into clauses and directives, in file order.
pub fn parse_program(text: &str, file: &str, ops: &OperatorTable) -> Result<Vec<SourceItem>, SyntaxError> {
    let tokens = tokenize(text, file)?;
    let mut p = Parser::new(&tokens, ops, end_location(text, file));
    let mut items = Vec::new();
    while !p.at_eof() {
        p.reset_vars();
        let start = tokens[p.pos()].location.clone();
        let annotate = |e: SyntaxError| {
            if e.location == start {
                e
            } else {
                SyntaxError::new(format!("{} (in item starting at {}:{})", e.message, start.line, start.column), e.location)
            }
        };
        let (term, _) = p.parse(1200).map_err(annotate)?;
        p.expect_end().map_err(annotate)?;
        let kind = if term.is_functor(":-", 1) { ItemKind::Directive } else { ItemKind::Clause };
        items.push(SourceItem { kind, term, location: start, var_count: p.var_count() });
    }
    Ok(items)
}

/// The dialect a directive belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DirectiveForm {
    ModuleDecl,
    ExportDecl,
    UseModule,
    MetaPredicate,
    MetapredicateIso,
    ModuleTransparent,
    Tool,
    Unknown,
}

impl fmt::Display for DirectiveForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DirectiveForm::ModuleDecl => "module_decl",
            DirectiveForm::ExportDecl => "export_decl",
            DirectiveForm::UseModule => "use_module",
            DirectiveForm::MetaPredicate => "meta_predicate",
            DirectiveForm::MetapredicateIso => "metapredicate_iso",
            DirectiveForm::ModuleTransparent => "module_transparent",
            DirectiveForm::Tool => "tool",
            DirectiveForm::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

/// Classifies the argument of a `:-/1` item. Total.
pub fn classify_directive(d: &Term) -> DirectiveForm {
    let Some(ind) = d.indicator() else {
        return DirectiveForm::Unknown;
    };
    match (ind.name.as_str(), ind.arity) {
        ("module", 1 | 2) => DirectiveForm::ModuleDecl,
        ("export", 1) => DirectiveForm::ExportDecl,
        ("use_module", 1 | 2) => DirectiveForm::UseModule,
        ("meta_predicate", 1) => DirectiveForm::MetaPredicate,
        ("metapredicate", 1) => DirectiveForm::MetapredicateIso,
        ("module_transparent", 1) => DirectiveForm::ModuleTransparent,
        ("tool", 2) => DirectiveForm::Tool,
        _ => DirectiveForm::Unknown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Term {
        read_term(text, &OperatorTable::default()).unwrap().0
    }

    fn v(name: &str, id: usize) -> Term {
        Term::var(name, id)
    }

    fn a(name: &str) -> Term {
        Term::atom(name)
    }

    fn c(name: &str, args: Vec<Term>) -> Term {
        Term::compound(name, args)
    }

    #[test]
    fn colon_is_right_associative() {
        assert_eq!(read("a:b:G"), c(":", vec![a("a"), c(":", vec![a("b"), v("G", 0)])]));
    }

    #[test]
    fn clause_shape() {
        let x = || v("X", 0);
        assert_eq!(read("f(X) :- g(X), h(X)"), c(":-", vec![c("f", vec![x()]), c(",", vec![c("g", vec![x()]), c("h", vec![x()])])]));
    }

    #[test]
    fn single_arg_compound() {
        assert_eq!(read("call(Goal)"), c("call", vec![v("Goal", 0)]));
    }

    #[test]
    fn qualified_conjunction() {
        assert_eq!(read("M:(A, B)"), c(":", vec![v("M", 0), c(",", vec![v("A", 1), v("B", 2)])]));
    }

    #[test]
    fn if_then_else_nesting() {
        assert_eq!(read("(a -> b ; c)"), c(";", vec![c("->", vec![a("a"), a("b")]), a("c")]));
    }

    #[test]
    fn operator_atoms_as_arguments() {
        assert_eq!(read("mp(0, -)"), c("mp", vec![Term::Int(0), a("-")]));
        assert_eq!(read("p(*, :)"), c("p", vec![a("*"), a(":")]));
        assert_eq!(read("my_call(::)"), c("my_call", vec![a("::")]));
        assert_eq!(read("p(++)"), c("p", vec![a("++")]));
        assert_eq!(read("p(+, ?, @)"), c("p", vec![a("+"), a("?"), a("@")]));
    }

    #[test]
    fn negative_numbers() {
        assert_eq!(read("p(-1)"), c("p", vec![Term::Int(-1)]));
        assert_eq!(read("1 - 1"), c("-", vec![Term::Int(1), Term::Int(1)]));
        assert_eq!(read("- 1"), c("-", vec![Term::Int(1)]));
        assert_eq!(read("-(1)"), c("-", vec![Term::Int(1)]));
    }

    #[test]
    fn prefix_operators() {
        assert_eq!(read("\\+ a = b"), c("\\+", vec![c("=", vec![a("a"), a("b")])]));
        assert_eq!(read(":- dynamic foo/1"), c(":-", vec![c("dynamic", vec![c("/", vec![a("foo"), Term::Int(1)])])]));
        assert_eq!(read("- = x"), c("=", vec![a("-"), a("x")]));
    }

    #[test]
    fn lists() {
        assert_eq!(read("[a, b | T]"), Term::list_with_tail(vec![a("a"), a("b")], v("T", 0)));
        assert_eq!(read("[]"), Term::nil());
        assert_eq!(read("[my_call/1]"), Term::list(vec![c("/", vec![a("my_call"), Term::Int(1)])]));
    }

    #[test]
    fn xfx_clash_is_error() {
        assert!(read_term("a = b = c", &OperatorTable::default()).is_err());
    }

    #[test]
    fn dangling_operator_is_error() {
        let err = read_term("a :- ", &OperatorTable::default()).unwrap_err();
        assert!(err.message.contains("end of input"), "{}", err.message);
    }

    #[test]
    fn missing_end_dot_reports_end_of_input() {
        let err = parse_program("a :- b", "t.pl", &OperatorTable::default()).unwrap_err();
        assert_eq!((err.location.line, err.location.column), (1, 7));
        assert!(err.message.contains("missing `.`"));
    }

    #[test]
    fn anonymous_variables_are_distinct() {
        let t = read("f(_, _, X, X)");
        let args = t.args();
        assert_ne!(args[0], args[1]);
        assert_eq!(args[2], args[3]);
    }

    const LIBRARY: &str = ":- module(library, [my_call/1]).

:- meta_predicate(my_call(0)).
my_call(Goal) :-
    write('Calling: '), writeq(Goal), nl, call(Goal).

me(library).
";

    const CLIENT: &str = ":- module(client, [test/1]).

:- use_module(library, [my_call/1]).

test(Me) :-
    my_call(me(Me)).

me(client).
";

    #[test]
    fn library_module_items() {
        let items = parse_program(LIBRARY, "library.pl", &OperatorTable::default()).unwrap();
        let kinds: Vec<_> = items.iter().map(|i| i.kind).collect();
        assert_eq!(kinds, vec![ItemKind::Directive, ItemKind::Directive, ItemKind::Clause, ItemKind::Clause]);
        assert_eq!(classify_directive(items[0].directive_body().unwrap()), DirectiveForm::ModuleDecl);
        assert_eq!(classify_directive(items[1].directive_body().unwrap()), DirectiveForm::MetaPredicate);
        assert_eq!(items[2].location.line, 4);
        assert_eq!(items[3].term, c("me", vec![a("library")]));
    }

    #[test]
    fn client_module_items() {
        let items = parse_program(CLIENT, "client.pl", &OperatorTable::default()).unwrap();
        assert_eq!(items.len(), 4);
        assert_eq!(classify_directive(items[1].directive_body().unwrap()), DirectiveForm::UseModule);
    }

    #[test]
    fn empty_program() {
        assert!(parse_program("", "e.pl", &OperatorTable::default()).unwrap().is_empty());
        assert!(parse_program("% only a comment\n", "e.pl", &OperatorTable::default()).unwrap().is_empty());
    }

    #[test]
    fn locations_strictly_increase() {
        let items = parse_program(LIBRARY, "library.pl", &OperatorTable::default()).unwrap();
        for w in items.windows(2) {
            assert!((w[0].location.line, w[0].location.column) < (w[1].location.line, w[1].location.column));
        }
    }

    #[test]
    fn classify_forms() {
        assert_eq!(classify_directive(&read("meta_predicate(my_call(0))")), DirectiveForm::MetaPredicate);
        assert_eq!(classify_directive(&read("tool(mp/2, mp/3)")), DirectiveForm::Tool);
        assert_eq!(classify_directive(&read("foo(bar)")), DirectiveForm::Unknown);
        assert_eq!(classify_directive(&read("metapredicate(p(*, :))")), DirectiveForm::MetapredicateIso);
        assert_eq!(classify_directive(&read("module_transparent(mp/2)")), DirectiveForm::ModuleTransparent);
        assert_eq!(classify_directive(&read("export(mp/2)")), DirectiveForm::ExportDecl);
        assert_eq!(classify_directive(&read("module(m)")), DirectiveForm::ModuleDecl);
        assert_eq!(classify_directive(&Term::Int(3)), DirectiveForm::Unknown);
    }
}
