//! Operator precedence parser over a token slice.

use std::sync::Arc;

use super::lexer::{Token, TokenKind};
use super::ops::OperatorTable;
use crate::error::{Location, SyntaxError};
use crate::term::{Atom, Term, Var};

pub(crate) struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    ops: &'a OperatorTable,
    vars: Vec<(String, usize)>,
    next_var: usize,
    eof: Location,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(tokens: &'a [Token], ops: &'a OperatorTable, eof: Location) -> Self {
        Parser { tokens, pos: 0, ops, vars: Vec::new(), next_var: 0, eof }
    }

    pub(crate) fn at_eof(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub(crate) fn pos(&self) -> usize {
        self.pos
    }

    pub(crate) fn var_count(&self) -> usize {
        self.next_var
    }

    /// Starts a fresh variable scope.
    pub(crate) fn reset_vars(&mut self) {
        self.vars.clear();
        self.next_var = 0;
    }

    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, offset: usize) -> Option<&'a Token> {
        self.tokens.get(self.pos + offset)
    }

    fn next(&mut self) -> Result<&'a Token, SyntaxError> {
        let tok = self.tokens.get(self.pos).ok_or_else(|| SyntaxError::new("unexpected end of input", self.eof.clone()))?;
        self.pos += 1;
        Ok(tok)
    }

    fn current_location(&self) -> Location {
        self.peek().map(|t| t.location.clone()).unwrap_or_else(|| self.eof.clone())
    }

    fn expect_punct(&mut self, c: char) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(Token { kind: TokenKind::Punct(p), .. }) if *p == c => {
                self.pos += 1;
                Ok(())
            }
            Some(tok) => Err(SyntaxError::new(format!("expected `{c}`, found {}", describe(&tok.kind)), tok.location.clone())),
            None => Err(SyntaxError::new(format!("expected `{c}`, found end of input"), self.eof.clone())),
        }
    }

    pub(crate) fn expect_end(&mut self) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(Token { kind: TokenKind::End, .. }) => {
                self.pos += 1;
                Ok(())
            }
            Some(tok) => {
                Err(SyntaxError::new(format!("operator priority clash or unexpected {}", describe(&tok.kind)), tok.location.clone()))
            }
            None => Err(SyntaxError::new("missing `.` at end of clause", self.eof.clone())),
        }
    }

    fn variable(&mut self, name: &str) -> Term {
        if name == "_" {
            let id = self.next_var;
            self.next_var += 1;
            return Term::Var(Var { name: Arc::from("_"), id });
        }
        if let Some((_, id)) = self.vars.iter().find(|(n, _)| n == name) {
            return Term::var(name, *id);
        }
        let id = self.next_var;
        self.next_var += 1;
        self.vars.push((name.to_string(), id));
        Term::var(name, id)
    }

    fn is_term_start(tok: Option<&Token>) -> bool {
        match tok.map(|t| &t.kind) {
            Some(TokenKind::Punct(c)) => matches!(c, '(' | '[' | '{'),
            Some(TokenKind::End) | None => false,
            Some(_) => true,
        }
    }

    /// Whether the name at the cursor should be read as a prefix operator
    /// application rather than a plain atom.
    fn prefix_applies(&self) -> bool {
        let next = self.peek();
        if !Self::is_term_start(next) {
            return false;
        }
        if let Some(Token { kind: TokenKind::Name { text, quoted: false }, .. }) = next {
            let functional = matches!(self.peek_at(1), Some(Token { kind: TokenKind::Punct('('), layout_before: false, .. }));
            if self.ops.infix(text).is_some() && self.ops.prefix(text).is_none() && !functional {
                return false;
            }
        }
        true
    }

    fn arguments(&mut self) -> Result<Vec<Term>, SyntaxError> {
        let mut args = vec![self.parse(999)?.0];
        while matches!(self.peek(), Some(Token { kind: TokenKind::Punct(','), .. })) {
            self.pos += 1;
            args.push(self.parse(999)?.0);
        }
        self.expect_punct(')')?;
        Ok(args)
    }

    fn list(&mut self) -> Result<Term, SyntaxError> {
        let mut items = vec![self.parse(999)?.0];
        loop {
            match self.peek().map(|t| &t.kind) {
                Some(TokenKind::Punct(',')) => {
                    self.pos += 1;
                    items.push(self.parse(999)?.0);
                }
                Some(TokenKind::Punct('|')) => {
                    self.pos += 1;
                    let tail = self.parse(999)?.0;
                    self.expect_punct(']')?;
                    return Ok(Term::list_with_tail(items, tail));
                }
                _ => {
                    self.expect_punct(']')?;
                    return Ok(Term::list(items));
                }
            }
        }
    }

    fn primary(&mut self, max: u16) -> Result<(Term, u16), SyntaxError> {
        let tok = self.next()?;
        match &tok.kind {
            TokenKind::Int(n) => Ok((Term::Int(*n), 0)),
            TokenKind::Var(name) => Ok((self.variable(name), 0)),
            TokenKind::Punct('(') => {
                let (t, _) = self.parse(1200)?;
                self.expect_punct(')')?;
                Ok((t, 0))
            }
            TokenKind::Punct('[') => {
                if matches!(self.peek(), Some(Token { kind: TokenKind::Punct(']'), .. })) {
                    self.pos += 1;
                    return Ok((Term::nil(), 0));
                }
                Ok((self.list()?, 0))
            }
            TokenKind::Punct('{') => {
                if matches!(self.peek(), Some(Token { kind: TokenKind::Punct('}'), .. })) {
                    self.pos += 1;
                    return Ok((Term::atom("{}"), 0));
                }
                let (t, _) = self.parse(1200)?;
                self.expect_punct('}')?;
                Ok((Term::compound("{}", vec![t]), 0))
            }
            TokenKind::Name { text, quoted } => {
                let functional = matches!(self.peek(), Some(Token { kind: TokenKind::Punct('('), layout_before: false, .. }));
                if functional {
                    self.pos += 1;
                    let args = self.arguments()?;
                    return Ok((Term::Compound(Atom::new(text), args.into()), 0));
                }
                if *quoted {
                    return Ok((Term::atom(text), 0));
                }
                if text == "-" {
                    if let Some(Token { kind: TokenKind::Int(n), layout_before: false, .. }) = self.peek() {
                        self.pos += 1;
                        return Ok((Term::Int(-n), 0));
                    }
                }
                if let Some(op) = self.ops.prefix(text) {
                    if self.prefix_applies() {
                        if op.priority > max {
                            return Err(SyntaxError::new(
                                format!("operator priority clash: prefix `{text}` ({}) above {max}", op.priority),
                                tok.location.clone(),
                            ));
                        }
                        let (_, right) = op.arg_priorities();
                        let priority = op.priority;
                        let (arg, _) = self.parse(right)?;
                        return Ok((Term::compound(text, vec![arg]), priority));
                    }
                }
                Ok((Term::atom(text), 0))
            }
            TokenKind::Punct(c) => Err(SyntaxError::new(format!("unexpected `{c}`"), tok.location.clone())),
            TokenKind::End => Err(SyntaxError::new("unexpected end of clause", tok.location.clone())),
        }
    }

    /// Parses a term whose priority is at most `max`.
    pub(crate) fn parse(&mut self, max: u16) -> Result<(Term, u16), SyntaxError> {
        let (mut left, mut left_prio) = self.primary(max)?;
        while let Some(tok) = self.peek() {
            let name = match &tok.kind {
                TokenKind::Name { text, quoted: false } => text.as_str(),
                TokenKind::Punct(',') => ",",
                TokenKind::Punct('|') => "|",
                _ => break,
            };
            if let Some(op) = self.ops.infix(name) {
                let (la, ra) = op.arg_priorities();
                if op.priority <= max && left_prio <= la {
                    self.pos += 1;
                    let (right, _) = self.parse(ra)?;
                    let functor = if name == "|" { ";" } else { name };
                    left = Term::compound(functor, vec![left, right]);
                    left_prio = op.priority;
                    continue;
                }
            }
            if let Some(op) = self.ops.postfix(name) {
                let (la, _) = op.arg_priorities();
                if op.priority <= max && left_prio <= la {
                    self.pos += 1;
                    left = Term::compound(name, vec![left]);
                    left_prio = op.priority;
                    continue;
                }
            }
            break;
        }
        Ok((left, left_prio))
    }

    pub(crate) fn location(&self) -> Location {
        self.current_location()
    }
}

fn describe(kind: &TokenKind) -> String {
    match kind {
        TokenKind::Name { text, .. } => format!("`{text}`"),
        TokenKind::Var(v) => format!("variable `{v}`"),
        TokenKind::Int(n) => format!("integer `{n}`"),
        TokenKind::Punct(c) => format!("`{c}`"),
        TokenKind::End => "end of clause".to_string(),
    }
}
