//! Canonical term output with operator syntax.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::reader::{is_alnum, is_symbol_char, OpType, OperatorTable};
use crate::term::{Atom, Term};

fn ops() -> &'static OperatorTable {
    static OPS: OnceLock<OperatorTable> = OnceLock::new();
    OPS.get_or_init(OperatorTable::default)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct WriteOptions {
    /// Quote atoms that would not read back as themselves.
    pub quoted: bool,
    /// Print variables by source name instead of `_<id>`.
    pub var_names: bool,
}

/// `writeq/1` output: quoted atoms, `_<id>` variables.
pub fn to_canonical(t: &Term) -> String {
    write_term(t, WriteOptions { quoted: true, var_names: false })
}

/// `write/1` output.
pub fn to_text(t: &Term) -> String {
    write_term(t, WriteOptions { quoted: false, var_names: false })
}

pub fn write_term(t: &Term, opts: WriteOptions) -> String {
    let w = Writer::new(t, opts);
    let mut out = String::new();
    w.term(t, 1200, &mut out);
    out
}

/// Listing form of a clause: `Head :- G1, G2.` with source variable names.
pub fn format_clause(t: &Term) -> String {
    let opts = WriteOptions { quoted: true, var_names: true };
    let w = Writer::new(t, opts);
    let mut out = String::new();
    match t {
        Term::Compound(f, args) if f == ":-" && args.len() == 2 => {
            w.term(&args[0], 1199, &mut out);
            out.push_str(" :- ");
            let goals = crate::term::conjuncts(&args[1]);
            for (i, g) in goals.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                w.term(g, 999, &mut out);
            }
        }
        _ => w.term(t, 1200, &mut out),
    }
    out.push('.');
    out
}

pub fn atom_needs_quotes(name: &str) -> bool {
    let mut chars = name.chars();
    let Some(first) = chars.next() else {
        return true;
    };
    if matches!(name, "[]" | "{}" | "!" | ";") {
        return false;
    }
    if first.is_lowercase() {
        return !name.chars().all(is_alnum);
    }
    if name.chars().all(is_symbol_char) {
        return name == "." || name.starts_with("/*") || name.contains('%');
    }
    true
}

pub fn quote_atom(name: &str) -> String {
    let mut out = String::from("'");
    for c in name.chars() {
        match c {
            '\'' => out.push_str("\\'"),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}

struct Writer {
    opts: WriteOptions,
    /// Names that are shared by several variable ids.
    ambiguous: HashMap<String, bool>,
}

impl Writer {
    fn new(t: &Term, opts: WriteOptions) -> Self {
        let mut seen: HashMap<String, usize> = HashMap::new();
        let mut ambiguous = HashMap::new();
        if opts.var_names {
            t.for_each_var(&mut |v| {
                let prev = *seen.entry(v.name.to_string()).or_insert(v.id);
                if prev != v.id {
                    ambiguous.insert(v.name.to_string(), true);
                }
            });
        }
        Writer { opts, ambiguous }
    }

    fn atom(&self, a: &Atom) -> String {
        let name = a.as_str();
        if self.opts.quoted && (atom_needs_quotes(name) || name == "," || name == "|") {
            quote_atom(name)
        } else {
            name.to_string()
        }
    }

    fn term(&self, t: &Term, max: u16, out: &mut String) {
        match t {
            Term::Var(v) => {
                if self.opts.var_names && &*v.name != "_" && !self.ambiguous.contains_key(&*v.name) {
                    push_glued(out, &v.name);
                } else if self.opts.var_names && &*v.name != "_" {
                    push_glued(out, &format!("{}_{}", v.name, v.id));
                } else {
                    push_glued(out, &format!("_{}", v.id));
                }
            }
            Term::Int(n) => push_glued(out, &n.to_string()),
            Term::Atom(a) => {
                let text = self.atom(a);
                if max < 999 && ops().is_op(a.as_str()) {
                    push_glued(out, &format!("({text})"));
                } else {
                    push_glued(out, &text);
                }
            }
            Term::Compound(f, args) => self.compound(f, args, max, out),
        }
    }

    fn compound(&self, f: &Atom, args: &[Term], max: u16, out: &mut String) {
        let name = f.as_str();
        if name == "." && args.len() == 2 {
            return self.list(args, out);
        }
        if name == "{}" && args.len() == 1 {
            out.push('{');
            self.term(&args[0], 1200, out);
            out.push('}');
            return;
        }
        if args.len() == 2 && name != "|" {
            if let Some(op) = ops().infix(name) {
                let (la, ra) = op.arg_priorities();
                let open = op.priority > max;
                if open {
                    push_glued(out, "(");
                }
                self.term(&args[0], la, out);
                if name == "," {
                    out.push(',');
                } else if name.chars().all(is_alnum) {
                    out.push(' ');
                    out.push_str(&self.atom(f));
                    out.push(' ');
                } else {
                    push_glued(out, &self.atom(f));
                }
                let mut right = String::new();
                self.term(&args[1], ra, &mut right);
                push_glued(out, &right);
                if open {
                    out.push(')');
                }
                return;
            }
        }
        if args.len() == 1 {
            if let Some(op) = ops().prefix(name) {
                let numeric_arg = matches!(args[0], Term::Int(_)) && (name == "-" || name == "+");
                if !numeric_arg {
                    let (_, ra) = op.arg_priorities();
                    let open = op.priority > max;
                    if open {
                        push_glued(out, "(");
                    }
                    push_glued(out, &self.atom(f));
                    let mut operand = String::new();
                    let operand_max = if op.kind == OpType::Fy { ra } else { ra.min(op.priority - 1) };
                    self.term(&args[0], operand_max, &mut operand);
                    if operand.starts_with('(') || name.chars().all(is_alnum) {
                        out.push(' ');
                        out.push_str(&operand);
                    } else {
                        push_glued(out, &operand);
                    }
                    if open {
                        out.push(')');
                    }
                    return;
                }
            }
        }
        let functor = if self.opts.quoted && matches!(name, "[]" | "{}") { quote_atom(name) } else { self.atom(f) };
        push_glued(out, &functor);
        out.push('(');
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            self.term(a, 999, out);
        }
        out.push(')');
    }

    fn list(&self, args: &[Term], out: &mut String) {
        push_glued(out, "[");
        self.term(&args[0], 999, out);
        let mut tail = &args[1];
        loop {
            match tail {
                Term::Compound(f, a) if f == "." && a.len() == 2 => {
                    out.push(',');
                    self.term(&a[0], 999, out);
                    tail = &a[1];
                }
                Term::Atom(a) if a == "[]" => break,
                other => {
                    out.push('|');
                    self.term(other, 999, out);
                    break;
                }
            }
        }
        out.push(']');
    }
}

/// Appends `text`, inserting a space where the two pieces would otherwise
/// lex as one token.
fn push_glued(out: &mut String, text: &str) {
    if let (Some(last), Some(first)) = (out.chars().last(), text.chars().next()) {
        let glue = (is_symbol_char(last) && is_symbol_char(first)) || (is_alnum(last) && is_alnum(first));
        if glue {
            out.push(' ');
        }
    }
    out.push_str(text);
}
