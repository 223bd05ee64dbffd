use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpType {
    Xfx,
    Xfy,
    Yfx,
    Fy,
    Fx,
    Xf,
    Yf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpClass {
    Prefix,
    Infix,
    Postfix,
}

impl OpType {
    pub fn class(self) -> OpClass {
        match self {
            OpType::Xfx | OpType::Xfy | OpType::Yfx => OpClass::Infix,
            OpType::Fy | OpType::Fx => OpClass::Prefix,
            OpType::Xf | OpType::Yf => OpClass::Postfix,
        }
    }
}

impl fmt::Display for OpType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OpType::Xfx => "xfx",
            OpType::Xfy => "xfy",
            OpType::Yfx => "yfx",
            OpType::Fy => "fy",
            OpType::Fx => "fx",
            OpType::Xf => "xf",
            OpType::Yf => "yf",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpDef {
    pub priority: u16,
    pub kind: OpType,
    pub name: String,
}

impl OpDef {
    /// Maximum priorities of the (left, right) operands.
    pub fn arg_priorities(&self) -> (u16, u16) {
        let p = self.priority;
        match self.kind {
            OpType::Xfx => (p - 1, p - 1),
            OpType::Xfy => (p - 1, p),
            OpType::Yfx => (p, p - 1),
            OpType::Fy => (0, p),
            OpType::Fx => (0, p - 1),
            OpType::Xf => (p - 1, 0),
            OpType::Yf => (p, 0),
        }
    }
}

/// A fixed operator table. At most one definition per (name, class).
#[derive(Clone, Debug)]
pub struct OperatorTable {
    entries: Vec<OpDef>,
}

impl Default for OperatorTable {
    fn default() -> Self {
        use OpType::*;
        let table: &[(u16, OpType, &str)] = &[
            (1200, Xfx, ":-"),
            (1200, Xfx, "-->"),
            (1200, Fx, ":-"),
            (1200, Fx, "?-"),
            (1150, Fx, "meta_predicate"),
            (1150, Fx, "metapredicate"),
            (1150, Fx, "module_transparent"),
            (1150, Fx, "dynamic"),
            (1100, Xfy, ";"),
            (1100, Xfy, "|"),
            (1050, Xfy, "->"),
            (1000, Xfy, ","),
            (900, Fy, "\\+"),
            (700, Xfx, "="),
            (700, Xfx, "\\="),
            (700, Xfx, "=="),
            (700, Xfx, "\\=="),
            (700, Xfx, "=.."),
            (700, Xfx, "is"),
            (700, Xfx, "<"),
            (700, Xfx, ">"),
            (700, Xfx, "=<"),
            (700, Xfx, ">="),
            (700, Xfx, "=:="),
            (700, Xfx, "=\\="),
            (500, Yfx, "+"),
            (500, Yfx, "-"),
            (400, Yfx, "*"),
            (400, Yfx, "/"),
            (400, Yfx, "//"),
            (400, Yfx, "mod"),
            (200, Xfy, "^"),
            (200, Fy, "-"),
            (200, Fy, "+"),
            (200, Xfy, ":"),
            (200, Xfy, "::"),
        ];
        OperatorTable { entries: table.iter().map(|&(priority, kind, name)| OpDef { priority, kind, name: name.to_string() }).collect() }
    }
}

impl OperatorTable {
    pub fn entries(&self) -> &[OpDef] {
        &self.entries
    }

    pub fn lookup(&self, name: &str, class: OpClass) -> Option<&OpDef> {
        self.entries.iter().find(|e| e.name == name && e.kind.class() == class)
    }

    pub fn prefix(&self, name: &str) -> Option<&OpDef> {
        self.lookup(name, OpClass::Prefix)
    }

    pub fn infix(&self, name: &str) -> Option<&OpDef> {
        self.lookup(name, OpClass::Infix)
    }

    pub fn postfix(&self, name: &str) -> Option<&OpDef> {
        self.lookup(name, OpClass::Postfix)
    }

    pub fn is_op(&self, name: &str) -> bool {
        self.entries.iter().any(|e| e.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn required_entries_present() {
        let t = OperatorTable::default();
        let check = |name: &str, class, prio, kind| {
            let op = t.lookup(name, class).unwrap_or_else(|| panic!("missing {name}"));
            assert_eq!((op.priority, op.kind), (prio, kind), "{name}");
        };
        check(":-", OpClass::Infix, 1200, OpType::Xfx);
        check(":-", OpClass::Prefix, 1200, OpType::Fx);
        check(",", OpClass::Infix, 1000, OpType::Xfy);
        check(";", OpClass::Infix, 1100, OpType::Xfy);
        check("->", OpClass::Infix, 1050, OpType::Xfy);
        check(":", OpClass::Infix, 200, OpType::Xfy);
        check("=", OpClass::Infix, 700, OpType::Xfx);
        check("=..", OpClass::Infix, 700, OpType::Xfx);
        check("\\+", OpClass::Prefix, 900, OpType::Fy);
        check("::", OpClass::Infix, 200, OpType::Xfy);
    }

    #[test]
    fn no_ambiguous_entries() {
        let t = OperatorTable::default();
        for (i, a) in t.entries().iter().enumerate() {
            for b in &t.entries()[i + 1..] {
                assert!(!(a.name == b.name && a.kind.class() == b.kind.class()), "duplicate {} {:?}", a.name, a.kind);
            }
        }
    }
}
