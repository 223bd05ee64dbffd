//! The module graph: predicate tables, exports, imports, templates,
//! transparency marks and tool links.

pub mod builtins;
mod loader;
pub mod template;

use std::sync::Arc;

use indexmap::{IndexMap, IndexSet};

pub use builtins::{builtin_template, is_builtin};
pub use loader::{load_files, LoadOptions, LoaderNotice};
pub use template::{normalize_template, normalize_template_lenient, MetaArgSpec, MetaTemplate, Mode, TemplateError};

use crate::error::{LoadError, Location};
use crate::reader::DirectiveForm;
use crate::term::{Atom, Indicator, Term};

#[derive(Clone, Debug, PartialEq)]
pub struct Clause {
    pub head: Term,
    /// `true` for facts.
    pub body: Term,
    /// Variable ids in head and body are `0..var_count`.
    pub var_count: usize,
    pub location: Location,
    /// Produced by a program transformation rather than read from source.
    pub generated: bool,
}

impl Clause {
    pub fn new(head: Term, body: Term, var_count: usize, location: Location) -> Self {
        Clause { head, body, var_count, location, generated: false }
    }

    /// Splits a `Head :- Body` or fact term.
    pub fn from_term(term: &Term, var_count: usize, location: Location) -> Result<Clause, LoadError> {
        let (head, body) = match term {
            Term::Compound(f, args) if f == ":-" && args.len() == 2 => (args[0].clone(), args[1].clone()),
            other => (other.clone(), Term::atom("true")),
        };
        if !head.is_callable() {
            return Err(LoadError::InvalidClause {
                message: format!("clause head `{}` is not callable", crate::engine::write::to_canonical(&head)),
                location,
            });
        }
        let body = match body {
            Term::Var(_) => Term::compound("call", vec![body]),
            Term::Int(_) => return Err(LoadError::InvalidClause { message: "clause body is not callable".into(), location }),
            b => b,
        };
        let var_count = var_count.max(head.max_var_id().max(body.max_var_id()).map_or(0, |m| m + 1));
        Ok(Clause::new(head, body, var_count, location))
    }

    pub fn indicator(&self) -> Indicator {
        self.head.indicator().expect("clause heads are callable")
    }

    pub fn is_fact(&self) -> bool {
        self.body == Term::atom("true")
    }

    pub fn to_term(&self) -> Term {
        if self.is_fact() {
            self.head.clone()
        } else {
            Term::compound(":-", vec![self.head.clone(), self.body.clone()])
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredicateDef {
    pub indicator: Indicator,
    /// Shared so running queries keep a snapshot while the store changes.
    pub clauses: Arc<Vec<Clause>>,
    pub template: Option<MetaTemplate>,
    pub transparent: bool,
    pub dynamic: bool,
}

impl PredicateDef {
    pub fn new(indicator: Indicator) -> Self {
        PredicateDef { indicator, clauses: Arc::new(Vec::new()), template: None, transparent: false, dynamic: false }
    }

    pub fn clauses_mut(&mut self) -> &mut Vec<Clause> {
        Arc::make_mut(&mut self.clauses)
    }
}

/// A directive as it appeared in the source, kept for diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectiveRecord {
    pub form: DirectiveForm,
    pub term: Term,
    pub location: Location,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModuleDef {
    pub name: Atom,
    pub exports: IndexSet<Indicator>,
    /// Indicator to the module it is imported from.
    pub imports: IndexMap<Indicator, Atom>,
    /// Modules imported with `use_module/1`: all of their exports are visible.
    pub import_all: Vec<Atom>,
    pub predicates: IndexMap<Indicator, PredicateDef>,
    /// Interface indicator to implementation indicator.
    pub tools: IndexMap<Indicator, Indicator>,
    pub directives: Vec<DirectiveRecord>,
    /// Where the module was declared; `None` for `user` and modules created at run time.
    pub location: Option<Location>,
}

impl ModuleDef {
    pub fn new(name: Atom) -> Self {
        ModuleDef {
            name,
            exports: IndexSet::new(),
            imports: IndexMap::new(),
            import_all: Vec::new(),
            predicates: IndexMap::new(),
            tools: IndexMap::new(),
            directives: Vec::new(),
            location: None,
        }
    }

    pub fn predicate_mut(&mut self, ind: &Indicator) -> &mut PredicateDef {
        self.predicates.entry(ind.clone()).or_insert_with(|| PredicateDef::new(ind.clone()))
    }
}

/// Outcome of resolving an indicator from a lookup module.
#[derive(Clone, Debug, PartialEq)]
pub enum Resolution {
    User { module: Atom },
    Tool { module: Atom, implementation: Indicator },
    Builtin,
    Unresolved,
}

#[derive(Clone, Debug)]
pub struct Database {
    modules: IndexMap<Atom, ModuleDef>,
}

impl Default for Database {
    fn default() -> Self {
        Self::new()
    }
}

impl Database {
    pub fn new() -> Self {
        let user = Atom::new("user");
        let mut modules = IndexMap::new();
        modules.insert(user.clone(), ModuleDef::new(user));
        Database { modules }
    }

    pub fn module(&self, name: &str) -> Option<&ModuleDef> {
        self.modules.get(&Atom::new(name))
    }

    pub fn module_mut(&mut self, name: &Atom) -> Option<&mut ModuleDef> {
        self.modules.get_mut(name)
    }

    pub fn modules(&self) -> impl Iterator<Item = &ModuleDef> {
        self.modules.values()
    }

    pub fn has_module(&self, name: &Atom) -> bool {
        self.modules.contains_key(name)
    }

    /// Registers a new, empty module.
    pub fn declare_module(&mut self, name: &str, exports: &[Indicator], location: Location) -> Result<&mut ModuleDef, LoadError> {
        let name = Atom::new(name);
        if self.modules.contains_key(&name) {
            return Err(LoadError::DuplicateModule { name: name.to_string(), location });
        }
        let mut def = ModuleDef::new(name.clone());
        def.exports.extend(exports.iter().cloned());
        def.location = Some(location);
        Ok(self.modules.entry(name).or_insert(def))
    }

    /// Returns the module, creating it if needed (used by the dynamic database).
    pub fn ensure_module(&mut self, name: &Atom) -> &mut ModuleDef {
        self.modules.entry(name.clone()).or_insert_with(|| ModuleDef::new(name.clone()))
    }

    /// Records import edges. Edges from a module that is not loaded yet stay
    /// provisional until [`Database::validate`] or the first call.
    pub fn register_import(&mut self, into: &Atom, from: &Atom, preds: Option<&[Indicator]>, location: &Location) -> Result<(), LoadError> {
        if let (Some(preds), Some(source)) = (preds, self.modules.get(from)) {
            for ind in preds {
                if !source.exports.contains(ind) {
                    return Err(LoadError::NotExported { indicator: ind.clone(), from: from.to_string(), location: location.clone() });
                }
            }
        }
        let target = self.ensure_module(into);
        match preds {
            None => {
                if !target.import_all.contains(from) {
                    target.import_all.push(from.clone());
                }
            }
            Some(preds) => {
                for ind in preds {
                    if target.predicates.get(ind).is_some_and(|p| !p.clauses.is_empty() || p.dynamic) {
                        return Err(LoadError::ImportConflict {
                            indicator: ind.clone(),
                            from: from.to_string(),
                            location: location.clone(),
                        });
                    }
                    target.imports.insert(ind.clone(), from.clone());
                }
            }
        }
        Ok(())
    }

    /// The module an indicator is imported from, looking through explicit
    /// imports and then whole-module imports.
    pub fn import_source(&self, module: &ModuleDef, ind: &Indicator) -> Option<Atom> {
        if let Some(src) = module.imports.get(ind) {
            return Some(src.clone());
        }
        module.import_all.iter().find(|src| self.modules.get(*src).is_some_and(|m| m.exports.contains(ind))).cloned()
    }

    /// Resolves `ind` starting at module `start`: local definitions, then
    /// import edges (followed through reexports), then builtins.
    pub fn lookup(&self, start: &Atom, ind: &Indicator) -> Result<Resolution, LoadError> {
        let mut visited: Vec<Atom> = Vec::new();
        let mut current = start.clone();
        loop {
            if visited.contains(&current) {
                let mut cycle: Vec<String> = visited.iter().map(|m| m.to_string()).collect();
                cycle.push(current.to_string());
                return Err(LoadError::ImportCycle(cycle));
            }
            visited.push(current.clone());
            let Some(module) = self.modules.get(&current) else {
                break;
            };
            if module.predicates.contains_key(ind) {
                return Ok(Resolution::User { module: current });
            }
            if let Some(implementation) = module.tools.get(ind) {
                return Ok(Resolution::Tool { module: current, implementation: implementation.clone() });
            }
            match self.import_source(module, ind) {
                Some(src) => current = src,
                None => break,
            }
        }
        if is_builtin(ind) {
            Ok(Resolution::Builtin)
        } else {
            Ok(Resolution::Unresolved)
        }
    }

    pub fn predicate(&self, module: &Atom, ind: &Indicator) -> Option<&PredicateDef> {
        self.modules.get(module)?.predicates.get(ind)
    }

    pub fn predicate_mut(&mut self, module: &Atom, ind: &Indicator) -> Option<&mut PredicateDef> {
        self.modules.get_mut(module)?.predicates.get_mut(ind)
    }

    /// Template of the predicate `ind` as seen from `module`, including builtins.
    pub fn template_for(&self, module: &Atom, ind: &Indicator) -> Option<MetaTemplate> {
        match self.lookup(module, ind).ok()? {
            Resolution::User { module } => self.predicate(&module, ind)?.template.clone(),
            Resolution::Builtin => builtin_template(ind),
            _ => None,
        }
    }

    /// Appends a clause to `module`, creating the predicate if needed.
    pub fn add_clause(&mut self, module: &Atom, clause: Clause) -> Result<(), LoadError> {
        let ind = clause.indicator();
        if is_builtin(&ind) {
            return Err(LoadError::Builtin { indicator: ind, location: clause.location });
        }
        let def = self.ensure_module(module);
        if let Some(from) = def.imports.get(&ind) {
            return Err(LoadError::ImportConflict { indicator: ind, from: from.to_string(), location: clause.location });
        }
        def.predicate_mut(&ind).clauses_mut().push(clause);
        Ok(())
    }

    /// End-of-load checks: exports are backed by something, imports from
    /// loaded modules name exported predicates, and import chains are acyclic.
    pub fn validate(&self) -> Result<(), LoadError> {
        for module in self.modules.values() {
            for (ind, from) in &module.imports {
                if let Some(source) = self.modules.get(from) {
                    if !source.exports.contains(ind) {
                        return Err(LoadError::NotExported {
                            indicator: ind.clone(),
                            from: from.to_string(),
                            location: module.location.clone().unwrap_or_else(|| Location::new("<unknown>", 0, 0)),
                        });
                    }
                }
                self.lookup(&module.name, ind)?;
            }
            for ind in &module.exports {
                let backed =
                    module.predicates.contains_key(ind) || module.tools.contains_key(ind) || self.import_source(module, ind).is_some();
                if !backed {
                    return Err(LoadError::UndefinedExport { module: module.name.to_string(), indicator: ind.clone() });
                }
            }
        }
        Ok(())
    }

    /// Every clause of every module, in module and definition order.
    pub fn all_clauses(&self) -> impl Iterator<Item = (&Atom, &PredicateDef, &Clause)> {
        self.modules.values().flat_map(|m| m.predicates.values().flat_map(move |p| p.clauses.iter().map(move |c| (&m.name, p, c))))
    }
}

/// Source text for the whole database: each module's directives in their
/// original order followed by its clauses, one per line. `user` comes first
/// so that the text loads back into the same modules.
pub fn render_program(db: &Database) -> String {
    use crate::engine::write::{format_clause, to_canonical};
    let mut out = String::new();
    for module in db.modules() {
        let declared = module.directives.iter().any(|d| d.form == DirectiveForm::ModuleDecl);
        if module.name != "user" && !declared {
            if module.predicates.values().all(|p| p.clauses.is_empty()) {
                continue;
            }
            out.push_str(&format!(":- module({}, []).\n", to_canonical(&Term::Atom(module.name.clone()))));
        }
        for d in &module.directives {
            out.push_str(&format!(":- {}.\n", to_canonical(&d.term)));
        }
        for pred in module.predicates.values() {
            for clause in pred.clauses.iter() {
                out.push_str(&format_clause(&clause.to_term()));
                out.push('\n');
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loc() -> Location {
        Location::new("t.pl", 1, 1)
    }

    fn fact(text: &str) -> Clause {
        let (t, n) = crate::reader::read_term(text, &crate::reader::OperatorTable::default()).unwrap();
        Clause::from_term(&t, n, loc()).unwrap()
    }

    fn atom(s: &str) -> Atom {
        Atom::new(s)
    }

    #[test]
    fn declare_library() {
        let mut db = Database::new();
        let m = db.declare_module("library", &[Indicator::new("my_call", 1)], loc()).unwrap();
        assert_eq!(m.exports.len(), 1);
        let m = db.declare_module("m", &[Indicator::new("mp", 2)], loc()).unwrap();
        assert_eq!(m.exports.len(), 1);
    }

    #[test]
    fn redeclare_user_fails() {
        let mut db = Database::new();
        assert!(matches!(db.declare_module("user", &[], loc()), Err(LoadError::DuplicateModule { .. })));
    }

    #[test]
    fn import_resolves_to_source() {
        let mut db = Database::new();
        db.declare_module("library", &[Indicator::new("my_call", 1)], loc()).unwrap();
        db.add_clause(&atom("library"), fact("my_call(G) :- call(G)")).unwrap();
        db.declare_module("client", &[], loc()).unwrap();
        db.register_import(&atom("client"), &atom("library"), Some(&[Indicator::new("my_call", 1)]), &loc()).unwrap();
        assert_eq!(db.lookup(&atom("client"), &Indicator::new("my_call", 1)).unwrap(), Resolution::User { module: atom("library") });
    }

    #[test]
    fn provisional_import() {
        let mut db = Database::new();
        db.declare_module("client", &[], loc()).unwrap();
        db.register_import(&atom("client"), &atom("later"), Some(&[Indicator::new("p", 1)]), &loc()).unwrap();
        assert_eq!(db.lookup(&atom("client"), &Indicator::new("p", 1)).unwrap(), Resolution::Unresolved);
    }

    #[test]
    fn import_of_unexported_fails_when_source_known() {
        let mut db = Database::new();
        db.declare_module("library", &[], loc()).unwrap();
        let err = db.register_import(&atom("user"), &atom("library"), Some(&[Indicator::new("me", 1)]), &loc());
        assert!(matches!(err, Err(LoadError::NotExported { .. })));
    }

    #[test]
    fn local_and_imported_conflict() {
        let mut db = Database::new();
        db.add_clause(&atom("user"), fact("p(1)")).unwrap();
        let err = db.register_import(&atom("user"), &atom("other"), Some(&[Indicator::new("p", 1)]), &loc());
        assert!(matches!(err, Err(LoadError::ImportConflict { .. })));

        let mut db = Database::new();
        db.register_import(&atom("user"), &atom("other"), Some(&[Indicator::new("p", 1)]), &loc()).unwrap();
        assert!(matches!(db.add_clause(&atom("user"), fact("p(1)")), Err(LoadError::ImportConflict { .. })));
    }

    #[test]
    fn lookup_order() {
        let db = Database::new();
        assert_eq!(db.lookup(&atom("user"), &Indicator::new(",", 2)).unwrap(), Resolution::Builtin);
        assert_eq!(db.lookup(&atom("fictitious"), &Indicator::new("predicate", 1)).unwrap(), Resolution::Unresolved);
    }

    #[test]
    fn reexport_chain_and_cycle() {
        let mut db = Database::new();
        let p = Indicator::new("p", 0);
        db.declare_module("a", std::slice::from_ref(&p), loc()).unwrap();
        db.declare_module("b", std::slice::from_ref(&p), loc()).unwrap();
        db.declare_module("c", std::slice::from_ref(&p), loc()).unwrap();
        db.add_clause(&atom("c"), fact("p")).unwrap();
        db.register_import(&atom("b"), &atom("c"), Some(std::slice::from_ref(&p)), &loc()).unwrap();
        db.register_import(&atom("a"), &atom("b"), Some(std::slice::from_ref(&p)), &loc()).unwrap();
        assert_eq!(db.lookup(&atom("a"), &p).unwrap(), Resolution::User { module: atom("c") });
        assert!(db.validate().is_ok());

        let q = Indicator::new("q", 0);
        let mut db = Database::new();
        db.declare_module("x", std::slice::from_ref(&q), loc()).unwrap();
        db.declare_module("y", std::slice::from_ref(&q), loc()).unwrap();
        db.register_import(&atom("x"), &atom("y"), Some(std::slice::from_ref(&q)), &loc()).unwrap();
        db.register_import(&atom("y"), &atom("x"), Some(std::slice::from_ref(&q)), &loc()).unwrap();
        match db.lookup(&atom("x"), &q) {
            Err(LoadError::ImportCycle(names)) => assert_eq!(names, vec!["x", "y", "x"]),
            other => panic!("{other:?}"),
        }
        assert!(db.validate().is_err());
    }

    #[test]
    fn builtins_cannot_be_redefined() {
        let mut db = Database::new();
        assert!(matches!(db.add_clause(&atom("user"), fact("call(x)")), Err(LoadError::Builtin { .. })));
    }

    #[test]
    fn undefined_export() {
        let mut db = Database::new();
        db.declare_module("m", &[Indicator::new("mp", 2)], loc()).unwrap();
        assert!(matches!(db.validate(), Err(LoadError::UndefinedExport { .. })));
    }
}
