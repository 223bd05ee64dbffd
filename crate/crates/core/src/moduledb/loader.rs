//! Turns parsed source items into module database entries.

use std::fmt;

use super::template::{normalize_template_lenient, template_terms};
use super::{Clause, Database, DirectiveRecord};
use crate::error::{LoadError, Location};
use crate::reader::{classify_directive, parse_program, DirectiveForm, ItemKind, OperatorTable, SourceItem};
use crate::term::{Atom, Indicator, Term};

/// A non-fatal observation made while loading.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoaderNotice {
    pub location: Location,
    pub message: String,
}

impl fmt::Display for LoaderNotice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Skip the end-of-load consistency checks (used when more files follow).
    pub defer_validation: bool,
}

fn directive_error(message: impl Into<String>, location: &Location) -> LoadError {
    LoadError::Directive { message: message.into(), location: location.clone() }
}

/// Reads `N/A` indicators from a list, a comma sequence or a single term.
fn indicators(t: &Term, location: &Location) -> Result<Vec<Indicator>, LoadError> {
    template_terms(t)
        .iter()
        .map(|i| {
            Indicator::from_term(i).ok_or_else(|| {
                directive_error(format!("expected a predicate indicator, found `{}`", crate::engine::write::to_canonical(i)), location)
            })
        })
        .collect()
}

fn module_name(t: &Term, location: &Location) -> Result<Atom, LoadError> {
    t.as_atom().cloned().ok_or_else(|| directive_error("module name must be an atom", location))
}

impl Database {
    /// Parses and loads one source file.
    pub fn load_source(&mut self, text: &str, file: &str, options: LoadOptions) -> Result<Vec<LoaderNotice>, LoadError> {
        let items = parse_program(text, file, &OperatorTable::default())?;
        self.load_items(&items, options)
    }

    /// Loads items of one file; the file starts in module `user`.
    pub fn load_items(&mut self, items: &[SourceItem], options: LoadOptions) -> Result<Vec<LoaderNotice>, LoadError> {
        let mut notices = Vec::new();
        let mut current = Atom::new("user");
        for item in items {
            match item.kind {
                ItemKind::Clause => {
                    let clause = Clause::from_term(&item.term, item.var_count, item.location.clone())?;
                    self.add_clause(&current, clause)?;
                }
                ItemKind::Directive => {
                    let body = item.directive_body().expect("directive items have a body");
                    self.directive(body, &item.location, &mut current, &mut notices)?;
                }
            }
        }
        if !options.defer_validation {
            self.validate()?;
        }
        Ok(notices)
    }

    fn directive(&mut self, d: &Term, location: &Location, current: &mut Atom, notices: &mut Vec<LoaderNotice>) -> Result<(), LoadError> {
        let form = classify_directive(d);
        let args = d.args();
        if form == DirectiveForm::ModuleDecl {
            let name = module_name(&args[0], location)?;
            let exports = match args.get(1) {
                Some(list) => indicators(list, location)?,
                None => Vec::new(),
            };
            self.declare_module(name.as_str(), &exports, location.clone())?;
            // loading a module file makes its exports visible at the top level
            let user = Atom::new("user");
            if name != user {
                self.register_import(&user, &name, None, location)?;
            }
            *current = name;
        }
        self.ensure_module(current).directives.push(DirectiveRecord { form, term: d.clone(), location: location.clone() });
        match form {
            DirectiveForm::ModuleDecl => {}
            DirectiveForm::ExportDecl => {
                let inds = indicators(&args[0], location)?;
                self.ensure_module(current).exports.extend(inds);
            }
            DirectiveForm::UseModule => {
                let from = module_name(&args[0], location)?;
                match args.get(1) {
                    Some(list) => {
                        let inds = indicators(list, location)?;
                        self.register_import(current, &from, Some(&inds), location)?;
                    }
                    None => self.register_import(current, &from, None, location)?,
                }
            }
            DirectiveForm::MetaPredicate | DirectiveForm::MetapredicateIso => {
                for raw in template_terms(&args[0]) {
                    match normalize_template_lenient(form, &raw) {
                        Ok(template) => {
                            let ind = template.indicator();
                            let def = self.ensure_module(current).predicate_mut(&ind);
                            if def.transparent {
                                return Err(directive_error(format!("`{ind}` is already declared module transparent"), location));
                            }
                            def.template = Some(template);
                        }
                        Err(e) => {
                            notices.push(LoaderNotice { location: location.clone(), message: format!("ignoring malformed template: {e}") })
                        }
                    }
                }
            }
            DirectiveForm::ModuleTransparent => {
                for ind in indicators(&args[0], location)? {
                    let def = self.ensure_module(current).predicate_mut(&ind);
                    if def.template.is_some() {
                        return Err(directive_error(format!("`{ind}` already has a meta-predicate template"), location));
                    }
                    def.transparent = true;
                }
            }
            DirectiveForm::Tool => {
                let (interface, implementation) = match (Indicator::from_term(&args[0]), Indicator::from_term(&args[1])) {
                    (Some(i), Some(j)) => (i, j),
                    _ => return Err(directive_error("tool/2 expects two predicate indicators", location)),
                };
                if implementation.arity != interface.arity + 1 {
                    return Err(directive_error(
                        format!("tool implementation `{implementation}` must have arity {}", interface.arity + 1),
                        location,
                    ));
                }
                self.ensure_module(current).tools.insert(interface, implementation);
            }
            DirectiveForm::Unknown => match d.indicator() {
                Some(ind) if ind.name == "dynamic" && ind.arity == 1 => {
                    for ind in indicators(&args[0], location)? {
                        self.ensure_module(current).predicate_mut(&ind).dynamic = true;
                    }
                }
                Some(ind) if ind.name == "mode" && ind.arity == 2 => {}
                Some(ind) if ind.name == "op" && ind.arity == 3 => notices.push(LoaderNotice {
                    location: location.clone(),
                    message: "op/3 is not supported; the operator table is fixed".into(),
                }),
                _ => notices.push(LoaderNotice {
                    location: location.clone(),
                    message: format!("unknown directive `{}`", crate::engine::write::to_canonical(d)),
                }),
            },
        }
        Ok(())
    }
}

/// Loads several files in order, validating once at the end.
pub fn load_files<'a>(db: &mut Database, sources: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Vec<LoaderNotice>, LoadError> {
    let mut notices = Vec::new();
    for (file, text) in sources {
        notices.extend(db.load_source(text, file, LoadOptions { defer_validation: true })?);
    }
    db.validate()?;
    Ok(notices)
}
