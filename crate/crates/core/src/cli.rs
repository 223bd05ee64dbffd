//! Command-line front end.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{bench, Variant};
use crate::engine::{Engine, Flags, Solutions};
use crate::error::LoadError;
use crate::expander::{expand_database, SemanticsFlag};
use crate::lint::{has_errors, lint, Diagnostic, LintOptions, Severity};
use crate::moduledb::{load_files, render_program, Database};
use crate::specializer::specialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_LOAD: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "modlog", version, about = "Prolog with modules, meta-predicates and both meanings of `:/2`")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Meaning of explicit qualification `M:G`.
    #[arg(long, global = true, value_enum, default_value_t = Semantics::Calling)]
    pub semantics: Semantics,
    /// Largest N accepted by call/N.
    #[arg(long = "max-call-n", global = true, default_value_t = 255)]
    pub max_call_n: usize,
    /// Treat lint errors as load failures.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Explicit calls to non-exported predicates raise permission errors.
    #[arg(long = "strict-scope", global = true)]
    pub strict_scope: bool,
    /// Print every solution instead of the first.
    #[arg(long, global = true)]
    pub all: bool,
    /// Refuse to bind a variable to a term containing it.
    #[arg(long = "occurs-check", global = true)]
    pub occurs_check: bool,
    /// Skip load-time expansion; qualify meta-arguments only at run time.
    #[arg(long = "no-expand", global = true)]
    pub no_expand: bool,
    /// Lint output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Semantics {
    /// `M:G` sets the lookup module and the calling context.
    Calling,
    /// `M:G` sets only the lookup module.
    Lookup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Records,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Load files and run one goal.
    Run {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(short = 'g', long)]
        goal: String,
    },
    /// Interactive top level.
    Repl { files: Vec<PathBuf> },
    /// Print the program with meta-arguments qualified at load time.
    Expand {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Check meta-predicate definitions and directives.
    Lint {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Print the program with known meta-calls specialized away.
    Specialize {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Time a goal under each execution strategy.
    Bench {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(short = 'g', long)]
        goal: String,
        #[arg(short = 'n', long = "reps", default_value_t = 1000)]
        reps: usize,
        /// Restrict to the named variants.
        #[arg(long = "variant")]
        variants: Vec<VariantArg>,
    },
}

#[derive(Clone, Copy, Debug)]
pub struct VariantArg(pub Variant);

impl std::str::FromStr for VariantArg {
    type Err = crate::bench::UnknownVariant;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(VariantArg)
    }
}

impl GlobalArgs {
    pub fn flags(&self) -> Flags {
        Flags {
            semantics: SemanticsFlag { colon_sets_calling_context: self.semantics == Semantics::Calling, max_call_n: self.max_call_n },
            occurs_check: self.occurs_check,
            strict_scope: self.strict_scope,
        }
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli, stdin, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_LOAD
        }
    }
}

fn read_sources(files: &[PathBuf]) -> Result<Vec<(String, String)>, LoadError> {
    files
        .iter()
        .map(|path| {
            let name = path.display().to_string();
            std::fs::read_to_string(path).map(|text| (name.clone(), text)).map_err(|e| LoadError::Strict(format!("{name}: {e}")))
        })
        .collect()
}

/// Loads files without expansion, reporting notices and strict-mode lint errors.
fn load(files: &[PathBuf], global: &GlobalArgs, err: &mut dyn Write) -> Result<(Database, Vec<(String, String)>), LoadError> {
    let sources = read_sources(files)?;
    let mut db = Database::new();
    let notices = load_files(&mut db, sources.iter().map(|(f, t)| (f.as_str(), t.as_str())))?;
    for n in notices {
        let _ = writeln!(err, "{n}");
    }
    if global.strict {
        let diagnostics = lint(&db, &LintOptions::default());
        if has_errors(&diagnostics) {
            let errors: Vec<String> = diagnostics.iter().filter(|d| d.severity == Severity::Error).map(Diagnostic::text).collect();
            return Err(LoadError::Strict(format!("lint errors under --strict:\n{}", errors.join("\n"))));
        }
    }
    Ok((db, sources))
}

fn engine_for(files: &[PathBuf], global: &GlobalArgs, err: &mut dyn Write) -> Result<Engine, LoadError> {
    let (mut db, _) = load(files, global, err)?;
    if !global.no_expand {
        expand_database(&mut db);
    }
    Ok(Engine::new(db, global.flags()))
}

fn execute(cli: &Cli, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, LoadError> {
    let global = &cli.global;
    match &cli.command {
        Command::Run { files, goal } => {
            let mut engine = engine_for(files, global, err)?;
            Ok(run_goal(&mut engine, goal, global.all, out, err))
        }
        Command::Repl { files } => {
            let mut engine = engine_for(files, global, err)?;
            repl(&mut engine, global.all, stdin, out, err);
            Ok(EXIT_OK)
        }
        Command::Expand { files } => {
            let (mut db, _) = load(files, global, err)?;
            expand_database(&mut db);
            let _ = write!(out, "{}", render_program(&db));
            Ok(EXIT_OK)
        }
        Command::Lint { files } => {
            let (db, _) = load(files, &GlobalArgs { strict: false, ..global.clone() }, err)?;
            let diagnostics = lint(&db, &LintOptions::default());
            for d in &diagnostics {
                let line = match global.format {
                    Format::Text => d.text(),
                    Format::Records => d.record(),
                };
                let _ = writeln!(out, "{line}");
            }
            let failing = diagnostics.iter().any(|d| d.severity >= Severity::Warning);
            Ok(if failing { EXIT_FAILURE } else { EXIT_OK })
        }
        Command::Specialize { files } => {
            let (db, _) = load(files, global, err)?;
            let (db, report) = specialize(&db, global.flags().semantics)?;
            for note in &report.notes {
                let _ = writeln!(err, "{note}");
            }
            let _ = write!(out, "{}", render_program(&db));
            Ok(EXIT_OK)
        }
        Command::Bench { files, goal, reps, variants } => {
            let (_, sources) = load(files, global, err)?;
            let variants: Vec<Variant> = if variants.is_empty() { Variant::ALL.to_vec() } else { variants.iter().map(|v| v.0).collect() };
            match bench(sources.iter().map(|(f, t)| (f.as_str(), t.as_str())), goal, *reps, &variants, global.flags()) {
                Ok(report) => {
                    let _ = write!(out, "{report}");
                    Ok(EXIT_OK)
                }
                Err(crate::bench::BenchError::Load(e)) => Err(e),
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    Ok(EXIT_FAILURE)
                }
            }
        }
    }
}

fn drain(solutions: &mut Solutions<'_>, out: &mut dyn Write, err: &mut dyn Write) {
    let _ = write!(out, "{}", solutions.take_output());
    for w in solutions.take_warnings() {
        let _ = writeln!(err, "{w}");
    }
}

/// Transcript: program output, then `Var = Value` lines, then `yes` or `no`.
/// With `all`, solutions are separated by `;` lines.
pub fn run_goal(engine: &mut Engine, goal: &str, all: bool, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut solutions = match engine.query(goal) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut found = 0;
    loop {
        match solutions.next() {
            Some(Ok(s)) => {
                if found > 0 {
                    let _ = writeln!(out, ";");
                }
                found += 1;
                drain(&mut solutions, out, err);
                for line in s.lines() {
                    let _ = writeln!(out, "{line}");
                }
                if !all {
                    break;
                }
            }
            Some(Err(e)) => {
                drain(&mut solutions, out, err);
                let _ = writeln!(err, "{e}");
                return EXIT_FAILURE;
            }
            None => {
                drain(&mut solutions, out, err);
                break;
            }
        }
    }
    if found > 0 {
        let _ = writeln!(out, "yes");
        EXIT_OK
    } else {
        let _ = writeln!(out, "no");
        EXIT_FAILURE
    }
}

/// Reads one query per line. After a solution with bindings, a line holding
/// `;` asks for the next one; anything else accepts it.
pub fn repl(engine: &mut Engine, all: bool, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) {
    let mut lines = stdin.lines();
    loop {
        let _ = write!(out, "?- ");
        let _ = out.flush();
        let Some(Ok(line)) = lines.next() else {
            let _ = writeln!(out);
            return;
        };
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if matches!(text, "halt" | "halt.") {
            return;
        }
        let mut solutions = match engine.query(text) {
            Ok(s) => s,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                continue;
            }
        };
        loop {
            match solutions.next() {
                Some(Ok(s)) => {
                    drain(&mut solutions, out, err);
                    let bindings = s.lines();
                    for l in &bindings {
                        let _ = writeln!(out, "{l}");
                    }
                    if all {
                        let _ = writeln!(out, ";");
                        continue;
                    }
                    if bindings.is_empty() {
                        let _ = writeln!(out, "yes");
                        break;
                    }
                    let _ = out.flush();
                    match lines.next() {
                        Some(Ok(answer)) if answer.trim() == ";" => continue,
                        _ => {
                            let _ = writeln!(out, "yes");
                            break;
                        }
                    }
                }
                Some(Err(e)) => {
                    drain(&mut solutions, out, err);
                    let _ = writeln!(err, "{e}");
                    break;
                }
                None => {
                    drain(&mut solutions, out, err);
                    let _ = writeln!(out, "no");
                    break;
                }
            }
        }
    }
}
