//! The command-line front end: validate, convert, check, solve and stats
//! over XCSP 2.1 files.
//!
//! Results go to stdout, diagnostics to stderr, never interleaved. Exit
//! codes: 0 success / valid / satisfied; 1 negative result (invalid,
//! unsatisfied, no solution, formula false); 2 usage or I/O error; 3
//! parse or validation hard error (including budget exhaustion).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::document::{self, Diagnostic, Notation};
use crate::model::{ConstraintRef, Instance};
use crate::semantics::{
    self, Assignment, Budget, SolutionReport, SolveError, SolveMode, SolveResult,
};
use crate::validate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_HARD: i32 = 3;

/// Environment variable overriding the default solve node budget.
pub const BUDGET_ENV: &str = "XCSP_NODE_BUDGET";

#[derive(Parser)]
#[command(
    name = "xcsp",
    version,
    about = "Parse, validate, convert and solve XCSP 2.1 constraint-network instances"
)]
struct Cli {
    /// Suppress warnings on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    /// Output format for reports and results.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Machine,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum NotationArg {
    Tagged,
    Abridged,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    First,
    All,
    Count,
    MinCost,
    Qcsp,
}

#[derive(Subcommand)]
enum Command {
    /// Check a document structurally (and optionally against the
    /// competition restrictions); exit 0 iff it passes.
    Validate {
        path: PathBuf,
        /// Also enforce every competition restriction.
        #[arg(long)]
        strict_competition: bool,
    },
    /// Convert a document to the tagged or abridged notation.
    Convert {
        path: PathBuf,
        /// Target notation.
        #[arg(long, value_enum)]
        to: NotationArg,
        /// Write to a file instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a full assignment against an instance.
    Check {
        path: PathBuf,
        /// Bindings as `V0=2,V1=4` (commas or whitespace).
        #[arg(long)]
        assignment: Option<String>,
        /// File with one `name=value` binding per line.
        #[arg(long)]
        assignment_file: Option<PathBuf>,
    },
    /// Solve by exhaustive search (or evaluate a QCSP).
    Solve {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::First)]
        mode: ModeArg,
        /// Node budget (default 10000000, or the XCSP_NODE_BUDGET variable).
        #[arg(long)]
        limit: Option<u64>,
    },
    /// Summarize an instance: counts, arity, search-space size, globals.
    Stats { path: PathBuf },
}

/// Runs the CLI against explicit argument and output streams; returns the
/// process exit code. The first argument is the program name.
pub fn run<O: Write, E: Write>(args: &[String], stdout: &mut O, stderr: &mut E) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders --help/--version as "errors" that exit 0
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };
    let mut ctx = Context {
        stdout,
        stderr,
        quiet: cli.quiet,
        format: cli.format,
    };
    match cli.command {
        Command::Validate {
            path,
            strict_competition,
        } => ctx.validate(&path, strict_competition),
        Command::Convert { path, to, output } => ctx.convert(&path, to, output.as_deref()),
        Command::Check {
            path,
            assignment,
            assignment_file,
        } => ctx.check(&path, assignment.as_deref(), assignment_file.as_deref()),
        Command::Solve { path, mode, limit } => ctx.solve(&path, mode, limit),
        Command::Stats { path } => ctx.stats(&path),
    }
}

struct Context<'a, O: Write, E: Write> {
    stdout: &'a mut O,
    stderr: &'a mut E,
    quiet: bool,
    format: OutputFormat,
}

impl<O: Write, E: Write> Context<'_, O, E> {
    fn emit_diagnostics(&mut self, diagnostics: &[Diagnostic]) {
        for d in diagnostics {
            if self.quiet && !d.is_error() {
                continue;
            }
            let _ = writeln!(self.stderr, "{d}");
        }
    }

    fn load(&mut self, path: &Path) -> Result<Instance, i32> {
        let bytes = match std::fs::read(path) {
            Ok(b) => b,
            Err(e) => {
                let _ = writeln!(self.stderr, "error: cannot read {}: {e}", path.display());
                return Err(EXIT_USAGE);
            }
        };
        match document::load_instance(&bytes) {
            Ok(loaded) => {
                self.emit_diagnostics(&loaded.diagnostics);
                Ok(loaded.instance)
            }
            Err(e) => {
                self.emit_diagnostics(&e.diagnostics);
                Err(EXIT_HARD)
            }
        }
    }

    fn validate(&mut self, path: &Path, strict: bool) -> i32 {
        let bytes = match std::fs::read(path) {
            Ok(b) => b,
            Err(e) => {
                let _ = writeln!(self.stderr, "error: cannot read {}: {e}", path.display());
                return EXIT_USAGE;
            }
        };
        let loaded = match document::load_instance(&bytes) {
            Ok(loaded) => loaded,
            Err(e) => {
                self.emit_diagnostics(&e.diagnostics);
                let _ = writeln!(
                    self.stderr,
                    "error: {}: document failed to load",
                    path.display()
                );
                return EXIT_HARD;
            }
        };
        self.emit_diagnostics(&loaded.diagnostics);
        let report = if strict {
            validate::validate_competition(&loaded.instance)
        } else {
            validate::validate_structure(&loaded.instance)
        };
        match self.format {
            OutputFormat::Text => {
                let _ = write!(self.stdout, "{}", report.to_text());
            }
            OutputFormat::Machine => {
                let _ = writeln!(self.stdout, "{}", report.to_machine());
            }
        }
        if report.passed {
            EXIT_OK
        } else {
            EXIT_NEGATIVE
        }
    }

    fn convert(&mut self, path: &Path, to: NotationArg, output: Option<&Path>) -> i32 {
        let instance = match self.load(path) {
            Ok(i) => i,
            Err(code) => return code,
        };
        let notation = match to {
            NotationArg::Tagged => Notation::Tagged,
            NotationArg::Abridged => Notation::Abridged,
        };
        let bytes = document::write_instance(&instance, notation);
        match output {
            Some(out) => {
                if let Err(e) = std::fs::write(out, &bytes) {
                    let _ = writeln!(self.stderr, "error: cannot write {}: {e}", out.display());
                    return EXIT_USAGE;
                }
            }
            None => {
                let _ = self.stdout.write_all(&bytes);
            }
        }
        EXIT_OK
    }

    fn check(&mut self, path: &Path, inline: Option<&str>, file: Option<&Path>) -> i32 {
        let text = match (inline, file) {
            (Some(text), None) => text.to_owned(),
            (None, Some(file)) => match std::fs::read_to_string(file) {
                Ok(t) => t,
                Err(e) => {
                    let _ = writeln!(self.stderr, "error: cannot read {}: {e}", file.display());
                    return EXIT_USAGE;
                }
            },
            _ => {
                let _ = writeln!(
                    self.stderr,
                    "error: provide exactly one of --assignment or --assignment-file"
                );
                return EXIT_USAGE;
            }
        };
        let assignment = match Assignment::parse(&text) {
            Ok(a) => a,
            Err(e) => {
                let _ = writeln!(self.stderr, "error: malformed assignment: {e}");
                return EXIT_USAGE;
            }
        };
        let instance = match self.load(path) {
            Ok(i) => i,
            Err(code) => return code,
        };
        let report = match semantics::check_solution(&instance, &assignment) {
            Ok(r) => r,
            Err(e) => {
                let _ = writeln!(self.stderr, "error: {e}");
                return EXIT_HARD;
            }
        };
        match &report {
            SolutionReport::Csp {
                satisfied,
                violated,
            } => {
                match self.format {
                    OutputFormat::Text => {
                        if *satisfied {
                            let _ = writeln!(self.stdout, "SATISFIED");
                        } else {
                            let _ = writeln!(self.stdout, "VIOLATED {}", violated.join(" "));
                        }
                    }
                    OutputFormat::Machine => {
                        let record = serde_json::json!({
                            "kind": "CSP",
                            "satisfied": satisfied,
                            "violated": violated,
                        });
                        let _ = writeln!(self.stdout, "{record}");
                    }
                }
                if *satisfied {
                    EXIT_OK
                } else {
                    EXIT_NEGATIVE
                }
            }
            SolutionReport::Wcsp {
                total_cost,
                consistent,
            } => {
                match self.format {
                    OutputFormat::Text => {
                        let _ = writeln!(
                            self.stdout,
                            "totalCost={total_cost} consistent={consistent}"
                        );
                    }
                    OutputFormat::Machine => {
                        let record = serde_json::json!({
                            "kind": "WCSP",
                            "totalCost": total_cost.to_string(),
                            "consistent": consistent,
                        });
                        let _ = writeln!(self.stdout, "{record}");
                    }
                }
                if *consistent {
                    EXIT_OK
                } else {
                    EXIT_NEGATIVE
                }
            }
        }
    }

    fn budget(&mut self, limit: Option<u64>) -> Budget {
        if let Some(limit) = limit {
            return Budget(limit);
        }
        if let Ok(raw) = std::env::var(BUDGET_ENV) {
            if let Ok(v) = raw.trim().parse::<u64>() {
                return Budget(v);
            }
            let _ = writeln!(
                self.stderr,
                "warning: ignoring non-integer {BUDGET_ENV}={raw}"
            );
        }
        Budget::default()
    }

    fn solve(&mut self, path: &Path, mode: ModeArg, limit: Option<u64>) -> i32 {
        let budget = self.budget(limit);
        let instance = match self.load(path) {
            Ok(i) => i,
            Err(code) => return code,
        };
        if mode == ModeArg::Qcsp {
            return match semantics::eval_qcsp(&instance, budget) {
                Ok(value) => {
                    let _ = writeln!(self.stdout, "{}", if value { "TRUE" } else { "FALSE" });
                    if value {
                        EXIT_OK
                    } else {
                        EXIT_NEGATIVE
                    }
                }
                Err(e) => self.solve_error(e),
            };
        }
        let mode = match mode {
            ModeArg::First => SolveMode::First,
            ModeArg::All => SolveMode::All,
            ModeArg::Count => SolveMode::Count,
            ModeArg::MinCost => SolveMode::MinCost,
            ModeArg::Qcsp => unreachable!(),
        };
        match semantics::solve_bruteforce(&instance, mode, budget) {
            Ok(SolveResult::Assignments(solutions)) => {
                for solution in &solutions {
                    let _ = writeln!(self.stdout, "{solution}");
                }
                if solutions.is_empty() {
                    EXIT_NEGATIVE
                } else {
                    EXIT_OK
                }
            }
            Ok(SolveResult::Count(count)) => {
                let _ = writeln!(self.stdout, "{count}");
                if count > 0 {
                    EXIT_OK
                } else {
                    EXIT_NEGATIVE
                }
            }
            Ok(SolveResult::MinCost { cost, assignment }) => {
                let _ = writeln!(self.stdout, "{cost}");
                let _ = writeln!(self.stdout, "{assignment}");
                let consistent = match instance.maximal_cost {
                    Some(k) => cost < k,
                    None => false,
                };
                if consistent {
                    EXIT_OK
                } else {
                    EXIT_NEGATIVE
                }
            }
            Err(e) => self.solve_error(e),
        }
    }

    fn solve_error(&mut self, e: SolveError) -> i32 {
        match e {
            SolveError::BadMode(_) => {
                let _ = writeln!(self.stderr, "error: {e}");
                EXIT_USAGE
            }
            SolveError::BudgetExceeded { explored, .. } => {
                let _ = writeln!(
                    self.stderr,
                    "error: node budget exhausted after {explored} nodes; partial results discarded"
                );
                EXIT_HARD
            }
            SolveError::Eval(e) => {
                let _ = writeln!(self.stderr, "error: {e}");
                EXIT_HARD
            }
        }
    }

    fn stats(&mut self, path: &Path) -> i32 {
        let instance = match self.load(path) {
            Ok(i) => i,
            Err(code) => return code,
        };
        let max_arity = instance
            .all_constraints()
            .map(|c| c.scope.len())
            .max()
            .unwrap_or(0);
        if let Some(declared) = instance.presentation.max_constraint_arity {
            if declared != max_arity as u64 {
                let _ = writeln!(
                    self.stderr,
                    "warning: presentation declares maxConstraintArity={declared} but the computed value is {max_arity}"
                );
            }
        }
        let mut space: u128 = 1;
        for variable in &instance.variables {
            let size = instance
                .domain_of(variable.name.as_str())
                .map(|d| d.values.len() as u128)
                .unwrap_or(0);
            space = space.saturating_mul(size);
        }
        let mut globals: BTreeMap<String, u64> = BTreeMap::new();
        for c in instance.all_constraints() {
            if let ConstraintRef::Global(name) = &c.reference {
                *globals.entry(name.to_ascii_lowercase()).or_default() += 1;
            }
        }
        let record = StatsRecord {
            instance_type: instance.presentation.instance_type.as_str(),
            domains: instance.domains.len(),
            variables: instance.variables.len(),
            relations: instance.relations.len(),
            predicates: instance.predicates.len(),
            functions: instance.functions.len(),
            constraints: instance.constraints.len(),
            max_arity,
            search_space: space.to_string(),
            globals,
        };
        match self.format {
            OutputFormat::Text => {
                let _ = writeln!(self.stdout, "type={}", record.instance_type);
                let _ = writeln!(self.stdout, "domains={}", record.domains);
                let _ = writeln!(self.stdout, "variables={}", record.variables);
                let _ = writeln!(self.stdout, "relations={}", record.relations);
                let _ = writeln!(self.stdout, "predicates={}", record.predicates);
                let _ = writeln!(self.stdout, "functions={}", record.functions);
                let _ = writeln!(self.stdout, "constraints={}", record.constraints);
                let _ = writeln!(self.stdout, "maxArity={}", record.max_arity);
                let _ = writeln!(self.stdout, "space={}", record.search_space);
                for (name, count) in &record.globals {
                    let _ = writeln!(self.stdout, "global.{name}={count}");
                }
            }
            OutputFormat::Machine => {
                let _ = writeln!(
                    self.stdout,
                    "{}",
                    serde_json::to_string_pretty(&record).expect("stats serialize")
                );
            }
        }
        EXIT_OK
    }
}

#[derive(Serialize)]
struct StatsRecord {
    #[serde(rename = "type")]
    instance_type: &'static str,
    domains: usize,
    variables: usize,
    relations: usize,
    predicates: usize,
    functions: usize,
    constraints: usize,
    #[serde(rename = "maxArity")]
    max_arity: usize,
    /// Product of all variable domain sizes, as a decimal string.
    #[serde(rename = "searchSpace")]
    search_space: String,
    globals: BTreeMap<String, u64>,
}
