mod experiment;
mod output;

use std::io::{BufRead, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use obskernel_core::control::Servo;
use obskernel_core::kernel::{heads, parse_expr};
use obskernel_core::rewrite::numeric_value;
use obskernel_core::script::{Interpreter, ScriptError};
use obskernel_core::theorems::run_theorem_suite;
use obskernel_core::{Expr, Session, Symbol};

use output::{Format, Sink};

#[derive(Parser, Debug)]
#[command(name = "obskernel", version, about = "Term rewriting with perturbations, constraints and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Rewrite step budget per evaluation.
    #[arg(long, global = true, value_parser = positive_usize)]
    budget: Option<usize>,
    /// Numeric tolerance.
    #[arg(long, global = true, value_parser = positive_f64)]
    tol: Option<f64>,
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Print each rewrite step.
    #[arg(long, global = true)]
    trace: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read-evaluate-print loop over standard input.
    Repl,
    /// Run a script file.
    Run { script: PathBuf },
    /// Find the root of a one-variable expression by dichotomy.
    Solve {
        expr: String,
        #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true, required = true)]
        bracket: Vec<f64>,
        /// The variable, when the expression has more than one free symbol.
        #[arg(long)]
        var: Option<String>,
    },
    /// Run an experiment described by a key=value file.
    Experiment { config: PathBuf },
    /// Check the perturbation theorems on random environments.
    Theorems {
        #[arg(long, default_value_t = 1000)]
        environments: usize,
    },
}

fn positive_usize(s: &str) -> Result<usize, String> {
    s.parse::<usize>().ok().filter(|n| *n > 0).ok_or_else(|| format!("expected a positive integer, got {s}"))
}

fn positive_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|x| *x > 0.0 && x.is_finite())
        .ok_or_else(|| format!("expected a positive number, got {s}"))
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Eval(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Eval(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

impl From<ScriptError> for CliError {
    fn from(e: ScriptError) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Eval(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl Cli {
    fn session(&self) -> Session {
        let mut s = Session::new();
        if let Some(b) = self.budget {
            s.budget.steps = b;
        }
        if let Some(t) = self.tol {
            s.tolerance = t;
        }
        s
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = Sink::new(cli.format);
    let result = match &cli.command {
        Command::Repl => repl(&cli, &mut out),
        Command::Run { script } => run(&cli, script, &mut out),
        Command::Solve { expr, bracket, var } => solve(&cli, expr, (bracket[0], bracket[1]), var.as_deref(), &mut out),
        Command::Experiment { config } => experiment::run(&cli, config, &mut out),
        Command::Theorems { environments } => theorems(&cli, *environments, &mut out),
    };
    let flushed = out.finish();
    match result.and(flushed.map_err(CliError::from)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Usage(m) | CliError::Eval(m)) = &e;
            eprintln!("error: {m}");
            ExitCode::from(e.code())
        }
    }
}

fn interpreter(cli: &Cli) -> Interpreter {
    let mut it = Interpreter::new(cli.session());
    it.trace = cli.trace;
    it
}

fn run(cli: &Cli, script: &std::path::Path, out: &mut Sink) -> Result<(), CliError> {
    let mut it = interpreter(cli);
    let mut written = Ok(());
    let mut n = 0;
    it.run_file_with(script, &mut |o| {
        n += 1;
        if written.is_ok() {
            written = out.statement(n, o);
        }
    })?;
    written
}

fn repl(cli: &Cli, out: &mut Sink) -> Result<(), CliError> {
    let mut it = interpreter(cli);
    let stdin = std::io::stdin();
    let interactive = stdin.is_terminal();
    let mut n = 0;
    let mut lines = stdin.lock().lines();
    loop {
        if interactive {
            print!("In: ");
            std::io::stdout().flush()?;
        }
        let Some(line) = lines.next() else { break };
        let line = line?;
        if matches!(line.trim(), ":quit" | ":q") {
            break;
        }
        if !interactive && cli.format == Format::Text && !line.trim().is_empty() {
            out.echo(&line)?;
        }
        match it.line(&line, n + 1) {
            Ok(outputs) => {
                for o in &outputs {
                    n += 1;
                    out.statement(n, o)?;
                }
            }
            Err(e) => {
                out.flush()?;
                eprintln!("error: {e}");
            }
        }
    }
    Ok(())
}

/// Symbols in argument position, excluding named constants.
fn free_symbols(e: &Expr, acc: &mut Vec<Symbol>) {
    match e {
        Expr::Symbol(s) => {
            if !matches!(s.name(), "Pi" | "E" | heads::TRUE | heads::FALSE) && !acc.contains(s) {
                acc.push(s.clone());
            }
        }
        Expr::Compound(c) => c.args.iter().for_each(|a| free_symbols(a, acc)),
        _ => {}
    }
}

fn solve(cli: &Cli, text: &str, (a, b): (f64, f64), var: Option<&str>, out: &mut Sink) -> Result<(), CliError> {
    let s = cli.session();
    let e = parse_expr(text).map_err(|err| CliError::Usage(err.to_string()))?;
    let var = match var {
        Some(v) => Expr::sym(v),
        None => {
            let mut syms = Vec::new();
            free_symbols(&e, &mut syms);
            match syms.as_slice() {
                [v] => Expr::Symbol(v.clone()),
                [] => return Err(CliError::Usage(format!("{e} has no variable"))),
                _ => {
                    let names: Vec<&str> = syms.iter().map(Symbol::name).collect();
                    return Err(CliError::Usage(format!(
                        "{e} has several variables ({}); pick one with --var",
                        names.join(", ")
                    )));
                }
            }
        }
    };
    let f = |z: f64| -> Result<f64, CliError> {
        let v = s.evaluate(&e.replace(&var, &Expr::real(z))).map_err(|err| CliError::Eval(err.to_string()))?;
        numeric_value(&v).map_err(|err| CliError::Eval(format!("{e} at {var} = {z:?}: {err}")))
    };
    f(a)?;
    f(b)?;
    let servo = Servo { tol: s.tolerance, ..Servo::default() };
    let root = servo.solve(|z| f(z).unwrap_or(f64::NAN), a, b).map_err(|err| CliError::Eval(err.to_string()))?;
    let residual = f(root.rho)?;
    out.root(&var, round_to_tol(root.rho, servo.tol), root.iterations, residual, cli.trace)
}

/// Drops digits below the tolerance so that exact roots print exactly.
fn round_to_tol(x: f64, tol: f64) -> f64 {
    let digits = (-tol.log10()).ceil().clamp(0.0, 17.0) as usize;
    format!("{x:.digits$}").parse().unwrap_or(x)
}

fn theorems(cli: &Cli, environments: usize, out: &mut Sink) -> Result<(), CliError> {
    let report = run_theorem_suite(environments, cli.seed.unwrap_or(0));
    out.theorems(&report)?;
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::Eval("theorem check failed".into()))
    }
}
