//! Line-oriented scripts: statements, assertions, `//` comments and
//! `:directives`.

use std::path::{Path, PathBuf};

use crate::funalg::{funalg_pack, linear_pack};
use crate::kernel::{parse_statement, Expr, ParseError};
use crate::perturb::{definition_pack, error_expansion_pack, perturb_pack};
use crate::rewrite::{expansion_pack, EvalError, RuleSet, Session, TraceStep};

#[derive(Debug, thiserror::Error)]
pub enum ScriptError {
    #[error("line {line}: {error}")]
    Parse { line: usize, error: ParseError },
    #[error("line {line}: {error}")]
    Eval { line: usize, error: EvalError },
    #[error("line {line}: {message}")]
    Directive { line: usize, message: String },
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl ScriptError {
    /// File and usage problems, as opposed to evaluation failures.
    pub fn is_usage(&self) -> bool {
        matches!(self, ScriptError::Io { .. } | ScriptError::Directive { .. } | ScriptError::Parse { .. })
    }
}

/// Result of one executed statement.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub input: Expr,
    pub result: Expr,
    pub trace: Vec<TraceStep>,
}

/// Pack names accepted by `:load`.
pub const PACKS: [&str; 6] = ["funalg", "perturb", "error-expansion", "definition", "expansion", "linear"];

/// A named rule pack; `linear` takes the field as argument (default `K`).
pub fn pack_by_name(name: &str, arg: Option<&str>) -> Option<RuleSet> {
    Some(match name {
        "funalg" => funalg_pack(),
        "perturb" => perturb_pack(),
        "error-expansion" => error_expansion_pack(),
        "definition" => definition_pack(),
        "expansion" => expansion_pack(),
        "linear" => linear_pack(arg.unwrap_or("K")),
        _ => return None,
    })
}

/// A session driven by script lines.
#[derive(Clone, Default)]
pub struct Interpreter {
    pub session: Session,
    pub trace: bool,
    base: Option<PathBuf>,
}

impl Interpreter {
    pub fn new(session: Session) -> Self {
        Interpreter { session, trace: false, base: None }
    }

    /// Executes one line. Blank lines, comments and directives produce no
    /// output, except `:load` of a file, which returns its outputs.
    pub fn line(&mut self, text: &str, number: usize) -> Result<Vec<Output>, ScriptError> {
        let text = strip_comment(text).trim();
        if text.is_empty() {
            return Ok(Vec::new());
        }
        if let Some(directive) = text.strip_prefix(':') {
            return self.directive(directive, number);
        }
        let stmt = parse_statement(text).map_err(|error| ScriptError::Parse { line: number, error })?;
        let eval = |error| ScriptError::Eval { line: number, error };
        let (result, trace) = if self.trace && !is_statement(&stmt) {
            let (r, t) = self.session.evaluate_traced(&stmt);
            (r.map_err(eval)?, t)
        } else {
            (self.session.execute(&stmt).map_err(eval)?, Vec::new())
        };
        Ok(vec![Output { input: stmt, result, trace }])
    }

    /// Executes every line of `source`.
    pub fn run(&mut self, source: &str) -> Result<Vec<Output>, ScriptError> {
        let mut out = Vec::new();
        self.run_with(source, &mut |o| out.push(o.clone()))?;
        Ok(out)
    }

    /// Like [`Interpreter::run`], handing each output to `sink` as soon as
    /// its line has run.
    pub fn run_with(&mut self, source: &str, sink: &mut dyn FnMut(&Output)) -> Result<(), ScriptError> {
        for (i, line) in source.lines().enumerate() {
            self.line(line, i + 1)?.iter().for_each(&mut *sink);
        }
        Ok(())
    }

    /// Executes a script file; relative `:load` paths resolve against its
    /// directory.
    pub fn run_file(&mut self, path: &Path) -> Result<Vec<Output>, ScriptError> {
        let mut out = Vec::new();
        self.run_file_with(path, &mut |o| out.push(o.clone()))?;
        Ok(out)
    }

    pub fn run_file_with(&mut self, path: &Path, sink: &mut dyn FnMut(&Output)) -> Result<(), ScriptError> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| ScriptError::Io { path: path.to_path_buf(), message: e.to_string() })?;
        let saved = std::mem::replace(&mut self.base, path.parent().map(Path::to_path_buf));
        let result = self.run_with(&source, sink);
        self.base = saved;
        result
    }

    fn directive(&mut self, text: &str, line: usize) -> Result<Vec<Output>, ScriptError> {
        let mut words = text.split_whitespace();
        let name = words.next().unwrap_or("");
        let args: Vec<&str> = words.collect();
        let bad = |message: String| ScriptError::Directive { line, message };
        let positive = |arg: Option<&&str>| -> Result<usize, ScriptError> {
            arg.and_then(|a| a.parse::<usize>().ok())
                .filter(|n| *n > 0)
                .ok_or_else(|| bad(format!(":{name} expects a positive integer")))
        };
        match name {
            "budget" => self.session.budget.steps = positive(args.first())?,
            "recursion" => self.session.budget.recursion = positive(args.first())?,
            "tol" => {
                self.session.tolerance = args
                    .first()
                    .and_then(|a| a.parse::<f64>().ok())
                    .filter(|x| *x > 0.0 && x.is_finite())
                    .ok_or_else(|| bad(":tol expects a positive number".into()))?;
            }
            "reset" => self.session.reset(),
            "trace" => self.trace = !matches!(args.first(), Some(&"off")),
            "load" => {
                let target = args.first().ok_or_else(|| bad(":load expects a path or a pack name".into()))?;
                if let Some(pack) = pack_by_name(target, args.get(1).copied()) {
                    self.session.install(pack);
                } else {
                    let path = match &self.base {
                        Some(base) => base.join(target),
                        None => PathBuf::from(target),
                    };
                    return self.run_file(&path);
                }
            }
            _ => return Err(bad(format!("unknown directive :{name}"))),
        }
        Ok(Vec::new())
    }
}

fn is_statement(e: &Expr) -> bool {
    e.has_head("Assert") || e.has_head("Rule") || e.has_head("RuleDelayed")
}

fn strip_comment(line: &str) -> &str {
    match line.find("//") {
        Some(i) => &line[..i],
        None => line,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse;

    #[test]
    fn statements_and_directives() {
        let mut it = Interpreter::default();
        let out = it
            .run(
                "// a comment\n\
                 :load funalg\n\
                 x -> 3  // rule\n\
                 q in Cst !\n\
                 (f+g)[x]\n\
                 q in Cst\n\
                 :budget 99\n\
                 :tol 1e-6\n",
            )
            .unwrap();
        let results: Vec<Expr> = out.iter().map(|o| o.result.clone()).collect();
        assert_eq!(results, vec![parse("x -> 3").unwrap(), Expr::true_(), parse("f[3]+g[3]").unwrap(), Expr::true_()]);
        assert_eq!((it.session.budget.steps, it.session.tolerance), (99, 1e-6));
        it.line(":reset", 9).unwrap();
        assert_eq!(it.line("x", 10).unwrap()[0].result, parse("x").unwrap());
        assert_eq!(it.session.budget.steps, 99);
    }

    #[test]
    fn errors_carry_lines() {
        let mut it = Interpreter::default();
        assert!(matches!(it.run("x\n(y"), Err(ScriptError::Parse { line: 2, .. })));
        assert!(matches!(it.line(":budget 0", 4), Err(ScriptError::Directive { line: 4, .. })));
        assert!(matches!(it.line(":load /nonexistent/file.obs", 1), Err(ScriptError::Io { .. })));
        assert!(matches!(it.run("(#1+#2&)[a]"), Err(ScriptError::Eval { line: 1, .. })));
    }

    #[test]
    fn tracing() {
        let mut it = Interpreter { trace: true, ..Interpreter::default() };
        it.line("a -> b", 1).unwrap();
        let out = it.line("f[a]", 2).unwrap();
        assert_eq!(out[0].result, parse("f[b]").unwrap());
        assert!(!out[0].trace.is_empty());
    }
}
