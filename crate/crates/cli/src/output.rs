use std::io::{self, Stdout, Write};

use obskernel_core::script::Output;
use obskernel_core::theorems::SuiteReport;
use obskernel_core::Expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

/// Standard output in the selected format. CSV records are written in
/// long form so that sections with different fields share one stream.
pub enum Sink {
    Text(io::BufWriter<Stdout>),
    Csv { writer: Box<csv::Writer<Stdout>>, header: Option<&'static [&'static str]> },
}

impl Sink {
    pub fn new(format: Format) -> Self {
        match format {
            Format::Text => Sink::Text(io::BufWriter::new(io::stdout())),
            Format::Csv => Sink::Csv {
                writer: Box::new(csv::WriterBuilder::new().flexible(true).from_writer(io::stdout())),
                header: None,
            },
        }
    }

    pub fn flush(&mut self) -> io::Result<()> {
        match self {
            Sink::Text(w) => w.flush(),
            Sink::Csv { writer, .. } => writer.flush(),
        }
    }

    pub fn finish(&mut self) -> io::Result<()> {
        self.flush()
    }

    fn record(&mut self, header: &'static [&'static str], fields: &[String]) -> Result<(), csv::Error> {
        let Sink::Csv { writer, header: current } = self else { return Ok(()) };
        if *current != Some(header) {
            writer.write_record(header)?;
            *current = Some(header);
        }
        writer.write_record(fields)
    }

    fn line(&mut self, text: std::fmt::Arguments<'_>) -> io::Result<()> {
        match self {
            Sink::Text(w) => writeln!(w, "{text}"),
            Sink::Csv { .. } => Ok(()),
        }
    }

    pub fn echo(&mut self, input: &str) -> io::Result<()> {
        self.line(format_args!("In: {}", input.trim()))
    }

    pub fn statement(&mut self, n: usize, o: &Output) -> Result<(), crate::CliError> {
        if matches!(self, Sink::Text(_)) {
            for step in &o.trace {
                self.line(format_args!("  {}: {} -> {}", step.rule, step.before, step.after))?;
            }
            self.line(format_args!("Out: {}", o.result))?;
            return Ok(());
        }
        const HEADER: &[&str] = &["n", "input", "result", "steps"];
        let fields = [n.to_string(), o.input.to_string(), o.result.to_string(), o.trace.len().to_string()];
        Ok(self.record(HEADER, &fields)?)
    }

    pub fn root(
        &mut self,
        var: &Expr,
        rho: f64,
        iterations: usize,
        residual: f64,
        verbose: bool,
    ) -> Result<(), crate::CliError> {
        if matches!(self, Sink::Text(_)) {
            if verbose {
                self.line(format_args!("{var} = {rho:?} after {iterations} iterations, residual {residual:e}"))?;
            } else {
                self.line(format_args!("{rho:?}"))?;
            }
            return Ok(());
        }
        const HEADER: &[&str] = &["var", "rho", "iterations", "residual"];
        Ok(self
            .record(HEADER, &[var.to_string(), format!("{rho:?}"), iterations.to_string(), format!("{residual:e}")])?)
    }

    pub fn theorems(&mut self, r: &SuiteReport) -> Result<(), crate::CliError> {
        if matches!(self, Sink::Text(_)) {
            self.line(format_args!("{} environments, seed {}", r.environments, r.seed))?;
            for c in &r.checks {
                let status = if c.failed == 0 { "ok" } else { "FAIL" };
                self.line(format_args!("{status:4} {:<22} {} passed, {} failed", c.name, c.passed, c.failed))?;
                if let Some(f) = &c.first_failure {
                    self.line(format_args!("     first failure: {f}"))?;
                }
            }
            return Ok(());
        }
        const HEADER: &[&str] = &["theorem", "passed", "failed", "first_failure"];
        for c in &r.checks {
            let fields = [
                c.name.to_string(),
                c.passed.to_string(),
                c.failed.to_string(),
                c.first_failure.clone().unwrap_or_default(),
            ];
            self.record(HEADER, &fields)?;
        }
        Ok(())
    }

    /// One reported value: `section key value` as text, or a
    /// `section,index,name,value` record.
    pub fn value(
        &mut self,
        section: &str,
        index: Option<usize>,
        name: &str,
        value: &str,
    ) -> Result<(), crate::CliError> {
        if matches!(self, Sink::Text(_)) {
            match index {
                Some(i) => self.line(format_args!("{section}[{i}] {name} = {value}"))?,
                None => self.line(format_args!("{section} {name} = {value}"))?,
            }
            return Ok(());
        }
        const HEADER: &[&str] = &["section", "index", "name", "value"];
        let index = index.map(|i| i.to_string()).unwrap_or_default();
        Ok(self.record(HEADER, &[section.to_string(), index, name.to_string(), value.to_string()])?)
    }
}
