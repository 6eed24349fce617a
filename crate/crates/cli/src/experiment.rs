//! `experiment <config>`: a plain-text `key = value` description of a
//! material system, its property map and what to do with the output.
//!
//! ```text
//! # whole-line comments only: values may contain slots
//! tag = T
//! property = #^2&
//! # inputs = 0 (default) reads `state`; otherwise `map`
//! inputs = 1
//! map = 3*#&
//! # one-input points; `sample = a, b` may repeat
//! samples = 0, 0.5, 1
//! interpret = Log[#]&
//! gauge.gamma = #&
//! gauge.flux = #^2&
//! # fits output 0 against the first input
//! series.order = 2
//! program = monte-carlo
//! program.target = 0.01
//! program.max_steps = 100000
//! noise.amplitude = 0.1
//! noise.samples = 1000
//! seed = 7
//! budget = 4096
//! recursion = 256
//! tol = 1e-10
//! # `load`, `fact`, `rule`, `interpret` and `sample` may repeat
//! load = funalg
//! fact = x in Cst
//! rule = M[x_] :> 2*x
//! ```

use std::path::Path;

use obskernel_core::experiment::{
    fit_response_series, interpret, monte_carlo_mean, noisy_evaluate, run_experiment, sample_experiment, Experiment,
    ExperimentError, Gauge, MaterialSystem,
};
use obskernel_core::kernel::{heads, parse_expr};
use obskernel_core::rewrite::numeric_value;
use obskernel_core::script::pack_by_name;
use obskernel_core::Expr;

use crate::output::Sink;
use crate::{Cli, CliError};

const KEYS: [&str; 18] = [
    "tag",
    "property",
    "state",
    "inputs",
    "map",
    "samples",
    "gauge.gamma",
    "gauge.flux",
    "series.order",
    "program",
    "program.target",
    "program.max_steps",
    "noise.amplitude",
    "noise.samples",
    "seed",
    "budget",
    "recursion",
    "tol",
];
const REPEATED: [&str; 5] = ["fact", "rule", "interpret", "sample", "load"];

struct Config {
    entries: Vec<(usize, String, String)>,
}

fn usage(line: usize, message: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("line {line}: {message}"))
}

impl Config {
    fn parse(text: &str) -> Result<Config, CliError> {
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| usage(i + 1, "expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) && !REPEATED.contains(&key) {
                return Err(usage(i + 1, format!("unknown key {key}")));
            }
            if !REPEATED.contains(&key) && entries.iter().any(|(_, k, _)| k == key) {
                return Err(usage(i + 1, format!("{key} given twice")));
            }
            entries.push((i + 1, key.to_string(), value.to_string()));
        }
        Ok(Config { entries })
    }

    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.entries.iter().find(|(_, k, _)| k == key).map(|(l, _, v)| (*l, v.as_str()))
    }

    fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = (usize, &'a str)> + 'a {
        self.entries.iter().filter(move |(_, k, _)| k == key).map(|(l, _, v)| (*l, v.as_str()))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.get(key).map(|(l, v)| v.parse::<T>().map_err(|_| usage(l, format!("{key}: cannot read {v}")))).transpose()
    }

    fn expr(&self, key: &str) -> Result<Option<Expr>, CliError> {
        self.get(key).map(|(l, v)| expr(l, v)).transpose()
    }
}

fn expr(line: usize, text: &str) -> Result<Expr, CliError> {
    parse_expr(text).map_err(|e| usage(line, e))
}

fn list(line: usize, text: &str) -> Result<Vec<Expr>, CliError> {
    let e = expr(line, &format!("{{{text}}}"))?;
    Ok(e.args_of(heads::LIST).map(<[Expr]>::to_vec).unwrap_or_default())
}

fn reals(line: usize, text: &str) -> Result<Vec<f64>, CliError> {
    list(line, text)?.iter().map(|e| numeric_value(e).map_err(|err| usage(line, err))).collect()
}

fn observed(e: ExperimentError) -> CliError {
    CliError::Eval(e.to_string())
}

fn show(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

pub fn run(cli: &Cli, path: &Path, out: &mut Sink) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let config = Config::parse(&text)?;
    let mut s = cli.session();
    if cli.budget.is_none() {
        if let Some(b) = config.parsed::<usize>("budget")? {
            s.budget.steps = b;
        }
    }
    if let Some(r) = config.parsed::<usize>("recursion")? {
        s.budget.recursion = r;
    }
    if cli.tol.is_none() {
        if let Some(t) = config.parsed::<f64>("tol")? {
            s.tolerance = t;
        }
    }
    for (l, v) in config.all("load") {
        let mut words = v.split_whitespace();
        let name = words.next().unwrap_or("");
        let pack = pack_by_name(name, words.next()).ok_or_else(|| usage(l, format!("unknown pack {name}")))?;
        s.install(pack);
    }
    for (l, v) in config.all("fact") {
        s.assert(expr(l, v)?);
    }
    for (l, v) in config.all("rule") {
        s.add_rule(&expr(l, v)?).map_err(|e| usage(l, e))?;
    }
    let seed = match cli.seed {
        Some(seed) => seed,
        None => config.parsed::<u64>("seed")?.unwrap_or(0),
    };

    let tag = config.get("tag").map(|(_, t)| t).unwrap_or("T");
    let property = config.expr("property")?.ok_or_else(|| CliError::Usage("missing key property".into()))?;
    let inputs = config.parsed::<usize>("inputs")?.unwrap_or(0);
    let system = if inputs == 0 {
        let (l, v) = config.get("state").ok_or_else(|| CliError::Usage("missing key state".into()))?;
        MaterialSystem::state(tag, list(l, v)?)
    } else {
        let map = config.expr("map")?.ok_or_else(|| CliError::Usage("missing key map".into()))?;
        MaterialSystem::controlled(tag, inputs, map)
    };
    let ex = Experiment::new(property, system);
    out.value("experiment", None, "property", &ex.property.to_string())?;
    out.value("experiment", None, "inputs", &inputs.to_string())?;
    out.value("experiment", None, "seed", &seed.to_string())?;

    let mut points: Vec<Vec<f64>> = Vec::new();
    if let Some((l, v)) = config.get("samples") {
        points.extend(reals(l, v)?.into_iter().map(|x| vec![x]));
    }
    for (l, v) in config.all("sample") {
        points.push(reals(l, v)?);
    }

    let mut first_output = None;
    if inputs == 0 {
        let output = run_experiment(&s, &ex).map_err(observed)?;
        out.value("output", None, "value", &show(&output))?;
        first_output = output.first().copied();
        for (k, (l, v)) in config.all("interpret").enumerate() {
            let it = interpret(&s, &ex, &expr(l, v)?).map_err(observed)?;
            out.value("interpret", Some(k), "map", v)?;
            out.value("interpret", Some(k), "output", &show(&it.output))?;
            out.value("interpret", Some(k), "tautologic", &it.tautologic.to_string())?;
            out.value("interpret", Some(k), "private", &it.private.to_string())?;
        }
        if let (Some(gamma), Some(flux)) = (config.expr("gauge.gamma")?, config.expr("gauge.flux")?) {
            let gauge = Gauge { gamma, flux };
            let tol = s.tolerance.max(1e-9);
            out.value("gauge", None, "consistent", &gauge.consistent(&s, &ex, tol).map_err(observed)?.to_string())?;
        }
    } else {
        if points.is_empty() {
            return Err(CliError::Usage("a system with inputs needs samples".into()));
        }
        let mut series = Vec::new();
        for (k, z) in points.iter().enumerate() {
            let output = sample_experiment(&s, &ex, z).map_err(observed)?;
            out.value("sample", Some(k), "input", &show(z))?;
            out.value("sample", Some(k), "output", &show(&output))?;
            if let (Some(e), Some(y)) = (z.first(), output.first()) {
                series.push((*e, *y));
            }
            first_output = first_output.or(output.first().copied());
        }
        if let Some(order) = config.parsed::<usize>("series.order")? {
            let fit = fit_response_series(&series, order).map_err(observed)?;
            let ratio = |r: Option<f64>| r.map(|x| format!("{x:?}")).unwrap_or_else(|| "undefined".into());
            for (t, c) in fit.coefficients.iter().enumerate() {
                out.value("series", Some(t), "r", &format!("{c:?}"))?;
            }
            out.value("series", None, "signal_to_noise", &ratio(fit.signal_to_noise))?;
            out.value("series", None, "shielding", &ratio(fit.shielding))?;
            out.value("series", None, "residual", &format!("{:e}", fit.residual))?;
        }
    }

    if let Some((l, program)) = config.get("program") {
        if program != "monte-carlo" {
            return Err(usage(l, format!("unknown program {program}")));
        }
        let target = config.parsed::<f64>("program.target")?.unwrap_or(0.01);
        let max_steps = config.parsed::<usize>("program.max_steps")?.unwrap_or(100_000);
        let (t, trace) = match monte_carlo_mean(seed, target, max_steps) {
            Ok(run) => {
                out.value("program", None, "t", &run.t.to_string())?;
                out.value("program", None, "mean", &format!("{:?}", run.estimate.mean))?;
                out.value("program", None, "standard_error", &format!("{:?}", run.estimate.standard_error()))?;
                (Some(run.t), run.trace)
            }
            Err(e) => {
                out.value("program", None, "error", &e.to_string())?;
                (None, e.trace)
            }
        };
        if cli.format == crate::output::Format::Csv {
            for (i, m) in trace.iter().enumerate() {
                out.value("trace", Some(i), "mean", &format!("{:?}", m.mean))?;
            }
        }
        if t.is_none() {
            return Err(CliError::Eval(format!("program did not pass its test within {max_steps} steps")));
        }
    }

    if let Some(amplitude) = config.parsed::<f64>("noise.amplitude")? {
        let x = first_output.ok_or_else(|| CliError::Usage("noise needs an observable output".into()))?;
        let n = config.parsed::<usize>("noise.samples")?.unwrap_or(1000).max(1);
        let summary = noisy_evaluate(|v| v, x, amplitude.abs(), n, seed);
        out.value("noise", None, "mean", &format!("{:?}", summary.mean))?;
        out.value("noise", None, "sd", &format!("{:?}", summary.sd))?;
        out.value("noise", None, "min", &format!("{:?}", summary.min))?;
        out.value("noise", None, "max", &format!("{:?}", summary.max))?;
        let bins: Vec<String> = summary.histogram.iter().map(usize::to_string).collect();
        out.value("noise", None, "histogram", &bins.join(" "))?;
    }
    Ok(())
}
