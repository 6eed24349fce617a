//! Material systems, experiments, gauges and interpretations.

mod program;
mod scenario;
mod series;

use crate::kernel::{heads, AtomKind, Expr};
use crate::matching::occurs;
use crate::rewrite::{canonicalize, numeric_value, EvalError, NotCalculable, Session};

pub use program::{
    error_decomposition, monte_carlo_mean, noisy_evaluate, run_program, ErrorDecomposition, ExperimentalProgram,
    MaxSteps, MeanEstimate, NoiseSummary, ProgramRun,
};
pub use scenario::{current_example, linear_gauge_scenario, CurrentReport, Derivation, LinearGaugeReport};
pub use series::{fit_response_series, SeriesFit};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error("output {component} ({expr}) is not observable: {reason}")]
    NotObservable { component: usize, expr: Expr, reason: NotCalculable },
    #[error("system {tag} takes {expected} input(s), got {got}")]
    InputCount { tag: Expr, expected: usize, got: usize },
    #[error("degenerate fit of order {order} from {samples} sample(s): {reason}")]
    DegenerateFit { samples: usize, order: usize, reason: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// How a material system is given: a state for `p = 0`, otherwise a pure
/// function of `p` real inputs returning a state.
#[derive(Clone, Debug, PartialEq)]
pub enum Realization {
    State(Vec<Expr>),
    Map(Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaterialSystem {
    pub tag: Expr,
    pub inputs: usize,
    pub realization: Realization,
}

impl MaterialSystem {
    pub fn state(tag: &str, components: Vec<Expr>) -> Self {
        MaterialSystem { tag: Expr::sym(tag), inputs: 0, realization: Realization::State(components) }
    }

    pub fn controlled(tag: &str, inputs: usize, map: Expr) -> Self {
        MaterialSystem { tag: Expr::sym(tag), inputs, realization: Realization::Map(map) }
    }

    /// The state as one expression: a single component, or a list.
    pub fn state_expr(&self, input: &[f64]) -> Result<Expr, ExperimentError> {
        if input.len() != self.inputs {
            return Err(ExperimentError::InputCount { tag: self.tag.clone(), expected: self.inputs, got: input.len() });
        }
        Ok(match &self.realization {
            Realization::State(c) if c.len() == 1 => c[0].clone(),
            Realization::State(c) => Expr::list(c.clone()),
            Realization::Map(f) => Expr::apply(f.clone(), input.iter().map(|z| Expr::real(*z)).collect()),
        })
    }
}

/// The experiment `{M, T}`: a property map applied to a material system.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub property: Expr,
    pub system: MaterialSystem,
}

impl Experiment {
    pub fn new(property: Expr, system: MaterialSystem) -> Self {
        Experiment { property, system }
    }

    /// `M[T]` (at `input` when the system has inputs), unevaluated.
    pub fn output_expr(&self, input: &[f64]) -> Result<Expr, ExperimentError> {
        Ok(Expr::apply(self.property.clone(), vec![self.system.state_expr(input)?]))
    }
}

fn observe(s: &Session, e: &Expr) -> Result<Vec<f64>, ExperimentError> {
    let v = s.evaluate(e)?;
    let parts = match v.args_of(heads::LIST) {
        Some(items) => items.to_vec(),
        None => vec![v],
    };
    parts
        .iter()
        .enumerate()
        .map(|(i, part)| {
            let c = s.calculable(part, AtomKind::Real);
            match c.value.as_ref().map(numeric_value) {
                Some(Ok(x)) => Ok(x),
                _ => Err(ExperimentError::NotObservable {
                    component: i,
                    expr: part.clone(),
                    reason: c.reason.unwrap_or(NotCalculable::NonNumeric(part.clone())),
                }),
            }
        })
        .collect()
}

/// Output of a static experiment; observable iff every component is
/// calculable to a real within budget.
pub fn run_experiment(s: &Session, ex: &Experiment) -> Result<Vec<f64>, ExperimentError> {
    observe(s, &ex.output_expr(&[])?)
}

/// Output of an experiment on a system with inputs, sampled at `input`:
/// the function `M∘T` evaluated on request.
pub fn sample_experiment(s: &Session, ex: &Experiment, input: &[f64]) -> Result<Vec<f64>, ExperimentError> {
    observe(s, &ex.output_expr(input)?)
}

/// `M[T] = Γ[Φ[T]]` with `Γ` calculable.
#[derive(Clone, Debug, PartialEq)]
pub struct Gauge {
    pub gamma: Expr,
    pub flux: Expr,
}

impl Gauge {
    /// Compares the gauge reading `Γ[Φ[T]]` with the property's own output.
    pub fn consistent(&self, s: &Session, ex: &Experiment, tol: f64) -> Result<bool, ExperimentError> {
        let flux = observe(s, &Expr::apply(self.flux.clone(), vec![ex.system.state_expr(&[])?]))?;
        let reading = observe(s, &Expr::apply(self.gamma.clone(), vec![as_expr(&flux)]))?;
        let direct = run_experiment(s, ex)?;
        Ok(reading.len() == direct.len() && reading.iter().zip(&direct).all(|(a, b)| (a - b).abs() <= tol))
    }
}

fn as_expr(xs: &[f64]) -> Expr {
    match xs {
        [x] => Expr::real(*x),
        _ => Expr::list(xs.iter().map(|x| Expr::real(*x)).collect()),
    }
}

/// Result of interpreting an experiment by a calculable map `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct Interpretation {
    /// `{P∘M, T}`.
    pub experiment: Experiment,
    pub output: Vec<f64>,
    pub tautologic: bool,
    pub private: bool,
    /// `P` read as a gauge of the new property, sensitive to `M[T]`.
    pub gauge: Gauge,
}

fn compose(p: &Expr, m: &Expr) -> Expr {
    let slot = Expr::call(heads::SLOT, vec![Expr::int(1)]);
    Expr::call(heads::FUNCTION, vec![Expr::apply(p.clone(), vec![Expr::apply(m.clone(), vec![slot])])])
}

fn is_identity(p: &Expr) -> bool {
    p.is_symbol("Identity")
        || matches!(p.args_of(heads::FUNCTION), Some([b]) if b.has_head(heads::SLOT) && b.args()[0].is_one())
}

/// `P` interprets `M[T]` to `P[M[T]]`. Requires an observable experiment
/// and a `P` calculable on its output.
pub fn interpret(s: &Session, ex: &Experiment, p: &Expr) -> Result<Interpretation, ExperimentError> {
    let observed = run_experiment(s, ex)?;
    let output = observe(s, &Expr::apply(p.clone(), vec![as_expr(&observed)]))?;
    let composed = compose(p, &ex.property);
    Ok(Interpretation {
        tautologic: is_identity(p),
        private: occurs(&ex.system.tag, &canonicalize(&composed)),
        experiment: Experiment { property: composed, system: ex.system.clone() },
        output,
        gauge: Gauge { gamma: p.clone(), flux: ex.property.clone() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn static_and_lifted_experiments() {
        let s = Session::new();
        let t = MaterialSystem::state("T", vec![Expr::real(1.0), Expr::real(2.0)]);
        let ex = Experiment::new(p("#[[1]]+#[[2]]&"), t);
        assert_eq!(run_experiment(&s, &ex).unwrap(), vec![3.0]);
        let free = Experiment::new(p("#[[1]]+q&"), ex.system.clone());
        assert!(matches!(run_experiment(&s, &free), Err(ExperimentError::NotObservable { .. })));
        let lifted = Experiment::new(p("#^2&"), MaterialSystem::controlled("U", 1, p("3*#&")));
        assert_eq!(sample_experiment(&s, &lifted, &[2.0]).unwrap(), vec![36.0]);
        assert!(matches!(run_experiment(&s, &lifted), Err(ExperimentError::InputCount { .. })));
    }

    #[test]
    fn interpretations() {
        let s = Session::new();
        let ex = Experiment::new(p("#&"), MaterialSystem::state("T", vec![Expr::real(2.0)]));
        let log = interpret(&s, &ex, &p("log(#)&")).unwrap();
        assert_eq!(log.output, vec![2f64.ln()]);
        assert!(!log.tautologic && !log.private);
        assert!(interpret(&s, &ex, &p("Identity")).unwrap().tautologic);
        let pair = Experiment::new(p("{2*#, 3*#}&"), ex.system.clone());
        let first = interpret(&s, &pair, &p("#[[1]]&")).unwrap();
        assert_eq!(first.output, vec![4.0]);
        assert!(first.gauge.consistent(&s, &first.experiment, 1e-9).unwrap());
        assert!(interpret(&s, &ex, &p("T*#&")).unwrap_err().to_string().contains("T"));
    }
}
