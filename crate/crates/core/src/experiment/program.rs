//! Iterative experimental programs, error decomposition and noisy evaluation.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StepFn<'a, S> = Box<dyn FnMut(usize, &S) -> S + 'a>;
pub type TestFn<'a, S> = Box<dyn Fn(usize, &S) -> bool + 'a>;

/// `step_t[T] /; test_t[σ_t[T]] -> t`, otherwise `step_{t+1}[T]`.
pub struct ExperimentalProgram<'a, S> {
    pub initial: S,
    pub step: StepFn<'a, S>,
    pub test: TestFn<'a, S>,
    pub max_steps: usize,
    /// Recorded in the run when the step draws random numbers.
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProgramRun<S> {
    pub t: usize,
    pub estimate: S,
    /// `σ_0 .. σ_t`; its length is `t + 1`.
    pub trace: Vec<S>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("no test passed within {max_steps} steps")]
pub struct MaxSteps<S: std::fmt::Debug> {
    pub max_steps: usize,
    pub trace: Vec<S>,
    pub seed: Option<u64>,
}

/// Runs the program to the least `t` whose test passes.
pub fn run_program<S: Clone + std::fmt::Debug>(prog: ExperimentalProgram<'_, S>) -> Result<ProgramRun<S>, MaxSteps<S>> {
    let ExperimentalProgram { initial, mut step, test, max_steps, seed } = prog;
    let mut trace = vec![initial];
    for t in 0..=max_steps {
        let current = &trace[t];
        if test(t, current) {
            let estimate = current.clone();
            return Ok(ProgramRun { t, estimate, trace, seed });
        }
        if t == max_steps {
            break;
        }
        let next = step(t + 1, current);
        trace.push(next);
    }
    Err(MaxSteps { max_steps, trace, seed })
}

/// Running mean and variance (Welford).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MeanEstimate {
    pub n: usize,
    pub mean: f64,
    m2: f64,
    pub last: Option<f64>,
}

impl MeanEstimate {
    pub fn push(&self, x: f64) -> MeanEstimate {
        let n = self.n + 1;
        let d = x - self.mean;
        let mean = self.mean + d / n as f64;
        MeanEstimate { n, mean, m2: self.m2 + d * (x - mean), last: Some(x) }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            f64::INFINITY
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn standard_error(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

pub const MIN_SAMPLES: usize = 30;

/// Mean of uniform `[0, 1]` draws: each failing step tries again with one
/// more sample; the test asks for a standard error below `target`.
pub fn monte_carlo_mean(
    seed: u64,
    target: f64,
    max_steps: usize,
) -> Result<ProgramRun<MeanEstimate>, MaxSteps<MeanEstimate>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_program(ExperimentalProgram {
        initial: MeanEstimate::default(),
        step: Box::new(move |_, m: &MeanEstimate| m.push(rng.random::<f64>())),
        test: Box::new(move |_, m: &MeanEstimate| m.n >= MIN_SAMPLES && m.standard_error() < target),
        max_steps,
        seed: Some(seed),
    })
}

/// Total, realization and programming errors, exact in rationals and
/// rounded to doubles.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorDecomposition {
    pub total: f64,
    pub realization: f64,
    pub programming: f64,
    pub exact: [BigRational; 3],
}

impl ErrorDecomposition {
    pub fn identity_holds(&self) -> bool {
        let [t, r, p] = &self.exact;
        *t == r + p
    }
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// Splits `σ*[T*] − σ[T]` into `σ[T*] − σ[T]` and `σ*[T*] − σ[T*]`.
/// Panics on non-finite values.
pub fn error_decomposition(
    sigma: impl Fn(f64) -> f64,
    sigma_star: impl Fn(f64) -> f64,
    t: f64,
    t_star: f64,
) -> ErrorDecomposition {
    let base = exact(sigma(t));
    let realized = exact(sigma(t_star));
    let observed = exact(sigma_star(t_star));
    let total = &observed - &base;
    let realization = &realized - &base;
    let programming = &observed - &realized;
    let f = |r: &BigRational| r.to_f64().unwrap_or(f64::NAN);
    ErrorDecomposition {
        total: f(&total),
        realization: f(&realization),
        programming: f(&programming),
        exact: [total, realization, programming],
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSummary {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    /// Ten equal bins over `[min, max]`.
    pub histogram: Vec<usize>,
}

/// Distribution of `f(x) + u` with `u` uniform on `[-amplitude, amplitude]`.
pub fn noisy_evaluate(f: impl Fn(f64) -> f64, x: f64, amplitude: f64, samples: usize, seed: u64) -> NoiseSummary {
    assert!(samples >= 1 && amplitude >= 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fx = f(x);
    let values: Vec<f64> = (0..samples).map(|_| fx + amplitude * (2.0 * rng.random::<f64>() - 1.0)).collect();
    let stats = values.iter().fold(MeanEstimate::default(), |m, v| m.push(*v));
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut histogram = vec![0; 10];
    for v in &values {
        let bin = if max > min { (((v - min) / (max - min)) * 10.0) as usize } else { 0 };
        histogram[bin.min(9)] += 1;
    }
    let sd = if samples > 1 { stats.variance().sqrt() } else { 0.0 };
    NoiseSummary { mean: stats.mean, sd, min, max, histogram }
}
