mod common;

use common::p;
use obskernel_core::experiment::{
    current_example, error_decomposition, fit_response_series, interpret, linear_gauge_scenario, monte_carlo_mean,
    noisy_evaluate, run_experiment, run_program, sample_experiment, Experiment, ExperimentError, ExperimentalProgram,
    MaterialSystem,
};
use obskernel_core::{Expr, Session};
use proptest::prelude::*;

fn state(values: &[f64]) -> MaterialSystem {
    MaterialSystem::state("T", values.iter().map(|v| Expr::real(*v)).collect())
}

#[test]
fn run_examples() {
    let s = Session::new();
    let sum = Experiment::new(p("#[[1]]+#[[2]]&"), state(&[1.0, 2.0]));
    assert_eq!(run_experiment(&s, &sum).unwrap(), vec![3.0]);
    let free = Experiment::new(p("#[[1]]*q&"), state(&[1.0, 2.0]));
    match run_experiment(&s, &free).unwrap_err() {
        ExperimentError::NotObservable { component, .. } => assert_eq!(component, 0),
        other => panic!("{other}"),
    }
    let lifted = Experiment::new(p("#^2&"), MaterialSystem::controlled("T", 1, p("#+1&")));
    for z in [0.0, 1.5, -2.0] {
        assert_eq!(sample_experiment(&s, &lifted, &[z]).unwrap(), vec![(z + 1.0) * (z + 1.0)]);
    }
}

#[test]
fn interpretation_examples() {
    let s = Session::new();
    let ex = Experiment::new(p("#&"), state(&[2.0]));
    let log = interpret(&s, &ex, &p("Log[#]&")).unwrap();
    assert!((log.output[0] - std::f64::consts::LN_2).abs() < 1e-15);
    let pair = Experiment::new(p("{M1[#], M2[#]}&"), state(&[2.0]));
    let mut rules = Session::new();
    rules.add_rule(&p("M1[x_] :> 3*x")).unwrap();
    rules.add_rule(&p("M2[x_] :> x^3")).unwrap();
    let first = interpret(&rules, &pair, &p("#[[1]]&")).unwrap();
    let m1 = Experiment::new(p("M1[#]&"), state(&[2.0]));
    assert_eq!(first.output, run_experiment(&rules, &m1).unwrap());
    assert!(interpret(&s, &ex, &p("Identity")).unwrap().tautologic);
    assert!(interpret(&s, &ex, &p("#&")).unwrap().tautologic);
    assert!(!log.tautologic);
}

#[test]
fn current_examples() {
    let s = Session::new();
    let r = current_example(&s, 2.0, -3.0).unwrap();
    assert_eq!((r.output, r.interpreted), (18.0, 3.0));
    assert!(matches!(r.k_failure, Some(ExperimentError::NotObservable { .. })));
    assert_eq!(current_example(&s, 2.0, 0.0).unwrap().interpreted, 0.0);
}

#[test]
fn program_examples() {
    let run = monte_carlo_mean(1, 0.01, 100_000).unwrap();
    assert_eq!(run.trace.len(), run.t + 1);
    assert!((run.estimate.mean - 0.5).abs() < 0.05);
    assert_eq!(run.seed, Some(1));
    let first = (0..run.trace.len()).find(|&t| {
        let m = &run.trace[t];
        m.n >= 30 && m.standard_error() < 0.01
    });
    assert_eq!(first, Some(run.t));
    assert!(monte_carlo_mean(1, 1e-9, 200).is_err());
}

#[test]
fn decomposition_examples() {
    let d = error_decomposition(|x| x, |x| 1.1 * x, 1.0, 1.2);
    assert!(
        (d.total - 0.32).abs() < 1e-12 && (d.realization - 0.2).abs() < 1e-12 && (d.programming - 0.12).abs() < 1e-12
    );
    let z = error_decomposition(|x| x * x, |x| x * x, 3.0, 3.0);
    assert_eq!((z.total, z.realization, z.programming), (0.0, 0.0, 0.0));
}

#[test]
fn series_examples() {
    let linear: Vec<(f64, f64)> = [0.0, 0.25, 0.5, 0.75, 1.0].iter().map(|e| (*e, 6.0 - 6.0 * e)).collect();
    let fit = fit_response_series(&linear, 2).unwrap();
    assert!((fit.coefficients[0] - 6.0).abs() <= 1e-9);
    assert!((fit.coefficients[1] + 6.0).abs() <= 1e-9);
    assert!(fit.coefficients[2].abs() <= 1e-9);
    assert!((fit.signal_to_noise.unwrap() + 1.0).abs() <= 1e-9);
    assert!(fit.shielding.unwrap().abs() <= 1e-9);
    assert!(matches!(fit_response_series(&linear[..2], 2), Err(ExperimentError::DegenerateFit { .. })));
}

/// With an unshielded flux `Φ[T*_ε] = Φ[T] + ε δΦ`, the response
/// `σ[T](1 − ε) Φ[T*_ε]` fitted to second order.
#[test]
fn unshielded_flux_shielding_ratio() {
    let (sigma, phi, dphi) = (2.0, 3.0, 0.5);
    let samples: Vec<(f64, f64)> =
        (0..9).map(|i| i as f64 / 8.0).map(|e| (e, sigma * (1.0 - e) * (phi + e * dphi))).collect();
    let fit = fit_response_series(&samples, 2).unwrap();
    let r = [sigma * phi, sigma * (dphi - phi), -sigma * dphi];
    for (c, want) in fit.coefficients.iter().zip(r) {
        assert!((c - want).abs() <= 1e-9);
    }
    assert!((fit.shielding.unwrap() - r[2] / r[1]).abs() <= 1e-9);
}

#[test]
fn linear_gauge() {
    let r = linear_gauge_scenario(&Session::new()).unwrap();
    assert!(r.all_hold(), "{r:?}");
}

#[test]
fn noise_examples() {
    let flat = noisy_evaluate(|x| 2.0 * x, 1.5, 0.0, 100, 9);
    assert_eq!((flat.mean, flat.sd, flat.min, flat.max), (3.0, 0.0, 3.0, 3.0));
    let u = noisy_evaluate(|x| x, 0.0, 1.0, 100_000, 42);
    assert!(u.mean.abs() < 0.01);
    assert!((u.sd - 1.0 / 3f64.sqrt()).abs() < 0.02);
    assert_eq!(format!("{u:?}"), format!("{:?}", noisy_evaluate(|x| x, 0.0, 1.0, 100_000, 42)));
}

fn calculable_map() -> impl Strategy<Value = String> {
    let piece = prop::sample::select(vec!["#^2", "exp(#/10)", "Log[1+#^2]", "3*#-1", "Sqrt[1+#^2]", "Absolute[#]"]);
    prop::collection::vec(piece, 1..4)
        .prop_map(|ps| ps.into_iter().fold("#".to_string(), |acc, piece| piece.replace('#', &format!("({acc})"))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn calculable_interpretations_stay_observable(body in calculable_map(), x in -3.0f64..3.0) {
        let s = Session::new();
        let ex = Experiment::new(p("#*2&"), state(&[x]));
        let it = interpret(&s, &ex, &p(&format!("{body}&"))).unwrap();
        prop_assert_eq!(it.output.len(), 1);
        prop_assert!(it.output[0].is_finite());
        prop_assert_eq!(run_experiment(&s, &it.experiment).unwrap(), it.output.clone());
        prop_assert!(it.gauge.consistent(&s, &it.experiment, 1e-9).unwrap());
    }

    #[test]
    fn program_returns_least_passing_index(start in 0i64..50, stride in 1i64..7, goal in 0i64..200) {
        let run = run_program(ExperimentalProgram {
            initial: start,
            step: Box::new(move |_, x: &i64| x + stride),
            test: Box::new(move |_, x: &i64| *x >= goal),
            max_steps: 500,
            seed: None,
        }).unwrap();
        prop_assert!(run.trace[run.t] >= goal);
        prop_assert!(run.trace[..run.t].iter().all(|x| *x < goal));
        prop_assert_eq!(run.trace.len(), run.t + 1);
    }

    #[test]
    fn decomposition_identity(a in -10.0f64..10.0, b in -10.0f64..10.0, t in -5.0f64..5.0, ts in -5.0f64..5.0) {
        let d = error_decomposition(|x| a * x.sin(), move |x| b * x + a, t, ts);
        prop_assert!(d.identity_holds());
    }

    #[test]
    fn polynomial_recovery(r in prop::collection::vec(-10.0f64..10.0, 3), n in 3usize..12) {
        let samples: Vec<(f64, f64)> = (0..n).map(|i| i as f64 / (n - 1) as f64)
            .map(|e| (e, r[0] + r[1] * e + r[2] * e * e)).collect();
        let fit = fit_response_series(&samples, 2).unwrap();
        for (c, want) in fit.coefficients.iter().zip(&r) {
            prop_assert!((c - want).abs() <= 1e-9, "{} vs {}", c, want);
        }
    }
}
