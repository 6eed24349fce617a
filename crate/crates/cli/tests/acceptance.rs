//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero when any
//! criterion fails.

use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use obskernel_core::control::{
    check_constraint_star_commute, constraint_non_function_witness, dichotomy, CommuteScenario, Servo, ServoError,
};
use obskernel_core::experiment::{error_decomposition, fit_response_series, monte_carlo_mean};
use obskernel_core::perturb::perturb_pack;
use obskernel_core::rewrite::Conveys;
use obskernel_core::script::Interpreter;
use obskernel_core::theorems::run_theorem_suite;
use obskernel_core::{parse, Expr, Session};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn p(text: &str) -> Expr {
    parse(text).unwrap()
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn depth_example() -> Verdict {
    let s = Session::new();
    let e = p("Depth[x[y,z[1,2]]]");
    let mut times = Vec::new();
    let mut value = None;
    for _ in 0..11 {
        let start = Instant::now();
        value = Some(s.evaluate(&e).map_err(|err| err.to_string())?);
        times.push(start.elapsed());
    }
    times.sort();
    let median = times[times.len() / 2];
    let value = value.unwrap();
    check(value == Expr::int(3) && median < Duration::from_millis(1), format!("value {value}, median {median:?}"))
}

fn theorem_suite() -> Verdict {
    let start = Instant::now();
    let report = run_theorem_suite(1000, 2026);
    let elapsed = start.elapsed();
    let failed: usize = report.checks.iter().map(|c| c.failed).sum();
    let names: Vec<&str> = report.checks.iter().map(|c| c.name).collect();
    check(
        report.all_passed() && report.environments >= 1000 && elapsed < Duration::from_secs(10),
        format!(
            "{} environments, {} checks ({}), {failed} failures, {elapsed:?}",
            report.environments,
            names.len(),
            names.join(", ")
        ),
    )
}

fn non_function_witnesses() -> Verdict {
    let mut s = Session::new();
    s.assert(p("y == f[x]"));
    let depth = match s.conveys_identity(&p("Depth[#]&"), &[(p("y"), p("f[x]"))]).map_err(|e| e.to_string())? {
        Conveys::Witness { fx, fy, .. } => (fx, fy),
        Conveys::NoWitness => return Err("Depth conveys identity".into()),
    };
    let mut d = Session::with_packs([perturb_pack()]);
    d.assert(p("V == W"));
    let delta = d.conveys_identity(&p("Delta"), &[(p("V"), p("W"))]).map_err(|e| e.to_string())?;
    let w = constraint_non_function_witness(&Session::new());
    check(
        depth == (Expr::int(1), Expr::int(2)) && !delta.holds() && w.is_witness(1e-9),
        format!("Depth {} vs {}, delta rejected {}, constraint gap {:?}", depth.0, depth.1, !delta.holds(), w.gap),
    )
}

fn pseudo_inclusion() -> Verdict {
    let mut it = Interpreter::default();
    let out = it.run("x in Cst !\nx in Uns").map_err(|e| e.to_string())?;
    let last = &out.last().ok_or("no output")?.result;
    check(*last == Expr::true_(), format!("x in Uns -> {last}"))
}

fn dichotomy_roots() -> Verdict {
    let a = dichotomy(|x| x - 2.0, 0.0, 5.0, 1e-10, 60).map_err(|e| e.to_string())?;
    let cubic = |x: f64| x * x * x - x - 2.0;
    let b = dichotomy(cubic, 1.0, 2.0, 1e-10, 60).map_err(|e| e.to_string())?;
    let none = dichotomy(|x| x * x + 1.0, 0.0, 1.0, 1e-10, 60);
    check(
        (a.rho - 2.0).abs() <= 1e-10
            && cubic(b.rho).abs() <= 1e-10
            && matches!(none, Err(ServoError::NoSignChange { .. })),
        format!("{:?} in {} it, {:?} in {} it, x^2+1 no sign change", a.rho, a.iterations, b.rho, b.iterations),
    )
}

fn commutation_square() -> Verdict {
    let s = Session::new();
    let servo = Servo::default();
    let (c, eps) = (0.75, 0.3);
    let m_star = |z: f64| z * (1.0 + eps);
    let response = |z: f64| z - c;
    let moved = |z: f64| z - c - 0.5;
    let holds = CommuteScenario { m_star: &m_star, response: &response, response_star: &response, bracket: (0.0, 2.0) };
    let broken = CommuteScenario { m_star: &m_star, response: &response, response_star: &moved, bracket: (0.0, 2.0) };
    let a = check_constraint_star_commute(&s, &holds, &servo).map_err(|e| e.to_string())?;
    let b = check_constraint_star_commute(&s, &broken, &servo).map_err(|e| e.to_string())?;
    let gap = |r: &obskernel_core::control::CommuteReport| {
        (r.constrained_then_perturbed - r.perturbed_then_constrained).abs()
    };
    check(gap(&a) <= 1e-9 && gap(&b) > 1e-3, format!("constant root gap {:e}, moved root gap {:e}", gap(&a), gap(&b)))
}

fn experimental_program() -> Verdict {
    let mut close = 0;
    for seed in 0..100 {
        let run = monte_carlo_mean(seed, 0.01, 100_000).map_err(|e| format!("seed {seed}: {e}"))?;
        if run.trace.len() != run.t + 1 {
            return Err(format!("seed {seed}: trace length {} for t = {}", run.trace.len(), run.t));
        }
        let passes = |m: &obskernel_core::experiment::MeanEstimate| m.n >= 30 && m.standard_error() < 0.01;
        if run.trace[..run.t].iter().any(passes) || !passes(&run.trace[run.t]) {
            return Err(format!("seed {seed}: t = {} is not the least passing index", run.t));
        }
        if (run.estimate.mean - 0.5).abs() <= 0.05 {
            close += 1;
        }
    }
    check(close >= 99, format!("{close}/100 seeds within 0.05, traces of length t+1, minimal t"))
}

fn series_fit() -> Verdict {
    let quad: Vec<(f64, f64)> = (0..5).map(|i| i as f64 / 4.0).map(|e| (e, 1.0 + 2.0 * e + 3.0 * e * e)).collect();
    let q = fit_response_series(&quad, 2).map_err(|e| e.to_string())?;
    let err = q.coefficients.iter().zip([1.0, 2.0, 3.0]).map(|(c, w)| (c - w).abs()).fold(0.0, f64::max);
    let lin: Vec<(f64, f64)> = (0..5).map(|i| i as f64 / 4.0).map(|e| (e, 6.0 * (1.0 - e))).collect();
    let l = fit_response_series(&lin, 2).map_err(|e| e.to_string())?;
    let (stn, sh) = (l.signal_to_noise.unwrap_or(f64::NAN), l.shielding.unwrap_or(f64::NAN));
    check(
        err <= 1e-9 && (stn + 1.0).abs() <= 1e-9 && sh.abs() <= 1e-9,
        format!("max coefficient error {err:e}, signal to noise {stn:?}, shielding {sh:e}"),
    )
}

fn decomposition_identity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bad = 0;
    for _ in 0..10_000 {
        let (a, b, c) = (rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0), rng.random_range(-3.0..3.0));
        let t: f64 = rng.random_range(-10.0..10.0);
        let t_star = t + rng.random_range(-1.0..1.0);
        let d = error_decomposition(|x| a * x + c * x * x, |x| b * x.sin() + a * x, t, t_star);
        if !d.identity_holds() {
            bad += 1;
        }
    }
    check(bad == 0, format!("10000 instances, {bad} violations"))
}

fn ulps(a: f64, b: f64) -> u64 {
    let key = |x: f64| {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    };
    key(a).abs_diff(key(b))
}

fn round_off() -> Verdict {
    let s = Session::new();
    let n = |t: &str| match s.numeric(&p(t)) {
        Ok(Expr::Real(x)) => Ok(x),
        other => Err(format!("{t}: {other:?}")),
    };
    let direct = n("Log[3/2]")?;
    let split = n("Log[3]")? - n("Log[2]")?;
    let d = ulps(direct, split);
    check(
        d <= 4,
        format!("N[Log[3/2]] = {direct:?}, N[Log[3]]-N[Log[2]] = {split:?}, {d} ulp, equal: {}", direct == split),
    )
}

fn workspace_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn cli(args: &[&str], stdin: &str) -> Result<(i32, Vec<u8>), String> {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_obskernel"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| e.to_string())?;
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).map_err(|e| e.to_string())?;
    let out = child.wait_with_output().map_err(|e| e.to_string())?;
    let mut bytes = out.stdout;
    bytes.extend(out.stderr);
    Ok((out.status.code().unwrap_or(-1), bytes))
}

fn determinism() -> Verdict {
    let script = workspace_file("examples/product_error.obs");
    let stat = workspace_file("examples/static.cfg");
    let resp = workspace_file("examples/response.cfg");
    let (script, stat, resp) = (script.to_str().unwrap(), stat.to_str().unwrap(), resp.to_str().unwrap());
    let runs: [(&[&str], &str); 8] = [
        (&["run", script], ""),
        (&["run", script, "--trace", "--format", "csv"], ""),
        (&["solve", "exp(z)-2", "--bracket", "0", "2", "--tol", "1e-10"], ""),
        (&["experiment", stat, "--seed", "5"], ""),
        (&["experiment", stat, "--seed", "5", "--format", "csv"], ""),
        (&["experiment", resp], ""),
        (&["theorems", "--environments", "50", "--seed", "3"], ""),
        (&["repl"], "x in Cst !\nx in Uns\n:load funalg\n(f+g)[a]\n"),
    ];
    for (args, stdin) in runs {
        let first = cli(args, stdin)?;
        let second = cli(args, stdin)?;
        if first != second {
            return Err(format!("{args:?} differs between runs"));
        }
        if first.0 != 0 {
            return Err(format!("{args:?} exited with {}", first.0));
        }
    }
    Ok(format!("{} invocations byte-identical across two runs", runs.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("depth example", depth_example),
        ("theorem suite", theorem_suite),
        ("non-function witnesses", non_function_witnesses),
        ("pseudo-inclusion", pseudo_inclusion),
        ("dichotomy", dichotomy_roots),
        ("commutation square", commutation_square),
        ("experimental program", experimental_program),
        ("series fit", series_fit),
        ("error decomposition", decomposition_identity),
        ("round-off", round_off),
        ("CLI determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (status, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("{status} {:>2} {name}: {detail}", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
