//! Servo-functions, eigeninputs and the constraint operator.

use crate::kernel::{heads, Expr};
use crate::rewrite::{numeric_value, EvalError, Session};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ServoError {
    #[error("no sign change on [{a}, {b}]: f(a) = {fa}, f(b) = {fb}")]
    NoSignChange { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("no root within tolerance after {iterations} iterations (best {best})")]
    MaxIterations { iterations: usize, best: f64 },
    #[error("function not finite at {at}")]
    NotFinite { at: f64 },
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ConstraintError {
    #[error(transparent)]
    Servo(#[from] ServoError),
    #[error("{response} is not observable at {at}: {reason}")]
    NotObservable { response: Expr, at: f64, reason: String },
    #[error("{response} is not monotone on [{a}, {b}]; the root may not be unique")]
    NotUnique { response: Expr, a: f64, b: f64 },
    #[error("no controllable system occurs in {0}")]
    Unresolved(Expr),
    #[error("{expr} constrains in more than one way: {}", list(reductions))]
    Ambiguous { expr: Expr, reductions: Vec<Expr> },
}

fn list(xs: &[Expr]) -> String {
    xs.iter().map(Expr::to_string).collect::<Vec<_>>().join(" or ")
}

/// Result of a root search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub rho: f64,
    pub iterations: usize,
}

/// Bisection: requires a sign change on `[a, b]`, halves the bracket each
/// step and stops once `|f(rho)| <= tol`.
pub fn dichotomy(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_iterations: usize) -> Result<Root, ServoError> {
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let (mut flo, fhi) = (f(lo), f(hi));
    for (x, fx) in [(lo, flo), (hi, fhi)] {
        if !fx.is_finite() {
            return Err(ServoError::NotFinite { at: x });
        }
        if fx.abs() <= tol {
            return Ok(Root { rho: x, iterations: 0 });
        }
    }
    if flo.signum() == fhi.signum() {
        return Err(ServoError::NoSignChange { a: lo, b: hi, fa: flo, fb: fhi });
    }
    let mut best = lo;
    for i in 1..=max_iterations {
        let mid = lo + (hi - lo) / 2.0;
        let fm = f(mid);
        if !fm.is_finite() {
            return Err(ServoError::NotFinite { at: mid });
        }
        best = mid;
        if fm.abs() <= tol {
            return Ok(Root { rho: mid, iterations: i });
        }
        if mid <= lo || mid >= hi {
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(ServoError::MaxIterations { iterations: max_iterations, best })
}

/// A named dichotomy servo.
#[derive(Clone, Debug, PartialEq)]
pub struct Servo {
    pub name: String,
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for Servo {
    fn default() -> Self {
        Servo { name: "S".into(), tol: 1e-10, max_iterations: 200 }
    }
}

impl Servo {
    pub fn solve(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<Root, ServoError> {
        dichotomy(f, a, b, self.tol, self.max_iterations)
    }
}

/// Declaration `T in C[R, S]`: the response `R∘T` is a one-input pure
/// function searched on `bracket`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControllableDecl {
    pub tag: Expr,
    pub state: Expr,
    pub response: Expr,
    pub bracket: (f64, f64),
}

const GRID: usize = 64;

fn response_at(s: &Session, response: &Expr, z: f64) -> Result<f64, ConstraintError> {
    let applied = Expr::apply(response.clone(), vec![Expr::real(z)]);
    let not_obs = |reason: String| ConstraintError::NotObservable { response: response.clone(), at: z, reason };
    let v = s.evaluate(&applied).map_err(|e| not_obs(e.to_string()))?;
    numeric_value(&v).map_err(|e| not_obs(e.to_string()))
}

/// Checks the declaration, runs the servo on `R∘T`, caches `ρ[T]` and
/// asserts `T in C[R, S]`. A repeated identical declaration returns the
/// cached value.
pub fn eigeninput(s: &mut Session, decl: &ControllableDecl, servo: &Servo) -> Result<f64, ConstraintError> {
    if let Some(rho) = s.cached_eigeninput(&decl.tag, &decl.response, &servo.name) {
        return Ok(rho);
    }
    let (a, b) = decl.bracket;
    let mut samples = Vec::with_capacity(GRID);
    for i in 0..GRID {
        let z = a + (b - a) * i as f64 / (GRID - 1) as f64;
        samples.push(response_at(s, &decl.response, z)?);
    }
    let increasing = samples.windows(2).all(|w| w[1] > w[0]);
    let decreasing = samples.windows(2).all(|w| w[1] < w[0]);
    let crosses = samples.contains(&0.0) || samples.windows(2).any(|w| w[0].signum() != w[1].signum());
    if crosses && !(increasing || decreasing) {
        return Err(ConstraintError::NotUnique { response: decl.response.clone(), a, b });
    }
    let failure = std::cell::RefCell::new(None);
    let root = servo.solve(
        |z| match response_at(s, &decl.response, z) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let rho = root?.rho;
    let servo_sym = Expr::sym(&servo.name);
    s.cache_eigeninput(decl.tag.clone(), decl.response.clone(), servo.name.clone(), rho);
    s.assert(Expr::element(decl.tag.clone(), Expr::call("C", vec![decl.state.clone(), servo_sym.clone()])));
    let in_cst = |x: &Expr| s.query(&Expr::element(x.clone(), Expr::sym("Cst"))).is_true();
    if in_cst(&servo_sym) && in_cst(&decl.state) {
        s.assert_str("Rho in Cst");
        s.assert_str("Underline in Cst");
    }
    Ok(rho)
}

fn rho_of(t: &Expr) -> Expr {
    Expr::call("Rho", vec![t.clone()])
}

fn fill_slots(body: &Expr, value: &Expr) -> Expr {
    if body.has_head(heads::SLOT) {
        return value.clone();
    }
    match body.as_compound() {
        Some(_) if body.has_head(heads::FUNCTION) => body.clone(),
        Some(c) => Expr::apply(fill_slots(&c.head, value), c.args.iter().map(|a| fill_slots(a, value)).collect()),
        None => body.clone(),
    }
}

/// Reduction of `ul(g)` with respect to one controllable tag.
fn reduce(s: &Session, g: &Expr, t: &Expr) -> Expr {
    let ul = |x: &Expr| Expr::call(heads::UNDERLINE, vec![x.clone()]);
    if g == t {
        return Expr::apply(t.clone(), vec![rho_of(t)]);
    }
    if let Some([body]) = g.args_of(heads::FUNCTION) {
        return fill_slots(body, &rho_of(t));
    }
    let is_abs = |x: &Expr| s.query(&Expr::element(x.clone(), Expr::sym("Abs"))).is_true();
    if let Some(parts) = g.args_of(heads::CIRCLE) {
        // R∘X with R abstract constrains through R
        if let Some((first, rest)) = parts.split_first() {
            if !first.contains(t) && is_abs(first) {
                let inner = if rest.len() == 1 { rest[0].clone() } else { Expr::call(heads::CIRCLE, rest.to_vec()) };
                return Expr::apply(first.clone(), vec![ul(&inner)]);
            }
        }
    }
    if let Some(c) = g.as_compound() {
        if !c.head.contains(t) && is_abs(&c.head) {
            let args = c.args.iter().map(|a| if a.contains(t) { ul(a) } else { a.clone() }).collect();
            return Expr::apply(c.head.clone(), args);
        }
    }
    Expr::apply(g.clone(), vec![rho_of(t)])
}

/// The constraint operator: `ul(g)` evaluates `g` at the eigeninput of the
/// single controllable system it depends on. Dependence is the syntactic
/// occurrence test on the canonical form; when one tag is nested in another
/// only the outer one counts.
pub fn constrain(s: &Session, g: &Expr) -> Result<Expr, EvalError> {
    let tags = s.facts().controllable_tags();
    if tags.contains(g) {
        return Ok(reduce(s, g, g));
    }
    let canonical = s.canonicalize(g);
    let present: Vec<&Expr> = tags.iter().filter(|t| canonical.contains(t)).collect();
    let maximal: Vec<&Expr> =
        present.iter().copied().filter(|t| !present.iter().any(|u| u != t && u.contains(t))).collect();
    match maximal.as_slice() {
        [] => Err(ConstraintError::Unresolved(g.clone()).into()),
        [t] => Ok(reduce(s, g, t)),
        many => Err(ConstraintError::Ambiguous {
            expr: g.clone(),
            reductions: many.iter().map(|t| reduce(s, g, t)).collect(),
        }
        .into()),
    }
}

/// Numeric commutation square for constraint and perturbation. `m_star` is
/// the perturbed property as a function of the input; `response` and
/// `response_star` are `R∘T` and `R∘T*`.
pub struct CommuteScenario<'a> {
    pub m_star: &'a dyn Fn(f64) -> f64,
    pub response: &'a dyn Fn(f64) -> f64,
    pub response_star: &'a dyn Fn(f64) -> f64,
    pub bracket: (f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommuteReport {
    pub rho: f64,
    pub rho_star: f64,
    /// Perturbation of the constrained value: `M*[ρ[T]]` when `ρ` is constant.
    pub constrained_then_perturbed: f64,
    /// Constraint of the perturbed property: `M*[ρ[T*]]`.
    pub perturbed_then_constrained: f64,
    pub hypothesis_holds: bool,
    pub agree: bool,
}

pub fn check_constraint_star_commute(
    s: &Session,
    scenario: &CommuteScenario<'_>,
    servo: &Servo,
) -> Result<CommuteReport, ServoError> {
    let (a, b) = scenario.bracket;
    let rho = servo.solve(scenario.response, a, b)?.rho;
    let rho_star = servo.solve(scenario.response_star, a, b)?.rho;
    let x = (scenario.m_star)(rho);
    let y = (scenario.m_star)(rho_star);
    let close = |u: f64, v: f64| (u - v).abs() <= 1e-9_f64.max(s.tolerance);
    Ok(CommuteReport {
        rho,
        rho_star,
        constrained_then_perturbed: x,
        perturbed_then_constrained: y,
        hypothesis_holds: close(rho, rho_star),
        agree: close(x, y),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonFunctionWitness {
    pub rho: f64,
    pub rho_star: f64,
    /// `T*[ρ[T*]]`
    pub at_own_root: f64,
    /// `(T+δ[T])[ρ[T]] = T*[ρ[T]]`
    pub at_unperturbed_root: f64,
    pub gap: f64,
}

impl NonFunctionWitness {
    pub fn is_witness(&self, tol: f64) -> bool {
        self.gap.abs() > tol
    }
}

/// Constrains `T*` at its own eigeninput and at that of `T`; with `R` the
/// identity on outputs the roots are those of `t` and `t_star`.
pub fn non_function_witness(
    t: impl Fn(f64) -> f64,
    t_star: impl Fn(f64) -> f64 + Copy,
    bracket: (f64, f64),
    servo: &Servo,
) -> Result<NonFunctionWitness, ServoError> {
    let rho = servo.solve(t, bracket.0, bracket.1)?.rho;
    let rho_star = servo.solve(t_star, bracket.0, bracket.1)?.rho;
    let at_own_root = t_star(rho_star);
    let at_unperturbed_root = t_star(rho);
    Ok(NonFunctionWitness { rho, rho_star, at_own_root, at_unperturbed_root, gap: at_own_root - at_unperturbed_root })
}

/// The documented scenario `T(z) = z-1`, `T*(z) = z-1.5`.
pub fn constraint_non_function_witness(s: &Session) -> NonFunctionWitness {
    let servo = Servo { tol: s.tolerance, ..Servo::default() };
    non_function_witness(|z| z - 1.0, |z| z - 1.5, (0.0, 3.0), &servo).expect("bracket contains both roots")
}
