//! Randomized checks of the perturbation theorems over generated symbol
//! and fact environments.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::funalg::{funalg_pack, linear_pack};
use crate::kernel::{parse, Expr};
use crate::perturb::{check_chain_rule, expand_error, identity_holds, perturb_pack};
use crate::rewrite::{canonicalize, expand, EvalError, Session, Truth};

const ATOMS: [&str; 8] = ["a", "b", "c", "u", "v", "w", "x", "y"];
const HEADS: [&str; 4] = ["f", "g", "h", "phi"];
const AMPLITUDES: [&str; 3] = ["eps", "e1", "lambda"];

/// Outcome of one theorem over all environments.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoremCheck {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
    /// The first failing environment, described.
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub environments: usize,
    pub seed: u64,
    pub checks: Vec<TheoremCheck>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.failed == 0 && c.passed > 0)
    }
}

/// A generated environment: two operands, a head, an amplitude, and the
/// memberships asserted for them.
#[derive(Clone, Debug)]
struct Env {
    atoms: [Expr; 2],
    x: Expr,
    y: Expr,
    f: Expr,
    eps: Expr,
    facts: Vec<String>,
}

impl Env {
    fn describe(&self) -> String {
        format!("x={}, y={}, f={}, eps={}, facts=[{}]", self.x, self.y, self.f, self.eps, self.facts.join("; "))
    }

    fn session(&self) -> Session {
        let mut s = Session::with_packs([funalg_pack(), perturb_pack(), linear_pack("K")]);
        for fact in &self.facts {
            s.assert_str(fact);
        }
        s
    }
}

fn operand(rng: &mut ChaCha8Rng, atoms: &[&str]) -> Expr {
    let a = Expr::sym(atoms[0]);
    match rng.random_range(0..5) {
        0 => Expr::apply(Expr::sym("k"), vec![a]),
        1 => Expr::power(a, Expr::int(rng.random_range(2..4))),
        _ => a,
    }
}

fn generate(rng: &mut ChaCha8Rng) -> Env {
    let mut names: Vec<&str> = ATOMS.choose_multiple(rng, 2).copied().collect();
    names.sort();
    let x = operand(rng, &names[..1]);
    let y = operand(rng, &names[1..]);
    let f = Expr::sym(HEADS.choose(rng).expect("heads"));
    let eps = Expr::sym(AMPLITUDES.choose(rng).expect("amplitudes"));
    let mut facts = Vec::new();
    for name in &names {
        match rng.random_range(0..4) {
            0 => facts.push(format!("{name} in Cst")),
            1 => facts.push(format!("{name} in Uns")),
            _ => {}
        }
    }
    if rng.random_bool(0.3) {
        facts.push(format!("{f} in Cst"));
    }
    Env { atoms: [Expr::sym(names[0]), Expr::sym(names[1])], x, y, f, eps, facts }
}

type Check = fn(&Env) -> Result<bool, EvalError>;

fn p(text: &str) -> Expr {
    parse(text).expect("well-formed theorem text")
}

fn d(eps: &Expr, x: &Expr) -> Expr {
    Expr::delta(Some(eps.clone()), x.clone())
}

fn st(eps: &Expr, x: &Expr) -> Expr {
    Expr::star(Some(eps.clone()), x.clone())
}

/// `δ_ε[y x] = y δ_ε[x] + x*_ε δ_ε[y]`, by definition and by expansion.
fn product_rule(env: &Env) -> Result<bool, EvalError> {
    let s = env.session();
    let (x, y, eps) = (&env.x, &env.y, &env.eps);
    let lhs = d(eps, &Expr::times(vec![y.clone(), x.clone()]));
    let rhs = Expr::plus(vec![Expr::times(vec![y.clone(), d(eps, x)]), Expr::times(vec![st(eps, x), d(eps, y)])]);
    Ok(identity_holds(&s, &lhs, &rhs)? && identity_holds(&s, &expand_error(&s, &lhs)?, &rhs)?)
}

/// For unshielded atoms, `δ_ε[y x] = ε(y δ[x] + x δ[y]) + ε² δ[x] δ[y]`.
fn unshielded_product(env: &Env) -> Result<bool, EvalError> {
    let [x, y] = env.atoms.clone();
    let mut s = Session::with_packs([funalg_pack(), perturb_pack()]);
    s.assert(Expr::element(Expr::list(vec![x.clone(), y.clone()]), Expr::sym("Uns")));
    let eps = &env.eps;
    let got = expand_error(&s, &d(eps, &Expr::times(vec![y.clone(), x.clone()])))?;
    let dx = Expr::delta(None, x.clone());
    let dy = Expr::delta(None, y.clone());
    let want = Expr::plus(vec![
        Expr::times(vec![
            eps.clone(),
            Expr::plus(vec![Expr::times(vec![y, dx.clone()]), Expr::times(vec![x, dy.clone()])]),
        ]),
        Expr::times(vec![Expr::power(eps.clone(), Expr::int(2)), dx, dy]),
    ]);
    Ok(got == canonicalize(&expand(&want)))
}

fn chain_rule(env: &Env) -> Result<bool, EvalError> {
    let s = env.session();
    Ok(check_chain_rule(&s, &env.f, &env.x, &env.eps)?
        && check_chain_rule(&s, &env.f, &env.x, &Expr::int(0))?
        && check_chain_rule(&s, &env.f, &env.x, &Expr::int(1))?)
}

/// `f ∈ Cst` gives `δ_ε[f[x]] = f[x*_ε] − f[x]`; adding `f ∈ LFs[K]` and
/// `ε ∈ K` gives `f[δ_ε[x]]`.
fn constant_head(env: &Env) -> Result<bool, EvalError> {
    let mut s = env.session();
    let (f, x, eps) = (&env.f, &env.x, &env.eps);
    s.assert(Expr::element(f.clone(), Expr::sym("Cst")));
    let fx = Expr::apply(f.clone(), vec![x.clone()]);
    let lhs = d(eps, &fx);
    let rhs = Expr::minus(Expr::apply(f.clone(), vec![st(eps, x)]), fx.clone());
    let plain = identity_holds(&s, &lhs, &rhs)? && identity_holds(&s, &expand_error(&s, &lhs)?, &rhs)?;
    s.assert(Expr::element(f.clone(), p("LFs[K]")));
    s.assert(Expr::element(eps.clone(), Expr::sym("K")));
    let linear = Expr::apply(f.clone(), vec![d(eps, x)]);
    Ok(plain && expand_error(&s, &lhs)? == expand_error(&s, &linear)? && identity_holds(&s, &lhs, &linear)?)
}

/// `δ` and `Star` are additive and commute with constant factors.
fn linearity(env: &Env) -> Result<bool, EvalError> {
    let mut s = env.session();
    let (x, y, eps) = (&env.x, &env.y, &env.eps);
    let sum = Expr::plus(vec![x.clone(), y.clone()]);
    let additive = Expr::plus(vec![d(eps, &sum), Expr::negate(d(eps, x)), Expr::negate(d(eps, y))]);
    let star_additive = Expr::plus(vec![st(eps, &sum), Expr::negate(st(eps, x)), Expr::negate(st(eps, y))]);
    let c = Expr::sym("c0");
    s.assert(Expr::element(c.clone(), Expr::sym("Cst")));
    let scaled = Expr::minus(d(eps, &Expr::times(vec![c.clone(), x.clone()])), Expr::times(vec![c.clone(), d(eps, x)]));
    let star_scaled = Expr::minus(st(eps, &Expr::times(vec![c.clone(), x.clone()])), Expr::times(vec![c, st(eps, x)]));
    Ok([additive, star_additive, scaled, star_scaled]
        .iter()
        .map(|e| expand_error(&s, e))
        .collect::<Result<Vec<_>, _>>()?
        .iter()
        .all(Expr::is_zero))
}

/// `Cst` is the kernel of `δ`, including expressions built from constants.
fn kernel(env: &Env) -> Result<bool, EvalError> {
    let mut s = env.session();
    let (x, y) = (&env.x, &env.y);
    s.assert(Expr::element(Expr::list(vec![x.clone(), y.clone()]), Expr::sym("Cst")));
    let built = [
        x.clone(),
        Expr::plus(vec![x.clone(), y.clone()]),
        Expr::times(vec![x.clone(), Expr::power(y.clone(), Expr::int(-1))]),
        Expr::power(x.clone(), y.clone()),
    ];
    for e in built {
        if !s.evaluate(&Expr::delta(None, e.clone()))?.is_zero() || !s.evaluate(&d(&env.eps, &e))?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Closure of `Cst` and `Uns` under the operations they are stable for,
/// and no inference of `Uns` for products.
fn closure(env: &Env) -> Result<bool, EvalError> {
    let mut s = Session::with_packs([perturb_pack()]);
    let (x, y, f) = (&env.x, &env.y, &env.f);
    s.assert(Expr::element(Expr::list(vec![x.clone(), y.clone()]), Expr::sym("Cst")));
    let cst = |e: Expr| Expr::element(e, Expr::sym("Cst"));
    let uns = |e: Expr| Expr::element(e, Expr::sym("Uns"));
    let closed = [
        Expr::plus(vec![x.clone(), y.clone()]),
        Expr::times(vec![x.clone(), y.clone()]),
        Expr::power(x.clone(), Expr::int(-1)),
        Expr::power(x.clone(), y.clone()),
        Expr::apply(x.clone(), vec![y.clone()]),
        Expr::call("Circle", vec![x.clone(), y.clone()]),
    ];
    let mut ok =
        closed.iter().all(|e| s.query(&cst(e.clone())) == Truth::True) && s.query(&uns(x.clone())) == Truth::True;
    let mut t = Session::with_packs([perturb_pack()]);
    let (u, v) = (Expr::sym("u0"), Expr::sym("v0"));
    t.assert(uns(u.clone()));
    t.assert(uns(v.clone()));
    t.assert(cst(f.clone()));
    t.assert(Expr::element(f.clone(), p("LFs[K]")));
    ok &= t.query(&uns(Expr::apply(f.clone(), vec![u.clone()]))) == Truth::True;
    ok &= t.query(&uns(Expr::times(vec![u.clone(), v.clone()]))) != Truth::True;
    let g = Expr::sym("g0");
    t.assert(uns(g.clone()));
    t.assert(cst(x.clone()));
    ok &= t.query(&uns(Expr::apply(g, vec![x.clone()]))) == Truth::True;
    Ok(ok)
}

const THEOREMS: [(&str, Check); 7] = [
    ("product rule", product_rule),
    ("unshielded product", unshielded_product),
    ("chain rule", chain_rule),
    ("constant head", constant_head),
    ("linearity", linearity),
    ("constant kernel", kernel),
    ("closure", closure),
];

/// Runs every theorem on `environments` generated environments.
pub fn run_theorem_suite(environments: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let envs: Vec<Env> = (0..environments).map(|_| generate(&mut rng)).collect();
    let checks = THEOREMS
        .iter()
        .map(|(name, check)| {
            let mut report = TheoremCheck { name, passed: 0, failed: 0, first_failure: None };
            for env in &envs {
                match check(env) {
                    Ok(true) => report.passed += 1,
                    outcome => {
                        report.failed += 1;
                        if report.first_failure.is_none() {
                            let why = match outcome {
                                Err(e) => format!(" ({e})"),
                                _ => String::new(),
                            };
                            report.first_failure = Some(format!("{}{why}", env.describe()));
                        }
                    }
                }
            }
            report
        })
        .collect();
    SuiteReport { environments, seed, checks }
}
