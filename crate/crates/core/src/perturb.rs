//! The perturbation calculus: `Star` (perturbed value) and `Delta` (error),
//! each with an optional amplitude as first argument.

use crate::kernel::{heads, Expr};
use crate::rewrite::{canonicalize, expand, EvalError, FactBase, Rule, RuleSet, Session};

/// `(amplitude, operand)` of `Star[..]` or `Delta[..]` under `head`.
fn split<'e>(e: &'e Expr, head: &str) -> Option<(Option<&'e Expr>, &'e Expr)> {
    match e.args_of(head)? {
        [x] => Some((None, x)),
        [eps, x] => Some((Some(eps), x)),
        _ => None,
    }
}

fn build(head: &str, eps: Option<&Expr>, x: Expr) -> Expr {
    match eps {
        Some(eps) => Expr::call(head, vec![eps.clone(), x]),
        None => Expr::call(head, vec![x]),
    }
}

fn star(eps: Option<&Expr>, x: Expr) -> Expr {
    build(heads::STAR, eps, x)
}

fn delta(eps: Option<&Expr>, x: Expr) -> Expr {
    build(heads::DELTA, eps, x)
}

fn is_exact(e: &Expr, v: i64) -> bool {
    e.is_exact_number() && e.as_i64() == Some(v)
}

fn generic_amplitude(eps: Option<&Expr>) -> bool {
    eps.is_some_and(|e| !is_exact(e, 0) && !is_exact(e, 1))
}

fn is_perturbation(e: &Expr) -> bool {
    e.has_head(heads::STAR) || e.has_head(heads::DELTA)
}

/// Amplitude rules, the constant frame, Cst absorption, Uns scaling and the
/// distribution of `Star` over heads. Enables the Cst/Uns closure rules.
pub fn perturb_pack() -> RuleSet {
    let mut pack = RuleSet::new("perturb")
        .rule(Rule::native("amplitude", |e, _| {
            if let Some((Some(eps), x)) = split(e, heads::STAR) {
                if is_exact(eps, 0) {
                    return Some(x.clone());
                }
                if is_exact(eps, 1) {
                    return Some(star(None, x.clone()));
                }
            }
            if let Some((Some(eps), x)) = split(e, heads::DELTA) {
                if is_exact(eps, 0) {
                    return Some(Expr::int(0));
                }
                if is_exact(eps, 1) {
                    return Some(delta(None, x.clone()));
                }
            }
            None
        }))
        .rule(Rule::native("constant", |e, facts| {
            if let Some((_, x)) = split(e, heads::STAR) {
                if facts.is(x, "Cst") {
                    return Some(x.clone());
                }
            }
            if let Some((_, x)) = split(e, heads::DELTA) {
                if facts.is(x, "Cst") {
                    return Some(Expr::int(0));
                }
            }
            None
        }))
        .rule(Rule::native("unshielded", |e, facts| {
            let (eps, x) = split(e, heads::DELTA)?;
            (generic_amplitude(eps) && facts.is(x, "Uns"))
                .then(|| Expr::times(vec![eps.expect("amplitude").clone(), delta(None, x.clone())]))
        }))
        .rule(Rule::native("distribute", |e, _| {
            let (eps, x) = split(e, heads::STAR)?;
            let c = x.as_compound()?;
            if is_perturbation(x) {
                return None;
            }
            let args = c.args.iter().map(|a| star(eps, a.clone())).collect();
            Some(Expr::apply(star(eps, c.head.clone()), args))
        }));
    for f in ["Plus", "Times", "-1", "Power", "Circle"] {
        pack = pack.fact(&format!("{f} in Cst"));
    }
    for a in ["Star", "Delta", "eps"] {
        pack = pack.fact(&format!("{a} in Abs"));
    }
    pack.enables_closure = true;
    pack
}

/// Expands the error of a compound: over sums, by the product rule, by
/// the chain rule for applications, and `x*_ε = x + ε δ[x]` (also
/// `x* = x + δ[x]`) for unshielded `x`.
pub fn error_expansion_pack() -> RuleSet {
    RuleSet::new("error-expansion")
        .rule(Rule::native("sum", |e, _| {
            let (eps, x) = split(e, heads::DELTA)?;
            let terms = x.args_of(heads::PLUS)?;
            Some(Expr::plus(terms.iter().map(|t| delta(eps, t.clone())).collect()))
        }))
        .rule(Rule::native("product", |e, _| {
            let (eps, yx) = split(e, heads::DELTA)?;
            let factors = yx.args_of(heads::TIMES)?;
            let (x, rest) = factors.split_first()?;
            let y = if rest.len() == 1 { rest[0].clone() } else { Expr::times(rest.to_vec()) };
            Some(Expr::plus(vec![
                Expr::times(vec![y.clone(), delta(eps, x.clone())]),
                Expr::times(vec![star(eps, x.clone()), delta(eps, y)]),
            ]))
        }))
        .rule(Rule::native("chain", |e, facts| {
            let (eps, fx) = split(e, heads::DELTA)?;
            let c = fx.as_compound()?;
            if is_perturbation(fx) || fx.has_head(heads::PLUS) || fx.has_head(heads::TIMES) {
                return None;
            }
            let f = &c.head;
            let starred: Vec<Expr> = c.args.iter().map(|a| star(eps, a.clone())).collect();
            if facts.is(f, "Cst") {
                if let [x] = c.args.as_slice() {
                    if facts.is_linear(f) {
                        return Some(Expr::apply(f.clone(), vec![delta(eps, x.clone())]));
                    }
                }
                return Some(Expr::minus(Expr::apply(f.clone(), starred), fx.clone()));
            }
            if c.args.len() != 1 {
                return None;
            }
            let f_star_x = Expr::apply(f.clone(), starred.clone());
            let df = Expr::apply(delta(eps, f.clone()), starred);
            Some(Expr::plus(vec![f_star_x, Expr::negate(fx.clone()), df]))
        }))
        .rule(Rule::native("unshielded-star", |e, facts| {
            let (eps, x) = split(e, heads::STAR)?;
            if (eps.is_some() && !generic_amplitude(eps)) || !facts.is(x, "Uns") {
                return None;
            }
            let error = match eps {
                Some(eps) => Expr::times(vec![eps.clone(), delta(None, x.clone())]),
                None => delta(None, x.clone()),
            };
            Some(Expr::plus(vec![x.clone(), error]))
        }))
}

/// Rewrites every error to its definition `δ_ε[x] = x*_ε - x` and
/// unshielded perturbations to `x + ε (x* - x)`, so that two expressions
/// can be compared in terms of `Star` alone. Kept apart from
/// [`perturb_pack`] because it erases every `Delta`.
pub fn definition_pack() -> RuleSet {
    RuleSet::new("definition")
        .rule(Rule::native("error", |e, _| {
            let (eps, x) = split(e, heads::DELTA)?;
            Some(Expr::minus(star(eps, x.clone()), x.clone()))
        }))
        .rule(Rule::native("unshielded-star", |e, facts: &FactBase| {
            let (eps, x) = split(e, heads::STAR)?;
            (generic_amplitude(eps) && facts.is(x, "Uns")).then(|| {
                let full = Expr::minus(star(None, x.clone()), x.clone());
                Expr::plus(vec![x.clone(), Expr::times(vec![eps.expect("amplitude").clone(), full])])
            })
        }))
}

const FIXPOINT_ROUNDS: usize = 16;

/// Alternates evaluation and polynomial expansion until neither changes
/// the expression.
pub fn normal_form(s: &Session, e: &Expr) -> Result<Expr, EvalError> {
    let mut cur = s.evaluate(e)?;
    for _ in 0..FIXPOINT_ROUNDS {
        let next = s.evaluate(&expand(&cur))?;
        if next == cur {
            break;
        }
        cur = next;
    }
    Ok(canonicalize(&cur))
}

/// The error of `e` expanded to normal form in a copy of `s` extended with
/// [`error_expansion_pack`].
pub fn expand_error(s: &Session, e: &Expr) -> Result<Expr, EvalError> {
    let mut s = s.clone();
    s.install(error_expansion_pack());
    normal_form(&s, e)
}

/// Both sides reduce to the same `Star` normal form in a copy of `s`
/// extended with [`definition_pack`].
pub fn identity_holds(s: &Session, lhs: &Expr, rhs: &Expr) -> Result<bool, EvalError> {
    let mut s = s.clone();
    s.install(definition_pack());
    let diff = normal_form(&s, &Expr::minus(lhs.clone(), rhs.clone()))?;
    Ok(diff.is_zero())
}

/// The chain rule `δ_ε[f[x]] = f[x*_ε] - f[x] + δ_ε[f][x*_ε]`, checked
/// both through the error expansion and through the definitions.
pub fn check_chain_rule(s: &Session, f: &Expr, x: &Expr, eps: &Expr) -> Result<bool, EvalError> {
    let fx = Expr::apply(f.clone(), vec![x.clone()]);
    let lhs = Expr::delta(Some(eps.clone()), fx.clone());
    let xs = Expr::star(Some(eps.clone()), x.clone());
    let rhs = Expr::plus(vec![
        Expr::apply(f.clone(), vec![xs.clone()]),
        Expr::negate(fx),
        Expr::apply(Expr::delta(Some(eps.clone()), f.clone()), vec![xs]),
    ]);
    Ok(identity_holds(s, &lhs, &rhs)? && identity_holds(s, &expand_error(s, &lhs)?, &rhs)?)
}

/// Replaces `Star[ε, f] - f` in function position by `TotalError[ε, f]`
/// for display. The result is not meant to be parsed back.
pub fn abbreviate(e: &Expr) -> Expr {
    e.map_bottom_up(&mut |node| {
        let Some(c) = node.as_compound() else { return node };
        let Some([a, b]) = c.head.args_of(heads::PLUS) else { return node };
        for (s, m) in [(a, b), (b, a)] {
            if let (Some((eps, f)), Some([minus_one, g])) = (split(s, heads::STAR), m.args_of(heads::TIMES)) {
                if is_exact(minus_one, -1) && f == g {
                    let mut args = eps.into_iter().cloned().collect::<Vec<_>>();
                    args.push(f.clone());
                    return Expr::apply(Expr::call("TotalError", args), c.args.clone());
                }
            }
        }
        node
    })
}
