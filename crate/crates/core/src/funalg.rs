//! Pure functions, the function algebra and K-linear maps.

use crate::kernel::{heads, Expr};
use crate::rewrite::{canonicalize, EvalError, Rule, RuleSet};

/// Largest slot index in a slot-function body; nested slot functions keep
/// their own slots.
pub fn arity(body: &Expr) -> usize {
    if let Some([n]) = body.args_of(heads::SLOT) {
        return n.as_i64().map_or(0, |k| k.max(0) as usize);
    }
    match body.as_compound() {
        Some(_) if body.args_of(heads::FUNCTION).is_some_and(|a| a.len() == 1) => 0,
        Some(c) => c.args.iter().map(arity).max().unwrap_or(0).max(arity(&c.head)),
        None => 0,
    }
}

fn fill_slots(body: &Expr, args: &[Expr]) -> Expr {
    if let Some([n]) = body.args_of(heads::SLOT) {
        if let Some(k) = n.as_i64().filter(|k| (1..=args.len() as i64).contains(k)) {
            return args[k as usize - 1].clone();
        }
    }
    match body.as_compound() {
        Some(_) if body.args_of(heads::FUNCTION).is_some_and(|a| a.len() == 1) => body.clone(),
        Some(c) => Expr::apply(fill_slots(&c.head, args), c.args.iter().map(|a| fill_slots(a, args)).collect()),
        None => body.clone(),
    }
}

fn bind_names(body: &Expr, params: &[Expr], args: &[Expr]) -> Expr {
    if let Some(i) = params.iter().position(|p| p == body) {
        return args[i].clone();
    }
    match body.as_compound() {
        Some(c) => {
            if let Some([inner, _]) = body.args_of(heads::FUNCTION) {
                // an inner function rebinding one of our names shadows it
                let inner_params = inner.args_of(heads::LIST).map_or_else(|| vec![inner.clone()], <[Expr]>::to_vec);
                if params.iter().any(|p| inner_params.contains(p)) {
                    return body.clone();
                }
            }
            Expr::apply(bind_names(&c.head, params, args), c.args.iter().map(|a| bind_names(a, params, args)).collect())
        }
        None => body.clone(),
    }
}

/// Applies `Function[body]` (slots) or `Function[x, body]` /
/// `Function[{x, y}, body]` to `args`. Surplus arguments are ignored;
/// too few is an arity error.
pub fn apply_pure(f: &Expr, args: &[Expr]) -> Result<Expr, EvalError> {
    match f.args_of(heads::FUNCTION) {
        Some([body]) => {
            let n = arity(body);
            if args.len() < n {
                return Err(EvalError::Arity { function: f.clone(), expected: n, got: args.len() });
            }
            Ok(fill_slots(body, args))
        }
        Some([params, body]) => {
            let params = params.args_of(heads::LIST).map_or_else(|| vec![params.clone()], <[Expr]>::to_vec);
            if args.len() < params.len() {
                return Err(EvalError::Arity { function: f.clone(), expected: params.len(), got: args.len() });
            }
            Ok(bind_names(body, &params, &args[..params.len()]))
        }
        _ => Err(EvalError::Arity { function: f.clone(), expected: 1, got: args.len() }),
    }
}

/// Sum, product, integer powers and composition of functions act
/// pointwise; elements of `K` are constant functions.
pub fn funalg_pack() -> RuleSet {
    RuleSet::new("funalg")
        .rule(Rule::parse("sum", "(f_+g_)[x_] :> f[x]+g[x]"))
        .rule(Rule::parse("product", "(f_*g_)[x_] :> f[x]*g[x]"))
        .rule(Rule::parse("composition", "(f_@g_)[x_] :> f[g[x]]"))
        .rule(Rule::native("power", |e, _| {
            let c = e.as_compound()?;
            let [b, n] = c.head.args_of(heads::POWER)? else { return None };
            let [x] = c.args.as_slice() else { return None };
            (n.is_exact_number() && n.as_i64().is_some())
                .then(|| Expr::power(Expr::apply(b.clone(), vec![x.clone()]), n.clone()))
        }))
        .rule(Rule::parse("scalar", "f_[_] /; f in K :> f"))
        .rule(Rule::parse("subtract", "Subtract[x_, y_] :> x+(-1)*y"))
        .fact("-1 in K")
        .fact("Field[K]")
}

/// Additivity and homogeneity for every `f` asserted in `LFs[k]`.
pub fn linear_pack(k: &str) -> RuleSet {
    RuleSet::new(&format!("linear[{k}]"))
        .rule(Rule::parse("additive", &format!("f_[x_+y_] /; f in LFs[{k}] :> f[x]+f[y]")))
        .rule(Rule::parse("homogeneous", &format!("f_[l_*x_] /; f in LFs[{k}] && l in {k} :> l*f[x]")))
        .rule(Rule::parse("zero", &format!("f_[0] /; f in LFs[{k}] :> 0")))
}

/// Symbolic derivative of `e` in `var`. An application `f[u]` of a head
/// free of `var` differentiates to the differential `d[f][u][D[u, var]]`.
pub fn derivative(e: &Expr, var: &Expr) -> Expr {
    if e == var {
        return Expr::int(1);
    }
    if !e.contains(var) {
        return Expr::int(0);
    }
    let d = |x: &Expr| derivative(x, var);
    let out = if let Some(terms) = e.args_of(heads::PLUS) {
        Expr::plus(terms.iter().map(d).collect())
    } else if let Some(factors) = e.args_of(heads::TIMES) {
        let mut terms = Vec::with_capacity(factors.len());
        for i in 0..factors.len() {
            let mut fs = factors.to_vec();
            fs[i] = d(&factors[i]);
            terms.push(Expr::times(fs));
        }
        Expr::plus(terms)
    } else if let Some([b, n]) = e.args_of(heads::POWER) {
        if n.contains(var) {
            let log_b = Expr::call("Log", vec![b.clone()]);
            let inner = Expr::plus(vec![
                Expr::times(vec![d(n), log_b]),
                Expr::times(vec![n.clone(), d(b), Expr::power(b.clone(), Expr::int(-1))]),
            ]);
            Expr::times(vec![e.clone(), inner])
        } else {
            let lowered = Expr::power(b.clone(), Expr::plus(vec![n.clone(), Expr::int(-1)]));
            Expr::times(vec![n.clone(), lowered, d(b)])
        }
    } else if let Some(c) = e.as_compound().filter(|c| c.args.len() == 1 && !c.head.contains(var)) {
        let u = &c.args[0];
        let du = d(u);
        match c.head.as_symbol().map(|s| s.name()) {
            Some("Exp") => Expr::times(vec![e.clone(), du]),
            Some("Log") => Expr::times(vec![Expr::power(u.clone(), Expr::int(-1)), du]),
            Some("Sin") => Expr::times(vec![Expr::call("Cos", vec![u.clone()]), du]),
            Some("Cos") => Expr::times(vec![Expr::int(-1), Expr::call("Sin", vec![u.clone()]), du]),
            _ => {
                let differential = Expr::call("d", vec![c.head.clone()]);
                Expr::apply(Expr::apply(differential, vec![u.clone()]), vec![du])
            }
        }
    } else {
        return Expr::call("D", vec![e.clone(), var.clone()]);
    };
    canonicalize(&out)
}
