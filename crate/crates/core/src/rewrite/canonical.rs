//! Canonical forms for the arithmetic heads.
//!
//! `Plus` and `Times` are flattened, their numerals folded, like terms and
//! like bases collected, and their arguments sorted by the kernel order. A
//! numeral times a single sum is distributed.
//! `Power` folds numerals and trivial exponents. `Circle` is flattened.

use std::collections::BTreeMap;

use crate::kernel::{heads, Expr, Number};

/// Largest positive integer power of a sum that [`expand`] multiplies out.
const MAX_EXPAND_POWER: i64 = 64;

/// Canonical form of the whole tree.
pub fn canonicalize(e: &Expr) -> Expr {
    match e {
        Expr::Compound(c) => {
            let head = canonicalize(&c.head);
            let args = c.args.iter().map(canonicalize).collect();
            normalize_root(Expr::apply(head, args))
        }
        _ => e.clone(),
    }
}

/// Normalizes the root of `e`, assuming its children are canonical.
pub fn normalize_root(e: Expr) -> Expr {
    let Some(name) = e.head().and_then(Expr::as_symbol).map(|s| s.name().to_string()) else {
        return e;
    };
    match name.as_str() {
        heads::PLUS => normalize_plus(e.args()),
        heads::TIMES => normalize_times(e.args()),
        heads::POWER if e.args().len() == 2 => normalize_power(&e.args()[0], &e.args()[1]),
        heads::CIRCLE => {
            if e.args().iter().any(|a| a.has_head(heads::CIRCLE)) {
                Expr::call(heads::CIRCLE, flatten(heads::CIRCLE, e.args()))
            } else {
                e
            }
        }
        _ => e,
    }
}

fn flatten(head: &str, args: &[Expr]) -> Vec<Expr> {
    let mut out = Vec::with_capacity(args.len());
    for a in args {
        match a.args_of(head) {
            Some(inner) => out.extend(flatten(head, inner)),
            None => out.push(a.clone()),
        }
    }
    out
}

/// Splits a term into its numeric coefficient and the remaining product.
fn split_coefficient(t: &Expr) -> (Number, Expr) {
    if let Some(factors) = t.args_of(heads::TIMES) {
        if let Some((first, rest)) = factors.split_first() {
            if let Some(c) = first.as_number() {
                let rest = match rest {
                    [single] => single.clone(),
                    _ => Expr::times(rest.to_vec()),
                };
                return (c, rest);
            }
        }
    }
    (Number::one(), t.clone())
}

fn normalize_plus(args: &[Expr]) -> Expr {
    let mut constant = Number::zero();
    let mut terms: BTreeMap<Expr, Number> = BTreeMap::new();
    for t in flatten(heads::PLUS, args) {
        if let Some(n) = t.as_number() {
            constant = constant.add(&n);
            continue;
        }
        let (c, rest) = split_coefficient(&t);
        let slot = terms.entry(rest).or_insert_with(Number::zero);
        *slot = slot.add(&c);
    }
    let mut out = Vec::with_capacity(terms.len() + 1);
    if !constant.is_exact_zero() {
        out.push(constant.into_expr());
    }
    for (rest, c) in terms {
        if c.is_zero() {
            continue;
        }
        if c.is_exact_one() {
            out.push(rest);
        } else {
            out.push(normalize_times(&[c.into_expr(), rest]));
        }
    }
    out.sort();
    match out.len() {
        0 => Expr::int(0),
        1 => out.pop().expect("one term"),
        _ => Expr::plus(out),
    }
}

fn split_power(f: &Expr) -> (Expr, Expr) {
    match f.args_of(heads::POWER) {
        Some([b, x]) => (b.clone(), x.clone()),
        _ => (f.clone(), Expr::int(1)),
    }
}

fn normalize_times(args: &[Expr]) -> Expr {
    let mut coeff = Number::one();
    let mut bases: BTreeMap<Expr, Vec<Expr>> = BTreeMap::new();
    for f in flatten(heads::TIMES, args) {
        if let Some(n) = f.as_number() {
            coeff = coeff.mul(&n);
            continue;
        }
        let (b, x) = split_power(&f);
        bases.entry(b).or_default().push(x);
    }
    if coeff.is_zero() {
        return coeff.into_expr();
    }
    let mut out = Vec::with_capacity(bases.len() + 1);
    for (base, exps) in bases {
        let exponent = if exps.len() == 1 { exps[0].clone() } else { normalize_plus(&exps) };
        let p = normalize_power(&base, &exponent);
        if let Some(n) = p.as_number() {
            coeff = coeff.mul(&n);
        } else if p.has_head(heads::TIMES) {
            // (a b)^n distributed by normalize_power; its parts are canonical
            for part in p.args() {
                match part.as_number() {
                    Some(n) => coeff = coeff.mul(&n),
                    None => out.push(part.clone()),
                }
            }
        } else {
            out.push(p);
        }
    }
    if coeff.is_zero() {
        return coeff.into_expr();
    }
    // factors split off a distributed power may repeat a base
    if has_duplicate_bases(&out) {
        let mut again = vec![coeff.into_expr()];
        again.extend(out);
        return normalize_times(&again);
    }
    out.sort();
    if !coeff.is_exact_one() {
        if let [sum] = out.as_slice() {
            if let Some(terms) = sum.args_of(heads::PLUS) {
                let c = coeff.into_expr();
                let scaled: Vec<Expr> = terms.iter().map(|t| normalize_times(&[c.clone(), t.clone()])).collect();
                return normalize_plus(&scaled);
            }
        }
        out.insert(0, coeff.into_expr());
    }
    match out.len() {
        0 => Expr::int(1),
        1 => out.pop().expect("one factor"),
        _ => Expr::times(out),
    }
}

fn has_duplicate_bases(factors: &[Expr]) -> bool {
    let mut seen = std::collections::BTreeSet::new();
    factors.iter().any(|f| !seen.insert(split_power(f).0))
}

fn normalize_power(base: &Expr, exponent: &Expr) -> Expr {
    let exp_num = exponent.as_number();
    if let Some(x) = &exp_num {
        if x.is_exact_zero() {
            return Expr::int(1);
        }
        if x.is_exact_one() {
            return base.clone();
        }
    }
    if let (Some(b), Some(x)) = (base.as_number(), &exp_num) {
        if let Some(r) = b.pow(x) {
            return r.into_expr();
        }
    }
    if let Some(b) = base.as_number() {
        if b.is_exact_one() {
            return Expr::int(1);
        }
    }
    let integer_exp = exp_num.as_ref().is_some_and(Number::is_integer);
    if integer_exp {
        if let Some([inner_base, inner_exp]) = base.args_of(heads::POWER) {
            let product = normalize_times(&[inner_exp.clone(), exponent.clone()]);
            return normalize_power(inner_base, &product);
        }
        if let Some(factors) = base.args_of(heads::TIMES) {
            let parts: Vec<Expr> = factors.iter().map(|f| normalize_power(f, exponent)).collect();
            return normalize_times(&parts);
        }
    }
    Expr::power(base.clone(), exponent.clone())
}

/// Distributes products over sums and multiplies out positive integer
/// powers of sums, everywhere in the tree, then canonicalizes.
pub fn expand(e: &Expr) -> Expr {
    match e {
        Expr::Compound(c) => {
            let head = expand(&c.head);
            let args: Vec<Expr> = c.args.iter().map(expand).collect();
            let node = normalize_root(Expr::apply(head, args));
            expand_root(node)
        }
        _ => e.clone(),
    }
}

fn expand_root(e: Expr) -> Expr {
    if let Some(factors) = e.args_of(heads::TIMES) {
        if factors.iter().any(|f| f.has_head(heads::PLUS)) {
            return distribute(factors);
        }
        return e;
    }
    if let Some([base, exponent]) = e.args_of(heads::POWER) {
        if let (true, Some(n)) = (base.has_head(heads::PLUS), exponent.as_i64()) {
            if (2..=MAX_EXPAND_POWER).contains(&n) {
                let copies = vec![base.clone(); n as usize];
                return distribute(&copies);
            }
        }
    }
    e
}

fn distribute(factors: &[Expr]) -> Expr {
    // running sum of products, as a list of canonical terms
    let mut acc: Vec<Expr> = vec![Expr::int(1)];
    for f in factors {
        let choices: Vec<Expr> = match f.args_of(heads::PLUS) {
            Some(terms) => terms.to_vec(),
            None => vec![f.clone()],
        };
        let mut next = Vec::with_capacity(acc.len() * choices.len());
        for a in &acc {
            for c in &choices {
                let prod = normalize_times(&[a.clone(), c.clone()]);
                // a power of a sum can reappear when bases combine
                next.push(expand_root(prod));
            }
        }
        acc = next;
    }
    normalize_plus(&acc)
}
