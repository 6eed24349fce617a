//! Syntactic pattern matching.
//!
//! Patterns are compiled from their expression form (`x_`, `_Integer`,
//! `p /; test`, compounds containing those). `Plus` and `Times` are matched
//! orderless and flat, `Circle` flat only. The matcher backtracks within a
//! single pattern and reports the first success in canonical argument order.

use std::collections::BTreeMap;

use crate::kernel::{heads, AtomKind, Expr, Symbol};
use crate::rewrite::{canonicalize, EvalError};

pub type Bindings = BTreeMap<Symbol, Expr>;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("unknown blank type `{0}`; expected Integer, Rational, Real or Symbol")]
    UnknownBlankType(String),
    #[error("malformed pattern `{0}`")]
    Malformed(Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pattern {
    Blank,
    TypedBlank(AtomKind),
    NamedBlank { name: Symbol, kind: Option<AtomKind> },
    Conditional(Box<Pattern>, Expr),
    Literal(Expr),
    Compound { head: Box<Pattern>, args: Vec<Pattern>, orderless: bool, flat: bool },
}

/// Decides condition predicates during matching.
pub trait ConditionEvaluator {
    fn holds(&self, test: &Expr) -> Result<bool, EvalError>;
}

fn is_orderless(head: &Expr) -> bool {
    head.is_symbol(heads::PLUS) || head.is_symbol(heads::TIMES)
}

fn is_flat(head: &Expr) -> bool {
    is_orderless(head) || head.is_symbol(heads::CIRCLE)
}

/// True if `e` contains any pattern construct.
pub fn is_pattern_expr(e: &Expr) -> bool {
    match e {
        Expr::Compound(c) => {
            c.head.is_symbol(heads::BLANK)
                || c.head.is_symbol(heads::PATTERN)
                || c.head.is_symbol(heads::CONDITION)
                || is_pattern_expr(&c.head)
                || c.args.iter().any(is_pattern_expr)
        }
        _ => false,
    }
}

fn blank_kind(args: &[Expr], whole: &Expr) -> Result<Option<AtomKind>, PatternError> {
    match args {
        [] => Ok(None),
        [Expr::Symbol(k)] => {
            AtomKind::from_name(k.name()).map(Some).ok_or_else(|| PatternError::UnknownBlankType(k.name().to_string()))
        }
        _ => Err(PatternError::Malformed(whole.clone())),
    }
}

impl Pattern {
    pub fn from_expr(e: &Expr) -> Result<Pattern, PatternError> {
        if !is_pattern_expr(e) {
            return Ok(Pattern::Literal(e.clone()));
        }
        let c = e.as_compound().expect("pattern constructs are compounds");
        if let Some(args) = e.args_of(heads::BLANK) {
            return Ok(match blank_kind(args, e)? {
                None => Pattern::Blank,
                Some(k) => Pattern::TypedBlank(k),
            });
        }
        if let Some(args) = e.args_of(heads::PATTERN) {
            return match args {
                [Expr::Symbol(name), blank] if blank.has_head(heads::BLANK) => {
                    Ok(Pattern::NamedBlank { name: name.clone(), kind: blank_kind(blank.args(), blank)? })
                }
                _ => Err(PatternError::Malformed(e.clone())),
            };
        }
        if let Some(args) = e.args_of(heads::CONDITION) {
            return match args {
                [p, test] => Ok(Pattern::Conditional(Box::new(Pattern::from_expr(p)?), test.clone())),
                _ => Err(PatternError::Malformed(e.clone())),
            };
        }
        Ok(Pattern::Compound {
            head: Box::new(Pattern::from_expr(&c.head)?),
            args: c.args.iter().map(Pattern::from_expr).collect::<Result<_, _>>()?,
            orderless: is_orderless(&c.head),
            flat: is_flat(&c.head),
        })
    }

    /// The symbol at the root head, when fixed; used to skip rules quickly.
    pub fn head_key(&self) -> Option<&Symbol> {
        match self {
            Pattern::Compound { head, .. } => match head.as_ref() {
                Pattern::Literal(Expr::Symbol(s)) => Some(s),
                _ => None,
            },
            Pattern::Conditional(p, _) => p.head_key(),
            _ => None,
        }
    }
}

type Cont<'k> = dyn FnMut(&mut Bindings) -> Result<bool, EvalError> + 'k;

struct Matcher<'a> {
    cond: &'a dyn ConditionEvaluator,
}

impl Matcher<'_> {
    fn bind(&self, name: &Symbol, e: &Expr, b: &mut Bindings, k: &mut Cont<'_>) -> Result<bool, EvalError> {
        if let Some(prev) = b.get(name) {
            return if prev == e { k(b) } else { Ok(false) };
        }
        b.insert(name.clone(), e.clone());
        let ok = k(b)?;
        if !ok {
            b.remove(name);
        }
        Ok(ok)
    }

    fn go(&self, p: &Pattern, e: &Expr, b: &mut Bindings, k: &mut Cont<'_>) -> Result<bool, EvalError> {
        match p {
            Pattern::Blank => k(b),
            Pattern::TypedBlank(kind) => {
                if e.atom_kind() == Some(*kind) {
                    k(b)
                } else {
                    Ok(false)
                }
            }
            Pattern::NamedBlank { name, kind } => {
                if kind.is_some_and(|kd| e.atom_kind() != Some(kd)) {
                    return Ok(false);
                }
                self.bind(name, e, b, k)
            }
            Pattern::Literal(lit) => {
                if lit == e {
                    k(b)
                } else {
                    Ok(false)
                }
            }
            Pattern::Conditional(inner, test) => {
                let cond = self.cond;
                self.go(inner, e, b, &mut |b: &mut Bindings| {
                    if cond.holds(&substitute(test, b))? {
                        k(b)
                    } else {
                        Ok(false)
                    }
                })
            }
            Pattern::Compound { head, args, orderless, flat } => {
                let Some(c) = e.as_compound() else { return Ok(false) };
                let (orderless, flat) = (*orderless, *flat);
                let ex_args = &c.args;
                let ex_head = &c.head;
                self.go(head, ex_head, b, &mut |b: &mut Bindings| {
                    let n = ex_args.len();
                    let m = args.len();
                    if n < m || (n > m && !(flat && m > 0)) {
                        return Ok(false);
                    }
                    if orderless {
                        let mut used = vec![false; n];
                        self.orderless(args, ex_head, ex_args, &mut used, b, k)
                    } else {
                        self.sequence(args, ex_head, ex_args, b, k)
                    }
                })
            }
        }
    }

    /// Positional matching; with more expression args than patterns (flat
    /// heads only), the last pattern absorbs the tail as `head[tail...]`.
    fn sequence(
        &self,
        pats: &[Pattern],
        head: &Expr,
        items: &[Expr],
        b: &mut Bindings,
        k: &mut Cont<'_>,
    ) -> Result<bool, EvalError> {
        match pats {
            [] => {
                if items.is_empty() {
                    k(b)
                } else {
                    Ok(false)
                }
            }
            [last] if items.len() > 1 => {
                let rest = Expr::apply(head.clone(), items.to_vec());
                self.go(last, &rest, b, k)
            }
            [first, more @ ..] => {
                let Some((item, tail)) = items.split_first() else { return Ok(false) };
                self.go(first, item, b, &mut |b: &mut Bindings| self.sequence(more, head, tail, b, k))
            }
        }
    }

    /// Orderless matching: each pattern takes one unused argument in
    /// canonical order; the last pattern takes everything left when the
    /// head is flat and there are surplus arguments.
    fn orderless(
        &self,
        pats: &[Pattern],
        head: &Expr,
        items: &[Expr],
        used: &mut Vec<bool>,
        b: &mut Bindings,
        k: &mut Cont<'_>,
    ) -> Result<bool, EvalError> {
        let remaining = used.iter().filter(|u| !**u).count();
        match pats {
            [] => {
                if remaining == 0 {
                    k(b)
                } else {
                    Ok(false)
                }
            }
            [last] if remaining > 1 => {
                let rest: Vec<Expr> =
                    items.iter().zip(used.iter()).filter(|(_, u)| !**u).map(|(e, _)| e.clone()).collect();
                self.go(last, &Expr::apply(head.clone(), rest), b, k)
            }
            [first, more @ ..] => {
                for i in 0..items.len() {
                    if used[i] {
                        continue;
                    }
                    used[i] = true;
                    let ok = {
                        let used_ref: &mut Vec<bool> = used;
                        let mut inner = |b: &mut Bindings| self.orderless(more, head, items, used_ref, b, k);
                        self.go(first, &items[i], b, &mut inner)?
                    };
                    used[i] = false;
                    if ok {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }
}

/// First match of `p` against `e`, or `None`.
pub fn match_pattern(p: &Pattern, e: &Expr, cond: &dyn ConditionEvaluator) -> Result<Option<Bindings>, EvalError> {
    let m = Matcher { cond };
    let mut bindings = Bindings::new();
    let mut found = None;
    m.go(p, e, &mut bindings, &mut |b: &mut Bindings| {
        found = Some(b.clone());
        Ok(true)
    })?;
    Ok(found)
}

/// Replaces bound pattern variables (`x` and `x_` forms) by their values.
pub fn substitute(e: &Expr, b: &Bindings) -> Expr {
    if b.is_empty() {
        return e.clone();
    }
    match e {
        Expr::Symbol(s) => b.get(s).cloned().unwrap_or_else(|| e.clone()),
        Expr::Compound(c) => {
            if let Some([Expr::Symbol(s), _]) = e.args_of(heads::PATTERN) {
                if let Some(v) = b.get(s) {
                    return v.clone();
                }
            }
            Expr::apply(substitute(&c.head, b), c.args.iter().map(|a| substitute(a, b)).collect())
        }
        _ => e.clone(),
    }
}

/// Syntactic dependence test: does `x` occur in the canonical form of `f`?
pub fn occurs(x: &Expr, f: &Expr) -> bool {
    canonicalize(f).contains(x)
}

/// Conditions that never hold; for matching without a fact base.
pub struct NoConditions;

impl ConditionEvaluator for NoConditions {
    fn holds(&self, _test: &Expr) -> Result<bool, EvalError> {
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse;

    fn m(p: &str, e: &str) -> Option<Bindings> {
        let pat = Pattern::from_expr(&parse(p).unwrap()).unwrap();
        match_pattern(&pat, &parse(e).unwrap(), &NoConditions).unwrap()
    }

    #[test]
    fn blanks() {
        assert_eq!(m("_", "f[x,y]"), Some(Bindings::new()));
        assert!(m("_Integer", "3").is_some());
        assert!(m("_Integer", "2.75").is_none());
        assert!(m("_Real", "2.75").is_some());
        assert!(m("_Rational", "22/7").is_some());
        assert!(m("_Symbol", "x").is_some());
        let b = m("x_", "f[y]").unwrap();
        assert_eq!(b[&Symbol::new("x")], parse("f[y]").unwrap());
    }

    #[test]
    fn unknown_blank_type_is_an_error() {
        let err = Pattern::from_expr(&parse("_Complex").unwrap()).unwrap_err();
        assert_eq!(err, PatternError::UnknownBlankType("Complex".into()));
    }

    #[test]
    fn repeated_names_must_agree() {
        assert!(m("f[x_, x_]", "f[a,a]").is_some());
        assert!(m("f[x_, x_]", "f[a,b]").is_none());
    }

    #[test]
    fn orderless_and_flat() {
        let b = m("f_[x_+y_]", "g[a+b+c]").unwrap();
        assert_eq!(b[&Symbol::new("x")], Expr::sym("a"));
        assert_eq!(b[&Symbol::new("y")], parse("Plus[b,c]").unwrap());
        let b = m("2*x_", "Times[y,2]").unwrap();
        assert_eq!(b[&Symbol::new("x")], Expr::sym("y"));
        let b = m("(f_@g_)[x_]", "(a@b@c)[z]").unwrap();
        assert_eq!(b[&Symbol::new("g")], parse("Circle[b,c]").unwrap());
        assert!(m("f[x_]", "f[a,b]").is_none());
    }

    #[test]
    fn substitution() {
        let b = m("f_[x_]", "g[a]").unwrap();
        assert_eq!(substitute(&parse("f[f[x_]]").unwrap(), &b), parse("g[g[a]]").unwrap());
    }

    #[test]
    fn occurs_uses_canonical_form() {
        assert!(occurs(&Expr::sym("T"), &parse("M[T]").unwrap()));
        assert!(!occurs(&Expr::sym("T"), &Expr::sym("sigma")));
        assert!(!occurs(&Expr::sym("x"), &parse("(x+1)-x").unwrap()));
    }
}
