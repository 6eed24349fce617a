use std::collections::BTreeSet;

use crate::kernel::{heads, Expr};
use crate::matching::ConditionEvaluator;

use super::EvalError;

/// Three-valued query result. `Unknown` leaves a query unevaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    pub fn is_true(self) -> bool {
        self == Truth::True
    }

    fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }
}

/// Monotone store of asserted relations plus the membership inference used
/// by the perturbation and constraint layers.
///
/// Built-in pseudo-sets: `Cst` (constant), `Uns` (unshielded), `Abs`
/// (abstract), `Reals`, `Rationals`, `Integers`. A symbol `K` with
/// `Field[K]` asserted contains every exact numeral. `Cst` is always
/// included in `Uns`; the algebraic closure rules for `Cst` and `Uns` run
/// only once closure is enabled.
#[derive(Clone, Debug, Default)]
pub struct FactBase {
    facts: BTreeSet<Expr>,
    identities: Vec<(Expr, Expr)>,
    closure: bool,
}

const CST: &str = "Cst";
const UNS: &str = "Uns";
const ABS: &str = "Abs";
const LFS: &str = "LFs";
const FIELD: &str = "Field";

impl FactBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn closure_enabled(&self) -> bool {
        self.closure
    }

    pub fn enable_closure(&mut self) {
        self.closure = true;
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Expr> {
        self.facts.iter()
    }

    pub fn identities(&self) -> &[(Expr, Expr)] {
        &self.identities
    }

    /// Records `rel` as true. Conjunctions are split; `Element[{a,b}, S]`
    /// asserts each member. No consistency check is made.
    pub fn assert(&mut self, rel: Expr) {
        if let Some(parts) = rel.args_of(heads::AND) {
            for p in parts.iter().cloned() {
                self.assert(p);
            }
            return;
        }
        if let Some([xs, set]) = rel.args_of(heads::ELEMENT) {
            if let Some(items) = xs.args_of(heads::LIST) {
                for x in items {
                    self.assert(Expr::element(x.clone(), set.clone()));
                }
                return;
            }
        }
        if let Some([a, b]) = rel.args_of(heads::EQUAL) {
            let pair = (a.clone(), b.clone());
            if !self.identities.contains(&pair) {
                self.identities.push(pair);
            }
        }
        self.facts.insert(rel);
    }

    pub fn contains(&self, rel: &Expr) -> bool {
        self.facts.contains(rel)
    }

    pub fn query(&self, rel: &Expr) -> Truth {
        if self.facts.contains(rel) {
            return Truth::True;
        }
        match rel {
            Expr::Symbol(s) if s.name() == heads::TRUE => return Truth::True,
            Expr::Symbol(s) if s.name() == heads::FALSE => return Truth::False,
            _ => {}
        }
        if let Some([x, set]) = rel.args_of(heads::ELEMENT) {
            return self.element(x, set);
        }
        if let Some([x, set]) = rel.args_of(heads::NOT_ELEMENT) {
            return self.element(x, set).not();
        }
        if let Some([a, b]) = rel.args_of(heads::EQUAL) {
            return self.equal(a, b);
        }
        if let Some([a, b]) = rel.args_of(heads::UNEQUAL) {
            return self.equal(a, b).not();
        }
        if let Some(parts) = rel.args_of(heads::AND) {
            let mut acc = Truth::True;
            for p in parts {
                match self.query(p) {
                    Truth::False => return Truth::False,
                    Truth::Unknown => acc = Truth::Unknown,
                    Truth::True => {}
                }
            }
            return acc;
        }
        Truth::Unknown
    }

    /// Structural equality, asserted identities, and distinct numerals.
    pub fn equal(&self, a: &Expr, b: &Expr) -> Truth {
        if a == b {
            return Truth::True;
        }
        if self.identities.iter().any(|(x, y)| (x == a && y == b) || (x == b && y == a)) {
            return Truth::True;
        }
        if let (Some(x), Some(y)) = (a.as_number(), b.as_number()) {
            return if x.to_f64() == y.to_f64() { Truth::True } else { Truth::False };
        }
        Truth::Unknown
    }

    pub fn is(&self, x: &Expr, set: &str) -> bool {
        self.element(x, &Expr::sym(set)).is_true()
    }

    /// Membership of `x` in `set`.
    pub fn element(&self, x: &Expr, set: &Expr) -> Truth {
        if self.facts.contains(&Expr::element(x.clone(), set.clone())) {
            return Truth::True;
        }
        if self.facts.contains(&Expr::call(heads::NOT_ELEMENT, vec![x.clone(), set.clone()])) {
            return Truth::False;
        }
        match set.as_symbol().map(|s| s.name()) {
            Some(CST) => self.in_cst(x),
            Some(UNS) => self.in_uns(x),
            Some(ABS) => self.in_abs(x),
            Some("Reals") => match x {
                Expr::Integer(_) | Expr::Rational(_) | Expr::Real(_) => Truth::True,
                Expr::Symbol(s) if s.name() == "Pi" || s.name() == "E" => Truth::True,
                _ => Truth::Unknown,
            },
            Some("Rationals") => match x {
                Expr::Integer(_) | Expr::Rational(_) => Truth::True,
                _ => Truth::Unknown,
            },
            Some("Integers") => match x {
                Expr::Integer(_) => Truth::True,
                Expr::Rational(_) => Truth::False,
                _ => Truth::Unknown,
            },
            Some(_) if x.is_exact_number() && self.facts.contains(&Expr::call(FIELD, vec![set.clone()])) => Truth::True,
            _ => Truth::Unknown,
        }
    }

    fn in_cst(&self, x: &Expr) -> Truth {
        if self.contains(&Expr::element(x.clone(), Expr::sym(CST))) {
            return Truth::True;
        }
        if !self.closure {
            return Truth::Unknown;
        }
        match x {
            Expr::Integer(_) | Expr::Rational(_) => Truth::True,
            Expr::Compound(_) if self.power_of_constant(x) => Truth::True,
            Expr::Compound(c) => {
                // an algebra closed under application: head and args constant
                if self.is(&c.head, CST) && c.args.iter().all(|a| self.is(a, CST)) {
                    Truth::True
                } else {
                    Truth::Unknown
                }
            }
            _ => Truth::Unknown,
        }
    }

    /// `b^n` with `b^m ∈ Cst` asserted and `m | n`: canonical forms fold
    /// `(b^m)^k` and reciprocals into a single power.
    fn power_of_constant(&self, x: &Expr) -> bool {
        let Some([b, n]) = x.args_of(heads::POWER) else { return false };
        let Some(n) = n.as_i64().filter(|_| n.is_exact_number()) else { return false };
        self.facts.iter().any(|fact| match fact.args_of(heads::ELEMENT) {
            Some([member, set]) if set.is_symbol(CST) => match member.args_of(heads::POWER) {
                Some([c, m]) if c == b && m.is_exact_number() => m.as_i64().is_some_and(|m| m != 0 && n % m == 0),
                _ => false,
            },
            _ => false,
        })
    }

    fn in_uns(&self, x: &Expr) -> Truth {
        if self.contains(&Expr::element(x.clone(), Expr::sym(UNS))) || self.is(x, CST) {
            return Truth::True;
        }
        if !self.closure {
            return Truth::Unknown;
        }
        if let Some(terms) = x.args_of(heads::PLUS) {
            return truth(terms.iter().all(|t| self.is(t, UNS)));
        }
        if let Some(factors) = x.args_of(heads::TIMES) {
            // a Cst-vector space: constant multiples only, never a product of
            // two unshielded factors
            let non_constant = factors.iter().filter(|f| !self.is(f, CST)).count();
            return truth(non_constant <= 1 && factors.iter().all(|f| self.is(f, UNS)));
        }
        if let Expr::Compound(c) = x {
            if let [arg] = c.args.as_slice() {
                if self.contains(&Expr::element(c.head.clone(), Expr::sym(UNS))) && self.is(arg, CST) {
                    return Truth::True;
                }
                if self.is(&c.head, CST) && self.is_linear(&c.head) && self.is(arg, UNS) {
                    return Truth::True;
                }
            }
        }
        Truth::Unknown
    }

    fn in_abs(&self, x: &Expr) -> Truth {
        if self.contains(&Expr::element(x.clone(), Expr::sym(ABS))) {
            return Truth::True;
        }
        match x {
            Expr::Integer(_) | Expr::Rational(_) | Expr::Real(_) => Truth::True,
            Expr::Compound(c) => truth(self.is(&c.head, ABS) && c.args.iter().all(|a| self.is(a, ABS))),
            Expr::Symbol(_) => Truth::Unknown,
        }
    }

    /// `f ∈ LFs[K]` asserted for some `K`.
    pub fn is_linear(&self, f: &Expr) -> bool {
        self.facts
            .iter()
            .any(|fact| matches!(fact.args_of(heads::ELEMENT), Some([g, set]) if g == f && set.has_head(LFS)))
    }

    /// Expressions asserted to lie in some `C[R,S]`.
    pub fn controllable_tags(&self) -> Vec<Expr> {
        self.facts
            .iter()
            .filter_map(|fact| match fact.args_of(heads::ELEMENT) {
                Some([t, set]) if set.has_head("C") => Some(t.clone()),
                _ => None,
            })
            .collect()
    }
}

fn truth(b: bool) -> Truth {
    if b {
        Truth::True
    } else {
        Truth::Unknown
    }
}

impl ConditionEvaluator for FactBase {
    fn holds(&self, test: &Expr) -> Result<bool, EvalError> {
        Ok(self.query(test).is_true())
    }
}
