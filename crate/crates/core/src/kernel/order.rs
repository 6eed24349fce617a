//! Structural equality, hashing and the canonical total order.
//!
//! Order: numerals < symbols < compounds. Numerals compare by value (an
//! exact numeral sorts before a real of the same value), symbols
//! lexicographically, compounds head first and then argument-wise.

use std::cmp::Ordering;
use std::hash::{Hash, Hasher};

use super::number::ratio_to_f64;
use super::Expr;

fn rank(e: &Expr) -> u8 {
    match e {
        Expr::Integer(_) | Expr::Rational(_) | Expr::Real(_) => 0,
        Expr::Symbol(_) => 1,
        Expr::Compound(_) => 2,
    }
}

fn numeric_key(e: &Expr) -> f64 {
    match e {
        Expr::Integer(i) => num_traits::ToPrimitive::to_f64(i).unwrap_or(f64::NAN),
        Expr::Rational(r) => ratio_to_f64(r),
        Expr::Real(r) => *r,
        _ => unreachable!("numeric_key on non-numeral"),
    }
}

fn cmp_numerals(a: &Expr, b: &Expr) -> Ordering {
    use num_rational::BigRational;
    fn exact(e: &Expr) -> Option<BigRational> {
        match e {
            Expr::Integer(i) => Some(BigRational::from_integer(i.clone())),
            Expr::Rational(r) => Some(BigRational::clone(r)),
            _ => None,
        }
    }
    numeric_key(a).total_cmp(&numeric_key(b)).then_with(|| match (exact(a), exact(b)) {
        (Some(x), Some(y)) => x.cmp(&y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    })
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        let (ra, rb) = (rank(self), rank(other));
        if ra != rb {
            return ra.cmp(&rb);
        }
        match (self, other) {
            (Expr::Symbol(a), Expr::Symbol(b)) => a.name().cmp(b.name()),
            (Expr::Compound(a), Expr::Compound(b)) => {
                if std::sync::Arc::ptr_eq(a, b) {
                    return Ordering::Equal;
                }
                a.head.cmp(&b.head).then_with(|| a.args.cmp(&b.args))
            }
            _ => cmp_numerals(self, other),
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Expr::Symbol(a), Expr::Symbol(b)) => a == b,
            (Expr::Integer(a), Expr::Integer(b)) => a == b,
            (Expr::Rational(a), Expr::Rational(b)) => a == b,
            (Expr::Real(a), Expr::Real(b)) => a.to_bits() == b.to_bits(),
            (Expr::Compound(a), Expr::Compound(b)) => {
                std::sync::Arc::ptr_eq(a, b) || (a.head == b.head && a.args == b.args)
            }
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Expr::Symbol(s) => s.hash(state),
            Expr::Integer(i) => i.hash(state),
            Expr::Rational(r) => r.hash(state),
            Expr::Real(r) => r.to_bits().hash(state),
            Expr::Compound(c) => {
                c.head.hash(state);
                c.args.hash(state);
            }
        }
    }
}
