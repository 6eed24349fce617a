use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::Expr;

/// Numeric view of a numeral atom. Exact values stay exact; any real
/// operand makes the result real.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(BigRational),
    Real(f64),
}

/// Largest integer exponent folded exactly.
const MAX_EXACT_EXPONENT: u32 = 4096;

impl Number {
    pub fn from_expr(e: &Expr) -> Option<Number> {
        match e {
            Expr::Integer(i) => Some(Number::Exact(BigRational::from_integer(i.clone()))),
            Expr::Rational(r) => Some(Number::Exact(BigRational::clone(r))),
            Expr::Real(r) => Some(Number::Real(*r)),
            _ => None,
        }
    }

    pub fn zero() -> Number {
        Number::Exact(BigRational::zero())
    }

    pub fn one() -> Number {
        Number::Exact(BigRational::one())
    }

    pub fn into_expr(self) -> Expr {
        match self {
            Number::Exact(r) => Expr::from_ratio(r),
            Number::Real(r) => Expr::Real(r),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => ratio_to_f64(r),
            Number::Real(r) => *r,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Exact(r) => r.is_zero(),
            Number::Real(r) => *r == 0.0,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self, Number::Exact(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        match self {
            Number::Exact(r) => r.is_one(),
            Number::Real(r) => *r == 1.0,
        }
    }

    pub fn is_exact_one(&self) -> bool {
        matches!(self, Number::Exact(r) if r.is_one())
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, Number::Exact(r) if r.is_integer())
    }

    pub fn add(&self, other: &Number) -> Number {
        match (self, other) {
            (Number::Exact(a), Number::Exact(b)) => Number::Exact(a + b),
            _ => Number::Real(self.to_f64() + other.to_f64()),
        }
    }

    pub fn mul(&self, other: &Number) -> Number {
        match (self, other) {
            (Number::Exact(a), Number::Exact(b)) => Number::Exact(a * b),
            _ => Number::Real(self.to_f64() * other.to_f64()),
        }
    }

    pub fn neg(&self) -> Number {
        match self {
            Number::Exact(a) => Number::Exact(-a),
            Number::Real(r) => Number::Real(-r),
        }
    }

    /// `self^exp`, or `None` when the result is not representable without
    /// leaving the reals or exceeding the exact-exponent limit.
    pub fn pow(&self, exp: &Number) -> Option<Number> {
        match (self, exp) {
            (Number::Exact(b), Number::Exact(e)) => {
                if !e.is_integer() {
                    return None;
                }
                let n = e.to_integer();
                let mag = n.abs().to_u32().filter(|m| *m <= MAX_EXACT_EXPONENT)?;
                if b.is_zero() && n.is_negative() {
                    return None;
                }
                let p = num_traits::pow::pow(b.clone(), mag as usize);
                Some(Number::Exact(if n.is_negative() { p.recip() } else { p }))
            }
            _ => {
                let b = self.to_f64();
                let e = exp.to_f64();
                if b < 0.0 && e.fract() != 0.0 {
                    return None;
                }
                let r = b.powf(e);
                r.is_finite().then_some(Number::Real(r))
            }
        }
    }
}

/// Correctly rounded enough for display and numerics; exact for values that
/// fit in f64 integers.
pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
    }
    // scale huge numerators/denominators down before dividing
    let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_arithmetic_stays_exact() {
        let a = Number::from_expr(&Expr::rational(1, 3)).unwrap();
        let b = Number::from_expr(&Expr::rational(2, 3)).unwrap();
        assert_eq!(a.add(&b).into_expr(), Expr::int(1));
    }

    #[test]
    fn reals_contaminate() {
        let a = Number::from_expr(&Expr::rational(1, 2)).unwrap();
        let b = Number::Real(1.5);
        assert_eq!(a.add(&b), Number::Real(2.0));
    }

    #[test]
    fn exact_powers() {
        let two = Number::from_expr(&Expr::int(2)).unwrap();
        let m3 = Number::from_expr(&Expr::int(-3)).unwrap();
        assert_eq!(two.pow(&m3).unwrap().into_expr(), Expr::rational(1, 8));
        let half = Number::from_expr(&Expr::rational(1, 2)).unwrap();
        assert!(two.pow(&half).is_none());
        let zero = Number::zero();
        assert!(zero.pow(&m3).is_none());
    }
}
