//! Expression data model.
//!
//! An [`Expr`] is either an atom (symbol or numeral) or a compound
//! `head[args...]` whose head is itself an expression. Values are immutable
//! and cheap to clone; compounds are shared behind an [`Arc`].

mod number;
mod order;
mod parse;
mod print;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use number::Number;
pub use parse::{parse, parse_expr, parse_statement, ParseError, SourceSpan};
pub use print::print;

/// Interned-by-value symbol name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The four atom kinds a typed blank can ask for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomKind {
    Symbol,
    Integer,
    Rational,
    Real,
}

impl AtomKind {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "Symbol" => Some(AtomKind::Symbol),
            "Integer" => Some(AtomKind::Integer),
            "Rational" => Some(AtomKind::Rational),
            "Real" => Some(AtomKind::Real),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AtomKind::Symbol => "Symbol",
            AtomKind::Integer => "Integer",
            AtomKind::Rational => "Rational",
            AtomKind::Real => "Real",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Compound {
    pub head: Expr,
    pub args: Vec<Expr>,
}

/// Immutable expression tree.
///
/// Rationals are always stored reduced with a positive denominator, and a
/// rational with denominator one is stored as an integer; use the
/// constructors rather than building `Rational` by hand.
#[derive(Clone)]
pub enum Expr {
    Symbol(Symbol),
    Integer(BigInt),
    Rational(Arc<BigRational>),
    Real(f64),
    Compound(Arc<Compound>),
}

/// Well-known head and constant names.
pub mod heads {
    pub const PLUS: &str = "Plus";
    pub const TIMES: &str = "Times";
    pub const POWER: &str = "Power";
    pub const CIRCLE: &str = "Circle";
    pub const FUNCTION: &str = "Function";
    pub const SLOT: &str = "Slot";
    pub const BLANK: &str = "Blank";
    pub const PATTERN: &str = "Pattern";
    pub const CONDITION: &str = "Condition";
    pub const RULE: &str = "Rule";
    pub const RULE_DELAYED: &str = "RuleDelayed";
    pub const REPLACE_ALL: &str = "ReplaceAll";
    pub const ELEMENT: &str = "Element";
    pub const NOT_ELEMENT: &str = "NotElement";
    pub const EQUAL: &str = "Equal";
    pub const UNEQUAL: &str = "Unequal";
    pub const AND: &str = "And";
    pub const ASSERT: &str = "Assert";
    pub const LIST: &str = "List";
    pub const PART: &str = "Part";
    pub const STAR: &str = "Star";
    pub const DELTA: &str = "Delta";
    pub const UNDERLINE: &str = "Underline";
    pub const TRUE: &str = "True";
    pub const FALSE: &str = "False";
}

impl Expr {
    pub fn sym(name: &str) -> Expr {
        Expr::Symbol(Symbol::new(name))
    }

    pub fn int(value: i64) -> Expr {
        Expr::Integer(BigInt::from(value))
    }

    pub fn real(value: f64) -> Expr {
        Expr::Real(value)
    }

    /// Builds a reduced rational, collapsing to an integer when possible.
    ///
    /// Panics if `den` is zero.
    pub fn rational(num: i64, den: i64) -> Expr {
        Expr::from_ratio(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_ratio(r: BigRational) -> Expr {
        // BigRational::new already reduces and normalizes the sign
        if r.denom().is_one() {
            Expr::Integer(r.numer().clone())
        } else {
            Expr::Rational(Arc::new(r))
        }
    }

    pub fn apply(head: Expr, args: Vec<Expr>) -> Expr {
        Expr::Compound(Arc::new(Compound { head, args }))
    }

    /// `name[args...]` with a symbol head.
    pub fn call(name: &str, args: Vec<Expr>) -> Expr {
        Expr::apply(Expr::sym(name), args)
    }

    pub fn true_() -> Expr {
        Expr::sym(heads::TRUE)
    }

    pub fn false_() -> Expr {
        Expr::sym(heads::FALSE)
    }

    pub fn bool(b: bool) -> Expr {
        if b {
            Expr::true_()
        } else {
            Expr::false_()
        }
    }

    pub fn plus(args: Vec<Expr>) -> Expr {
        Expr::call(heads::PLUS, args)
    }

    pub fn times(args: Vec<Expr>) -> Expr {
        Expr::call(heads::TIMES, args)
    }

    pub fn power(base: Expr, exponent: Expr) -> Expr {
        Expr::call(heads::POWER, vec![base, exponent])
    }

    pub fn negate(e: Expr) -> Expr {
        Expr::times(vec![Expr::int(-1), e])
    }

    pub fn minus(a: Expr, b: Expr) -> Expr {
        Expr::plus(vec![a, Expr::negate(b)])
    }

    pub fn list(items: Vec<Expr>) -> Expr {
        Expr::call(heads::LIST, items)
    }

    pub fn element(x: Expr, set: Expr) -> Expr {
        Expr::call(heads::ELEMENT, vec![x, set])
    }

    /// `Star[x]` or `Star[eps, x]`.
    pub fn star(eps: Option<Expr>, x: Expr) -> Expr {
        match eps {
            Some(e) => Expr::call(heads::STAR, vec![e, x]),
            None => Expr::call(heads::STAR, vec![x]),
        }
    }

    /// `Delta[x]` or `Delta[eps, x]`.
    pub fn delta(eps: Option<Expr>, x: Expr) -> Expr {
        match eps {
            Some(e) => Expr::call(heads::DELTA, vec![e, x]),
            None => Expr::call(heads::DELTA, vec![x]),
        }
    }

    pub fn is_atom(&self) -> bool {
        !matches!(self, Expr::Compound(_))
    }

    pub fn is_number(&self) -> bool {
        matches!(self, Expr::Integer(_) | Expr::Rational(_) | Expr::Real(_))
    }

    pub fn is_exact_number(&self) -> bool {
        matches!(self, Expr::Integer(_) | Expr::Rational(_))
    }

    pub fn atom_kind(&self) -> Option<AtomKind> {
        match self {
            Expr::Symbol(_) => Some(AtomKind::Symbol),
            Expr::Integer(_) => Some(AtomKind::Integer),
            Expr::Rational(_) => Some(AtomKind::Rational),
            Expr::Real(_) => Some(AtomKind::Real),
            Expr::Compound(_) => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self {
            Expr::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_symbol(&self, name: &str) -> bool {
        matches!(self, Expr::Symbol(s) if s.name() == name)
    }

    pub fn as_compound(&self) -> Option<&Compound> {
        match self {
            Expr::Compound(c) => Some(c),
            _ => None,
        }
    }

    pub fn head(&self) -> Option<&Expr> {
        self.as_compound().map(|c| &c.head)
    }

    pub fn args(&self) -> &[Expr] {
        match self {
            Expr::Compound(c) => &c.args,
            _ => &[],
        }
    }

    /// True when this is a compound whose head is the symbol `name`.
    pub fn has_head(&self, name: &str) -> bool {
        matches!(self, Expr::Compound(c) if c.head.is_symbol(name))
    }

    /// Args of `name[...]`, if this is one.
    pub fn args_of(&self, name: &str) -> Option<&[Expr]> {
        match self {
            Expr::Compound(c) if c.head.is_symbol(name) => Some(&c.args),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Expr::Integer(i) => i.to_i64(),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Expr::Integer(i) => i.is_zero(),
            Expr::Real(r) => *r == 0.0,
            _ => false,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Expr::Integer(i) => i.is_one(),
            Expr::Real(r) => *r == 1.0,
            _ => false,
        }
    }

    pub fn is_negative_number(&self) -> bool {
        match self {
            Expr::Integer(i) => i.is_negative(),
            Expr::Rational(r) => r.is_negative(),
            Expr::Real(r) => r.is_sign_negative() && *r != 0.0,
            _ => false,
        }
    }

    /// Depth: atoms are 1, a compound is one more than its deepest argument.
    /// The head counts as an atom, as in `Depth[x[y,z[1,2]]] = 3`.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Compound(c) => 1 + c.args.iter().map(Expr::depth).max().unwrap_or(1).max(1),
            _ => 1,
        }
    }

    /// Number of atoms in the tree, heads included.
    pub fn leaf_count(&self) -> usize {
        match self {
            Expr::Compound(c) => c.head.leaf_count() + c.args.iter().map(Expr::leaf_count).sum::<usize>(),
            _ => 1,
        }
    }

    /// True if `needle` is structurally a subexpression (head positions included).
    pub fn contains(&self, needle: &Expr) -> bool {
        if self == needle {
            return true;
        }
        match self {
            Expr::Compound(c) => c.head.contains(needle) || c.args.iter().any(|a| a.contains(needle)),
            _ => false,
        }
    }

    /// Bottom-up structural map.
    pub fn map_bottom_up(&self, f: &mut dyn FnMut(Expr) -> Expr) -> Expr {
        match self {
            Expr::Compound(c) => {
                let head = c.head.map_bottom_up(f);
                let args = c.args.iter().map(|a| a.map_bottom_up(f)).collect();
                f(Expr::apply(head, args))
            }
            _ => f(self.clone()),
        }
    }

    /// Replaces every occurrence of `from` with `to`.
    pub fn replace(&self, from: &Expr, to: &Expr) -> Expr {
        if self == from {
            return to.clone();
        }
        match self {
            Expr::Compound(c) => {
                Expr::apply(c.head.replace(from, to), c.args.iter().map(|a| a.replace(from, to)).collect())
            }
            _ => self.clone(),
        }
    }

    /// Collects the distinct symbols of the tree, in first-seen order.
    pub fn symbols(&self) -> Vec<Symbol> {
        fn walk(e: &Expr, out: &mut Vec<Symbol>) {
            match e {
                Expr::Symbol(s) => {
                    if !out.contains(s) {
                        out.push(s.clone());
                    }
                }
                Expr::Compound(c) => {
                    walk(&c.head, out);
                    c.args.iter().for_each(|a| walk(a, out));
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    pub fn as_number(&self) -> Option<Number> {
        Number::from_expr(self)
    }
}

impl From<Number> for Expr {
    fn from(n: Number) -> Expr {
        n.into_expr()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
