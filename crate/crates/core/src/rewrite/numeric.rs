//! Double-precision evaluation and the calculability gate.

use crate::kernel::{heads, AtomKind, Expr, Symbol};

use super::{EvalError, Session};

const CONSTANTS: [&str; 2] = ["Pi", "E"];
const FUNCTIONS: [&str; 8] = ["Exp", "Log", "Sin", "Cos", "Tan", "Sqrt", "Absolute", "N"];

pub(super) fn is_numeric_function(head: &str) -> bool {
    FUNCTIONS.contains(&head) || head == heads::PLUS || head == heads::TIMES || head == heads::POWER
}

/// Value of `e` in double precision, or the symbols blocking it.
pub fn numeric_value(e: &Expr) -> Result<f64, EvalError> {
    value(e).ok_or_else(|| EvalError::NotNumeric { expr: e.clone(), blocking: blocking_symbols(e) })
}

fn value(e: &Expr) -> Option<f64> {
    if let Some(n) = e.as_number() {
        return Some(n.to_f64());
    }
    match e {
        Expr::Symbol(s) => match s.name() {
            "Pi" => Some(std::f64::consts::PI),
            "E" => Some(std::f64::consts::E),
            _ => None,
        },
        Expr::Compound(c) => {
            let head = c.head.as_symbol()?.name();
            let xs = c.args.iter().map(value).collect::<Option<Vec<f64>>>()?;
            let v = match (head, xs.as_slice()) {
                (heads::PLUS, _) => xs.iter().sum(),
                (heads::TIMES, _) => xs.iter().product(),
                (heads::POWER, [b, x]) => b.powf(*x),
                ("Exp", [x]) => x.exp(),
                ("Log", [x]) => x.ln(),
                ("Log", [b, x]) => x.ln() / b.ln(),
                ("Sin", [x]) => x.sin(),
                ("Cos", [x]) => x.cos(),
                ("Tan", [x]) => x.tan(),
                ("Sqrt", [x]) => x.sqrt(),
                ("Absolute", [x]) => x.abs(),
                ("N", [x]) => *x,
                _ => return None,
            };
            v.is_finite().then_some(v)
        }
        _ => None,
    }
}

fn blocking_symbols(e: &Expr) -> Vec<Symbol> {
    e.symbols()
        .into_iter()
        .filter(|s| {
            let n = s.name();
            !CONSTANTS.contains(&n) && !is_numeric_function(n)
        })
        .collect()
}

/// Why an expression is not calculable.
#[derive(Clone, Debug, PartialEq)]
pub enum NotCalculable {
    /// Symbols with no rule to a numeral.
    FreeSymbols(Vec<Symbol>),
    /// Evaluation ran out of budget.
    Budget,
    /// The normal form is numeric-free but not a numeral of the target kind
    /// (a list, a complex value, an undefined operation).
    NonNumeric(Expr),
    Error(String),
}

impl std::fmt::Display for NotCalculable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NotCalculable::FreeSymbols(s) => {
                let names: Vec<&str> = s.iter().map(Symbol::name).collect();
                write!(f, "free symbol(s) {}", names.join(", "))
            }
            NotCalculable::Budget => f.write_str("budget exceeded"),
            NotCalculable::NonNumeric(e) => write!(f, "non-numeric normal form {e}"),
            NotCalculable::Error(m) => f.write_str(m),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Calculability {
    pub value: Option<Expr>,
    pub reason: Option<NotCalculable>,
}

impl Calculability {
    pub fn is_calculable(&self) -> bool {
        self.value.is_some()
    }
}

pub(super) fn calculable(s: &Session, e: &Expr, target: AtomKind) -> Calculability {
    let fail = |r| Calculability { value: None, reason: Some(r) };
    let v = match s.evaluate(e) {
        Ok(v) => v,
        Err(err) if err.is_budget() => return fail(NotCalculable::Budget),
        Err(err) => return fail(NotCalculable::Error(err.to_string())),
    };
    if v.atom_kind() == Some(target) {
        return Calculability { value: Some(v), reason: None };
    }
    if target == AtomKind::Real {
        match numeric_value(&v) {
            Ok(x) => return Calculability { value: Some(Expr::Real(x)), reason: None },
            Err(EvalError::NotNumeric { blocking, .. }) if !blocking.is_empty() => {
                return fail(NotCalculable::FreeSymbols(blocking))
            }
            Err(_) => return fail(NotCalculable::NonNumeric(v)),
        }
    }
    let blocking = blocking_symbols(&v);
    if blocking.is_empty() {
        fail(NotCalculable::NonNumeric(v))
    } else {
        fail(NotCalculable::FreeSymbols(blocking))
    }
}
