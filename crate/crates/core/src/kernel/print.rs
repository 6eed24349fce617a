//! Round-trippable printer: `parse(&print(e)) == e` for every expression
//! built from identifier-named symbols and finite numerals.

use super::{heads, parse::negate, Expr};

// binding levels, loosest first; mirror the parser's grammar
const RULE: u8 = 10;
const COND: u8 = 20;
const AND: u8 = 30;
const REL: u8 = 40;
const REPL: u8 = 50;
const PURE: u8 = 60;
const ARITH: u8 = 75;
const NEG: u8 = 76;
const TERM: u8 = 80;
const UNARY: u8 = 90;
const CIRCLE: u8 = 100;
const RATIONAL: u8 = 105;
const POWER: u8 = 110;
const POSTFIX: u8 = 120;
const ATOM: u8 = 130;

pub fn print(e: &Expr) -> String {
    let mut out = String::new();
    match e.args_of(heads::ASSERT) {
        Some([inner]) => {
            write(inner, RULE, &mut out);
            out.push('!');
        }
        _ => write(e, RULE, &mut out),
    }
    out
}

fn is_ident(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '$') && chars.all(|c| c.is_alphanumeric() || c == '$')
}

fn is_negative_numeral(e: &Expr) -> bool {
    match e {
        Expr::Real(r) => r.is_sign_negative(),
        _ => e.is_negative_number(),
    }
}

fn alias_of(head: &str) -> Option<&'static str> {
    match head {
        heads::STAR => Some("star"),
        heads::DELTA => Some("delta"),
        heads::UNDERLINE => Some("ul"),
        _ => None,
    }
}

fn blank_form(e: &Expr) -> Option<String> {
    match e.args_of(heads::BLANK)? {
        [] => Some("_".into()),
        [Expr::Symbol(k)] if is_ident(k.name()) => Some(format!("_{}", k.name())),
        _ => None,
    }
}

fn pattern_form(e: &Expr) -> Option<String> {
    match e.args_of(heads::PATTERN)? {
        [Expr::Symbol(x), blank] if is_ident(x.name()) => Some(format!("{}{}", x.name(), blank_form(blank)?)),
        _ => None,
    }
}

fn slot_form(e: &Expr) -> Option<String> {
    match e.args_of(heads::SLOT)? {
        [n] => match n.as_i64()? {
            1 => Some("#".into()),
            k if k > 1 => Some(format!("#{k}")),
            _ => None,
        },
        _ => None,
    }
}

fn leading_negative_product(e: &Expr) -> bool {
    matches!(e.args_of(heads::TIMES), Some(f) if f.len() >= 2 && is_negative_numeral(&f[0]))
}

/// The expression `p` with `negate(p) == e`, printed after a minus sign.
fn minus_operand(e: &Expr) -> Option<Expr> {
    if is_negative_numeral(e) {
        return Some(negate(e.clone()));
    }
    if !leading_negative_product(e) {
        return None;
    }
    let factors = e.args();
    let flipped = negate(factors[0].clone());
    if flipped.is_one() && flipped.is_exact_number() {
        let rest = &factors[1..];
        let nice = if rest.len() == 1 { rest[0].clone() } else { Expr::times(rest.to_vec()) };
        if negate(nice.clone()) == *e {
            return Some(nice);
        }
    }
    let mut out = vec![flipped];
    out.extend(factors[1..].iter().cloned());
    Some(Expr::times(out))
}

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Symbol(_) => ATOM,
        Expr::Integer(_) | Expr::Real(_) => {
            if is_negative_numeral(e) {
                UNARY
            } else {
                ATOM
            }
        }
        Expr::Rational(_) => {
            if is_negative_numeral(e) {
                UNARY
            } else {
                RATIONAL
            }
        }
        Expr::Compound(c) => {
            let n = c.args.len();
            let Some(h) = c.head.as_symbol().map(|s| s.name()) else {
                return POSTFIX;
            };
            match (h, n) {
                (heads::PLUS, 2..) => ARITH,
                (heads::TIMES, 2..) => {
                    if leading_negative_product(e) {
                        NEG
                    } else {
                        TERM
                    }
                }
                (heads::POWER, 2) => POWER,
                (heads::CIRCLE, 2..) => CIRCLE,
                (heads::FUNCTION, 1) => PURE,
                (heads::RULE | heads::RULE_DELAYED, 2) => RULE,
                (heads::CONDITION, 2) => COND,
                (heads::AND, 2..) => AND,
                (heads::ELEMENT | heads::NOT_ELEMENT | heads::EQUAL | heads::UNEQUAL, 2) => REL,
                (heads::REPLACE_ALL, 2) => REPL,
                _ => POSTFIX.max(special_atom_level(e)),
            }
        }
    }
}

fn special_atom_level(e: &Expr) -> u8 {
    let head = e.head().and_then(Expr::as_symbol).map(|s| s.name()).unwrap_or("");
    if head == heads::LIST
        || alias_of(head).is_some()
        || slot_form(e).is_some()
        || blank_form(e).is_some()
        || pattern_form(e).is_some()
    {
        ATOM
    } else {
        POSTFIX
    }
}

fn write(e: &Expr, min: u8, out: &mut String) {
    if level(e) < min {
        out.push('(');
        write_form(e, out);
        out.push(')');
    } else {
        write_form(e, out);
    }
}

fn write_seq(items: &[Expr], sep: &str, min: u8, out: &mut String) {
    for (i, a) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        write(a, min, out);
    }
}

fn write_form(e: &Expr, out: &mut String) {
    let c = match e {
        Expr::Symbol(s) => return out.push_str(s.name()),
        Expr::Integer(i) => return out.push_str(&i.to_string()),
        Expr::Rational(r) => return out.push_str(&format!("{}/{}", r.numer(), r.denom())),
        Expr::Real(r) => return out.push_str(&format!("{r:?}")),
        Expr::Compound(c) => c,
    };
    let args = &c.args;
    let head = c.head.as_symbol().map(|s| s.name());
    let lvl = level(e);
    match head {
        Some(heads::PLUS) if lvl == ARITH => {
            write(&args[0], NEG, out);
            for t in &args[1..] {
                match minus_operand(t) {
                    Some(p) => {
                        out.push('-');
                        write(&p, TERM, out);
                    }
                    None => {
                        out.push('+');
                        write(t, TERM, out);
                    }
                }
            }
        }
        Some(heads::TIMES) if lvl == NEG => {
            let p = minus_operand(e).expect("leading negative product");
            out.push('-');
            write(&p, TERM, out);
        }
        Some(heads::TIMES) if lvl == TERM => write_seq(args, "*", UNARY, out),
        Some(heads::POWER) if lvl == POWER => {
            write(&args[0], POSTFIX, out);
            out.push('^');
            match minus_operand(&args[1]) {
                Some(p) => {
                    out.push('-');
                    write(&p, POWER, out);
                }
                None => write(&args[1], POWER, out),
            }
        }
        Some(heads::CIRCLE) if lvl == CIRCLE => write_seq(args, "@", POWER, out),
        Some(heads::FUNCTION) if lvl == PURE => {
            write(&args[0], ARITH, out);
            out.push('&');
        }
        Some(h @ (heads::RULE | heads::RULE_DELAYED)) if lvl == RULE => {
            write(&args[0], COND, out);
            out.push_str(if h == heads::RULE { "->" } else { ":>" });
            write(&args[1], RULE, out);
        }
        Some(heads::CONDITION) if lvl == COND => {
            write(&args[0], COND, out);
            out.push_str("/;");
            write(&args[1], AND, out);
        }
        Some(heads::AND) if lvl == AND => write_seq(args, " && ", REL, out),
        Some(h) if lvl == REL => {
            let op = match h {
                heads::ELEMENT => " in ",
                heads::NOT_ELEMENT => " notin ",
                heads::EQUAL => "==",
                _ => "!=",
            };
            write(&args[0], REPL, out);
            out.push_str(op);
            write(&args[1], REPL, out);
        }
        Some(heads::REPLACE_ALL) if lvl == REPL => {
            write(&args[0], REPL, out);
            out.push_str("/.");
            let rule = &args[1];
            let inline = (rule.has_head(heads::RULE) || rule.has_head(heads::RULE_DELAYED))
                && rule.args().len() == 2
                && rule.args().iter().all(|a| level(a) >= PURE);
            if inline {
                write(&rule.args()[0], PURE, out);
                out.push_str(if rule.has_head(heads::RULE) { "->" } else { ":>" });
                write(&rule.args()[1], PURE, out);
            } else {
                write(rule, PURE, out);
            }
        }
        Some(heads::PART) if !args.is_empty() => {
            write(&args[0], POSTFIX, out);
            out.push_str("[[");
            write_seq(&args[1..], ",", RULE, out);
            out.push_str("]]");
        }
        Some(heads::LIST) => {
            out.push('{');
            write_seq(args, ",", RULE, out);
            out.push('}');
        }
        Some(h) if alias_of(h).is_some() => {
            out.push_str(alias_of(h).unwrap_or(h));
            out.push('(');
            write_seq(args, ",", RULE, out);
            out.push(')');
        }
        _ => {
            if let Some(s) = slot_form(e).or_else(|| blank_form(e)).or_else(|| pattern_form(e)) {
                return out.push_str(&s);
            }
            write(&c.head, POSTFIX, out);
            out.push('[');
            write_seq(args, ",", RULE, out);
            out.push(']');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse;

    fn rt(s: &str) -> String {
        let e = parse(s).unwrap();
        let printed = print(&e);
        assert_eq!(parse(&printed).unwrap(), e, "{s} printed as {printed}");
        printed
    }

    #[test]
    fn infix_sugar() {
        assert_eq!(rt("x+y"), "x+y");
        assert_eq!(rt("22/7"), "22/7");
        assert_eq!(rt("f[#]&"), "f[#]&");
        assert_eq!(rt("x-y"), "x-y");
        assert_eq!(rt("x-2*y"), "x-2*y");
        assert_eq!(rt("-x*y+z"), "-x*y+z");
        assert_eq!(rt("x^-1"), "x^-1");
        assert_eq!(rt("x^(1/2)"), "x^(1/2)");
        assert_eq!(rt("(-2)^2"), "(-2)^2");
        assert_eq!(rt("f@g@h"), "f@g@h");
    }

    #[test]
    fn awkward_nestings_round_trip() {
        for s in [
            "(a+b)+c",
            "-1*(2*x)",
            "-(a+b)",
            "(x^y)^z",
            "x^y^z",
            "(f[#]&)[x]",
            "(#1+#2&)[x,y]",
            "x in Cst && y notin Uns",
            "f_[x_+y_] /; f in LFs[K] :> f[x]+f[y]",
            "x+1 /. x->2",
            "star(eps, f)[star(eps, x)]",
            "delta(x)-star(x)+x",
            "#[[1]]&",
            "{1, -2, 3.5, -1/3}",
            "x in Cst !",
            "a*(-b)",
            "x*-2",
            "-0.0",
            "1e-10+x",
        ] {
            rt(s);
        }
    }

    #[test]
    fn assert_prints_with_bang() {
        assert_eq!(rt("x in Cst!"), "x in Cst!");
    }
}
