//! Surface-syntax parser.
//!
//! Precedence, loosest first:
//!
//! ```text
//! statement := expr "!"?                          Assert[expr]
//! expr      := cond (("->" | ":>") expr)?         Rule / RuleDelayed
//! cond      := conj ("/;" conj)*                  Condition
//! conj      := rel ("&&" rel)*                    And
//! rel       := repl (("in"|"notin"|"="|"=="|"!=") repl)?
//! repl      := pure ("/." pure (("->"|":>") pure)?)*
//! pure      := arith ("&" ("[" args "]")*)*       Function
//! arith     := signed (("+" | "-") term)*
//! signed    := "-" signed | term
//! term      := unary (("*" | "/") unary)*
//! unary     := "-" unary | factor
//! factor    := power ("@" power)*                 Circle
//! power     := postfix ("^" ("-")? power)?
//! postfix   := primary ("[" args "]" | "[[" args "]]")*
//! primary   := numeral | symbol | symbol "(" args ")" | blank | slot
//!            | "(" expr ")" | "{" args "}"
//! ```

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{heads, Expr};

/// Byte range into the parsed text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        SourceSpan { start, end }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("parse error at {}..{}: {message}", span.start, span.end)]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Expr),
    Ident(String),
    Blank { name: Option<String>, kind: Option<String> },
    Slot(i64),
    Op(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(e) => write!(f, "numeral {e}"),
            Tok::Ident(s) => write!(f, "symbol {s}"),
            Tok::Blank { .. } => f.write_str("blank"),
            Tok::Slot(_) => f.write_str("slot"),
            Tok::Op(o) => write!(f, "'{o}'"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

// longest first
const OPERATORS: &[&str] = &[
    "->", ":>", "/;", "/.", "&&", "==", "!=", "+", "-", "*", "/", "^", "@", "&", "!", "=", "[", "]", "(", ")", "{",
    "}", ",",
];

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '$'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '$'
}

fn lex(text: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let mut out = Vec::new();
    let bytes: Vec<(usize, char)> = text.char_indices().collect();
    let at = |i: usize| bytes.get(i).map(|&(_, c)| c);
    let pos = |i: usize| bytes.get(i).map(|&(p, _)| p).unwrap_or(text.len());
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i].1;
        let start = pos(i);
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && at(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let (tok, next) = lex_number(text, &bytes, i)?;
            out.push((tok, SourceSpan::new(start, pos(next))));
            i = next;
            continue;
        }
        if is_ident_start(c) {
            let mut j = i;
            while at(j).is_some_and(is_ident_char) {
                j += 1;
            }
            let name = text[start..pos(j)].to_string();
            if at(j) == Some('_') {
                let mut k = j + 1;
                let kind_start = k;
                while at(k).is_some_and(is_ident_char) {
                    k += 1;
                }
                let kind = (k > kind_start).then(|| text[pos(kind_start)..pos(k)].to_string());
                out.push((Tok::Blank { name: Some(name), kind }, SourceSpan::new(start, pos(k))));
                i = k;
            } else {
                out.push((Tok::Ident(name), SourceSpan::new(start, pos(j))));
                i = j;
            }
            continue;
        }
        if c == '_' {
            let mut k = i + 1;
            while at(k).is_some_and(is_ident_char) {
                k += 1;
            }
            let kind = (k > i + 1).then(|| text[pos(i + 1)..pos(k)].to_string());
            out.push((Tok::Blank { name: None, kind }, SourceSpan::new(start, pos(k))));
            i = k;
            continue;
        }
        if c == '#' {
            let mut k = i + 1;
            while at(k).is_some_and(|d| d.is_ascii_digit()) {
                k += 1;
            }
            let n = if k > i + 1 {
                text[pos(i + 1)..pos(k)].parse::<i64>().map_err(|_| ParseError {
                    message: "slot index too large".into(),
                    span: SourceSpan::new(start, pos(k)),
                })?
            } else {
                1
            };
            if n < 1 {
                return Err(ParseError {
                    message: "slot indices start at 1".into(),
                    span: SourceSpan::new(start, pos(k)),
                });
            }
            out.push((Tok::Slot(n), SourceSpan::new(start, pos(k))));
            i = k;
            continue;
        }
        let rest = &text[start..];
        match OPERATORS.iter().find(|op| rest.starts_with(**op)) {
            Some(op) => {
                let len = op.chars().count();
                out.push((Tok::Op(op), SourceSpan::new(start, pos(i + len))));
                i += len;
            }
            None => {
                return Err(ParseError {
                    message: format!("unexpected character '{c}'"),
                    span: SourceSpan::new(start, start + c.len_utf8()),
                })
            }
        }
    }
    out.push((Tok::Eof, SourceSpan::new(text.len(), text.len())));
    Ok(out)
}

fn lex_number(text: &str, chars: &[(usize, char)], start_idx: usize) -> Result<(Tok, usize), ParseError> {
    let at = |i: usize| chars.get(i).map(|&(_, c)| c);
    let pos = |i: usize| chars.get(i).map(|&(p, _)| p).unwrap_or(text.len());
    let digits = |mut i: usize| {
        while at(i).is_some_and(|c| c.is_ascii_digit()) {
            i += 1;
        }
        i
    };
    let mut i = digits(start_idx);
    let mut is_real = false;
    if at(i) == Some('.') && at(i + 1).is_some_and(|c| c.is_ascii_digit()) {
        is_real = true;
        i = digits(i + 1);
    }
    if matches!(at(i), Some('e') | Some('E')) {
        let mut j = i + 1;
        if matches!(at(j), Some('+') | Some('-')) {
            j += 1;
        }
        if at(j).is_some_and(|c| c.is_ascii_digit()) {
            is_real = true;
            i = digits(j);
        }
    }
    let span = SourceSpan::new(pos(start_idx), pos(i));
    let lexeme = &text[span.start..span.end];
    if is_real {
        let v: f64 =
            lexeme.parse().map_err(|_| ParseError { message: format!("bad real numeral '{lexeme}'"), span })?;
        return Ok((Tok::Num(Expr::Real(v)), i));
    }
    let numer: BigInt = lexeme.parse().expect("digits");
    // "22/7" is a single rational numeral; "22/x" is division
    if at(i) == Some('/') && at(i + 1).is_some_and(|c| c.is_ascii_digit()) {
        let j = digits(i + 1);
        let den_text = &text[pos(i + 1)..pos(j)];
        let denom: BigInt = den_text.parse().expect("digits");
        if denom == BigInt::from(0) {
            return Err(ParseError { message: "zero denominator".into(), span: SourceSpan::new(span.start, pos(j)) });
        }
        return Ok((Tok::Num(Expr::from_ratio(BigRational::new(numer, denom))), j));
    }
    Ok((Tok::Num(Expr::Integer(numer)), i))
}

/// Lowercase spellings accepted for built-in heads.
fn alias(name: &str) -> &str {
    match name {
        "star" => heads::STAR,
        "delta" => heads::DELTA,
        "ul" => heads::UNDERLINE,
        "exp" => "Exp",
        "log" => "Log",
        "sin" => "Sin",
        "cos" => "Cos",
        "tan" => "Tan",
        "sqrt" => "Sqrt",
        "abs" => "Absolute",
        "pi" | "π" => "Pi",
        other => other,
    }
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    i: usize,
}

type PResult = Result<Expr, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let idx = (self.i + k).min(self.toks.len() - 1);
        &self.toks[idx].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn is_op(&self, op: &str) -> bool {
        matches!(self.peek(), Tok::Op(o) if *o == op)
    }

    fn is_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == word)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.is_op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> Result<(), ParseError> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{op}', found {}", self.peek())))
        }
    }

    fn error(&self, message: String) -> ParseError {
        ParseError { message, span: self.span() }
    }

    fn statement(&mut self) -> PResult {
        let e = self.expr()?;
        if self.eat_op("!") {
            return Ok(Expr::call(heads::ASSERT, vec![e]));
        }
        Ok(e)
    }

    fn expr(&mut self) -> PResult {
        let lhs = self.cond()?;
        if self.eat_op("->") {
            let rhs = self.expr()?;
            return Ok(Expr::call(heads::RULE, vec![lhs, rhs]));
        }
        if self.eat_op(":>") {
            let rhs = self.expr()?;
            return Ok(Expr::call(heads::RULE_DELAYED, vec![lhs, rhs]));
        }
        Ok(lhs)
    }

    fn cond(&mut self) -> PResult {
        let mut lhs = self.conj()?;
        while self.eat_op("/;") {
            let test = self.conj()?;
            lhs = Expr::call(heads::CONDITION, vec![lhs, test]);
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> PResult {
        let first = self.rel()?;
        if !self.is_op("&&") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op("&&") {
            items.push(self.rel()?);
        }
        Ok(Expr::call(heads::AND, items))
    }

    fn rel(&mut self) -> PResult {
        let lhs = self.repl()?;
        let head = if self.is_ident("in") {
            heads::ELEMENT
        } else if self.is_ident("notin") {
            heads::NOT_ELEMENT
        } else if self.is_op("=") || self.is_op("==") {
            heads::EQUAL
        } else if self.is_op("!=") {
            heads::UNEQUAL
        } else {
            return Ok(lhs);
        };
        self.bump();
        let rhs = self.repl()?;
        Ok(Expr::call(head, vec![lhs, rhs]))
    }

    fn repl(&mut self) -> PResult {
        let mut e = self.pure()?;
        while self.eat_op("/.") {
            let lhs = self.pure()?;
            let rule = if self.eat_op("->") {
                Expr::call(heads::RULE, vec![lhs, self.pure()?])
            } else if self.eat_op(":>") {
                Expr::call(heads::RULE_DELAYED, vec![lhs, self.pure()?])
            } else {
                lhs
            };
            e = Expr::call(heads::REPLACE_ALL, vec![e, rule]);
        }
        Ok(e)
    }

    fn pure(&mut self) -> PResult {
        let mut e = self.arith()?;
        // "&&" lexes as its own token, so a lone "&" is always Function
        while self.eat_op("&") {
            e = Expr::call(heads::FUNCTION, vec![e]);
            while self.is_op("[") && !matches!(self.peek_at(1), Tok::Op("[")) {
                self.bump();
                let args = self.args("]")?;
                e = Expr::apply(e, args);
            }
        }
        Ok(e)
    }

    fn arith(&mut self) -> PResult {
        let first = self.signed()?;
        if !self.is_op("+") && !self.is_op("-") {
            return Ok(first);
        }
        let mut items = vec![first];
        loop {
            if self.eat_op("+") {
                items.push(self.term()?);
            } else if self.eat_op("-") {
                let t = self.term()?;
                items.push(negate(t));
            } else {
                break;
            }
        }
        Ok(Expr::plus(items))
    }

    // a leading minus scopes over the whole first term: -x*y is -(x*y)
    fn signed(&mut self) -> PResult {
        if self.eat_op("-") {
            let inner = self.signed()?;
            return Ok(negate(inner));
        }
        self.term()
    }

    fn term(&mut self) -> PResult {
        let first = self.unary()?;
        if !self.is_op("*") && !self.is_op("/") {
            return Ok(first);
        }
        let mut items = vec![first];
        loop {
            if self.eat_op("*") {
                items.push(self.unary()?);
            } else if self.eat_op("/") {
                let d = self.unary()?;
                items.push(Expr::power(d, Expr::int(-1)));
            } else {
                break;
            }
        }
        Ok(Expr::times(items))
    }

    fn unary(&mut self) -> PResult {
        if self.eat_op("-") {
            let inner = self.unary()?;
            return Ok(negate(inner));
        }
        self.factor()
    }

    fn factor(&mut self) -> PResult {
        let first = self.power()?;
        if !self.is_op("@") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op("@") {
            items.push(self.power()?);
        }
        Ok(Expr::call(heads::CIRCLE, items))
    }

    fn power(&mut self) -> PResult {
        let base = self.postfix()?;
        if self.eat_op("^") {
            let exponent = if self.eat_op("-") { negate(self.power()?) } else { self.power()? };
            return Ok(Expr::power(base, exponent));
        }
        Ok(base)
    }

    fn postfix(&mut self) -> PResult {
        let mut e = self.primary()?;
        while self.is_op("[") {
            self.bump();
            if self.is_op("[") {
                self.bump();
                let mut args = vec![e];
                args.extend(self.args("]")?);
                self.expect_op("]")?;
                e = Expr::call(heads::PART, args);
            } else {
                let args = self.args("]")?;
                e = Expr::apply(e, args);
            }
        }
        Ok(e)
    }

    /// Comma-separated expressions up to and including `close`.
    fn args(&mut self, close: &str) -> Result<Vec<Expr>, ParseError> {
        let mut out = Vec::new();
        if self.eat_op(close) {
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            if self.eat_op(",") {
                continue;
            }
            self.expect_op(close)?;
            return Ok(out);
        }
    }

    fn primary(&mut self) -> PResult {
        let span = self.span();
        match self.bump() {
            Tok::Num(n) => Ok(n),
            Tok::Ident(name) => {
                let sym = Expr::sym(alias(&name));
                if self.eat_op("(") {
                    let args = self.args(")")?;
                    return Ok(Expr::apply(sym, args));
                }
                Ok(sym)
            }
            Tok::Blank { name, kind } => {
                let blank = match kind {
                    Some(k) => Expr::call(heads::BLANK, vec![Expr::sym(&k)]),
                    None => Expr::call(heads::BLANK, vec![]),
                };
                Ok(match name {
                    Some(n) => Expr::call(heads::PATTERN, vec![Expr::sym(&n), blank]),
                    None => blank,
                })
            }
            Tok::Slot(n) => Ok(Expr::call(heads::SLOT, vec![Expr::int(n)])),
            Tok::Op("(") => {
                let e = self.expr()?;
                self.expect_op(")")?;
                Ok(e)
            }
            Tok::Op("{") => {
                let items = self.args("}")?;
                Ok(Expr::list(items))
            }
            other => Err(ParseError { message: format!("unexpected {other}"), span }),
        }
    }
}

/// Unary minus as the parser reads it: numerals are negated, a product has
/// its numeric coefficient negated (or gains a leading `-1`), anything else
/// is wrapped in `Times[-1, _]`.
pub(crate) fn negate(e: Expr) -> Expr {
    if let Some(n) = e.as_number() {
        return n.neg().into_expr();
    }
    if let Some(factors) = e.args_of(heads::TIMES) {
        if !factors.is_empty() {
            let mut out = Vec::with_capacity(factors.len() + 1);
            match factors[0].as_number() {
                Some(c) => out.push(c.neg().into_expr()),
                None => {
                    out.push(Expr::int(-1));
                    out.push(factors[0].clone());
                }
            }
            out.extend(factors[1..].iter().cloned());
            return Expr::times(out);
        }
    }
    Expr::negate(e)
}

fn run(text: &str, statement: bool) -> PResult {
    let toks = lex(text)?;
    let mut p = Parser { toks, i: 0 };
    if matches!(p.peek(), Tok::Eof) {
        return Err(p.error("empty input".into()));
    }
    let e = if statement { p.statement()? } else { p.expr()? };
    if !matches!(p.peek(), Tok::Eof) {
        return Err(p.error(format!("unexpected {} after expression", p.peek())));
    }
    Ok(e)
}

/// Parses one expression. A trailing `!` marks an assertion and yields
/// `Assert[expr]`.
pub fn parse(text: &str) -> PResult {
    run(text, true)
}

/// Parses an expression without the assertion suffix.
pub fn parse_expr(text: &str) -> PResult {
    run(text, false)
}

/// Alias of [`parse`], kept for readability at script call sites.
pub fn parse_statement(text: &str) -> PResult {
    run(text, true)
}
