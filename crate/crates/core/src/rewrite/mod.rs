//! Rules, the fact base and the fixpoint evaluator.

mod canonical;
mod eval;
mod facts;
mod numeric;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::control::ConstraintError;
use crate::kernel::{heads, AtomKind, Expr, Symbol};
use crate::matching::{Pattern, PatternError};

pub use canonical::{canonicalize, expand, normalize_root};
pub use eval::TraceStep;
pub use facts::{FactBase, Truth};
pub use numeric::{numeric_value, Calculability, NotCalculable};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BudgetKind {
    Steps,
    Recursion,
}

impl fmt::Display for BudgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BudgetKind::Steps => "step",
            BudgetKind::Recursion => "recursion",
        })
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("{kind} budget exceeded; partial result: {partial}")]
    BudgetExceeded { kind: BudgetKind, partial: Expr },
    #[error("{function} takes at least {expected} argument(s), got {got}")]
    Arity { function: Expr, expected: usize, got: usize },
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("{expr} is not numeric; blocked by {}", join_symbols(blocking))]
    NotNumeric { expr: Expr, blocking: Vec<Symbol> },
    #[error(transparent)]
    Constraint(Box<ConstraintError>),
    #[error("{0} == {1} is not an asserted identity")]
    NotAnIdentity(Expr, Expr),
    #[error("{0} is not a rule")]
    NotARule(Expr),
}

fn join_symbols(symbols: &[Symbol]) -> String {
    if symbols.is_empty() {
        return "a non-numeric head".into();
    }
    symbols.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")
}

impl From<ConstraintError> for EvalError {
    fn from(e: ConstraintError) -> Self {
        EvalError::Constraint(Box::new(e))
    }
}

impl EvalError {
    pub fn is_budget(&self) -> bool {
        matches!(self, EvalError::BudgetExceeded { .. })
    }
}

/// Evaluation limits; exceeding one is an error value, not a crash.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub steps: usize,
    pub recursion: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { steps: 4096, recursion: 256 }
    }
}

pub type NativeFn = Arc<dyn Fn(&Expr, &FactBase) -> Option<Expr> + Send + Sync>;

#[derive(Clone)]
pub enum RuleKind {
    Pattern { lhs: Pattern, lhs_expr: Expr, rhs: Expr, delayed: bool },
    Native(NativeFn),
}

/// A rewrite rule. Pattern rules carry their conditions inside the
/// left-hand side (`lhs /; test`); native rules are Rust closures over the
/// expression and the fact base.
#[derive(Clone)]
pub struct Rule {
    pub name: String,
    pub kind: RuleKind,
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            RuleKind::Pattern { lhs_expr, rhs, delayed, .. } => {
                write!(f, "{}: {lhs_expr} {} {rhs}", self.name, if *delayed { ":>" } else { "->" })
            }
            RuleKind::Native(_) => write!(f, "{}: <native>", self.name),
        }
    }
}

impl Rule {
    pub fn pattern(name: &str, lhs: &Expr, rhs: Expr, delayed: bool) -> Result<Rule, PatternError> {
        // `lhs -> rhs /; test` is read as `lhs /; test -> rhs`
        let (lhs_expr, rhs) = match rhs.args_of(heads::CONDITION) {
            Some([r, test]) => (Expr::call(heads::CONDITION, vec![lhs.clone(), test.clone()]), r.clone()),
            _ => (lhs.clone(), rhs),
        };
        Ok(Rule {
            name: name.to_string(),
            kind: RuleKind::Pattern { lhs: Pattern::from_expr(&lhs_expr)?, lhs_expr, rhs, delayed },
        })
    }

    /// From `Rule[lhs, rhs]` or `RuleDelayed[lhs, rhs]`.
    pub fn from_expr(e: &Expr) -> Result<Rule, EvalError> {
        let delayed = e.has_head(heads::RULE_DELAYED);
        match e.args_of(if delayed { heads::RULE_DELAYED } else { heads::RULE }) {
            Some([lhs, rhs]) => Ok(Rule::pattern(&e.to_string(), lhs, rhs.clone(), delayed)?),
            _ => Err(EvalError::NotARule(e.clone())),
        }
    }

    /// Parses `lhs -> rhs` or `lhs :> rhs`; panics on malformed text, so
    /// only for rule literals in library code.
    pub fn parse(name: &str, text: &str) -> Rule {
        let e = crate::kernel::parse(text).unwrap_or_else(|err| panic!("rule literal {text}: {err}"));
        let delayed = e.has_head(heads::RULE_DELAYED);
        match e.args() {
            [lhs, rhs] if delayed || e.has_head(heads::RULE) => Rule::pattern(name, lhs, rhs.clone(), delayed)
                .unwrap_or_else(|err| panic!("rule literal {text}: {err}")),
            _ => panic!("rule literal {text} is not a rule"),
        }
    }

    pub fn native(name: &str, f: impl Fn(&Expr, &FactBase) -> Option<Expr> + Send + Sync + 'static) -> Rule {
        Rule { name: name.to_string(), kind: RuleKind::Native(Arc::new(f)) }
    }

    fn head_key(&self) -> Option<&Symbol> {
        match &self.kind {
            RuleKind::Pattern { lhs, .. } => lhs.head_key(),
            RuleKind::Native(_) => None,
        }
    }
}

/// A named, immutable bundle of rules together with the facts it asserts
/// on installation.
#[derive(Clone, Debug)]
pub struct RuleSet {
    pub name: String,
    pub rules: Vec<Rule>,
    pub facts: Vec<Expr>,
    pub enables_closure: bool,
}

impl RuleSet {
    pub fn new(name: &str) -> Self {
        RuleSet { name: name.to_string(), rules: Vec::new(), facts: Vec::new(), enables_closure: false }
    }

    pub fn rule(mut self, r: Rule) -> Self {
        self.rules.push(r);
        self
    }

    pub fn fact(mut self, text: &str) -> Self {
        self.facts.push(crate::kernel::parse(text).unwrap_or_else(|e| panic!("fact literal {text}: {e}")));
        self
    }
}

/// Evaluation context: rules, facts, budgets, tolerance and the eigeninput
/// cache. Evaluation borrows the session immutably; assertions, rule
/// installation and eigeninput declarations need `&mut`.
#[derive(Clone, Debug)]
pub struct Session {
    user_rules: Vec<Rule>,
    packs: Vec<RuleSet>,
    facts: FactBase,
    pub budget: Budget,
    pub tolerance: f64,
    eigeninputs: BTreeMap<Expr, CachedRoot>,
}

#[derive(Clone, Debug, PartialEq)]
struct CachedRoot {
    response: Expr,
    servo: String,
    rho: f64,
}

impl Default for Session {
    fn default() -> Self {
        Session {
            user_rules: Vec::new(),
            packs: Vec::new(),
            facts: FactBase::new(),
            budget: Budget::default(),
            tolerance: 1e-10,
            eigeninputs: BTreeMap::new(),
        }
    }
}

impl Session {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_packs(packs: impl IntoIterator<Item = RuleSet>) -> Self {
        let mut s = Session::new();
        for p in packs {
            s.install(p);
        }
        s
    }

    /// Adds a rule pack after those already installed. Installing a pack
    /// with an already-installed name is a no-op.
    pub fn install(&mut self, pack: RuleSet) {
        if self.packs.iter().any(|p| p.name == pack.name) {
            return;
        }
        for f in &pack.facts {
            self.facts.assert(f.clone());
        }
        if pack.enables_closure {
            self.facts.enable_closure();
        }
        self.packs.push(pack);
    }

    pub fn pack_names(&self) -> Vec<&str> {
        self.packs.iter().map(|p| p.name.as_str()).collect()
    }

    /// Installs a user rule. User rules are tried before any pack. An
    /// immediate rule (`->`) has its right-hand side evaluated now.
    pub fn add_rule(&mut self, rule: &Expr) -> Result<(), EvalError> {
        let mut r = Rule::from_expr(rule)?;
        if let RuleKind::Pattern { rhs, delayed: false, .. } = &mut r.kind {
            *rhs = self.evaluate(rhs)?;
        }
        self.user_rules.push(r);
        Ok(())
    }

    pub fn push_rule(&mut self, rule: Rule) {
        self.user_rules.push(rule);
    }

    pub fn assert(&mut self, rel: Expr) {
        self.facts.assert(rel);
    }

    pub fn assert_str(&mut self, text: &str) {
        let e = crate::kernel::parse(text).unwrap_or_else(|err| panic!("fact literal {text}: {err}"));
        self.facts.assert(e);
    }

    pub fn query(&self, rel: &Expr) -> Truth {
        self.facts.query(rel)
    }

    pub fn facts(&self) -> &FactBase {
        &self.facts
    }

    pub fn facts_mut(&mut self) -> &mut FactBase {
        &mut self.facts
    }

    pub fn eigeninput(&self, tag: &Expr) -> Option<f64> {
        self.eigeninputs.get(tag).map(|c| c.rho)
    }

    pub(crate) fn cached_eigeninput(&self, tag: &Expr, response: &Expr, servo: &str) -> Option<f64> {
        self.eigeninputs.get(tag).filter(|c| c.response == *response && c.servo == servo).map(|c| c.rho)
    }

    pub(crate) fn cache_eigeninput(&mut self, tag: Expr, response: Expr, servo: String, rho: f64) {
        self.eigeninputs.insert(tag, CachedRoot { response, servo, rho });
    }

    /// Clears rules, packs, facts and the eigeninput cache; budgets and
    /// tolerance are kept.
    pub fn reset(&mut self) {
        *self = Session { budget: self.budget, tolerance: self.tolerance, ..Session::default() };
    }

    pub fn evaluate(&self, e: &Expr) -> Result<Expr, EvalError> {
        eval::Evaluator::new(self, false).run(e).0
    }

    /// Evaluates and records every rewrite step.
    pub fn evaluate_traced(&self, e: &Expr) -> (Result<Expr, EvalError>, Vec<TraceStep>) {
        eval::Evaluator::new(self, true).run(e)
    }

    /// Runs one script statement: `Assert[rel]` asserts `rel` (its
    /// arguments evaluated first) and yields `True`; a top-level rule is
    /// installed and echoed; anything else is evaluated.
    pub fn execute(&mut self, stmt: &Expr) -> Result<Expr, EvalError> {
        if let Some([rel]) = stmt.args_of(heads::ASSERT) {
            let rel = match rel.as_compound() {
                Some(c) if !rel.has_head(heads::AND) => {
                    let args = c.args.iter().map(|a| self.evaluate(a)).collect::<Result<Vec<_>, _>>()?;
                    Expr::apply(c.head.clone(), args)
                }
                _ => rel.clone(),
            };
            if let Some(parts) = rel.args_of(heads::AND) {
                for p in parts.iter().cloned() {
                    self.execute(&Expr::call(heads::ASSERT, vec![p]))?;
                }
            } else {
                self.facts.assert(rel);
            }
            return Ok(Expr::true_());
        }
        if stmt.has_head(heads::RULE) || stmt.has_head(heads::RULE_DELAYED) {
            self.add_rule(stmt)?;
            return Ok(stmt.clone());
        }
        self.evaluate(stmt)
    }

    pub fn canonicalize(&self, e: &Expr) -> Expr {
        canonicalize(e)
    }

    /// Evaluates, then computes a double-precision value.
    pub fn numeric(&self, e: &Expr) -> Result<Expr, EvalError> {
        let v = self.evaluate(e)?;
        numeric_value(&v).map(Expr::Real)
    }

    /// Does `e` evaluate within budget to a numeral of kind `target`?
    /// Reals are reached through [`Session::numeric`].
    pub fn calculable(&self, e: &Expr, target: AtomKind) -> Calculability {
        numeric::calculable(self, e, target)
    }

    /// Leaf count of the canonical normal form; infinite when evaluation
    /// runs out of budget.
    pub fn complexity(&self, e: &Expr) -> f64 {
        match self.evaluate(e) {
            Ok(v) => canonicalize(&v).leaf_count() as f64,
            Err(err) if err.is_budget() => f64::INFINITY,
            Err(_) => canonicalize(e).leaf_count() as f64,
        }
    }

    /// `f` conveys identity on every pair unless a witness says otherwise.
    /// Each pair must be an asserted identity.
    pub fn conveys_identity(&self, f: &Expr, pairs: &[(Expr, Expr)]) -> Result<Conveys, EvalError> {
        for (x, y) in pairs {
            if !self.facts.equal(x, y).is_true() {
                return Err(EvalError::NotAnIdentity(x.clone(), y.clone()));
            }
            let fx = canonicalize(&self.evaluate(&Expr::apply(f.clone(), vec![x.clone()]))?);
            let fy = canonicalize(&self.evaluate(&Expr::apply(f.clone(), vec![y.clone()]))?);
            if fx != fy {
                return Ok(Conveys::Witness { x: x.clone(), y: y.clone(), fx, fy });
            }
        }
        Ok(Conveys::NoWitness)
    }

    fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.user_rules.iter().chain(self.packs.iter().flat_map(|p| p.rules.iter()))
    }
}

/// `f` is at least as specialized as `g` in `x` when its complexity is not
/// larger.
pub fn more_specialized(f: &Session, g: &Session, x: &Expr) -> bool {
    f.complexity(x) <= g.complexity(x)
}

/// Outcome of a conveys-identity check: a refutation witness, or none found.
#[derive(Clone, Debug, PartialEq)]
pub enum Conveys {
    NoWitness,
    Witness { x: Expr, y: Expr, fx: Expr, fy: Expr },
}

impl Conveys {
    pub fn holds(&self) -> bool {
        matches!(self, Conveys::NoWitness)
    }
}

/// Pack whose single rule expands products and powers of sums.
pub fn expansion_pack() -> RuleSet {
    RuleSet::new("expand").rule(Rule::native("expand", |e, _| {
        if e.has_head(heads::TIMES) || e.has_head(heads::POWER) {
            let x = expand(e);
            (x != *e).then_some(x)
        } else {
            None
        }
    }))
}
