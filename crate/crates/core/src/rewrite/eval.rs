use std::cell::{Cell, RefCell};
use std::collections::HashMap;

use crate::control;
use crate::funalg;
use crate::kernel::{heads, Expr};
use crate::matching::{match_pattern, occurs, substitute, ConditionEvaluator};

use super::numeric::{is_numeric_function, numeric_value};
use super::{expand, normalize_root, BudgetKind, EvalError, Rule, RuleKind, Session, Truth};

/// One rewrite performed during evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub rule: String,
    pub before: Expr,
    pub after: Expr,
}

/// Heads whose arguments are left unevaluated.
const HOLD: [&str; 8] = [
    heads::FUNCTION,
    heads::RULE,
    heads::RULE_DELAYED,
    heads::CONDITION,
    heads::PATTERN,
    heads::BLANK,
    heads::ASSERT,
    "Hold",
];

pub(super) struct Evaluator<'s> {
    session: &'s Session,
    steps: Cell<usize>,
    depth: Cell<usize>,
    trace: Option<RefCell<Vec<TraceStep>>>,
    // normal forms already computed under this frozen session
    memo: RefCell<HashMap<Expr, Expr>>,
}

type Step = Result<Option<(String, Expr)>, EvalError>;

impl<'s> Evaluator<'s> {
    pub(super) fn new(session: &'s Session, traced: bool) -> Self {
        Evaluator {
            session,
            steps: Cell::new(0),
            depth: Cell::new(0),
            trace: traced.then(|| RefCell::new(Vec::new())),
            memo: RefCell::new(HashMap::new()),
        }
    }

    pub(super) fn run(self, e: &Expr) -> (Result<Expr, EvalError>, Vec<TraceStep>) {
        let out = self.eval(e);
        (out, self.trace.map(RefCell::into_inner).unwrap_or_default())
    }

    fn eval(&self, e: &Expr) -> Result<Expr, EvalError> {
        if let Some(v) = self.memo.borrow().get(e) {
            return Ok(v.clone());
        }
        if self.depth.get() >= self.session.budget.recursion {
            return Err(EvalError::BudgetExceeded { kind: BudgetKind::Recursion, partial: e.clone() });
        }
        self.depth.set(self.depth.get() + 1);
        let out = self.eval_loop(e.clone());
        self.depth.set(self.depth.get() - 1);
        if let Ok(v) = &out {
            self.memo.borrow_mut().insert(e.clone(), v.clone());
        }
        out
    }

    fn eval_loop(&self, mut e: Expr) -> Result<Expr, EvalError> {
        loop {
            let node = self.eval_children(&e)?;
            match self.rewrite_root(&node)? {
                Some((name, next)) if next != node => {
                    if self.steps.get() >= self.session.budget.steps {
                        return Err(EvalError::BudgetExceeded { kind: BudgetKind::Steps, partial: node });
                    }
                    self.steps.set(self.steps.get() + 1);
                    if let Some(t) = &self.trace {
                        t.borrow_mut().push(TraceStep { rule: name, before: node, after: next.clone() });
                    }
                    e = next;
                }
                _ => return Ok(node),
            }
        }
    }

    fn eval_children(&self, e: &Expr) -> Result<Expr, EvalError> {
        let Some(c) = e.as_compound() else { return Ok(e.clone()) };
        let head = self.eval(&c.head).map_err(|err| rebuild(err, |p| Expr::apply(p, c.args.clone())))?;
        if HOLD.iter().any(|h| head.is_symbol(h)) {
            return Ok(Expr::apply(head, c.args.clone()));
        }
        let mut args = Vec::with_capacity(c.args.len());
        for (i, a) in c.args.iter().enumerate() {
            match self.eval(a) {
                Ok(v) => args.push(v),
                Err(err) => {
                    return Err(rebuild(err, |p| {
                        let mut all = args.clone();
                        all.push(p);
                        all.extend(c.args[i + 1..].iter().cloned());
                        Expr::apply(head.clone(), all)
                    }))
                }
            }
        }
        Ok(normalize_root(Expr::apply(head, args)))
    }

    fn rewrite_root(&self, e: &Expr) -> Step {
        if let Some(c) = e.as_compound() {
            if c.head.has_head(heads::FUNCTION) {
                return Ok(Some(("Function".into(), funalg::apply_pure(&c.head, &c.args)?)));
            }
            if let Some(r) = self.builtin(e)? {
                return Ok(Some(r));
            }
        }
        for rule in self.session.rules() {
            if let (Some(key), Some(head)) = (rule.head_key(), e.head()) {
                if !head.as_symbol().is_some_and(|h| h == key) {
                    continue;
                }
            } else if rule.head_key().is_some() {
                continue;
            }
            if let Some(next) = self.apply_rule(rule, e)? {
                return Ok(Some((rule.name.clone(), next)));
            }
        }
        Ok(None)
    }

    fn apply_rule(&self, rule: &Rule, e: &Expr) -> Result<Option<Expr>, EvalError> {
        match &rule.kind {
            RuleKind::Native(f) => Ok(f(e, &self.session.facts)),
            RuleKind::Pattern { lhs, rhs, .. } => Ok(match_pattern(lhs, e, self)?.map(|b| substitute(rhs, &b))),
        }
    }

    fn builtin(&self, e: &Expr) -> Step {
        let name = match e.head().and_then(Expr::as_symbol) {
            Some(s) => s.name().to_string(),
            None => return Ok(None),
        };
        let args = e.args();
        let facts = &self.session.facts;
        let out = match (name.as_str(), args) {
            ("Identity", [x]) => Some(x.clone()),
            ("Depth", [x]) => Some(Expr::int(x.depth() as i64)),
            ("LeafCount", [x]) => Some(Expr::int(x.leaf_count() as i64)),
            (heads::PART, [x, idx @ ..]) if !idx.is_empty() => part(x, idx),
            (heads::ELEMENT | heads::NOT_ELEMENT | heads::EQUAL | heads::UNEQUAL, [_, _]) => {
                truth_value(facts.query(e))
            }
            (heads::AND, _) => and(args, |a| facts.query(a)),
            ("N", [x]) => numeric_value(x).ok().map(Expr::Real),
            ("Expand", [x]) => Some(expand(x)),
            (heads::REPLACE_ALL, [x, rules]) => {
                let list = match rules.args_of(heads::LIST) {
                    Some(items) => items.to_vec(),
                    None => vec![rules.clone()],
                };
                let rules = list.iter().map(Rule::from_expr).collect::<Result<Vec<_>, _>>()?;
                Some(self.replace_all(x, &rules)?)
            }
            ("Rho", [t]) => self.session.eigeninput(t).map(Expr::Real),
            ("Occurs", [x, f]) => Some(Expr::bool(occurs(x, f))),
            (heads::UNDERLINE, [g]) => Some(control::constrain(self.session, g)?),
            ("D", [f, x]) => Some(funalg::derivative(f, x)),
            (h, _) if is_numeric_function(h) && args.iter().any(|a| matches!(a, Expr::Real(_))) => {
                if args.iter().all(Expr::is_number) {
                    numeric_value(e).ok().map(Expr::Real)
                } else {
                    None
                }
            }
            _ => None,
        };
        Ok(out.map(|x| (name, x)))
    }

    /// One top-down pass: the first matching rule rewrites a node and its
    /// result is not searched again.
    fn replace_all(&self, e: &Expr, rules: &[Rule]) -> Result<Expr, EvalError> {
        for r in rules {
            if let Some(x) = self.apply_rule(r, e)? {
                return Ok(x);
            }
        }
        Ok(match e.as_compound() {
            Some(c) => Expr::apply(
                self.replace_all(&c.head, rules)?,
                c.args.iter().map(|a| self.replace_all(a, rules)).collect::<Result<_, _>>()?,
            ),
            None => e.clone(),
        })
    }
}

impl ConditionEvaluator for Evaluator<'_> {
    fn holds(&self, test: &Expr) -> Result<bool, EvalError> {
        Ok(self.eval(test)?.is_symbol(heads::TRUE))
    }
}

fn rebuild(err: EvalError, wrap: impl FnOnce(Expr) -> Expr) -> EvalError {
    match err {
        EvalError::BudgetExceeded { kind, partial } => EvalError::BudgetExceeded { kind, partial: wrap(partial) },
        other => other,
    }
}

fn truth_value(t: Truth) -> Option<Expr> {
    match t {
        Truth::True => Some(Expr::true_()),
        Truth::False => Some(Expr::false_()),
        Truth::Unknown => None,
    }
}

fn and(args: &[Expr], query: impl Fn(&Expr) -> Truth) -> Option<Expr> {
    let mut pending = Vec::new();
    for a in args {
        match query(a) {
            Truth::False => return Some(Expr::false_()),
            Truth::True => {}
            Truth::Unknown => pending.push(a.clone()),
        }
    }
    match pending.len() {
        0 => Some(Expr::true_()),
        n if n == args.len() => None,
        1 => pending.pop(),
        _ => Some(Expr::call(heads::AND, pending)),
    }
}

/// `x[[i, j, ...]]`, 1-based; 0 is the head, negatives count from the end.
fn part(x: &Expr, idx: &[Expr]) -> Option<Expr> {
    let mut cur = x.clone();
    for i in idx {
        let i = i.as_i64()?;
        let c = cur.as_compound()?;
        let n = c.args.len() as i64;
        cur = match i {
            0 => c.head.clone(),
            1.. if i <= n => c.args[(i - 1) as usize].clone(),
            ..0 if -i <= n => c.args[(n + i) as usize].clone(),
            _ => return None,
        };
    }
    Some(cur)
}
