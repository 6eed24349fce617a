mod common;

use common::{arith, expr, p};
use obskernel_core::kernel::AtomKind;
use obskernel_core::rewrite::{
    canonicalize, expansion_pack, more_specialized, BudgetKind, Conveys, EvalError, NotCalculable, Truth,
};
use obskernel_core::{Expr, Session};
use proptest::prelude::*;

#[test]
fn assertions_and_queries() {
    let mut s = Session::new();
    assert_eq!(s.query(&p("x in Cst")), Truth::Unknown);
    assert_eq!(s.evaluate(&p("x in Cst")).unwrap(), p("x in Cst"));
    s.execute(&p("x in Cst !")).unwrap();
    assert_eq!(s.query(&p("x in Cst")), Truth::True);
    assert_eq!(s.evaluate(&p("x in Uns")).unwrap(), Expr::true_());
}

#[test]
fn evaluation_examples() {
    let mut s = Session::new();
    assert_eq!(s.evaluate(&p("Pi")).unwrap(), p("Pi"));
    s.add_rule(&p("x -> y")).unwrap();
    assert_eq!(s.evaluate(&p("x")).unwrap(), p("y"));
    s.add_rule(&p("f[x_] :> f[f[x]]")).unwrap();
    match s.evaluate(&p("f[z]")).unwrap_err() {
        EvalError::BudgetExceeded { partial, .. } => assert!(partial.depth() > 2),
        other => panic!("{other}"),
    }
}

#[test]
fn recursion_budget() {
    let mut s = Session::new();
    s.budget.recursion = 8;
    s.add_rule(&p("g[n_] :> h[g[n+1]]")).unwrap();
    match s.evaluate(&p("g[0]")).unwrap_err() {
        EvalError::BudgetExceeded { kind, .. } => assert!(matches!(kind, BudgetKind::Recursion | BudgetKind::Steps)),
        other => panic!("{other}"),
    }
}

#[test]
fn canonical_forms() {
    assert_eq!(canonicalize(&p("Times[b,a]")), p("Times[a,b]"));
    assert_eq!(canonicalize(&p("Plus[x, Times[-1,x]]")), Expr::int(0));
    assert_eq!(canonicalize(&p("Plus[Plus[x,y],z]")), p("Plus[x,y,z]"));
    assert_eq!(canonicalize(&p("x*x*3*x^-1")), p("3*x"));
}

/// Machin's formula with an alternating arctangent series.
fn pi_oracle() -> f64 {
    let atan = |x: f64| (0..40).map(|k| (-1f64).powi(k) * x.powi(2 * k + 1) / (2 * k + 1) as f64).sum::<f64>();
    16.0 * atan(0.2) - 4.0 * atan(1.0 / 239.0)
}

fn ulps(a: f64, b: f64) -> u64 {
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
}

#[test]
fn numeric_values() {
    let s = Session::new();
    assert_eq!(s.numeric(&p("22/7")).unwrap(), Expr::real(22.0 / 7.0));
    let pi = match s.numeric(&p("Pi")).unwrap() {
        Expr::Real(x) => x,
        other => panic!("{other}"),
    };
    assert!((pi - pi_oracle()).abs() <= 4.0 * f64::EPSILON);
    let n = |t: &str| match s.numeric(&p(t)).unwrap() {
        Expr::Real(x) => x,
        other => panic!("{other}"),
    };
    let direct = n("Log[3/2]");
    let split = n("Log[3]") - n("Log[2]");
    assert!(ulps(direct, split) <= 4);
    match s.numeric(&p("q + r")).unwrap_err() {
        EvalError::NotNumeric { blocking, .. } => assert_eq!(blocking.len(), 2),
        other => panic!("{other}"),
    }
}

#[test]
fn calculability() {
    let mut s = Session::new();
    assert!(s.calculable(&p("Pi"), AtomKind::Real).is_calculable());
    assert!(!s.calculable(&p("q"), AtomKind::Real).is_calculable());
    s.budget.steps = 64;
    s.add_rule(&p("w[x_] :> w[x+1]")).unwrap();
    assert_eq!(s.calculable(&p("w[0]"), AtomKind::Real).reason, Some(NotCalculable::Budget));
}

#[test]
fn complexity_and_specialization() {
    let mut s = Session::new();
    s.add_rule(&p("x -> 3")).unwrap();
    assert_eq!(s.complexity(&p("x")), 1.0);
    let plain = Session::new();
    let expanding = Session::with_packs([expansion_pack()]);
    let e = p("(x+1)^2 - x^2 - 2*x");
    assert!(expanding.complexity(&e) < plain.complexity(&e));
    assert_eq!(expanding.complexity(&e), 1.0);
    assert!(more_specialized(&expanding, &plain, &e));
    assert!(!more_specialized(&plain, &expanding, &e));
    let mut loops = Session::new();
    loops.add_rule(&p("f[x_] :> f[f[x]]")).unwrap();
    assert_eq!(loops.complexity(&p("f[1]")), f64::INFINITY);
}

#[test]
fn conveying_identity() {
    let mut s = Session::new();
    s.assert(p("{a, b} == {a, c}"));
    let pairs = [(p("{a, b}"), p("{a, c}"))];
    assert!(s.conveys_identity(&p("#[[1]]&"), &pairs).unwrap().holds());
    assert!(s.conveys_identity(&p("Identity"), &[]).unwrap().holds());
    s.assert(p("y == f0[x]"));
    match s.conveys_identity(&p("Depth[#]&"), &[(p("y"), p("f0[x]"))]).unwrap() {
        Conveys::Witness { fx, fy, .. } => assert_eq!((fx, fy), (Expr::int(1), Expr::int(2))),
        Conveys::NoWitness => panic!("Depth conveys identity"),
    }
    assert!(matches!(s.conveys_identity(&p("Depth[#]&"), &[(p("u"), p("v"))]), Err(EvalError::NotAnIdentity(..))));
}

fn relation() -> impl Strategy<Value = Expr> {
    let member = prop::sample::select(vec!["a", "b", "c", "a+b", "a*b", "f[a]", "a^-1", "f", "g", "f[c]"]);
    let set = prop::sample::select(vec!["Cst", "Uns", "Abs", "K", "LFs[K]"]);
    prop_oneof![
        (member.clone(), set).prop_map(|(m, s)| p(&format!("{m} in {s}"))),
        (member.clone(), member).prop_map(|(a, b)| p(&format!("{a} == {b}"))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn canonicalize_is_idempotent(e in expr()) {
        let c = canonicalize(&e);
        prop_assert_eq!(canonicalize(&c), c);
    }

    #[test]
    fn canonicalize_is_a_congruence(e in arith()) {
        let wrapped = canonicalize(&Expr::call("f", vec![e.clone(), Expr::sym("z")]));
        let inner = canonicalize(&Expr::call("f", vec![canonicalize(&e), Expr::sym("z")]));
        prop_assert_eq!(wrapped, inner);
    }

    #[test]
    fn evaluation_is_idempotent_and_deterministic(e in arith()) {
        let s = Session::with_packs([obskernel_core::funalg::funalg_pack()]);
        let once = s.evaluate(&e).unwrap();
        prop_assert_eq!(s.evaluate(&once).unwrap(), once.clone());
        prop_assert_eq!(s.clone().evaluate(&e).unwrap(), once);
    }

    #[test]
    fn facts_are_monotone(rels in prop::collection::vec(relation(), 1..12), probes in prop::collection::vec(relation(), 8)) {
        let mut s = Session::with_packs([obskernel_core::perturb::perturb_pack()]);
        let mut known: Vec<Expr> = Vec::new();
        for r in rels {
            s.assert(r);
            for q in &known {
                prop_assert_eq!(s.query(q), Truth::True, "{} lost", q);
            }
            known.extend(probes.iter().filter(|q| s.query(q) == Truth::True).cloned());
        }
    }
}
