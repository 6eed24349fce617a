mod common;

use common::p;
use obskernel_core::control::{
    check_constraint_star_commute, constraint_non_function_witness, dichotomy, eigeninput, CommuteScenario,
    ConstraintError, ControllableDecl, Servo, ServoError,
};
use obskernel_core::{EvalError, Expr, Session};
use proptest::prelude::*;

/// Plain bisection run far past the servo's tolerance.
fn bisect_oracle(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    while b - a > 1e-14 {
        let m = 0.5 * (a + b);
        if f(a).signum() == f(m).signum() {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[test]
fn dichotomy_examples() {
    let r = dichotomy(|x| x - 2.0, 0.0, 5.0, 1e-10, 200).unwrap();
    assert!((r.rho - 2.0).abs() <= 1e-10 && r.iterations <= 60);
    let cubic = |x: f64| x * x * x - x - 2.0;
    let r = dichotomy(cubic, 1.0, 2.0, 1e-10, 200).unwrap();
    assert!(cubic(r.rho).abs() <= 1e-10 && r.iterations <= 60);
    assert!((r.rho - bisect_oracle(cubic, 1.0, 2.0)).abs() <= 1e-10);
    assert!((r.rho - 1.5213797068).abs() <= 1e-10);
    assert!(matches!(dichotomy(|x| x * x + 1.0, 0.0, 1.0, 1e-10, 200), Err(ServoError::NoSignChange { .. })));
}

fn decl(tag: &str, response: &str, bracket: (f64, f64)) -> ControllableDecl {
    ControllableDecl { tag: p(tag), state: p("R"), response: p(response), bracket }
}

#[test]
fn eigeninput_examples() {
    let mut s = Session::new();
    let servo = Servo::default();
    let rho = eigeninput(&mut s, &decl("T", "#-1&", (0.0, 4.0)), &servo).unwrap();
    assert!((rho - 1.0).abs() <= servo.tol);
    let ln2 = eigeninput(&mut s, &decl("U", "exp(#)-2&", (0.0, 2.0)), &servo).unwrap();
    assert!((ln2 - std::f64::consts::LN_2).abs() <= 1e-10);
    assert_eq!(eigeninput(&mut s, &decl("U", "exp(#)-2&", (0.0, 2.0)), &servo).unwrap(), ln2);
    let two_roots = eigeninput(&mut s, &decl("V", "(#-0.5)*(#-1.5)&", (0.0, 3.0)), &servo);
    assert!(matches!(two_roots, Err(ConstraintError::NotUnique { .. })));
}

#[test]
fn constant_servo_and_state_make_the_constraint_constant() {
    let mut s = Session::new();
    s.assert(p("{S, R} in Cst"));
    eigeninput(&mut s, &decl("T", "#-1&", (0.0, 4.0)), &Servo::default()).unwrap();
    assert!(s.query(&p("Rho in Cst")).is_true());
    assert!(s.query(&p("Underline in Cst")).is_true());
}

#[test]
fn constraint_examples() {
    let mut s = Session::new();
    s.assert(p("T in C[R,S]"));
    assert_eq!(s.evaluate(&p("ul(M[T][#]&)")).unwrap(), p("M[T][Rho[T]]"));
    s.assert(p("{Plus, R, P} in Abs"));
    assert_eq!(s.evaluate(&p("ul(M1[T]+M2[T])")).unwrap(), s.evaluate(&p("ul(M1[T])+ul(M2[T])")).unwrap());
    assert_eq!(s.evaluate(&p("ul(P[M[T]])")).unwrap(), s.evaluate(&p("P[ul(M[T])]")).unwrap());
    assert_eq!(s.evaluate(&p("ul(R@T)")).unwrap(), p("R[T[Rho[T]]]"));
    assert!(
        matches!(s.evaluate(&p("ul(q)")), Err(EvalError::Constraint(c)) if matches!(*c, ConstraintError::Unresolved(_)))
    );
}

#[test]
fn rho_is_numeric_once_solved() {
    let mut s = Session::new();
    let rho = eigeninput(&mut s, &decl("T", "#-1&", (0.0, 4.0)), &Servo::default()).unwrap();
    s.add_rule(&p("M[T][z_] :> 3*z")).unwrap();
    assert_eq!(s.evaluate(&p("ul(M[T][#]&)")).unwrap(), Expr::real(3.0 * rho));
}

#[test]
fn commutation_square() {
    let s = Session::new();
    let servo = Servo::default();
    let c = 0.75;
    let eps = 0.3;
    let m_star = |z: f64| z * (1.0 + eps);
    let response = |z: f64| z - c;
    let holds = CommuteScenario { m_star: &m_star, response: &response, response_star: &response, bracket: (0.0, 2.0) };
    let r = check_constraint_star_commute(&s, &holds, &servo).unwrap();
    assert!(r.hypothesis_holds && r.agree);
    assert!((r.constrained_then_perturbed - r.perturbed_then_constrained).abs() <= 1e-9);

    let identity = |z: f64| z;
    let unperturbed =
        CommuteScenario { m_star: &identity, response: &response, response_star: &response, bracket: (0.0, 2.0) };
    let r = check_constraint_star_commute(&s, &unperturbed, &servo).unwrap();
    assert!((r.constrained_then_perturbed - c).abs() <= 1e-9 && r.agree);

    let moved = |z: f64| z - c - 0.5;
    let broken = CommuteScenario { m_star: &m_star, response: &response, response_star: &moved, bracket: (0.0, 2.0) };
    let r = check_constraint_star_commute(&s, &broken, &servo).unwrap();
    assert!(!r.hypothesis_holds && !r.agree);
    assert!((r.constrained_then_perturbed - r.perturbed_then_constrained).abs() > 1e-3);
}

#[test]
fn constraint_is_not_a_function() {
    let w = constraint_non_function_witness(&Session::new());
    assert!((w.rho - 1.0).abs() <= 1e-10);
    assert!((w.rho_star - 1.5).abs() <= 1e-10);
    assert!((w.gap - 0.5).abs() <= 1e-9);
    assert!(w.is_witness(1e-6));
}

fn abstract_wrapper() -> impl Strategy<Value = Vec<(usize, bool)>> {
    prop::collection::vec((0usize..3, any::<bool>()), 1..4)
}

proptest! {
    #[test]
    fn servo_contract(root in -4.0f64..4.0, slope in prop_oneof![0.2f64..5.0, -5.0f64..-0.2]) {
        let mut s = Session::new();
        let servo = Servo::default();
        let response = format!("({slope:?})*(#-({root:?}))&");
        let rho = eigeninput(&mut s, &decl("T", &response, (-5.0, 5.0)), &servo).unwrap();
        prop_assert!((slope * (rho - root)).abs() <= servo.tol);
        prop_assert_eq!(eigeninput(&mut s, &decl("T", &response, (-5.0, 5.0)), &servo).unwrap(), rho);
    }

    #[test]
    fn constraint_commutes_with_abstract_maps(wrap in abstract_wrapper()) {
        let mut s = Session::new();
        s.assert(p("T in C[R,S]"));
        s.assert(p("{P0, P1, P2, a} in Abs"));
        let mut g = p("M[T]");
        let mut outer: Vec<(Expr, bool)> = Vec::new();
        for (k, extra) in wrap {
            let head = Expr::sym(&format!("P{k}"));
            g = if extra { Expr::apply(head.clone(), vec![g, p("a")]) } else { Expr::apply(head.clone(), vec![g]) };
            outer.push((head, extra));
        }
        let mut h = Expr::call("Underline", vec![p("M[T]")]);
        for (head, extra) in outer {
            h = if extra { Expr::apply(head, vec![h, p("a")]) } else { Expr::apply(head, vec![h]) };
        }
        let left = s.evaluate(&Expr::call("Underline", vec![g])).unwrap();
        let right = s.evaluate(&h).unwrap();
        prop_assert_eq!(s.canonicalize(&Expr::minus(left, right)), Expr::int(0));
    }
}
