mod common;

use common::{expr, p};
use obskernel_core::kernel::print;
use obskernel_core::{parse, Expr};
use proptest::prelude::*;

#[test]
fn parse_examples() {
    let e = p("x[y,z[1,2]]");
    assert_eq!(e, Expr::call("x", vec![Expr::sym("y"), Expr::call("z", vec![Expr::int(1), Expr::int(2)])]));
    assert_eq!(p("x+y"), Expr::call("Plus", vec![Expr::sym("x"), Expr::sym("y")]));
    assert_eq!(p("22/7"), Expr::rational(22, 7));
    assert_eq!(p("2.75"), Expr::real(2.75));
    assert_eq!(p("44/14"), Expr::rational(22, 7));
    assert_eq!(p("6/3"), Expr::int(2));
}

#[test]
fn parse_errors_have_spans() {
    let err = parse("f[x,").unwrap_err();
    assert!(err.span.start <= err.span.end);
    assert!(parse("x +* y").is_err());
}

#[test]
fn print_examples() {
    assert_eq!(print(&p("Plus[x,y]")), "x+y");
    assert_eq!(print(&Expr::rational(22, 7)), "22/7");
    assert_eq!(print(&p("Function[f[Slot[1]]]")), "f[#]&");
}

/// Depth by the definition: atoms 1, compounds one more than the deepest
/// of head and arguments.
fn depth_oracle(e: &Expr) -> usize {
    match e.as_compound() {
        None => 1,
        Some(c) => 1 + c.args.iter().map(depth_oracle).chain([1]).max().unwrap(),
    }
}

#[test]
fn depth_examples() {
    assert_eq!(p("x[y,z[1,2]]").depth(), 3);
    assert_eq!(p("Pi").depth(), 1);
    assert_eq!(p("f[g[h[1]]]").depth(), 4);
}

proptest! {
    #[test]
    fn print_parse_round_trip(e in expr()) {
        let text = print(&e);
        let back = parse(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(back, e, "printed as {}", text);
    }

    #[test]
    fn depth_one_iff_atom(e in expr()) {
        prop_assert_eq!(e.depth() == 1, e.is_atom());
        prop_assert_eq!(e.depth(), depth_oracle(&e));
    }

    #[test]
    fn equality_is_an_equivalence(a in expr(), b in expr()) {
        prop_assert_eq!(&a, &a.clone());
        prop_assert_eq!(a == b, b == a);
        prop_assert_eq!(a.cmp(&b), b.cmp(&a).reverse());
    }
}
