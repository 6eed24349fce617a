#![allow(dead_code)]

use obskernel_core::{parse, Expr};
use proptest::prelude::*;

pub fn p(text: &str) -> Expr {
    parse(text).unwrap_or_else(|e| panic!("{text}: {e}"))
}

pub fn symbol() -> impl Strategy<Value = Expr> {
    prop::sample::select(vec!["a", "b", "c", "f", "g", "x", "y", "z", "Pi", "eps"]).prop_map(Expr::sym)
}

pub fn numeral() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-20i64..20).prop_map(Expr::int),
        ((-20i64..20), (1i64..9)).prop_map(|(n, d)| Expr::rational(n, d)),
        (-1e6f64..1e6).prop_map(Expr::real),
    ]
}

pub fn atom() -> impl Strategy<Value = Expr> {
    prop_oneof![3 => symbol(), 1 => numeral()]
}

const HEADS: [&str; 12] =
    ["f", "g", "Plus", "Times", "Power", "List", "Circle", "Element", "Star", "Delta", "Function", "Slot"];

/// Arbitrary trees, including degenerate uses of operator heads.
pub fn expr() -> impl Strategy<Value = Expr> {
    atom().prop_recursive(4, 40, 4, |inner| {
        prop_oneof![
            (prop::sample::select(HEADS.to_vec()), prop::collection::vec(inner.clone(), 0..4))
                .prop_map(|(h, args)| Expr::call(h, args)),
            (inner.clone(), prop::collection::vec(inner, 0..3)).prop_map(|(h, args)| Expr::apply(h, args)),
        ]
    })
}

/// Polynomial-like terms over a few symbols with exact coefficients.
pub fn arith() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["a", "b", "c", "x"]).prop_map(Expr::sym),
        (-6i64..7).prop_map(Expr::int),
        ((-6i64..7), (1i64..4)).prop_map(|(n, d)| Expr::rational(n, d)),
    ];
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::plus),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::times),
            (inner.clone(), 0i64..3).prop_map(|(b, n)| Expr::power(b, Expr::int(n))),
            inner.prop_map(|x| Expr::call("f", vec![x])),
        ]
    })
}
