//! Inputs shared by the criterion benchmarks in `benches/`.

use obskernel_core::funalg::{funalg_pack, linear_pack};
use obskernel_core::perturb::perturb_pack;
use obskernel_core::{parse, Expr, Session};

/// A sum of `n` products `c_i * x_i^i`, printed as source text.
pub fn polynomial_source(n: usize) -> String {
    (1..=n).map(|i| format!("{i}*x{}^{i}", i % 7)).collect::<Vec<_>>().join(" + ")
}

/// `polynomial_source(n)` parsed.
pub fn polynomial(n: usize) -> Expr {
    parse(&polynomial_source(n)).expect("generated source parses")
}

/// A session with the function algebra, the perturbation calculus and a
/// linear pack over `K`, as used by the theorem checks.
pub fn perturbation_session() -> Session {
    let mut s = Session::with_packs([funalg_pack(), perturb_pack(), linear_pack("K")]);
    s.assert(parse("{x, y} in Uns").expect("fact parses"));
    s
}

/// Nested error of a product of `n` unshielded factors.
pub fn product_error(n: usize) -> Expr {
    let factors: Vec<String> = (0..n).map(|i| format!("u{i}")).collect();
    parse(&format!("delta(eps, {})", factors.join("*"))).expect("generated source parses")
}
