//! A term-rewriting kernel with a perturbation calculus, a constraint
//! operator and an experiment layer.

pub mod control;
pub mod experiment;
pub mod funalg;
pub mod kernel;
pub mod matching;
pub mod perturb;
pub mod rewrite;
pub mod script;
pub mod theorems;

pub use kernel::{parse, Expr, Symbol};
pub use rewrite::{EvalError, FactBase, Session, Truth};
