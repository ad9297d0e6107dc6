//! Symbolic expressions over jet coordinates.
//!
//! Parse text into [`Expr`], differentiate (partially or along the jet
//! prolongation), normalize, evaluate, and certify identities numerically.

mod diff;
mod eval;
mod expr;
mod number;
mod numeric;
mod parse;
mod print;
mod symbol;

pub use diff::{diff, total_time_derivative, total_time_derivative_n};
pub use eval::{eval, Binding, Compiled};
pub use expr::{simplify, Expr, Func, Node};
pub use number::Number;
pub use numeric::{default_rng, equal_numeric, equal_numeric_with, sup_norm, SampleBox};
pub use parse::parse;
pub use symbol::{Kind, Symbol};

/// Parse and simplify in one step.
pub fn parse_simplified(text: &str) -> crate::Result<Expr> {
    parse(text).map(|e| simplify(&e))
}
