//! Higher-order Lagrangian mechanics, symbolically and numerically.
//!
//! Lagrangians are written as text over jet coordinates (`q1_0`, `q1_1`,
//! ...). From them the crate builds Ostrogradsky and Schmidt–Legendre
//! first-order formulations as Morse families, assembles and integrates the
//! implicit equations of motion, and checks candidate Hamilton–Jacobi
//! solutions by residuals and by lifting trajectories.

pub mod charts;
pub mod dynamics;
mod error;
pub mod hamjac;
pub mod linalg;
pub mod ostro;
pub mod schmidt;
pub mod symexpr;

pub use charts::{ChartKind, ChartSpec, Point};
pub use dynamics::{ImplicitSystem, Trajectory};
pub use error::{Error, Result};
pub use hamjac::{ClosedOneForm, ResidualReport};
pub use ostro::{LagrangianSpec, MorseFamily};
pub use schmidt::SchmidtSystem;
pub use symexpr::{parse, Binding, Expr, Symbol};
