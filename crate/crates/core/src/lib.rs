//! Radial solutions of `Δp u + k(|x|) f(u) = 0` through Fowler variables: shooting,
//! zero counting, invariant manifolds and energy checks.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fowler;
pub mod integrator;
pub mod manifolds;
pub mod num;
pub mod oracle;
pub mod parallel;
pub mod problem;
pub mod shooting;

pub use config::RunConfig;
pub use error::{Clause, Error, Result};
pub use fowler::{PhaseState, RadialState};
pub use integrator::{integrate, Direction, StopPolicy, Trajectory};
pub use problem::{derive_exponents, ExponentSet, Problem, ProblemSpec, Sign};
