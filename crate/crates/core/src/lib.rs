//! Numerical laboratory for the sublinear Fujita problem
//!
//! ```text
//! u_t = u_xx + [u^p]^+,  0 < p < 1,  u(x, 0) = u0(x)
//! ```
//!
//! with compactly supported piecewise-linear data. The crate evaluates the
//! explicit sub/supersolution constructions and rate coefficients, integrates
//! the PDE with Strang splitting, and checks the resulting bounds and
//! algebraic rates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod datum;
pub mod error;
pub mod io;
pub mod kernels;
pub mod params;
pub mod quadrature;
pub mod solver;
pub mod verify;

pub use config::{BoundaryMode, SimConfig};
pub use datum::InitialDatum;
pub use error::{Error, Result};
pub use kernels::{excess_from_delta, CbarConstants, KernelEvaluator};
pub use params::{
    critical_exponents, homogeneous_state, rate_exponent, CriticalExponents, ProblemParams,
};
pub use quadrature::QuadratureConfig;
pub use solver::{RunResult, SolutionFrame};
