//! Exact and high-precision verification of a three-variable irregular Garnier
//! system: its Hamiltonians, the connection family they come from, an algebraic
//! solution obtained by pull-back, and the associated τ-function.

pub mod algebra;
pub mod checks;
pub mod connection;
pub mod flow;
pub mod hamiltonian;
pub mod numeric;
pub mod pullback;
pub mod report;
pub mod solution;
pub mod tau;

pub use algebra::{AlgebraError, ExactScalar, FactoredFrac, MultiPoly, RatFunc, RelRingElem};
pub use report::{CheckMode, Verdict, VerificationReport, VerifyMode};
