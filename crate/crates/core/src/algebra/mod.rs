//! Exact arithmetic: rationals, sparse polynomials, rational functions,
//! the `t² = s³` relation ring, and probabilistic identity testing.

mod factored;
mod gcd;
mod modp;
pub mod pit;
mod poly;
mod ratfunc;
mod relring;
mod scalar;

pub use factored::{FactorBasis, FactoredFrac};
pub use gcd::{gcd, strip_factor};
pub use pit::{pit_zero, DegreeBound, FnProbe, IdentityProbe, PitOutcome};
pub use poly::{Monomial, MultiPoly, PolyRing, Ring, MAX_VARS};
pub use ratfunc::RatFunc;
pub use relring::{s_ring, RelRingElem};
pub use scalar::ExactScalar;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
    #[error("evaluation hit a pole")]
    Pole,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("{0} variables exceed the supported maximum")]
    TooManyVariables(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("factor `{0}` is not linear")]
    NotLinear(String),
    #[error("factor `{0}` listed twice")]
    DuplicateFactor(String),
    #[error("`{0}` is not a multiple of a basis factor")]
    NotInFactorBasis(String),
    #[error("element is not invertible (zero norm)")]
    NotInvertible,
    #[error("no pole-free sample found after {0} attempts")]
    ResampleExhausted(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("expression is not symmetric in the q variables: {0}")]
    NotSymmetric(String),
    #[error("roots collide: {0}")]
    RootCollision(String),
}
