//! High-precision floating point support for numeric checks and flow integration.

mod compiled;
mod hp;
mod roots;

pub use compiled::{eval_ratfunc_hp, CompiledFrac, CompiledPoly, CompiledRatFunc};
pub use hp::{bits_for_digits, HpComplex, HpFloat};
pub use roots::poly_roots;
