//! Polynomial arithmetic, discrete transfer functions, difference-equation
//! simulation, and unit-circle stability predicates.

mod poly;
mod stability;
mod tf;

pub use poly::{Polynomial, COEFF_ZERO_TOL};
pub use stability::{is_stable, max_root_modulus, polynomial_roots, UNIT_CIRCLE_TOL};
pub use tf::{LtiSimState, TransferFunction};
