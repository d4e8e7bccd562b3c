//! Upper bounds on modular L-differencing Sperner systems, L-close Sperner
//! systems, L-avoiding L-intersecting systems and restricted-distance codes,
//! together with the exact machinery used to audit them: p-adic arithmetic,
//! separating polynomials, brute-force maximum families, and rank checks of
//! the polynomial-method proof systems.

pub mod bounds;
pub mod closure;
pub mod error;
pub mod families;
pub mod padic;
pub mod polylab;
pub mod seppoly;

pub use error::{Error, Result};
