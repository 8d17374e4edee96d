//! Fundamental matrices, monodromy, Dyson-type corrections and first-order eigenvalue
//! shifts for linear ODEs with regular singularities, centred on the hypergeometric
//! equation.
//!
//! The crate is organised bottom-up: [`odecore`] represents equations, [`hypergeom`]
//! supplies series and local bases, [`transport`] continues solutions along complex paths,
//! [`dyson`] builds perturbative corrections and cocycles, [`varpar`] solves the
//! order-by-order hierarchy by variation of parameters, and [`spectral`] computes
//! eigenvalue shifts in the weighted inner product.

pub mod cjson;
pub mod dyson;
pub mod error;
pub mod hypergeom;
pub mod linalg;
pub mod odecore;
pub mod par;
pub mod quad;
pub mod spectral;
pub mod transport;
pub mod varpar;

pub use error::{Error, Result};
pub use linalg::{CMat, C64};
