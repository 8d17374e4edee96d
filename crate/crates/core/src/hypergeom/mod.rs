//! Hypergeometric series, local Frobenius bases and the generalized hypergeometric operator.

mod basis;
mod ghe;
mod series;

pub use basis::{weight_omega, Jet, LocalBasis, LocalPoint, UnitIntervalBasis, GENERIC_TOL};
pub use ghe::{binomial, elem_sym, ghe_operator, ghe_polynomials, stirling2};
pub use series::{hyp2f1, hyp2f1_jet, pfq, pochhammer, HypergeomParams, MAX_TERMS, SERIES_TOL};
