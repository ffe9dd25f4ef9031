//! Exact-arithmetic toolkit for coded caching with uncoded placement.
//!
//! The crate simulates the Maddah-Ali-Niesen (MAN) and Yu-Maddah-Ali-Avestimehr
//! (YMA) schemes bit for bit, reduces caching delivery to index coding, and
//! evaluates matching converse and achievability bounds with exact rationals.
//!
//! The numeric core ([`lp`], [`envelope`], the load and converse formulas) is
//! generic over [`Scalar`]; the aliases below fix the scalar to an
//! arbitrary-precision rational, which is what every bound computation uses.

pub mod caching;
pub mod combinatorics;
pub mod converse;
pub mod envelope;
mod error;
pub mod gf2;
pub mod icmap;
pub mod icschemes;
pub mod lp;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact arbitrary-precision fraction, always in lowest terms.
pub type Rational = num_rational::BigRational;

/// Linear program over exact rationals.
pub type RationalLp = lp::LinearProgram<Rational>;

/// Solution of a [`RationalLp`].
pub type RationalLpSolution = lp::LpSolution<Rational>;

/// Memory-load curve with exact corners.
pub type Curve = envelope::PiecewiseCurve<Rational>;
