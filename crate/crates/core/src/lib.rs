//! Interference-alignment laboratory for the two-user X-channel.
//!
//! The crate models the Gaussian X-channel and its lower-triangular
//! deterministic approximation, computes the case I-V bit allocations and
//! the capacity approximation `D(N)`, decodes the deterministic model by
//! GF(2) elimination, measures Gaussian constellation distances, and
//! evaluates the rate-region upper bounds.
//!
//! Numeric code is generic where the scalar matters: gains implement
//! [`scalar::Gain`] (floats and exact rationals), the Gaussian formulas
//! take any [`num_traits::Float`], and the LP runs over any
//! [`scalar::LpScalar`]. The aliases below fix the usual choices.

pub mod bounds;
pub mod channel;
mod dd;
pub mod det_link;
pub mod error;
pub mod gauss_link;
pub mod gf2;
pub mod outage;
pub mod rates;
pub mod scalar;
pub mod seed;
pub mod sweep;

pub use error::{Error, Result};

/// Exact rate and capacity values.
pub type Rate = num_rational::Rational64;
/// Upper bounds of the deterministic model, exact.
pub type DetBoundSet = bounds::BoundSet<Rate>;
/// Upper bounds of the Gaussian model.
pub type GaussBoundSet = bounds::BoundSet<f64>;
/// Fine gains in double precision.
pub type Gains = channel::FineGains<f64>;
/// Exact gain type for values a double cannot hold, such as `1 + 2^-60`.
pub type ExactGain = num_rational::Ratio<i128>;
