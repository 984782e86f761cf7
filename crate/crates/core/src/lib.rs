//! Two-stage multiple testing: a Gibbs-sampled Bayesian tensor factorization
//! distills historical multimodal data into low-rank feature profiles, and an
//! empirical-Bayes linking model converts those profiles into guide values for
//! FAB p-values that stay uniform under the null no matter how wrong the
//! history is, while beating the classical two-sided t-test when it is right.
//!
//! Module map:
//! - [`special`], [`ttest`]: distribution kernel (incomplete beta, t CDF,
//!   classical/FAB p-values, BH adjustment), generic over the float type.
//! - [`linking`]: cross-fitted empirical-Bayes machinery producing guides.
//! - [`tensor`], [`align`]: the factorization sampler and posterior alignment.
//! - [`sim`]: null-calibration and power-interpolation studies.
//! - [`io`]: delimited-text formats shared with the CLI.

// Rational-approximation coefficients are written with every digit of the
// published tables so the literal rounds, rather than a hand truncation.
#![allow(clippy::excessive_precision)]
// `!(x > 0)` style guards are deliberate: they reject NaN along with the
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Numeric kernels index several parallel arrays by position.
#![allow(clippy::needless_range_loop)]

pub mod align;
pub mod error;
pub mod io;
pub mod linking;
mod optim;
pub mod rng;
pub mod sim;
pub mod special;
pub mod tensor;
pub mod truncnorm;
pub mod ttest;

pub use error::{Error, Result};

/// Float abstraction for the distribution kernel.
///
/// `special` and `ttest` are generic over this so f32 and f64 both
/// instantiate; everything model-side (linear algebra, samplers) is pinned to
/// [`Real`] because the factorizations and the stated tolerances only make
/// sense in double precision.
pub trait Scalar:
    num_traits::Float + num_traits::FromPrimitive + core::fmt::Debug + core::fmt::Display
{
}

impl<T> Scalar for T where
    T: num_traits::Float + num_traits::FromPrimitive + core::fmt::Debug + core::fmt::Display
{
}

/// Concrete scalar used by the modeling pipeline.
pub type Real = f64;
