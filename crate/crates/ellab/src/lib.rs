//! Rational elliptic curve laboratory: point counting over prime fields,
//! reduction classification, L-series coefficients, the completed L-function
//! and its power-sum coefficients, and canonical heights.
//!
//! The pipeline, bottom to top:
//!
//! ```text
//!   numerics       arbitrary-precision reals/complexes, gamma, DFT
//!   weierstrass    curve models, invariants, group law over Q and F_p
//!   pointcount     #E(F_p), traces a_p, Frobenius quadratic forms
//!   reduction      minimal models at p, reduction types, conductor
//!   lfunction      Dirichlet coefficients, Euler product, completed xi
//!   licoeff        power-sum coefficients of xi pulled back to the disk
//!   heights        canonical heights and the height pairing
//! ```
//!
//! Expensive batch work is data-parallel behind the `parallel` feature
//! (enabled by default); the headline batch entry points (prime sweeps,
//! coefficient fills, pairing matrices) have sequential `_seq` twins used
//! by the comparison benchmarks.

pub mod heights;
pub mod lfunction;
pub mod licoeff;
pub mod numerics;
pub(crate) mod par;
pub mod pointcount;
pub mod reduction;
pub mod weierstrass;

pub use numerics::{HPComplex, HPReal, PrecisionConfig};

/// Unified error type for the crate surface.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] numerics::NumericsError),
    #[error(transparent)]
    Curve(#[from] weierstrass::CurveError),
    #[error(transparent)]
    Count(#[from] pointcount::CountError),
    #[error(transparent)]
    Reduction(#[from] reduction::ReductionError),
    #[error(transparent)]
    LSeries(#[from] lfunction::LSeriesError),
    #[error(transparent)]
    Li(#[from] licoeff::LiError),
    #[error(transparent)]
    Height(#[from] heights::HeightError),
}
