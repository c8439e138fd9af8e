//! Precision kernel: arbitrary-precision real and complex arithmetic, the
//! elementary functions they need, the gamma and incomplete gamma functions, and the discrete Fourier
//! transform used by the Taylor extractor.
//!
//! Values carry their own working precision in bits; every arithmetic
//! operation rounds its result back to the operands' precision, so the
//! relative error per operation is at most one unit in the last place.

mod complex;
mod dft;
mod elementary;
mod gamma;
mod incomplete;
mod real;

pub use complex::HPComplex;
pub use dft::{dft, idft};
pub use elementary::{atan, atan2, exp, ln, ln2, pi, pow, pow_int, sin_cos};
pub use gamma::gamma;
pub use incomplete::{lower_incomplete_gamma, upper_incomplete_gamma};
pub use real::HPReal;

/// Working precision for analytic evaluation: `bits` of target accuracy plus
/// `guard_bits` of headroom absorbed by rounding noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionConfig {
    pub bits: u32,
    pub guard_bits: u32,
}

impl PrecisionConfig {
    /// At least 53 bits; smaller requests are clamped up to the double-precision floor.
    pub fn new(bits: u32, guard_bits: u32) -> Self {
        Self { bits: bits.max(53), guard_bits }
    }

    /// Precision actually used by intermediate arithmetic.
    pub fn working(&self) -> u32 {
        self.bits + self.guard_bits
    }

    /// The reporting tolerance `2^(guard - bits)` as a value at working precision.
    pub fn tolerance(&self) -> HPReal {
        HPReal::exp2(self.guard_bits as i64 - self.bits as i64, self.working())
    }
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        Self { bits: 128, guard_bits: 32 }
    }
}

/// Errors from the precision kernel.
#[derive(Debug, Clone, thiserror::Error)]
pub enum NumericsError {
    /// Evaluation at (or within tolerance of) a pole.
    #[error("argument within tolerance of a pole: {0}")]
    Pole(String),
    /// A series or continued fraction failed to meet the error target within
    /// its iteration budget.
    #[error("no convergence after {iterations} iterations in {context}")]
    Convergence { context: &'static str, iterations: usize },
    /// Argument outside the function's domain (log of a non-positive value and the like).
    #[error("domain error: {0}")]
    Domain(String),
}
