//! Numerical laboratory for the Waring–Goldbach circle method.
//!
//! Counts prime solutions of `x_1^k + ... + x_n^k = λ` with logarithmic
//! weights, evaluates the complete exponential sums and oscillatory integrals
//! that make up the major-arc approximation of the Fourier transform of the
//! normalized prime surface measure, and runs the desk-scale diagnostics
//! (error decay, Weyl decay, maximal functions, ergodic averages).

pub mod arcs;
pub mod ergodic;
pub mod error;
pub mod expsums;
pub mod maxops;
pub mod numtheory;
pub mod oscint;
pub mod phase;
pub mod wgsurface;

pub use error::{Result, WgError};
pub use num_complex::Complex64;
