//! Numerics for the weighted Fock spaces `F²ₘ` of entire functions that are
//! square-integrable against `e^{-|z|^{2m}} dA(z)` on the complex plane.
//!
//! The crate provides, for weight exponents `m ≥ 1`:
//!
//! * the reproducing kernel `K_m(z,w) = (m/π) E_{1/m,1/m}(z w̄)` built on a
//!   branch-switching Mittag-Leffler evaluator ([`special_fn`]),
//! * quadrature against the measure `dλₘ` with closed-form moment oracles
//!   ([`quadrature`]),
//! * polynomial symbols `g`, Taylor coefficients of `e^{±g}`, Fock norms and
//!   membership diagnostics ([`symbols`]),
//! * Berezin transforms, the Berezin product, the lower-bound function `ℬ(z)`
//!   and its growth-rate checks ([`berezin`]),
//! * exact finite sections of the Toeplitz product `T_u T_v̄`, spectral-norm
//!   estimation, Schur-test bounds and the Sarason two-variable function
//!   ([`operator`]),
//! * a safeguarded-Newton Laplace-method engine and numeric envelope
//!   verification for the integral estimates the theory rests on
//!   ([`asymptotics`]),
//! * a boundedness classifier with an evidence bundle ([`classify`]).
//!
//! All numerical code is generic over the scalar type through the [`Real`]
//! trait (`f32` or `f64`); the concrete aliases below pin the `f64`
//! instantiation used by the CLI and the test suites.

pub mod asymptotics;
pub mod berezin;
pub mod classify;
pub mod error;
pub mod logspace;
pub mod operator;
pub mod quadrature;
pub mod scalar;
pub mod special_fn;
pub mod symbols;

pub use error::{Error, Result};
pub use scalar::Real;

use num_complex::Complex;

/// Complex scalar in the default (`f64`) instantiation.
pub type C64 = Complex<f64>;
/// Complex scalar in the single-precision instantiation.
pub type C32 = Complex<f32>;
/// Fock-space context at `f64` precision.
pub type FockContext64 = symbols::FockContext<f64>;
/// Polynomial symbol at `f64` precision.
pub type PolynomialSymbol64 = symbols::PolynomialSymbol<f64>;
/// Kernel evaluation result at `f64` precision.
pub type KernelValue64 = special_fn::KernelValue<f64>;
