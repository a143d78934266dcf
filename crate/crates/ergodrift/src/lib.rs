//! # ergodrift
//!
//! Simulation and empirical verification toolkit for discrete stochastic
//! dynamics `X_{n+1} = F(X_n, Δ_{n+1})` driven by a stationary Gaussian
//! noise with a moving-average representation `Δ_n = Σ_k a_k ξ_{n-k}`.
//!
//! The crate is organized around the memory kernel `(a_k)`:
//!
//! - [`coeffs`] builds and validates kernel families (polynomial,
//!   exponential, fractional Brownian motion increments, custom) and their
//!   covariance functions.
//! - [`toeplitz`] inverts the kernel as a triangular Toeplitz operator,
//!   producing the reciprocal sequence `(b_k)`, with an independent
//!   combinatorial oracle, exponential closed forms, log-convexity bounds
//!   and log-log decay-exponent fits.
//! - [`noise`] generates reproducible noise paths from counter-based
//!   deterministic random streams and checks stationarity empirically.
//! - [`dynamics`] provides the Euler-scheme state update, its step-size and
//!   Lyapunov-drift checks, and the affine hitting map used to glue two
//!   trajectories at one step.
//! - [`coupling`] implements the coalescent coupling engine: exact Gaussian
//!   pair samplers, sticking drifts, interval schedules, admissibility
//!   checks, the full trial loop and Monte Carlo estimation of the tail of
//!   the coupling time (an upper bound on the total-variation distance to
//!   the stationary regime).
//! - [`rates`] evaluates the polynomial convergence-rate function
//!   `v(β, ρ)` and its closed forms, plus a convolution-bound check.
//! - [`cli`] ties everything together behind the `ergodrift` binary.
//!
//! Runnable walkthroughs live in `examples/`; start with
//! `cargo run --example invert_kernel`.
//!
//! ```
//! use ergodrift::coeffs::CoefficientSequence;
//! use ergodrift::toeplitz::{convolution_identity_residual, invert_coeffs};
//!
//! // Fractional Brownian increment kernel, H = 0.3, and its reciprocal.
//! let a = CoefficientSequence::fbm(0.3, 1.0, 256)?;
//! let b = invert_coeffs(&a)?;
//! assert!(convolution_identity_residual(&a, &b) < 1e-9);
//! # Ok::<(), ergodrift::Error>(())
//! ```

pub mod cli;
pub mod coeffs;
pub mod coupling;
pub mod dynamics;
mod error;
pub mod noise;
pub mod rates;
pub mod rng;
pub mod stats;
pub mod toeplitz;

pub use error::{Error, Result};
