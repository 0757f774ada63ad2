//! Optimal reinforcement of a vibrating membrane.
//!
//! Computes densities `theta >= 0` with bounded mass that maximize the first
//! Dirichlet eigenvalue of the weighted operator `-div((1 + m*theta) grad u)`.
//! Two routes are provided:
//!
//! * [`radial`] — the exact solution on the unit disk (Bessel core, linear
//!   outer profile, closed-form density on an annulus), obtained from the
//!   smooth-fit condition at the transition radius.
//! * [`optimize`] — a finite-element p-continuation optimizer for general
//!   2D domains, alternating a generalized eigensolve with the closed-form
//!   density update of the L^p-penalized problem, driving p toward 1.
//!
//! The min-max identity `max_theta lambda_1(theta) = min_u (|grad u|_2^2 +
//! m L |grad u|_inf^2) / |u|_2^2` gives a computable upper bound and hence an
//! optimality certificate (duality gap) for any candidate density.
//!
//! The crate is `no_std` + `alloc`; all IO lives in the companion CLI crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod eigen;
mod error;
pub mod fem;
pub mod linsolve;
pub mod mesh;
pub mod optimize;
pub mod quad;
pub mod radial;
pub mod specfun;

pub use error::Error;

pub type Result<T> = core::result::Result<T, Error>;
