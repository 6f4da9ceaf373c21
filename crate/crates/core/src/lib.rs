//! Exact laws of random annulus moduli.
//!
//! This crate evaluates the closed-form laws attached to random annuli in
//! conformal geometry: the two-channel O(n) annulus partition function and
//! its Cardy-type specialization, modulus densities and moment generating
//! functions for Brownian and loop-decorated annuli, boundary-length moment
//! formulas, and the special functions (Dedekind eta, Jacobi theta, complex
//! gamma) they are built from. A spectral Monte Carlo harness for the
//! free-boundary Gaussian field on a finite cylinder cross-checks the
//! boundary-length-ratio law by direct simulation.
//!
//! The crate is `no_std`-compatible (with `alloc`); the default `std`
//! feature additionally enables thread-parallel Monte Carlo drivers.
//! IO, file formats, and the command-line front end live in the companion
//! `annulus-moduli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("annulus-core requires either the `std` or the `libm` feature");

mod error;
mod fft;
mod math;

pub mod gmc;
pub mod laws;
pub mod qseries;
pub mod samplers;
pub mod specfun;
pub mod transforms;

pub use error::{Error, Result};
pub use transforms::{DensityTable, Grid};
