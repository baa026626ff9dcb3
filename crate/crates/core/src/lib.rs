//! Monte Carlo solutions of fractional differential equations.
//!
//! Solutions of Caputo-time fractional equations are written as
//! expectations over the inverse stable subordinator T_β(t), whose density
//! is the Wright-type kernel g_β(·; t). This crate provides the samplers for
//! those random times, a reproducible Monte Carlo engine, a bridge from
//! classical ODE solutions to fractional ones, Monte Carlo Green functions
//! for fractional diffusion, wave and Fokker–Planck equations, and
//! sampling-free references (series and quadrature) to check them against.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod compensated;
pub mod error;
pub mod fode;
pub mod green;
pub mod mc;
pub mod oracle;
pub mod quad;
pub mod sampler;
pub mod special;
pub mod table;

pub use error::{Error, Result};
