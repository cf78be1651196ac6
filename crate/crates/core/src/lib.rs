//! Numerics for the backscattering Born series: Ewald-sphere dispersion
//! operators S_r, the principal-value operator (i pi delta + P) in r, the
//! second and third Born terms, and the decay-exponent measurements that
//! compare them with Sobolev regularity bounds.
//!
//! Start with the programs in `examples/`; the `backscatter` binary wraps the
//! same entry points for scripted runs.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod born;
pub mod cli;
pub mod dispersion;
pub mod error;
pub mod fields;
pub mod potentials;
pub mod pv;
pub mod quadrature;
pub mod regularity;
pub mod sphere;

pub use error::{Error, Result};
