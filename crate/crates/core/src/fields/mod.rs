//! Cartesian and radial representations of functions and their spectra,
//! plus the spectral measurements built on them (weighted Sobolev norms,
//! fractional Laplacian, shell averages, decay-exponent fits).
//!
//! Fourier convention throughout: f^(xi) = int f(x) e^{-i x.xi} dx, with the
//! inverse carrying (2 pi)^{-n}.

mod decay;
mod grid;
pub mod io;
mod profile;
mod radial;
mod sobolev;

pub use decay::{fit_decay, fit_decay_points, window_sensitivity, DecayFit, MIN_FIT_NODES};
pub use grid::{forward_transform, inverse_transform, CartesianGrid, Field, SpectralField};
pub(crate) use grid::norm3;
pub use profile::{AnalyticFn, GridSpec1D, ProfileKind, RadialProfile, Spacing};
pub use radial::radial_average;
pub use sobolev::{bracket, fractional_laplacian, sobolev_norm, sobolev_norm_field};
