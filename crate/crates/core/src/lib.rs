//! Spectral harmonic analysis on periodic lattices: Littlewood–Paley calculus,
//! Besov and Triebel–Lizorkin norms, maximal operators, paraproducts, the free
//! Schrödinger group and a split-step solver for the quintic NLS.
//!
//! Numerical routines are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the double-precision instantiation used by the drivers.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensemble;
pub mod error;
pub mod grid;
pub mod lp;
pub mod maximal;
pub mod nls;
pub mod paraproduct;
pub mod propagator;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use grid::{apply_multiplier, norm, GridSpec, Multiplier, NormKind, SampledField, Spectrum};
pub use scalar::{Complex, Real};

pub type Grid64 = GridSpec<f64>;
pub type Field64 = SampledField<f64>;
pub type Field32 = SampledField<f32>;
