//! Quasi-analytic wavelet packet (qWP) transforms derived from discrete-time
//! polynomial splines.
//!
//! The library builds two-channel p-filter banks from sampled B-splines and
//! runs every transform in the DFT domain:
//!
//! - [`spline`]: B-spline evaluation and the `u`, `v`, `beta`, `alpha`
//!   frequency tables that parameterize all filters.
//! - [`filterbank`]: the four modulation-matrix families (real,
//!   complementary, quasi-analytic plus/minus) and the one-level spectral
//!   analysis/synthesis primitives.
//! - [`hilbert`]: discrete periodic Hilbert transform and analytic signals.
//! - [`wpt1d`]: multi-level 1D wavelet packet transforms over all four
//!   filter families, with reconstruction from arbitrary disjoint covers.
//! - [`wpt2d`]: the dual-tree 2D quasi-analytic transform with directional
//!   subbands and coefficient thresholding.
//! - [`atlas`]: materialized waveforms (psi, phi, quasi-analytic, 2D
//!   directional), spectral centers, the direction census and the local
//!   discrete vanishing moment verifier.
//! - [`image_io`], [`container`], [`metrics`], [`denoise`]: grayscale image
//!   I/O, coefficient persistence, PSNR and a thresholding denoiser.
//!
//! All core math is generic over the scalar type through [`Scalar`]
//! (`f32` or `f64`); the concrete aliases below pin the common choice.

// Bin-indexed loops mirror the frequency-domain formulas; iterator
// adapters obscure the stride arithmetic.
#![allow(clippy::needless_range_loop)]

pub mod atlas;
pub mod container;
pub mod denoise;
pub mod error;
pub mod fft;
pub mod filterbank;
pub mod hilbert;
pub mod image_io;
pub mod metrics;
pub mod spline;
pub mod wpt1d;
pub mod wpt2d;

pub use error::{QwpError, Result};
pub use filterbank::{FilterKind, HalfBandPair, ModMatSet};
pub use image_io::Image2D;
pub use spline::{PeriodLength, SplineBasisTables, SplineOrder};
pub use wpt1d::{CoeffTree1D, Selection1D, Wpt1d};
pub use wpt2d::{QwpCoeffs2D, Qwpt2d, Selection2D, ThresholdRule, TreeSign};

use num_traits::{Float, FloatConst};

/// Scalar types the transforms operate on.
///
/// Satisfied by `f32` and `f64`; bundles the rustfft requirements with the
/// float operations the spline evaluation needs.
pub trait Scalar: rustfft::FftNum + Float + FloatConst {}

impl<T> Scalar for T where T: rustfft::FftNum + Float + FloatConst {}

/// Converts an `f64` constant into the working scalar type.
#[inline]
pub(crate) fn cast<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("finite f64 constant representable in scalar type")
}

/// Spline basis tables over `f64`.
pub type SplineBasisTables64 = SplineBasisTables<f64>;
/// 1D transform engine over `f64`.
pub type Wpt1d64 = Wpt1d<f64>;
/// 2D dual-tree transform engine over `f64`.
pub type Qwpt2d64 = Qwpt2d<f64>;
