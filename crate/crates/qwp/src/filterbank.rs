//! Two-channel p-filter banks in the DFT domain.
//!
//! All four filter families are stored as full-period frequency responses.
//! One half-band step couples bins `n` and `n + L/2`:
//!
//! - analysis: `ŷ^λ[n] = (f̂^λ[sn]* x̂[n] + f̂^λ[sn + N/2]* x̂[n + L/2]) / 2`
//! - synthesis: `x̂[n] = f̂⁰[sn] ŷ⁰[n mod L/2] + f̂¹[sn] ŷ¹[n mod L/2]`
//!
//! where `s = N / L` is the level stride. With this normalization the real
//! bank satisfies `(1/2)·M[n]^H·M[n] = I` bin by bin and analysis followed
//! by synthesis is the identity; the quasi-analytic banks compose to
//! `2(x ± iH(x))`.

use crate::error::{QwpError, Result};
use crate::spline::SplineBasisTables;
use crate::{cast, Scalar};
use num_complex::Complex;
use std::sync::Arc;

/// The four modulation-matrix families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    /// Orthonormal spline wavelet packets (symmetric waveforms).
    Real,
    /// Complementary wavelet packets (antisymmetric waveforms).
    Complementary,
    /// Quasi-analytic bank with spectrum on the non-negative half-band.
    QuasiAnalyticPlus,
    /// Quasi-analytic bank with spectrum on the non-positive half-band.
    QuasiAnalyticMinus,
}

impl FilterKind {
    pub const ALL: [FilterKind; 4] = [
        FilterKind::Real,
        FilterKind::Complementary,
        FilterKind::QuasiAnalyticPlus,
        FilterKind::QuasiAnalyticMinus,
    ];
}

/// Low/high frequency-response pair over the full period.
#[derive(Debug, Clone)]
pub struct FilterPair<T> {
    pub lo: Vec<Complex<T>>,
    pub hi: Vec<Complex<T>>,
}

/// Half-band spectra produced by one analysis step: DFTs of the two
/// half-length coefficient sequences.
#[derive(Debug, Clone)]
pub struct HalfBandPair<T> {
    pub lo: Vec<Complex<T>>,
    pub hi: Vec<Complex<T>>,
}

/// All four filter families derived from one table set.
#[derive(Debug)]
pub struct ModMatSet<T> {
    tables: Arc<SplineBasisTables<T>>,
    real: FilterPair<T>,
    complementary: FilterPair<T>,
    qplus: FilterPair<T>,
    qminus: FilterPair<T>,
}

impl<T: Scalar> ModMatSet<T> {
    pub fn new(tables: Arc<SplineBasisTables<T>>) -> Self {
        let n = tables.len();
        let half = n / 2;
        let beta = tables.beta();
        let alpha = tables.alpha();

        let real = FilterPair {
            lo: beta.iter().map(|&b| Complex::new(b, T::zero())).collect(),
            hi: alpha.to_vec(),
        };

        // First-level complementary responses: the Hilbert multiplier applied
        // to beta/alpha with corrected values at bins 0 and N/2.
        let i = Complex::new(T::zero(), T::one());
        let mut comp_lo = Vec::with_capacity(n);
        let mut comp_hi = Vec::with_capacity(n);
        for bin in 0..n {
            let b = Complex::new(beta[bin], T::zero());
            let a = alpha[bin];
            if bin == 0 {
                comp_lo.push(b);
                comp_hi.push(Complex::new(T::zero(), T::zero()));
            } else if bin == half {
                comp_lo.push(Complex::new(T::zero(), T::zero()));
                comp_hi.push(a);
            } else if bin < half {
                comp_lo.push(-i * b);
                comp_hi.push(-i * a);
            } else {
                comp_lo.push(i * b);
                comp_hi.push(i * a);
            }
        }
        let complementary = FilterPair {
            lo: comp_lo,
            hi: comp_hi,
        };

        let combine = |sign: T| -> FilterPair<T> {
            let is = Complex::new(T::zero(), sign);
            FilterPair {
                lo: real
                    .lo
                    .iter()
                    .zip(&complementary.lo)
                    .map(|(&h, &g)| h + is * g)
                    .collect(),
                hi: real
                    .hi
                    .iter()
                    .zip(&complementary.hi)
                    .map(|(&h, &g)| h + is * g)
                    .collect(),
            }
        };
        let qplus = combine(T::one());
        let qminus = combine(-T::one());

        Self {
            tables,
            real,
            complementary,
            qplus,
            qminus,
        }
    }

    #[inline]
    pub fn tables(&self) -> &Arc<SplineBasisTables<T>> {
        &self.tables
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.tables.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pair(&self, kind: FilterKind) -> &FilterPair<T> {
        match kind {
            FilterKind::Real => &self.real,
            FilterKind::Complementary => &self.complementary,
            FilterKind::QuasiAnalyticPlus => &self.qplus,
            FilterKind::QuasiAnalyticMinus => &self.qminus,
        }
    }

    /// Synthesis modulation matrix at bin `n`, rows over `(n, n + N/2)`,
    /// columns over the low/high channels.
    pub fn synthesis_matrix(&self, kind: FilterKind, n: usize) -> [[Complex<T>; 2]; 2] {
        let pair = self.pair(kind);
        let period = self.len();
        let opp = (n + period / 2) % period;
        [
            [pair.lo[n % period], pair.hi[n % period]],
            [pair.lo[opp], pair.hi[opp]],
        ]
    }

    /// Analysis modulation matrix at bin `n`: the conjugate transpose
    /// pattern actually applied to `(x̂[n], x̂[n + N/2])`, without the 1/2.
    pub fn analysis_matrix(&self, kind: FilterKind, n: usize) -> [[Complex<T>; 2]; 2] {
        let s = self.synthesis_matrix(kind, n);
        [
            [s[0][0].conj(), s[1][0].conj()],
            [s[0][1].conj(), s[1][1].conj()],
        ]
    }
}

/// Splits a length-`L` spectrum into the half-band pair using the filter
/// responses sampled at stride `s = N / L`.
pub fn analyze_one_level<T: Scalar>(
    x_hat: &[Complex<T>],
    pair: &FilterPair<T>,
    stride: usize,
) -> Result<HalfBandPair<T>> {
    let len = x_hat.len();
    if !len.is_multiple_of(2) {
        return Err(QwpError::OddLength(len));
    }
    let period = pair.lo.len();
    if stride * len != period {
        return Err(QwpError::LengthMismatch {
            got: stride * len,
            expected: period,
        });
    }
    let half = len / 2;
    let half_scale = cast::<T>(0.5);
    let mut lo = Vec::with_capacity(half);
    let mut hi = Vec::with_capacity(half);
    for n in 0..half {
        let idx = stride * n;
        let opp = idx + period / 2;
        let (x0, x1) = (x_hat[n], x_hat[n + half]);
        lo.push((pair.lo[idx].conj() * x0 + pair.lo[opp].conj() * x1).scale(half_scale));
        hi.push((pair.hi[idx].conj() * x0 + pair.hi[opp].conj() * x1).scale(half_scale));
    }
    Ok(HalfBandPair { lo, hi })
}

/// Merges a half-band pair back into a length-`L` spectrum; exact inverse of
/// [`analyze_one_level`] for the real family.
pub fn synthesize_one_level<T: Scalar>(
    pair_spectra: &HalfBandPair<T>,
    filters: &FilterPair<T>,
    stride: usize,
) -> Result<Vec<Complex<T>>> {
    let half = pair_spectra.lo.len();
    if pair_spectra.hi.len() != half {
        return Err(QwpError::LengthMismatch {
            got: pair_spectra.hi.len(),
            expected: half,
        });
    }
    let len = 2 * half;
    let period = filters.lo.len();
    if stride * len != period {
        return Err(QwpError::LengthMismatch {
            got: stride * len,
            expected: period,
        });
    }
    let mut out = Vec::with_capacity(len);
    for n in 0..len {
        let idx = stride * n;
        let (y0, y1) = (pair_spectra.lo[n % half], pair_spectra.hi[n % half]);
        out.push(filters.lo[idx] * y0 + filters.hi[idx] * y1);
    }
    Ok(out)
}
