//! Materialized wavelet-packet waveforms and their descriptors.
//!
//! Waveforms are built spectrally: the level-1 roots are the filter
//! frequency responses themselves and each deeper level multiplies by the
//! real responses sampled at stride `2^(m-1)`. The synthesis-path route
//! (a Kronecker delta planted at a tree node) reproduces the same samples
//! and is used as a cross-check in the tests.

use crate::error::{QwpError, Result};
use crate::fft::FftEngine;
use crate::filterbank::{FilterKind, ModMatSet};
use crate::spline::{PeriodLength, SplineOrder};
use crate::wpt1d::parent_of;
use crate::wpt2d::TreeSign;
use crate::{cast, Scalar};
use num_complex::Complex;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Which waveform family a 1D entry belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveformKind {
    /// Symmetric orthonormal packet ψ.
    Psi,
    /// Antisymmetric complementary packet φ.
    Phi,
    /// Quasi-analytic Ψ+ = ψ + iφ.
    QPlus,
    /// Quasi-analytic Ψ- = ψ - iφ.
    QMinus,
}

impl WaveformKind {
    fn filter_kind(self) -> FilterKind {
        match self {
            WaveformKind::Psi => FilterKind::Real,
            WaveformKind::Phi => FilterKind::Complementary,
            WaveformKind::QPlus => FilterKind::QuasiAnalyticPlus,
            WaveformKind::QMinus => FilterKind::QuasiAnalyticMinus,
        }
    }
}

/// A sampled 1D wavelet packet with its spectrum.
#[derive(Debug, Clone)]
pub struct Waveform<T> {
    pub order: SplineOrder,
    pub period: PeriodLength,
    pub level: usize,
    pub band: usize,
    pub kind: WaveformKind,
    pub samples: Vec<Complex<T>>,
    pub spectrum: Vec<Complex<T>>,
}

impl<T: Scalar> Waveform<T> {
    pub fn norm(&self) -> T {
        self.samples
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    /// Real parts of the samples; exact for ψ and φ.
    pub fn real_samples(&self) -> Vec<T> {
        self.samples.iter().map(|z| z.re).collect()
    }
}

/// A 2D directional waveform `ϑ± = Re(Ψ+ ⊗ Ψ±)`.
#[derive(Debug, Clone)]
pub struct Waveform2D<T> {
    pub order: SplineOrder,
    pub period: PeriodLength,
    pub level: usize,
    /// Column subband (vertical frequency index).
    pub col_band: usize,
    /// Row subband (horizontal frequency index).
    pub row_band: usize,
    pub sign: TreeSign,
    /// Real samples of ϑ±.
    pub samples: Vec<T>,
    /// DFT of `samples`; confined to Q0 ∪ Q3 (plus) or Q1 ∪ Q2 (minus).
    pub spectrum: Vec<Complex<T>>,
    /// One-sided spectrum of the generating complex waveform Ψ+ ⊗ Ψ±.
    pub qwp_spectrum: Vec<Complex<T>>,
    /// Spectral-center bins `(κ0, ν0)` (vertical, horizontal).
    pub orientation: (usize, usize),
    /// Diagonal equivalence class, unique per `(sign, col_band - row_band)`.
    pub direction_class: usize,
}

/// Lists `(col_band, row_band, sign)` per direction class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusEntry {
    pub col_band: usize,
    pub row_band: usize,
    pub sign: TreeSign,
}

/// An orientation equivalence class of directional waveforms.
#[derive(Debug, Clone)]
pub struct DirectionClass {
    /// Mean orientation angle `atan2(κ0, ν0)` over the members, radians.
    pub angle: f64,
    pub members: Vec<CensusEntry>,
}

fn filter_channel_path(level: usize, band: usize) -> (usize, Vec<usize>) {
    // Channels from level `level` back to level 2, then the level-1 root.
    let mut channels = Vec::with_capacity(level.saturating_sub(1));
    let mut current = band;
    for _ in (2..=level).rev() {
        let (parent, channel) = parent_of(current);
        channels.push(channel);
        current = parent;
    }
    channels.reverse();
    (current, channels)
}

/// Full-period spectrum of ψ/φ/Ψ± at `(level, band)`.
fn waveform_spectrum<T: Scalar>(
    mods: &ModMatSet<T>,
    level: usize,
    band: usize,
    kind: WaveformKind,
) -> Vec<Complex<T>> {
    let n = mods.len();
    let (root_band, channels) = filter_channel_path(level, band);
    let root_pair = mods.pair(kind.filter_kind());
    let mut spectrum = if root_band == 0 {
        root_pair.lo.clone()
    } else {
        root_pair.hi.clone()
    };
    let real = mods.pair(FilterKind::Real);
    for (depth_idx, &channel) in channels.iter().enumerate() {
        let stride = 1usize << (depth_idx + 1);
        let table = if channel == 0 { &real.lo } else { &real.hi };
        for (bin, value) in spectrum.iter_mut().enumerate() {
            *value = *value * table[(stride * bin) % n];
        }
    }
    spectrum
}

/// Generates one 1D waveform.
pub fn gen_waveform<T: Scalar>(
    mods: &Arc<ModMatSet<T>>,
    level: usize,
    band: usize,
    kind: WaveformKind,
) -> Result<Waveform<T>> {
    let period = mods.tables().period();
    period.check_depth(level)?;
    if band >= (1usize << level) {
        return Err(QwpError::InvalidSubband { level, band });
    }
    let spectrum = waveform_spectrum(mods.as_ref(), level, band, kind);
    let mut samples = spectrum.clone();
    FftEngine::new().inverse(&mut samples);
    Ok(Waveform {
        order: mods.tables().order(),
        period,
        level,
        band,
        kind,
        samples,
        spectrum,
    })
}

/// Generates one 2D directional waveform.
pub fn gen_waveform2d<T: Scalar>(
    mods: &Arc<ModMatSet<T>>,
    level: usize,
    col_band: usize,
    row_band: usize,
    sign: TreeSign,
) -> Result<Waveform2D<T>> {
    let period = mods.tables().period();
    period.check_depth(level)?;
    let grid = 1usize << level;
    if col_band >= grid || row_band >= grid {
        return Err(QwpError::InvalidSubband {
            level,
            band: col_band * grid + row_band,
        });
    }
    let n = period.get();
    let col_spec = waveform_spectrum(mods.as_ref(), level, col_band, WaveformKind::QPlus);
    let row_kind = match sign {
        TreeSign::Plus => WaveformKind::QPlus,
        TreeSign::Minus => WaveformKind::QMinus,
    };
    let row_spec = waveform_spectrum(mods.as_ref(), level, row_band, row_kind);

    let mut qwp_spectrum = Vec::with_capacity(n * n);
    for kappa in 0..n {
        for nu in 0..n {
            qwp_spectrum.push(col_spec[kappa] * row_spec[nu]);
        }
    }
    // Spectrum of the real part: fold with the reflected conjugate.
    let half = cast::<T>(0.5);
    let mut spectrum = Vec::with_capacity(n * n);
    for kappa in 0..n {
        for nu in 0..n {
            let mirrored = qwp_spectrum[((n - kappa) % n) * n + ((n - nu) % n)].conj();
            spectrum.push((qwp_spectrum[kappa * n + nu] + mirrored).scale(half));
        }
    }
    let mut samples_c = spectrum.clone();
    FftEngine::new().inverse2d(&mut samples_c, n, n);
    let samples: Vec<T> = samples_c.into_iter().map(|z| z.re).collect();

    let orientation = centroid_of_qwp_spectrum(&qwp_spectrum, n)?;
    let direction_class = direction_class_of(level, col_band, row_band, sign);
    Ok(Waveform2D {
        order: mods.tables().order(),
        period,
        level,
        col_band,
        row_band,
        sign,
        samples,
        spectrum,
        qwp_spectrum,
        orientation,
        direction_class,
    })
}

/// Energy centroid of a one-sided 2D spectrum, rounded to bins.
///
/// The vertical coordinate is averaged over the stored index (all mass sits
/// in rows `0..=N/2`); the horizontal one is averaged in signed frequency so
/// minus-tree waveforms resolve to `N - ν0`.
fn centroid_of_qwp_spectrum<T: Scalar>(spec: &[Complex<T>], n: usize) -> Result<(usize, usize)> {
    let mut total = 0.0f64;
    let mut kappa_acc = 0.0f64;
    let mut nu_acc = 0.0f64;
    for kappa in 0..n {
        for nu in 0..n {
            let e = spec[kappa * n + nu].norm_sqr().to_f64().unwrap();
            if e == 0.0 {
                continue;
            }
            let signed_nu = if nu <= n / 2 {
                nu as f64
            } else {
                nu as f64 - n as f64
            };
            total += e;
            kappa_acc += kappa as f64 * e;
            nu_acc += signed_nu * e;
        }
    }
    if total <= 0.0 {
        return Err(QwpError::ZeroEnergyWaveform);
    }
    let kappa0 = (kappa_acc / total).round() as i64;
    let nu0 = (nu_acc / total).round() as i64;
    Ok((
        kappa0.rem_euclid(n as i64) as usize,
        nu0.rem_euclid(n as i64) as usize,
    ))
}

/// Spectral center of a generated 2D waveform.
pub fn spectral_center<T: Scalar>(w: &Waveform2D<T>) -> Result<(usize, usize)> {
    centroid_of_qwp_spectrum(&w.qwp_spectrum, w.period.get())
}

fn direction_class_of(level: usize, col_band: usize, row_band: usize, sign: TreeSign) -> usize {
    let per_sign = (1usize << (level + 1)) - 1;
    let offset = col_band as i64 - row_band as i64 + (1i64 << level) - 1;
    match sign {
        TreeSign::Plus => offset as usize,
        TreeSign::Minus => per_sign + offset as usize,
    }
}

/// Groups all level-`m` directional waveforms into orientation classes.
///
/// Classes are seeded by the diagonal equivalence `(j, l) ~ (j+1, l+1)`
/// within each tree; classes whose mean orientation angles coincide within
/// one bin of arc at radius `N/4` are merged. In practice the diagonals are
/// well separated and the census size is `2(2^(m+1) - 1)`.
pub fn direction_census<T: Scalar>(
    mods: &Arc<ModMatSet<T>>,
    level: usize,
) -> Result<BTreeMap<usize, DirectionClass>> {
    let period = mods.tables().period();
    period.check_depth(level)?;
    let n = period.get();
    let grid = 1usize << level;

    // Factorized 1D centroids: the 2D centroid of a tensor product splits
    // into per-axis centroids. Columns always use the plus filters.
    let mut col_centers = Vec::with_capacity(grid);
    let mut row_centers_minus = Vec::with_capacity(grid);
    for band in 0..grid {
        col_centers.push(spectrum_centroid_1d(&waveform_spectrum(
            mods.as_ref(),
            level,
            band,
            WaveformKind::QPlus,
        ))?);
        row_centers_minus.push(spectrum_centroid_1d(&waveform_spectrum(
            mods.as_ref(),
            level,
            band,
            WaveformKind::QMinus,
        ))?);
    }
    let row_center = |sign: TreeSign, band: usize| -> f64 {
        match sign {
            TreeSign::Plus => col_centers[band],
            TreeSign::Minus => row_centers_minus[band],
        }
    };

    let mut seeded: BTreeMap<usize, (Vec<f64>, Vec<CensusEntry>)> = BTreeMap::new();
    for sign in TreeSign::BOTH {
        for j in 0..grid {
            for l in 0..grid {
                let class = direction_class_of(level, j, l, sign);
                let angle = col_centers[j].atan2(row_center(sign, l));
                let slot = seeded.entry(class).or_default();
                slot.0.push(angle);
                slot.1.push(CensusEntry {
                    col_band: j,
                    row_band: l,
                    sign,
                });
            }
        }
    }

    let tolerance = (4.0 / n as f64).atan();
    let mut census: BTreeMap<usize, DirectionClass> = BTreeMap::new();
    let mut last: Option<usize> = None;
    for (class, (angles, members)) in seeded {
        let angle = angles.iter().sum::<f64>() / angles.len() as f64;
        if let Some(prev) = last {
            let prev_class = census.get_mut(&prev).unwrap();
            if (prev_class.angle - angle).abs() < tolerance {
                prev_class.members.extend(members);
                continue;
            }
        }
        census.insert(class, DirectionClass { angle, members });
        last = Some(class);
    }
    Ok(census)
}

/// Signed-frequency centroid of a one-sided 1D spectrum.
fn spectrum_centroid_1d<T: Scalar>(spec: &[Complex<T>]) -> Result<f64> {
    let n = spec.len();
    let mut total = 0.0f64;
    let mut acc = 0.0f64;
    for (bin, z) in spec.iter().enumerate() {
        let e = z.norm_sqr().to_f64().unwrap();
        let signed = if bin <= n / 2 {
            bin as f64
        } else {
            bin as f64 - n as f64
        };
        total += e;
        acc += signed * e;
    }
    if total <= 0.0 {
        return Err(QwpError::ZeroEnergyWaveform);
    }
    Ok(acc / total)
}

/// Relative L2 error of the modulated-cosine model of a directional
/// waveform.
///
/// The model extracts the `(2·block_half)²` spectral block around the
/// waveform's center, recenters it to DC, and treats its inverse DFT `U` as
/// the low-frequency modulator: `ϑ[k,n] ≈ Re(e^{i·2π(κ0·k+ν0·n)/N}·U[k,n])`,
/// the directional cosine carrying a localized low-frequency signal. The
/// error is dominated by the spectral energy left outside the block.
pub fn modulation_structure_error<T: Scalar>(w: &Waveform2D<T>, block_half: usize) -> Result<f64> {
    let n = w.period.get();
    let (kappa0, nu0) = w.orientation;
    let mut block = vec![Complex::new(0.0f64, 0.0); n * n];
    let half = block_half as i64;
    for dk in -half..half {
        for dv in -half..half {
            let kappa = (kappa0 as i64 + dk).rem_euclid(n as i64) as usize;
            let nu = (nu0 as i64 + dv).rem_euclid(n as i64) as usize;
            let tk = dk.rem_euclid(n as i64) as usize;
            let tv = dv.rem_euclid(n as i64) as usize;
            let z = w.qwp_spectrum[kappa * n + nu];
            block[tk * n + tv] = Complex::new(z.re.to_f64().unwrap(), z.im.to_f64().unwrap());
        }
    }
    let mut low = block;
    FftEngine::<f64>::new().inverse2d(&mut low, n, n);
    let tau = std::f64::consts::TAU;
    let mut err2 = 0.0f64;
    let mut norm2 = 0.0f64;
    for k in 0..n {
        for q in 0..n {
            let carrier = tau * (kappa0 as f64 * k as f64 + nu0 as f64 * q as f64) / n as f64;
            let rot = Complex::new(0.0, carrier).exp();
            let sample = w.samples[k * n + q].to_f64().unwrap();
            let diff = sample - (rot * low[k * n + q]).re;
            err2 += diff * diff;
            norm2 += sample * sample;
        }
    }
    if norm2 <= 0.0 {
        return Err(QwpError::ZeroEnergyWaveform);
    }
    Ok((err2 / norm2).sqrt())
}

/// Orientation angle of one directional waveform, in radians.
pub fn orientation_angle<T: Scalar>(w: &Waveform2D<T>) -> f64 {
    let n = w.period.get();
    let (kappa0, nu0) = w.orientation;
    let signed_nu = if nu0 <= n / 2 {
        nu0 as f64
    } else {
        nu0 as f64 - n as f64
    };
    (kappa0 as f64).atan2(signed_nu)
}

/// Verified count of local discrete vanishing moments of `ψ_[m],l`.
///
/// Convolves the waveform with signals that coincide with sampled
/// polynomials (Chebyshev basis) on a centered window and finds the largest
/// `d` such that all interior outputs vanish to 1e-8 relative for degrees
/// `0..d`. Interior points keep the reversed waveform tail away from the
/// window edges, so the window grows beyond the nominal `4(p+2)` when the
/// level-`m` waveform is wider than that; the period must leave room for
/// the window plus the waveform tails on both sides (use a generous `N`).
pub fn ldvm_verify<T: Scalar>(
    mods: &Arc<ModMatSet<T>>,
    level: usize,
    band: usize,
) -> Result<usize> {
    if band == 0 {
        return Err(QwpError::LowpassSubband);
    }
    let w = gen_waveform(mods, level, band, WaveformKind::Psi)?;
    let n = w.period.get();
    let p = w.order.get();
    let cap = p + 3; // test a little past the guaranteed 2·ceil(p/2)

    let samples: Vec<f64> = w.samples.iter().map(|z| z.re.to_f64().unwrap()).collect();
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(QwpError::ZeroEnergyWaveform);
    }
    // Center and effective half-support of the waveform at 1e-10 of peak;
    // the spline packets have slow tails, so this dominates the geometry.
    let center = samples
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .map(|(i, _)| i)
        .unwrap() as i64;
    let mut support = 0usize;
    for (k, &v) in samples.iter().enumerate() {
        if v.abs() > 1e-10 * peak {
            let d = (k as i64 - center).rem_euclid(n as i64);
            let circ = d.min(n as i64 - d) as usize;
            support = support.max(circ);
        }
    }

    let margin = support + 2 * cap;
    let window = (4 * (p + 2)).max(2 * margin + 32);
    if window + 2 * support + 2 >= n {
        return Err(QwpError::InvalidPeriod {
            n,
            reason: "period too short for the vanishing-moment window",
        });
    }
    let k0 = (n - window) / 2;
    let k1 = k0 + window - 1;
    let mid = (k0 + k1) as f64 / 2.0;
    let half_w = (window - 1) as f64 / 2.0;

    let engine = FftEngine::<f64>::new();
    let mut w_hat: Vec<Complex<f64>> =
        samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    engine.forward(&mut w_hat);

    let mut verified = 0usize;
    for d in 1..=cap {
        let degree = d - 1;
        // Signal equal to T_degree on the window, zero outside.
        let mut sig = vec![Complex::new(0.0f64, 0.0); n];
        for k in k0..=k1 {
            let x = (k as f64 - mid) / half_w;
            sig[k] = Complex::new(chebyshev(degree, x), 0.0);
        }
        engine.forward(&mut sig);
        let mut conv: Vec<Complex<f64>> = w_hat
            .iter()
            .zip(&sig)
            .map(|(a, b)| a * b)
            .collect();
        engine.inverse(&mut conv);
        let global_max = conv.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        // Interior: positions whose reversed-waveform footprint stays away
        // from both window edges by the margin.
        let lo = k0 as i64 + center + margin as i64;
        let hi = k1 as i64 + center - margin as i64;
        debug_assert!(lo <= hi);
        let interior_max = (lo..=hi)
            .map(|k| conv[k.rem_euclid(n as i64) as usize].norm())
            .fold(0.0f64, f64::max);
        if interior_max <= 1e-8 * global_max {
            verified = d;
        } else {
            break;
        }
    }
    Ok(verified)
}

fn chebyshev(degree: usize, x: f64) -> f64 {
    match degree {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for _ in 2..=degree {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}
