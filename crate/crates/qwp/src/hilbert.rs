//! Discrete periodic Hilbert transform and analytic signals.

use crate::error::{QwpError, Result};
use crate::fft::FftEngine;
use crate::Scalar;
use num_complex::Complex;

/// Discrete periodic Hilbert transform of a real signal.
///
/// Spectral multiplier `-i` on bins `0 < n < N/2`, `+i` on `N/2 < n < N`,
/// zero at DC and Nyquist. Output is real.
pub fn hilbert<T: Scalar>(x: &[T]) -> Result<Vec<T>> {
    let n = x.len();
    if n == 0 || !n.is_multiple_of(2) {
        return Err(QwpError::OddLength(n));
    }
    let engine = FftEngine::new();
    let mut spec = engine.forward_real(x);
    apply_hilbert_multiplier(&mut spec);
    engine.inverse(&mut spec);
    Ok(spec.into_iter().map(|z| z.re).collect())
}

/// In-place Hilbert multiplier on a full-length spectrum.
pub fn apply_hilbert_multiplier<T: Scalar>(spec: &mut [Complex<T>]) {
    let n = spec.len();
    let half = n / 2;
    let i = Complex::new(T::zero(), T::one());
    spec[0] = Complex::new(T::zero(), T::zero());
    spec[half] = Complex::new(T::zero(), T::zero());
    for (bin, z) in spec.iter_mut().enumerate() {
        if bin == 0 || bin == half {
            continue;
        }
        *z = if bin < half { -i * *z } else { i * *z };
    }
}

/// A real signal together with its Hilbert transform and the two periodic
/// analytic signals `x ± iH(x)`.
#[derive(Debug, Clone)]
pub struct AnalyticSignal<T> {
    pub x: Vec<T>,
    pub h: Vec<T>,
    pub x_plus: Vec<Complex<T>>,
    pub x_minus: Vec<Complex<T>>,
}

impl<T: Scalar> AnalyticSignal<T> {
    pub fn new(x: &[T]) -> Result<Self> {
        let h = hilbert(x)?;
        let x_plus = x
            .iter()
            .zip(&h)
            .map(|(&a, &b)| Complex::new(a, b))
            .collect();
        let x_minus = x
            .iter()
            .zip(&h)
            .map(|(&a, &b)| Complex::new(a, -b))
            .collect();
        Ok(Self {
            x: x.to_vec(),
            h,
            x_plus,
            x_minus,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn cosine_maps_to_sine() {
        let n = 256;
        for q in [1usize, 5, 100, 127] {
            let x: Vec<f64> = (0..n).map(|k| (TAU * q as f64 * k as f64 / n as f64).cos()).collect();
            let h = hilbert(&x).unwrap();
            for k in 0..n {
                let expect = (TAU * q as f64 * k as f64 / n as f64).sin();
                assert!((h[k] - expect).abs() < 1e-12, "q={q} k={k}");
            }
        }
    }

    #[test]
    fn constant_is_annihilated() {
        let h = hilbert(&vec![3.25f64; 64]).unwrap();
        assert!(h.iter().all(|&v| v.abs() < 1e-13));
    }

    #[test]
    fn norm_preserved_without_edge_bins() {
        // Signal with empty DC and Nyquist bins.
        let n = 128;
        let x: Vec<f64> = (0..n)
            .map(|k| {
                (TAU * 3.0 * k as f64 / n as f64).cos() + 0.5 * (TAU * 20.0 * k as f64 / n as f64).sin()
            })
            .collect();
        let h = hilbert(&x).unwrap();
        let nx: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nh: f64 = h.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((nx - nh).abs() < 1e-12 * nx);
    }

    #[test]
    fn analytic_signal_one_sided() {
        let n = 64;
        let x: Vec<f64> = (0..n).map(|k| ((k * 7 + 1) as f64).sin()).collect();
        let a = AnalyticSignal::new(&x).unwrap();
        let engine = FftEngine::<f64>::new();
        let mut plus = a.x_plus.clone();
        engine.forward(&mut plus);
        let mut minus = a.x_minus.clone();
        engine.forward(&mut minus);
        for bin in 1..n / 2 {
            assert!(minus[bin].norm() < 1e-10, "x- has positive-band leak");
            assert!(plus[n - bin].norm() < 1e-10, "x+ has negative-band leak");
        }
        for k in 0..n {
            assert!((a.x_plus[k].re - x[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_odd_length() {
        assert!(hilbert(&[1.0f64, 2.0, 3.0]).is_err());
    }

    proptest::proptest! {
        /// On signals with empty DC and Nyquist bins the transform is an
        /// involution up to sign: H(H(x)) = -x.
        #[test]
        fn double_transform_negates(seed in 0u64..1000) {
            let n = 64usize;
            let raw: Vec<f64> = (0..n)
                .map(|k| ((seed + 1) as f64 * (k as f64 + 0.7)).sin())
                .collect();
            // Project out DC and Nyquist.
            let mean: f64 = raw.iter().sum::<f64>() / n as f64;
            let alt: f64 = raw
                .iter()
                .enumerate()
                .map(|(k, v)| if k % 2 == 0 { *v } else { -*v })
                .sum::<f64>()
                / n as f64;
            let x: Vec<f64> = raw
                .iter()
                .enumerate()
                .map(|(k, v)| v - mean - if k % 2 == 0 { alt } else { -alt })
                .collect();
            let hh = hilbert(&hilbert(&x).unwrap()).unwrap();
            for k in 0..n {
                proptest::prop_assert!((hh[k] + x[k]).abs() < 1e-12);
            }
        }
    }
}
