//! FFT plumbing with the DFT convention used throughout the crate:
//! forward `x̂[n] = Σ_k ω^{-kn} x[k]` (unscaled), inverse carries `1/N`.

use crate::{cast, Scalar};
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

/// Planner wrapper that caches plans per length and direction.
///
/// Shareable across threads; the cached plans themselves are `Sync`.
pub struct FftEngine<T: Scalar> {
    planner: Mutex<FftPlanner<T>>,
    forward: RwLock<HashMap<usize, Arc<dyn Fft<T>>>>,
    inverse: RwLock<HashMap<usize, Arc<dyn Fft<T>>>>,
}

impl<T: Scalar> Default for FftEngine<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> FftEngine<T> {
    pub fn new() -> Self {
        Self {
            planner: Mutex::new(FftPlanner::new()),
            forward: RwLock::new(HashMap::new()),
            inverse: RwLock::new(HashMap::new()),
        }
    }

    fn plan(&self, len: usize, fwd: bool) -> Arc<dyn Fft<T>> {
        let cache = if fwd { &self.forward } else { &self.inverse };
        if let Some(p) = cache.read().unwrap().get(&len) {
            return Arc::clone(p);
        }
        let mut planner = self.planner.lock().unwrap();
        let plan = if fwd {
            planner.plan_fft_forward(len)
        } else {
            planner.plan_fft_inverse(len)
        };
        cache.write().unwrap().insert(len, Arc::clone(&plan));
        plan
    }

    /// In-place forward DFT, unscaled.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.plan(data.len(), true).process(data);
    }

    /// In-place inverse DFT including the `1/N` factor.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        let len = data.len();
        self.plan(len, false).process(data);
        let scale = T::one() / cast::<T>(len as f64);
        for z in data.iter_mut() {
            *z = z.scale(scale);
        }
    }

    /// Forward DFT of a real signal.
    pub fn forward_real(&self, x: &[T]) -> Vec<Complex<T>> {
        let mut buf: Vec<Complex<T>> = x.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.forward(&mut buf);
        buf
    }

    /// In-place 2D forward DFT of a row-major `rows x cols` array.
    pub fn forward2d(&self, data: &mut [Complex<T>], rows: usize, cols: usize) {
        self.fft2d(data, rows, cols, true);
    }

    /// In-place 2D inverse DFT including the `1/(rows*cols)` factor.
    pub fn inverse2d(&self, data: &mut [Complex<T>], rows: usize, cols: usize) {
        self.fft2d(data, rows, cols, false);
    }

    fn fft2d(&self, data: &mut [Complex<T>], rows: usize, cols: usize, fwd: bool) {
        assert_eq!(data.len(), rows * cols, "2D buffer size mismatch");
        let row_plan = self.plan(cols, fwd);
        for row in data.chunks_exact_mut(cols) {
            row_plan.process(row);
        }
        let mut t = transpose(data, rows, cols);
        let col_plan = self.plan(rows, fwd);
        for col in t.chunks_exact_mut(rows) {
            col_plan.process(col);
        }
        transpose_into(&t, cols, rows, data);
        if !fwd {
            let scale = T::one() / cast::<T>((rows * cols) as f64);
            for z in data.iter_mut() {
                *z = z.scale(scale);
            }
        }
    }
}

fn transpose<T: Copy>(data: &[T], rows: usize, cols: usize) -> Vec<T> {
    let mut out = data.to_vec();
    transpose_into(data, rows, cols, &mut out);
    out
}

fn transpose_into<T: Copy>(data: &[T], rows: usize, cols: usize, out: &mut [T]) {
    const BLOCK: usize = 32;
    for rb in (0..rows).step_by(BLOCK) {
        for cb in (0..cols).step_by(BLOCK) {
            for r in rb..(rb + BLOCK).min(rows) {
                for c in cb..(cb + BLOCK).min(cols) {
                    out[c * rows + r] = data[r * cols + c];
                }
            }
        }
    }
}

/// `ω^k` for `ω = e^{2πi/n}`, with exact values on the quadrant boundaries.
///
/// The index is reduced mod `n` first so large multiples stay accurate, and
/// bins 0, n/4, n/2, 3n/4 come out exactly as ±1/±i. The latter keeps the
/// exceptional-bin identities of the filter tables exact in floating point.
pub fn unit_root<T: Scalar>(n: usize, k: i64) -> Complex<T> {
    let m = k.rem_euclid(n as i64) as usize;
    let eval = |r: usize| -> Complex<T> {
        if r == 0 {
            return Complex::new(T::one(), T::zero());
        }
        let theta = cast::<T>(2.0) * T::PI() * cast::<T>(r as f64 / n as f64);
        let (s, c) = theta.sin_cos();
        Complex::new(c, s)
    };
    if n.is_multiple_of(4) {
        let quarter = n / 4;
        let base = eval(m % quarter);
        match m / quarter {
            0 => base,
            1 => Complex::new(-base.im, base.re),
            2 => -base,
            _ => Complex::new(base.im, -base.re),
        }
    } else if n.is_multiple_of(2) && m >= n / 2 {
        -eval(m - n / 2)
    } else {
        eval(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn round_trip_matches_input() {
        let e = FftEngine::<f64>::new();
        let x: Vec<f64> = (0..48).map(|k| (k as f64 * 0.37).sin()).collect();
        let mut buf = e.forward_real(&x);
        e.inverse(&mut buf);
        for (a, b) in x.iter().zip(&buf) {
            assert!((a - b.re).abs() < 1e-12 && b.im.abs() < 1e-12);
        }
    }

    #[test]
    fn forward_uses_negative_exponent_convention() {
        // x[k] = ω^{qk} must put all mass at bin +q.
        let e = FftEngine::<f64>::new();
        let n = 16;
        let q = 3i64;
        let mut buf: Vec<Complex64> = (0..n).map(|k| unit_root(n, q * k as i64)).collect();
        e.forward(&mut buf);
        assert!((buf[q as usize].re - n as f64).abs() < 1e-10);
        for (i, z) in buf.iter().enumerate() {
            if i != q as usize {
                assert!(z.norm() < 1e-10, "leakage at bin {i}");
            }
        }
    }

    #[test]
    fn unit_root_exact_on_axes() {
        let n = 64;
        assert_eq!(unit_root::<f64>(n, 0), Complex64::new(1.0, 0.0));
        assert_eq!(unit_root::<f64>(n, 16), Complex64::new(0.0, 1.0));
        assert_eq!(unit_root::<f64>(n, 32), Complex64::new(-1.0, 0.0));
        assert_eq!(unit_root::<f64>(n, 48), Complex64::new(0.0, -1.0));
        assert_eq!(unit_root::<f64>(n, -32), Complex64::new(-1.0, 0.0));
        assert_eq!(unit_root::<f64>(n, 96), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn fft2d_round_trip() {
        let e = FftEngine::<f64>::new();
        let (r, c) = (8, 8);
        let orig: Vec<Complex64> = (0..r * c)
            .map(|i| Complex64::new((i as f64).cos(), (i as f64 * 0.5).sin()))
            .collect();
        let mut buf = orig.clone();
        e.forward2d(&mut buf, r, c);
        e.inverse2d(&mut buf, r, c);
        for (a, b) in orig.iter().zip(&buf) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
