//! Discrete-time spline groundwork: centered B-spline evaluation and the
//! frequency tables (`u`, `v`, `b̂`, `Υ`, `β`, `α`) every p-filter is built
//! from.

use crate::error::{QwpError, Result};
use crate::fft::unit_root;
use crate::{cast, Scalar};
use num_complex::Complex;

/// Order of the generating polynomial spline, restricted to `2..=20`.
///
/// Order 1 is excluded: sampling the box spline at ±1/2 lands on the support
/// boundary where the truncated-power form is ambiguous.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplineOrder(usize);

impl SplineOrder {
    pub const MIN: usize = 2;
    pub const MAX: usize = 20;

    pub fn new(p: usize) -> Result<Self> {
        if (Self::MIN..=Self::MAX).contains(&p) {
            Ok(Self(p))
        } else {
            Err(QwpError::InvalidOrder(p))
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }
}

/// Signal period `N` together with the deepest admissible transform level.
///
/// `N` must be even but need not be a power of two; a level `M` is
/// admissible when `2^M | N` and every subband keeps at least 4 samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodLength {
    n: usize,
    max_depth: usize,
}

impl PeriodLength {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(QwpError::InvalidPeriod {
                n,
                reason: "period must be even and at least 4",
            });
        }
        let mut max_depth = 0;
        while n.is_multiple_of(1usize << (max_depth + 1)) && n >> (max_depth + 1) >= 4 {
            max_depth += 1;
        }
        Ok(Self { n, max_depth })
    }

    #[inline]
    pub fn get(self) -> usize {
        self.n
    }

    #[inline]
    pub fn max_depth(self) -> usize {
        self.max_depth
    }

    pub fn check_depth(self, depth: usize) -> Result<()> {
        if depth == 0 || depth > self.max_depth {
            Err(QwpError::DepthTooDeep { depth, n: self.n })
        } else {
            Ok(())
        }
    }
}

/// Centered B-spline `b^p(t)` via the truncated-power formula.
///
/// Supported on `(-p/2, p/2)`, symmetric, exactly zero outside. For orders
/// above 12 the alternating binomial sum is evaluated in descending
/// magnitude with Neumaier compensation, which keeps the cancellation loss
/// acceptable up to order 20.
pub fn eval_bspline<T: Scalar>(p: SplineOrder, t: T) -> T {
    let p = p.get();
    let half = cast::<T>(p as f64 / 2.0);
    if t.abs() >= half {
        return T::zero();
    }
    // Evaluate on the left half-support where the truncated-power sum keeps
    // at most ceil(p/2) terms: the full-length alternating sum near the
    // right edge cancels catastrophically. Also makes symmetry bitwise.
    let t = -t.abs();
    let mut terms: Vec<T> = Vec::with_capacity(p + 1);
    let mut binom = 1.0f64; // C(p, k), exact in f64 for p <= 20
    for k in 0..=p {
        let base = t + half - cast::<T>(k as f64);
        if base > T::zero() {
            let sign = if k % 2 == 0 { T::one() } else { -T::one() };
            terms.push(sign * cast::<T>(binom) * base.powi(p as i32 - 1));
        }
        binom = binom * (p - k) as f64 / (k + 1) as f64;
    }
    if p > 12 {
        terms.sort_by(|a, b| {
            b.abs()
                .partial_cmp(&a.abs())
                .expect("finite spline terms")
        });
    }
    let sum = neumaier_sum(&terms);
    sum / cast::<T>(factorial(p - 1))
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn neumaier_sum<T: Scalar>(terms: &[T]) -> T {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for &t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp = comp + ((sum - s) + t);
        } else {
            comp = comp + ((t - s) + sum);
        }
        sum = s;
    }
    sum + comp
}

/// Precomputed frequency tables for one `(p, N)` pair.
///
/// - `u[n] = Σ_k ω^{-kn} b^p(k)` — strictly positive, symmetric about `N/2`;
/// - `v[n] = ω^{-n/2} Σ_k ω^{-kn} b^p(k + 1/2)` — stored over one period
///   with the antiperiodic rule `v[n+N] = -v[n]` behind [`Self::v_at`];
/// - `bhat1[n] = (u[2n] + v[2n]) / 2` — DFT of the span-two discrete-time
///   B-spline;
/// - `upsilon[n] = (u[2n]² + v[2n]²) / 4`;
/// - `beta[n] = bhat1[n] / sqrt(upsilon[n])` and
///   `alpha[n] = ω^n beta[n + N/2]` — the low/high p-filter responses.
#[derive(Debug, Clone)]
pub struct SplineBasisTables<T> {
    p: SplineOrder,
    period: PeriodLength,
    u: Vec<T>,
    v: Vec<T>,
    bhat1: Vec<T>,
    upsilon: Vec<T>,
    beta: Vec<T>,
    alpha: Vec<Complex<T>>,
}

impl<T: Scalar> SplineBasisTables<T> {
    /// Builds all tables by the finite sampled-B-spline sums.
    ///
    /// Requires `N` even and `N > 2p` so the B-spline support fits inside
    /// one period.
    pub fn build(p: SplineOrder, period: PeriodLength) -> Result<Self> {
        let n = period.get();
        if n <= 2 * p.get() {
            return Err(QwpError::InvalidPeriod {
                n,
                reason: "period must exceed twice the spline order",
            });
        }
        let order = p.get();
        let reach = order as i64 / 2 + 1;
        // Integer and half-integer B-spline samples; symmetric in k.
        let b_int: Vec<T> = (0..=reach)
            .map(|k| eval_bspline(p, cast::<T>(k as f64)))
            .collect();
        let b_half: Vec<T> = (0..=reach)
            .map(|k| eval_bspline(p, cast::<T>(k as f64 + 0.5)))
            .collect();

        // u and v over half a period; mirrored to enforce the exact
        // symmetries u[N-n] = u[n] and v[N-n] = -v[n].
        let mut u = vec![T::zero(); n];
        let mut v = vec![T::zero(); n];
        for bin in 0..=n / 2 {
            let mut us = b_int[0];
            for (k, &b) in b_int.iter().enumerate().skip(1) {
                if b == T::zero() {
                    continue;
                }
                let m = (k * bin) % n;
                us = us + cast::<T>(2.0) * b * unit_root::<T>(n, m as i64).re;
            }
            let mut vs = T::zero();
            for (k, &b) in b_half.iter().enumerate() {
                if b == T::zero() {
                    continue;
                }
                // cos(π n (2k+1) / N) = Re ω_{2N}^{n(2k+1)}
                let m = ((2 * k + 1) * bin) % (2 * n);
                vs = vs + cast::<T>(2.0) * b * unit_root::<T>(2 * n, m as i64).re;
            }
            u[bin] = us;
            v[bin] = vs;
            if bin != 0 && bin != n / 2 {
                u[n - bin] = us;
                v[n - bin] = -vs;
            }
        }
        // v[N/2] vanishes identically (all cosine factors are zero there).
        v[n / 2] = T::zero();

        let mut tables = Self {
            p,
            period,
            u,
            v,
            bhat1: Vec::new(),
            upsilon: Vec::new(),
            beta: Vec::new(),
            alpha: Vec::new(),
        };

        let half = cast::<T>(0.5);
        let quarter = cast::<T>(0.25);
        let mut bhat1 = Vec::with_capacity(n);
        let mut upsilon = Vec::with_capacity(n);
        for bin in 0..n {
            let u2 = tables.u[(2 * bin) % n];
            let v2 = tables.v_at(2 * bin as i64);
            bhat1.push((u2 + v2) * half);
            upsilon.push((u2 * u2 + v2 * v2) * quarter);
        }
        // u[0] and v[0] both sum a partition of unity, so the Nyquist bin of
        // the dilated-spline DFT vanishes identically; pin the exact zero so
        // the high-pass response kills DC exactly.
        bhat1[n / 2] = T::zero();
        let beta: Vec<T> = bhat1
            .iter()
            .zip(&upsilon)
            .map(|(&b, &ups)| b / ups.sqrt())
            .collect();
        let alpha: Vec<Complex<T>> = (0..n)
            .map(|bin| unit_root::<T>(n, bin as i64).scale(beta[(bin + n / 2) % n]))
            .collect();
        tables.bhat1 = bhat1;
        tables.upsilon = upsilon;
        tables.beta = beta;
        tables.alpha = alpha;
        Ok(tables)
    }

    #[inline]
    pub fn order(&self) -> SplineOrder {
        self.p
    }

    #[inline]
    pub fn period(&self) -> PeriodLength {
        self.period
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.period.get()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn u(&self) -> &[T] {
        &self.u
    }

    pub fn v(&self) -> &[T] {
        &self.v
    }

    /// Antiperiodic accessor for `v`: `v[n + N] = -v[n]` for any integer.
    pub fn v_at(&self, idx: i64) -> T {
        let n = self.len() as i64;
        let m = idx.rem_euclid(2 * n);
        if m < n {
            self.v[m as usize]
        } else {
            -self.v[(m - n) as usize]
        }
    }

    pub fn bhat1(&self) -> &[T] {
        &self.bhat1
    }

    pub fn upsilon(&self) -> &[T] {
        &self.upsilon
    }

    pub fn beta(&self) -> &[T] {
        &self.beta
    }

    pub fn alpha(&self) -> &[Complex<T>] {
        &self.alpha
    }
}
