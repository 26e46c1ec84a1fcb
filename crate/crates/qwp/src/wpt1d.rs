//! Multi-level 1D wavelet packet transforms.
//!
//! Level 1 uses the modulation matrices of the requested family; every
//! deeper level uses the real matrices sampled at stride `2^m`. Subbands are
//! kept in natural frequency order through the Gray-type rule: an even band
//! sends its low-pass child to `2λ`, an odd band to `2λ+1`.
//!
//! Trees retain the coefficients of every level so that reconstruction can
//! start from any disjoint cover of the frequency axis.

use crate::error::{QwpError, Result};
use crate::fft::FftEngine;
use crate::filterbank::{analyze_one_level, synthesize_one_level, FilterKind, HalfBandPair, ModMatSet};
use crate::spline::{PeriodLength, SplineOrder};
use crate::{cast, Scalar};
use num_complex::Complex;
use rayon::prelude::*;
use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

/// Children of subband `band` in natural frequency order:
/// `(low-pass child, high-pass child)`.
#[inline]
pub(crate) fn children_of(band: usize) -> (usize, usize) {
    if band.is_multiple_of(2) {
        (2 * band, 2 * band + 1)
    } else {
        (2 * band + 1, 2 * band)
    }
}

/// Parent subband and the filter channel (0 = low, 1 = high) that produced
/// `band`; inverse of [`children_of`].
#[inline]
pub(crate) fn parent_of(band: usize) -> (usize, usize) {
    let parent = band / 2;
    let offset = band - 2 * parent;
    let channel = if parent.is_multiple_of(2) { offset } else { 1 - offset };
    (parent, channel)
}

/// Coefficients of a full multi-level decomposition.
///
/// `z = y - i·c` for the plus tree and `z = y + i·c` for the minus tree;
/// real and complementary trees carry (numerically) real entries.
#[derive(Debug, Clone)]
pub struct CoeffTree1D<T> {
    order: SplineOrder,
    period: PeriodLength,
    depth: usize,
    kind: FilterKind,
    /// `levels[m-1][band]` holds the `N/2^m` coefficients of subband `band`
    /// at level `m`.
    levels: Vec<Vec<Vec<Complex<T>>>>,
}

impl<T: Scalar> CoeffTree1D<T> {
    pub fn order(&self) -> SplineOrder {
        self.order
    }

    pub fn period(&self) -> PeriodLength {
        self.period
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn subband(&self, level: usize, band: usize) -> Result<&[Complex<T>]> {
        self.levels
            .get(level.wrapping_sub(1))
            .and_then(|l| l.get(band))
            .map(|v| v.as_slice())
            .ok_or(QwpError::InvalidSubband { level, band })
    }

    pub fn subband_mut(&mut self, level: usize, band: usize) -> Result<&mut Vec<Complex<T>>> {
        self.levels
            .get_mut(level.wrapping_sub(1))
            .and_then(|l| l.get_mut(band))
            .ok_or(QwpError::InvalidSubband { level, band })
    }

    /// Total coefficient energy of one level.
    pub fn level_energy(&self, level: usize) -> T {
        self.levels[level - 1]
            .iter()
            .flatten()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub(crate) fn from_levels(
        order: SplineOrder,
        period: PeriodLength,
        kind: FilterKind,
        levels: Vec<Vec<Vec<Complex<T>>>>,
    ) -> Self {
        Self {
            order,
            period,
            depth: levels.len(),
            kind,
            levels,
        }
    }
}

/// A set of `(level, band)` nodes meant to tile the frequency axis exactly
/// once.
#[derive(Debug, Clone, Default)]
pub struct Selection1D {
    nodes: BTreeSet<(usize, usize)>,
}

impl Selection1D {
    pub fn from_nodes<I: IntoIterator<Item = (usize, usize)>>(nodes: I) -> Self {
        Self {
            nodes: nodes.into_iter().collect(),
        }
    }

    /// Every subband of one level.
    pub fn full_level(level: usize) -> Self {
        Self::from_nodes((0..1usize << level).map(|b| (level, b)))
    }

    /// The wavelet staircase: high band of each level plus the deepest
    /// low band.
    pub fn wavelet(depth: usize) -> Self {
        let mut nodes: Vec<(usize, usize)> = (1..=depth).map(|m| (m, 1)).collect();
        nodes.push((depth, 0));
        Self::from_nodes(nodes)
    }

    pub fn contains(&self, level: usize, band: usize) -> bool {
        self.nodes.contains(&(level, band))
    }

    pub fn iter(&self) -> impl Iterator<Item = &(usize, usize)> {
        self.nodes.iter()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Checks that the nodes cover every leaf path exactly once.
    pub fn validate(&self, depth: usize) -> Result<()> {
        for &(m, band) in &self.nodes {
            if m == 0 || m > depth || band >= (1usize << m) {
                return Err(QwpError::InvalidCover(format!(
                    "node (level {m}, band {band}) out of range for depth {depth}"
                )));
            }
        }
        let mut used = 0usize;
        let mut stack = vec![(1usize, 0usize), (1usize, 1usize)];
        while let Some((m, band)) = stack.pop() {
            if self.contains(m, band) {
                used += 1;
            } else if m == depth {
                return Err(QwpError::InvalidCover(format!(
                    "leaf (level {m}, band {band}) not covered"
                )));
            } else {
                let (lo, hi) = children_of(band);
                stack.push((m + 1, lo));
                stack.push((m + 1, hi));
            }
        }
        if used != self.nodes.len() {
            return Err(QwpError::InvalidCover(
                "selection contains overlapping or unreachable nodes".into(),
            ));
        }
        Ok(())
    }
}

/// 1D transform engine bound to one table set.
pub struct Wpt1d<T: Scalar> {
    mods: Arc<ModMatSet<T>>,
    fft: FftEngine<T>,
}

impl<T: Scalar> Wpt1d<T> {
    pub fn new(mods: Arc<ModMatSet<T>>) -> Self {
        Self {
            mods,
            fft: FftEngine::new(),
        }
    }

    pub fn mods(&self) -> &Arc<ModMatSet<T>> {
        &self.mods
    }

    /// Spectral cascade shared by the forward transform and the waveform
    /// generator: returns the half-band spectra of every subband at every
    /// level down to `depth`.
    fn analysis_spectra(
        &self,
        x_hat: Vec<Complex<T>>,
        depth: usize,
        kind: FilterKind,
    ) -> Result<Vec<Vec<Vec<Complex<T>>>>> {
        let mut levels: Vec<Vec<Vec<Complex<T>>>> = Vec::with_capacity(depth);
        let HalfBandPair { lo, hi } = analyze_one_level(&x_hat, self.mods.pair(kind), 1)?;
        levels.push(vec![lo, hi]);
        for m in 1..depth {
            let stride = 1usize << m;
            let prev = &levels[m - 1];
            let splits: Vec<(usize, HalfBandPair<T>)> = prev
                .par_iter()
                .enumerate()
                .map(|(band, spec)| {
                    let split = analyze_one_level(spec, self.mods.pair(FilterKind::Real), stride)?;
                    Ok((band, split))
                })
                .collect::<Result<_>>()?;
            let mut next = vec![Vec::new(); 2 << m];
            for (band, split) in splits {
                let (lo_child, hi_child) = children_of(band);
                next[lo_child] = split.lo;
                next[hi_child] = split.hi;
            }
            levels.push(next);
        }
        Ok(levels)
    }

    /// Full decomposition of a real signal down to `depth` levels.
    pub fn forward(&self, x: &[T], depth: usize, kind: FilterKind) -> Result<CoeffTree1D<T>> {
        let period = self.mods.tables().period();
        if x.len() != period.get() {
            return Err(QwpError::LengthMismatch {
                got: x.len(),
                expected: period.get(),
            });
        }
        period.check_depth(depth)?;
        let x_hat = self.fft.forward_real(x);
        let spectra = self.analysis_spectra(x_hat, depth, kind)?;
        let levels: Vec<Vec<Vec<Complex<T>>>> = spectra
            .into_iter()
            .map(|level| {
                let mut level = level;
                level.par_iter_mut().for_each(|spec| self.fft.inverse(spec));
                level
            })
            .collect();
        Ok(CoeffTree1D::from_levels(
            self.mods.tables().order(),
            period,
            kind,
            levels,
        ))
    }

    /// Reconstruction from any disjoint cover.
    ///
    /// Real and complementary trees reproduce the signal exactly; the
    /// quasi-analytic trees return `2(x ± iH(x))`.
    pub fn inverse(&self, tree: &CoeffTree1D<T>, selection: &Selection1D) -> Result<Vec<Complex<T>>> {
        let x_hat = self.selection_spectrum(tree, selection)?;
        let mut x = x_hat;
        self.fft.inverse(&mut x);
        Ok(x)
    }

    /// Reconstruction for the real/complementary families, checked real.
    pub fn inverse_real(&self, tree: &CoeffTree1D<T>, selection: &Selection1D) -> Result<Vec<T>> {
        Ok(self
            .inverse(tree, selection)?
            .into_iter()
            .map(|z| z.re)
            .collect())
    }

    /// Assembles the full-length spectrum of the reconstruction.
    fn selection_spectrum(
        &self,
        tree: &CoeffTree1D<T>,
        selection: &Selection1D,
    ) -> Result<Vec<Complex<T>>> {
        selection.validate(tree.depth())?;
        let mut spectra: HashMap<(usize, usize), Vec<Complex<T>>> = HashMap::new();
        for &(m, band) in selection.iter() {
            let mut spec = tree.subband(m, band)?.to_vec();
            self.fft.forward(&mut spec);
            spectra.insert((m, band), spec);
        }
        // Deepest levels first: merge sibling pairs until level 1 remains.
        for m in (2..=tree.depth()).rev() {
            let stride = 1usize << (m - 1);
            for band in 0..(1usize << (m - 1)) {
                let (lo_child, hi_child) = children_of(band);
                if let (Some(lo), Some(hi)) = (
                    spectra.remove(&(m, lo_child)),
                    spectra.remove(&(m, hi_child)),
                ) {
                    let merged = synthesize_one_level(
                        &HalfBandPair { lo, hi },
                        self.mods.pair(FilterKind::Real),
                        stride,
                    )?;
                    spectra.insert((m - 1, band), merged);
                }
            }
        }
        let lo = spectra.remove(&(1, 0)).expect("cover supplies band 0");
        let hi = spectra.remove(&(1, 1)).expect("cover supplies band 1");
        synthesize_one_level(&HalfBandPair { lo, hi }, self.mods.pair(tree.kind()), 1)
    }

    /// Tight-frame reconstruction from the level-`m` coefficients of a real
    /// tree and a complementary tree of the same signal:
    /// `x = (Σ y·ψ + Σ c·φ) / 2`.
    pub fn frame_reconstruct(
        &self,
        y_tree: &CoeffTree1D<T>,
        c_tree: &CoeffTree1D<T>,
        level: usize,
    ) -> Result<Vec<T>> {
        if y_tree.kind() != FilterKind::Real || c_tree.kind() != FilterKind::Complementary {
            return Err(QwpError::InvalidCover(
                "frame reconstruction needs a real tree and a complementary tree".into(),
            ));
        }
        if y_tree.order().get() != c_tree.order().get()
            || y_tree.period().get() != c_tree.period().get()
            || y_tree.depth() != c_tree.depth()
        {
            return Err(QwpError::LengthMismatch {
                got: c_tree.period().get(),
                expected: y_tree.period().get(),
            });
        }
        let sel = Selection1D::full_level(level);
        let from_psi = self.inverse_real(y_tree, &sel)?;
        let from_phi = self.inverse_real(c_tree, &sel)?;
        let half = cast::<T>(0.5);
        Ok(from_psi
            .into_iter()
            .zip(from_phi)
            .map(|(a, b)| (a + b) * half)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::hilbert;
    use crate::spline::SplineBasisTables;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn engine(p: usize, n: usize) -> Wpt1d<f64> {
        let tables = SplineBasisTables::build(
            SplineOrder::new(p).unwrap(),
            PeriodLength::new(n).unwrap(),
        )
        .unwrap();
        Wpt1d::new(Arc::new(ModMatSet::new(Arc::new(tables))))
    }

    fn random_signal(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn max_err(a: &[f64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, z)| (x - z.re).abs().max(z.im.abs()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn gray_rule_round_trips() {
        for band in 0..64usize {
            let (lo, hi) = children_of(band);
            assert_eq!(parent_of(lo), (band, 0));
            assert_eq!(parent_of(hi), (band, 1));
        }
    }

    #[test]
    fn full_level_reconstruction_real() {
        let n = 256;
        let x = random_signal(n, 7);
        for p in [3usize, 9, 15] {
            let t = engine(p, n);
            let tree = t.forward(&x, 4, FilterKind::Real).unwrap();
            for level in 1..=4 {
                let rec = t.inverse(&tree, &Selection1D::full_level(level)).unwrap();
                assert!(max_err(&x, &rec) < 1e-11, "p={p} level={level}");
            }
        }
    }

    #[test]
    fn wavelet_and_mixed_covers_reconstruct() {
        let n = 256;
        let x = random_signal(n, 11);
        let t = engine(9, n);
        let tree = t.forward(&x, 3, FilterKind::Real).unwrap();
        let rec = t.inverse(&tree, &Selection1D::wavelet(3)).unwrap();
        assert!(max_err(&x, &rec) < 1e-11);
        let mixed = Selection1D::from_nodes([(1, 1), (2, 1), (3, 0), (3, 1)]);
        let rec = t.inverse(&tree, &mixed).unwrap();
        assert!(max_err(&x, &rec) < 1e-11);
    }

    #[test]
    fn invalid_covers_rejected() {
        let sel = Selection1D::from_nodes([(1, 0)]);
        assert!(sel.validate(2).is_err(), "band 1 uncovered");
        let sel = Selection1D::from_nodes([(1, 0), (1, 1), (2, 0)]);
        assert!(sel.validate(2).is_err(), "overlap");
        let sel = Selection1D::from_nodes([(1, 0), (2, 2), (2, 3)]);
        assert!(sel.validate(2).is_ok());
        let sel = Selection1D::from_nodes([(3, 9)]);
        assert!(sel.validate(2).is_err(), "out of range");
    }

    #[test]
    fn real_tree_entries_are_real_and_parseval_holds() {
        let n = 128;
        let x = random_signal(n, 3);
        let t = engine(5, n);
        let energy: f64 = x.iter().map(|v| v * v).sum();
        for kind in [FilterKind::Real, FilterKind::Complementary] {
            let tree = t.forward(&x, 3, kind).unwrap();
            for m in 1..=3 {
                for band in 0..1usize << m {
                    for z in tree.subband(m, band).unwrap() {
                        assert!(z.im.abs() < 1e-12, "kind={kind:?}");
                    }
                }
                let e = tree.level_energy(m);
                assert!(
                    (e - energy).abs() < 1e-10 * energy,
                    "kind={kind:?} level={m}: {e} vs {energy}"
                );
            }
        }
    }

    #[test]
    fn tight_frame_energy_doubles() {
        let n = 128;
        let x = random_signal(n, 19);
        let t = engine(9, n);
        let energy: f64 = x.iter().map(|v| v * v).sum();
        let zp = t.forward(&x, 3, FilterKind::QuasiAnalyticPlus).unwrap();
        for m in 1..=3 {
            let e = zp.level_energy(m);
            assert!((e - 2.0 * energy).abs() < 1e-10 * energy, "level={m}");
        }
    }

    #[test]
    fn quasi_trees_conjugate_and_combine_to_signal() {
        let n = 128;
        let x = random_signal(n, 23);
        let t = engine(9, n);
        let zp = t.forward(&x, 3, FilterKind::QuasiAnalyticPlus).unwrap();
        let zm = t.forward(&x, 3, FilterKind::QuasiAnalyticMinus).unwrap();
        let yt = t.forward(&x, 3, FilterKind::Real).unwrap();
        let ct = t.forward(&x, 3, FilterKind::Complementary).unwrap();
        for m in 1..=3 {
            for band in 0..1usize << m {
                let p = zp.subband(m, band).unwrap();
                let q = zm.subband(m, band).unwrap();
                let y = yt.subband(m, band).unwrap();
                let c = ct.subband(m, band).unwrap();
                for l in 0..p.len() {
                    assert!((p[l] - q[l].conj()).norm() < 1e-11);
                    let expect = Complex64::new(y[l].re, -c[l].re);
                    assert!((p[l] - expect).norm() < 1e-11, "z = y - ic");
                }
            }
        }

        let sel = Selection1D::full_level(3);
        let rp = t.inverse(&zp, &sel).unwrap();
        let rm = t.inverse(&zm, &sel).unwrap();
        let h = hilbert(&x).unwrap();
        for k in 0..n {
            let expect_p = 2.0 * Complex64::new(x[k], h[k]);
            assert!((rp[k] - expect_p).norm() < 1e-11, "plus analytic identity");
            let expect_m = 2.0 * Complex64::new(x[k], -h[k]);
            assert!((rm[k] - expect_m).norm() < 1e-11, "minus analytic identity");
            let combined = (rp[k] + rm[k]).re / 4.0;
            assert!((combined - x[k]).abs() < 1e-11);
        }
    }

    #[test]
    fn frame_reconstruct_level_one_and_deeper() {
        for (p, n, m) in [(3usize, 64usize, 1usize), (9, 128, 2)] {
            let x = random_signal(n, 31);
            let t = engine(p, n);
            let y = t.forward(&x, m.max(2), FilterKind::Real).unwrap();
            let c = t.forward(&x, m.max(2), FilterKind::Complementary).unwrap();
            let rec = t.frame_reconstruct(&y, &c, m).unwrap();
            let err = x
                .iter()
                .zip(&rec)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-11, "p={p} n={n} m={m}: err={err}");
        }
    }

    /// Feeding a generated packet through the transform concentrates all
    /// energy in its own node: subband λ reads the Kronecker delta.
    #[test]
    fn waveform_input_gives_delta_coefficients() {
        use crate::atlas::{gen_waveform, WaveformKind};
        let n = 128;
        let t = engine(9, n);
        let level = 3usize;
        for band in [0usize, 3, 7] {
            let w = gen_waveform(t.mods(), level, band, WaveformKind::Psi).unwrap();
            let x = w.real_samples();
            let tree = t.forward(&x, level, FilterKind::Real).unwrap();
            for other in 0..1usize << level {
                let coeffs = tree.subband(level, other).unwrap();
                for (l, z) in coeffs.iter().enumerate() {
                    let expect = if other == band && l == 0 { 1.0 } else { 0.0 };
                    assert!(
                        (z.re - expect).abs() < 1e-10 && z.im.abs() < 1e-10,
                        "band={band} other={other} l={l}: {z}"
                    );
                }
            }
        }
    }

    /// A period that is even but not divisible by 4 still supports a
    /// one-level transform.
    #[test]
    fn period_two_mod_four_round_trips() {
        let n = 10usize;
        let t = engine(3, n);
        assert_eq!(t.mods().tables().period().max_depth(), 1);
        let x = random_signal(n, 77);
        for kind in [FilterKind::Real, FilterKind::QuasiAnalyticPlus] {
            let tree = t.forward(&x, 1, kind).unwrap();
            let rec = t.inverse(&tree, &Selection1D::full_level(1)).unwrap();
            match kind {
                FilterKind::Real => assert!(max_err(&x, &rec) < 1e-12),
                _ => {
                    let h = hilbert(&x).unwrap();
                    for k in 0..n {
                        let expect = 2.0 * Complex64::new(x[k], h[k]);
                        assert!((rec[k] - expect).norm() < 1e-12);
                    }
                }
            }
        }
    }

    /// The scalar-generic code paths work in single precision too.
    #[test]
    fn f32_round_trip_smoke() {
        let n = 64usize;
        let tables = SplineBasisTables::<f32>::build(
            SplineOrder::new(5).unwrap(),
            PeriodLength::new(n).unwrap(),
        )
        .unwrap();
        assert!((tables.beta()[0] - 2f32.sqrt()).abs() < 1e-6);
        let t = Wpt1d::new(Arc::new(ModMatSet::new(Arc::new(tables))));
        let x: Vec<f32> = (0..n).map(|k| (k as f32 * 0.37).sin()).collect();
        let tree = t.forward(&x, 2, FilterKind::Real).unwrap();
        let rec = t.inverse(&tree, &Selection1D::full_level(2)).unwrap();
        for (a, b) in x.iter().zip(&rec) {
            assert!((a - b.re).abs() < 1e-5 && b.im.abs() < 1e-5);
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let t = engine(3, 64);
        let y = t.forward(&vec![0.0; 64], 2, FilterKind::Real).unwrap();
        let c = t.forward(&vec![0.0; 64], 2, FilterKind::Complementary).unwrap();
        let rec = t.frame_reconstruct(&y, &c, 1).unwrap();
        assert!(rec.iter().all(|&v| v.abs() < 1e-14));
    }

    #[test]
    fn rejects_depth_and_length_errors() {
        let t = engine(3, 64);
        assert!(t.forward(&vec![0.0; 32], 2, FilterKind::Real).is_err());
        assert!(t.forward(&vec![0.0; 64], 5, FilterKind::Real).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        /// Random disjoint covers reconstruct the signal.
        #[test]
        fn random_cover_is_pr(seed in 0u64..500) {
            let n = 128usize;
            let depth = 4usize;
            let x = random_signal(n, seed);
            let t = engine(3, n);
            let tree = t.forward(&x, depth, FilterKind::Real).unwrap();
            // Grow a random cover: recursively either keep a node or split it.
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
            let mut nodes = Vec::new();
            let mut stack = vec![(1usize, 0usize), (1usize, 1usize)];
            while let Some((m, band)) = stack.pop() {
                if m == depth || rng.random_bool(0.5) {
                    nodes.push((m, band));
                } else {
                    let (lo, hi) = children_of(band);
                    stack.push((m + 1, lo));
                    stack.push((m + 1, hi));
                }
            }
            let sel = Selection1D::from_nodes(nodes);
            let rec = t.inverse(&tree, &sel).unwrap();
            prop_assert!(max_err(&x, &rec) < 1e-11);
        }
    }
}
