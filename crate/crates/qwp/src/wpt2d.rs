//! Dual-tree 2D quasi-analytic wavelet packet transform.
//!
//! Level 1 is a tensor-product step: rows are split with the quasi-analytic
//! plus (plus tree) or minus (minus tree) matrices, columns always with the
//! plus matrices. Every deeper level applies the real matrices along both
//! axes of each block. Reconstruction rebuilds the two intermediates `X±`
//! and returns `Re(X+ + X-)/8`, which is an exact inverse.
//!
//! Block `(j, l)` at level `m` pairs the column subband `j` (vertical
//! frequency) with the row subband `l` (horizontal frequency); both indices
//! follow the 1D natural frequency order.

use crate::error::{QwpError, Result};
use crate::fft::FftEngine;
use crate::filterbank::{FilterKind, FilterPair, ModMatSet};
use crate::image_io::Image2D;
use crate::spline::{PeriodLength, SplineOrder};
use crate::wpt1d::children_of;
use crate::{cast, Scalar};
use num_complex::Complex;
use rayon::prelude::*;
use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

/// Which of the two coefficient trees a block belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TreeSign {
    Plus,
    Minus,
}

impl TreeSign {
    pub const BOTH: [TreeSign; 2] = [TreeSign::Plus, TreeSign::Minus];

    fn row_kind(self) -> FilterKind {
        match self {
            TreeSign::Plus => FilterKind::QuasiAnalyticPlus,
            TreeSign::Minus => FilterKind::QuasiAnalyticMinus,
        }
    }
}

/// Hard or soft magnitude thresholding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdRule {
    Hard,
    Soft,
}

/// One level of 2D blocks: a `2^m x 2^m` grid of complex arrays.
#[derive(Debug, Clone)]
struct LevelBlocks<T> {
    /// `blocks[j * 2^m + l]`, each of `(N/2^m)^2` row-major samples.
    blocks: Vec<Vec<Complex<T>>>,
}

/// The four child spectra of one block, tagged with its grid position.
type SplitBlocks<T> = (usize, usize, [Vec<Complex<T>>; 4]);

/// Dual-tree coefficient set of a full 2D decomposition.
#[derive(Debug, Clone)]
pub struct QwpCoeffs2D<T> {
    order: SplineOrder,
    period: PeriodLength,
    depth: usize,
    plus: Vec<LevelBlocks<T>>,
    minus: Vec<LevelBlocks<T>>,
}

impl<T: Scalar> QwpCoeffs2D<T> {
    /// Allocates an all-zero coefficient set of the given shape.
    pub fn zeros(order: SplineOrder, period: PeriodLength, depth: usize) -> Self {
        let n = period.get();
        let make_tree = || {
            (1..=depth)
                .map(|m| {
                    let grid = 1usize << m;
                    let len = (n >> m) * (n >> m);
                    LevelBlocks {
                        blocks: vec![vec![Complex::new(T::zero(), T::zero()); len]; grid * grid],
                    }
                })
                .collect::<Vec<_>>()
        };
        Self {
            order,
            period,
            depth,
            plus: make_tree(),
            minus: make_tree(),
        }
    }

    pub fn order(&self) -> SplineOrder {
        self.order
    }

    pub fn period(&self) -> PeriodLength {
        self.period
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn side(&self, level: usize) -> usize {
        self.period.get() >> level
    }

    fn tree(&self, sign: TreeSign) -> &Vec<LevelBlocks<T>> {
        match sign {
            TreeSign::Plus => &self.plus,
            TreeSign::Minus => &self.minus,
        }
    }

    fn tree_mut(&mut self, sign: TreeSign) -> &mut Vec<LevelBlocks<T>> {
        match sign {
            TreeSign::Plus => &mut self.plus,
            TreeSign::Minus => &mut self.minus,
        }
    }

    pub fn block(&self, sign: TreeSign, level: usize, j: usize, l: usize) -> Result<&[Complex<T>]> {
        let grid = 1usize << level;
        self.tree(sign)
            .get(level.wrapping_sub(1))
            .and_then(|lb| lb.blocks.get(j * grid + l))
            .map(|b| b.as_slice())
            .ok_or(QwpError::InvalidSubband {
                level,
                band: j * grid + l,
            })
    }

    pub fn block_mut(
        &mut self,
        sign: TreeSign,
        level: usize,
        j: usize,
        l: usize,
    ) -> Result<&mut Vec<Complex<T>>> {
        let grid = 1usize << level;
        self.tree_mut(sign)
            .get_mut(level.wrapping_sub(1))
            .and_then(|lb| lb.blocks.get_mut(j * grid + l))
            .ok_or(QwpError::InvalidSubband {
                level,
                band: j * grid + l,
            })
    }

    /// Sum of squared magnitudes over one level of one tree.
    pub fn level_energy(&self, sign: TreeSign, level: usize) -> T {
        self.tree(sign)[level - 1]
            .blocks
            .iter()
            .flatten()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    /// Magnitude thresholding applied identically to both trees over the
    /// chosen levels. The deepest selected level keeps its `(0, 0)` low-pass
    /// block untouched so the thresholded reconstruction retains the local
    /// mean content.
    pub fn threshold(&mut self, rule: ThresholdRule, tau: T, levels: &[usize]) -> Result<()> {
        if tau < T::zero() {
            return Err(QwpError::NegativeThreshold);
        }
        let deepest = levels.iter().copied().max().unwrap_or(0);
        for &level in levels {
            if level == 0 || level > self.depth {
                return Err(QwpError::InvalidSubband { level, band: 0 });
            }
            let grid = 1usize << level;
            for sign in TreeSign::BOTH {
                for idx in 0..grid * grid {
                    if level == deepest && idx == 0 {
                        continue; // low-pass block
                    }
                    let block = &mut self.tree_mut(sign)[level - 1].blocks[idx];
                    match rule {
                        ThresholdRule::Hard => {
                            for z in block.iter_mut() {
                                if z.norm() <= tau {
                                    *z = Complex::new(T::zero(), T::zero());
                                }
                            }
                        }
                        ThresholdRule::Soft => {
                            for z in block.iter_mut() {
                                let mag = z.norm();
                                if mag <= tau {
                                    *z = Complex::new(T::zero(), T::zero());
                                } else {
                                    *z = z.scale((mag - tau) / mag);
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Quadtree selection of `(level, j, l)` blocks for one tree.
#[derive(Debug, Clone, Default)]
pub struct Selection2D {
    nodes: BTreeSet<(usize, usize, usize)>,
}

impl Selection2D {
    pub fn from_nodes<I: IntoIterator<Item = (usize, usize, usize)>>(nodes: I) -> Self {
        Self {
            nodes: nodes.into_iter().collect(),
        }
    }

    pub fn full_level(level: usize) -> Self {
        let grid = 1usize << level;
        Self::from_nodes(
            (0..grid).flat_map(move |j| (0..grid).map(move |l| (level, j, l))),
        )
    }

    /// Wavelet-style cover: the three detail blocks of each level along the
    /// low-pass path plus the deepest low-pass block.
    pub fn wavelet(depth: usize) -> Self {
        let mut nodes = vec![(depth, 0usize, 0usize)];
        for m in 1..=depth {
            nodes.extend([(m, 0, 1), (m, 1, 0), (m, 1, 1)]);
        }
        Self::from_nodes(nodes)
    }

    pub fn contains(&self, level: usize, j: usize, l: usize) -> bool {
        self.nodes.contains(&(level, j, l))
    }

    pub fn iter(&self) -> impl Iterator<Item = &(usize, usize, usize)> {
        self.nodes.iter()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Checks the nodes form an exact tiling of the 2D frequency plane.
    pub fn validate(&self, depth: usize) -> Result<()> {
        for &(m, j, l) in &self.nodes {
            let grid = 1usize << m;
            if m == 0 || m > depth || j >= grid || l >= grid {
                return Err(QwpError::InvalidCover(format!(
                    "block (level {m}, {j}, {l}) out of range for depth {depth}"
                )));
            }
        }
        let mut used = 0usize;
        let mut stack = vec![(1usize, 0usize, 0usize), (1, 0, 1), (1, 1, 0), (1, 1, 1)];
        while let Some((m, j, l)) = stack.pop() {
            if self.contains(m, j, l) {
                used += 1;
            } else if m == depth {
                return Err(QwpError::InvalidCover(format!(
                    "leaf block (level {m}, {j}, {l}) not covered"
                )));
            } else {
                let (jlo, jhi) = children_of(j);
                let (llo, lhi) = children_of(l);
                for jj in [jlo, jhi] {
                    for ll in [llo, lhi] {
                        stack.push((m + 1, jj, ll));
                    }
                }
            }
        }
        if used != self.nodes.len() {
            return Err(QwpError::InvalidCover(
                "selection contains overlapping or unreachable blocks".into(),
            ));
        }
        Ok(())
    }
}

/// Result of a 2D reconstruction: the restored image and the two
/// intermediate analytic-like signals.
#[derive(Debug, Clone)]
pub struct Recon2D<T> {
    pub image: Image2D<T>,
    pub x_plus: Vec<Complex<T>>,
    pub x_minus: Vec<Complex<T>>,
}

/// 2D dual-tree transform engine bound to one table set.
pub struct Qwpt2d<T: Scalar> {
    mods: Arc<ModMatSet<T>>,
    fft: FftEngine<T>,
}

/// Splits a `rows x cols` spectrum along the column axis (row transform).
fn fold_cols<T: Scalar>(
    spec: &[Complex<T>],
    rows: usize,
    cols: usize,
    pair: &FilterPair<T>,
    stride: usize,
) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
    let period = pair.lo.len();
    debug_assert_eq!(stride * cols, period);
    let half = cols / 2;
    let scale = cast::<T>(0.5);
    let mut lo = vec![Complex::new(T::zero(), T::zero()); rows * half];
    let mut hi = lo.clone();
    lo.par_chunks_mut(half)
        .zip(hi.par_chunks_mut(half))
        .zip(spec.par_chunks(cols))
        .for_each(|((lo_row, hi_row), src)| {
            for n in 0..half {
                let idx = stride * n;
                let opp = idx + period / 2;
                let (x0, x1) = (src[n], src[n + half]);
                lo_row[n] = (pair.lo[idx].conj() * x0 + pair.lo[opp].conj() * x1).scale(scale);
                hi_row[n] = (pair.hi[idx].conj() * x0 + pair.hi[opp].conj() * x1).scale(scale);
            }
        });
    (lo, hi)
}

/// Splits along the row axis (column transform).
fn fold_rows<T: Scalar>(
    spec: &[Complex<T>],
    rows: usize,
    cols: usize,
    pair: &FilterPair<T>,
    stride: usize,
) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
    let period = pair.lo.len();
    debug_assert_eq!(stride * rows, period);
    let half = rows / 2;
    let scale = cast::<T>(0.5);
    let mut lo = vec![Complex::new(T::zero(), T::zero()); half * cols];
    let mut hi = lo.clone();
    lo.par_chunks_mut(cols)
        .zip(hi.par_chunks_mut(cols))
        .enumerate()
        .for_each(|(k, (lo_row, hi_row))| {
            let idx = stride * k;
            let opp = idx + period / 2;
            let top = &spec[k * cols..(k + 1) * cols];
            let bot = &spec[(k + half) * cols..(k + half + 1) * cols];
            let flo = pair.lo[idx].conj();
            let flo_b = pair.lo[opp].conj();
            let fhi = pair.hi[idx].conj();
            let fhi_b = pair.hi[opp].conj();
            for n in 0..cols {
                lo_row[n] = (flo * top[n] + flo_b * bot[n]).scale(scale);
                hi_row[n] = (fhi * top[n] + fhi_b * bot[n]).scale(scale);
            }
        });
    (lo, hi)
}

/// Inverse of [`fold_cols`].
fn unfold_cols<T: Scalar>(
    lo: &[Complex<T>],
    hi: &[Complex<T>],
    rows: usize,
    half: usize,
    pair: &FilterPair<T>,
    stride: usize,
) -> Vec<Complex<T>> {
    let cols = 2 * half;
    let period = pair.lo.len();
    debug_assert_eq!(stride * cols, period);
    let mut out = vec![Complex::new(T::zero(), T::zero()); rows * cols];
    out.par_chunks_mut(cols)
        .zip(lo.par_chunks(half).zip(hi.par_chunks(half)))
        .for_each(|(dst, (lo_row, hi_row))| {
            for n in 0..cols {
                let idx = stride * n;
                dst[n] = pair.lo[idx] * lo_row[n % half] + pair.hi[idx] * hi_row[n % half];
            }
        });
    out
}

/// Inverse of [`fold_rows`].
fn unfold_rows<T: Scalar>(
    lo: &[Complex<T>],
    hi: &[Complex<T>],
    half: usize,
    cols: usize,
    pair: &FilterPair<T>,
    stride: usize,
) -> Vec<Complex<T>> {
    let rows = 2 * half;
    let period = pair.lo.len();
    debug_assert_eq!(stride * rows, period);
    let mut out = vec![Complex::new(T::zero(), T::zero()); rows * cols];
    out.par_chunks_mut(cols)
        .enumerate()
        .for_each(|(k, dst)| {
            let idx = stride * k;
            let (flo, fhi) = (pair.lo[idx], pair.hi[idx]);
            let src_lo = &lo[(k % half) * cols..(k % half + 1) * cols];
            let src_hi = &hi[(k % half) * cols..(k % half + 1) * cols];
            for n in 0..cols {
                dst[n] = flo * src_lo[n] + fhi * src_hi[n];
            }
        });
    out
}

impl<T: Scalar> Qwpt2d<T> {
    pub fn new(mods: Arc<ModMatSet<T>>) -> Self {
        Self {
            mods,
            fft: FftEngine::new(),
        }
    }

    pub fn mods(&self) -> &Arc<ModMatSet<T>> {
        &self.mods
    }

    /// Dual-tree forward transform of a square image.
    pub fn forward(&self, image: &Image2D<T>, depth: usize) -> Result<QwpCoeffs2D<T>> {
        let period = self.mods.tables().period();
        let n = period.get();
        if image.side() != n {
            return Err(QwpError::LengthMismatch {
                got: image.side(),
                expected: n,
            });
        }
        period.check_depth(depth)?;

        let mut x_hat: Vec<Complex<T>> = image
            .data()
            .iter()
            .map(|&v| Complex::new(v, T::zero()))
            .collect();
        self.fft.forward2d(&mut x_hat, n, n);

        let mut trees = Vec::with_capacity(2);
        for sign in TreeSign::BOTH {
            let row_pair = self.mods.pair(sign.row_kind());
            let col_pair = self.mods.pair(FilterKind::QuasiAnalyticPlus);
            // Level 1: rows with the tree's quasi-analytic bank, columns
            // with the plus bank.
            let (zeta0, zeta1) = fold_cols(&x_hat, n, n, row_pair, 1);
            let mut level_spectra: Vec<Vec<Complex<T>>> = vec![Vec::new(); 4];
            for (l, zeta) in [zeta0, zeta1].into_iter().enumerate() {
                let (b0, b1) = fold_rows(&zeta, n, n / 2, col_pair, 1);
                level_spectra[l] = b0; // j = 0
                level_spectra[2 + l] = b1; // j = 1
            }
            let mut spectra_levels = vec![level_spectra];
            for m in 1..depth {
                let stride = 1usize << m;
                let side = n >> m;
                let grid = 1usize << m;
                let prev = &spectra_levels[m - 1];
                let real = self.mods.pair(FilterKind::Real);
                let next_grid = grid * 2;
                let mut next = vec![Vec::new(); next_grid * next_grid];
                let children: Vec<SplitBlocks<T>> = (0..grid * grid)
                    .into_par_iter()
                    .map(|idx| {
                        let (j, l) = (idx / grid, idx % grid);
                        let spec = &prev[idx];
                        let (row_lo, row_hi) = fold_cols(spec, side, side, real, stride);
                        let (b00, b10) = fold_rows(&row_lo, side, side / 2, real, stride);
                        let (b01, b11) = fold_rows(&row_hi, side, side / 2, real, stride);
                        (j, l, [b00, b01, b10, b11])
                    })
                    .collect();
                for (j, l, [b00, b01, b10, b11]) in children {
                    let (llo, lhi) = children_of(l);
                    let (jlo, jhi) = children_of(j);
                    next[jlo * next_grid + llo] = b00;
                    next[jlo * next_grid + lhi] = b01;
                    next[jhi * next_grid + llo] = b10;
                    next[jhi * next_grid + lhi] = b11;
                }
                spectra_levels.push(next);
            }
            // Materialize time-domain blocks for every level.
            let levels: Vec<LevelBlocks<T>> = spectra_levels
                .into_iter()
                .enumerate()
                .map(|(i, mut level)| {
                    let side = n >> (i + 1);
                    level.par_iter_mut().for_each(|block| {
                        self.fft.inverse2d(block, side, side);
                    });
                    LevelBlocks { blocks: level }
                })
                .collect();
            trees.push(levels);
        }
        let minus = trees.pop().expect("two trees");
        let plus = trees.pop().expect("two trees");
        Ok(QwpCoeffs2D {
            order: self.mods.tables().order(),
            period,
            depth,
            plus,
            minus,
        })
    }

    /// Rebuilds the level-1 spectra of one tree from a disjoint cover.
    fn tree_level1_spectra(
        &self,
        coeffs: &QwpCoeffs2D<T>,
        sign: TreeSign,
        selection: &Selection2D,
    ) -> Result<[Vec<Complex<T>>; 4]> {
        selection.validate(coeffs.depth())?;
        let n = coeffs.period().get();
        let real = self.mods.pair(FilterKind::Real);
        let mut spectra: HashMap<(usize, usize, usize), Vec<Complex<T>>> = selection
            .iter()
            .copied()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(m, j, l)| {
                let side = n >> m;
                let mut spec = coeffs.block(sign, m, j, l)?.to_vec();
                self.fft.forward2d(&mut spec, side, side);
                Ok(((m, j, l), spec))
            })
            .collect::<Result<_>>()?;
        for m in (2..=coeffs.depth()).rev() {
            let grid = 1usize << (m - 1);
            let stride = grid;
            let side = n >> m;
            for j in 0..grid {
                for l in 0..grid {
                    let (jlo, jhi) = children_of(j);
                    let (llo, lhi) = children_of(l);
                    let keys = [
                        (m, jlo, llo),
                        (m, jlo, lhi),
                        (m, jhi, llo),
                        (m, jhi, lhi),
                    ];
                    if !keys.iter().all(|k| spectra.contains_key(k)) {
                        continue;
                    }
                    let b00 = spectra.remove(&keys[0]).unwrap();
                    let b01 = spectra.remove(&keys[1]).unwrap();
                    let b10 = spectra.remove(&keys[2]).unwrap();
                    let b11 = spectra.remove(&keys[3]).unwrap();
                    let row_lo = unfold_rows(&b00, &b10, side, side, real, stride);
                    let row_hi = unfold_rows(&b01, &b11, side, side, real, stride);
                    let merged = unfold_cols(&row_lo, &row_hi, 2 * side, side, real, stride);
                    spectra.insert((m - 1, j, l), merged);
                }
            }
        }
        let mut out: [Vec<Complex<T>>; 4] = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
        for j in 0..2 {
            for l in 0..2 {
                out[j * 2 + l] = spectra
                    .remove(&(1, j, l))
                    .expect("validated cover assembles level 1");
            }
        }
        Ok(out)
    }

    /// Spectrum of the intermediate `X±` for one tree.
    fn intermediate_spectrum(
        &self,
        coeffs: &QwpCoeffs2D<T>,
        sign: TreeSign,
        selection: &Selection2D,
    ) -> Result<Vec<Complex<T>>> {
        let n = coeffs.period().get();
        let [b00, b01, b10, b11] = self.tree_level1_spectra(coeffs, sign, selection)?;
        let col_pair = self.mods.pair(FilterKind::QuasiAnalyticPlus);
        let row_pair = self.mods.pair(sign.row_kind());
        // Columns first (undo the second analysis step), then rows.
        let zeta0 = unfold_rows(&b00, &b10, n / 2, n / 2, col_pair, 1);
        let zeta1 = unfold_rows(&b01, &b11, n / 2, n / 2, col_pair, 1);
        Ok(unfold_cols(&zeta0, &zeta1, n, n / 2, row_pair, 1))
    }

    /// Reconstruction from per-tree covers; exact for untouched coefficients.
    pub fn inverse(
        &self,
        coeffs: &QwpCoeffs2D<T>,
        sel_plus: &Selection2D,
        sel_minus: &Selection2D,
    ) -> Result<Recon2D<T>> {
        let n = coeffs.period().get();
        let plus_hat = self.intermediate_spectrum(coeffs, TreeSign::Plus, sel_plus)?;
        let minus_hat = self.intermediate_spectrum(coeffs, TreeSign::Minus, sel_minus)?;
        let eighth = cast::<T>(0.125);
        let mut sum: Vec<Complex<T>> = plus_hat
            .iter()
            .zip(&minus_hat)
            .map(|(a, b)| (a + b).scale(eighth))
            .collect();
        self.fft.inverse2d(&mut sum, n, n);
        let image = Image2D::new(n, sum.into_iter().map(|z| z.re).collect())?;
        let mut x_plus = plus_hat;
        self.fft.inverse2d(&mut x_plus, n, n);
        let mut x_minus = minus_hat;
        self.fft.inverse2d(&mut x_minus, n, n);
        Ok(Recon2D {
            image,
            x_plus,
            x_minus,
        })
    }

    /// Oriented component carried by a single tree: `Re(X±)/4`.
    pub fn inverse_single_tree(
        &self,
        coeffs: &QwpCoeffs2D<T>,
        sign: TreeSign,
        selection: &Selection2D,
    ) -> Result<Image2D<T>> {
        let n = coeffs.period().get();
        let mut spec = self.intermediate_spectrum(coeffs, sign, selection)?;
        self.fft.inverse2d(&mut spec, n, n);
        let quarter = cast::<T>(0.25);
        Image2D::new(n, spec.into_iter().map(|z| z.re * quarter).collect())
    }
}
