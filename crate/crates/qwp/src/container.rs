//! Binary coefficient containers.
//!
//! Both formats are little-endian and store complex samples as interleaved
//! `f64` pairs `(re, im)`; read-back reproduces in-memory values bit for
//! bit.
//!
//! `QWP1` (1D trees):
//!
//! ```text
//! magic  [u8; 4] = "QWP1"
//! version u32    = 1
//! p       u32
//! n       u64
//! depth   u32
//! kind    u8     (0 real, 1 complementary, 2 q-plus, 3 q-minus)
//! recomb  f64    divisor applied to Re(sum of tree inverses) on recombination
//! then for m = 1..=depth, for band = 0..2^m: n/2^m complex samples
//! ```
//!
//! `QWP2` (2D dual trees):
//!
//! ```text
//! magic  [u8; 4] = "QWP2"
//! version u32    = 1
//! p       u32
//! n       u64
//! depth   u32
//! recomb  f64    divisor of Re(X+ + X-), 8 under this normalization
//! then for tree in ['+', '-'] (u8 tag):
//!   for m = 1..=depth, for j = 0..2^m, for l = 0..2^m:
//!     (n/2^m)^2 complex samples, row-major
//! ```

use crate::error::{QwpError, Result};
use crate::filterbank::FilterKind;
use crate::spline::{PeriodLength, SplineOrder};
use crate::wpt1d::CoeffTree1D;
use crate::wpt2d::{QwpCoeffs2D, TreeSign};
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex;
use std::io::{Read, Write};

const MAGIC_1D: &[u8; 4] = b"QWP1";
const MAGIC_2D: &[u8; 4] = b"QWP2";
const VERSION: u32 = 1;

/// Divisor recovering a real signal from the quasi-analytic pair, fixed by
/// the perfect-reconstruction normalization of the filter bank.
pub const RECOMBINE_1D: f64 = 4.0;
/// Divisor recovering the image from `Re(X+ + X-)`.
pub const RECOMBINE_2D: f64 = 8.0;

fn kind_tag(kind: FilterKind) -> u8 {
    match kind {
        FilterKind::Real => 0,
        FilterKind::Complementary => 1,
        FilterKind::QuasiAnalyticPlus => 2,
        FilterKind::QuasiAnalyticMinus => 3,
    }
}

fn kind_from_tag(tag: u8) -> Result<FilterKind> {
    Ok(match tag {
        0 => FilterKind::Real,
        1 => FilterKind::Complementary,
        2 => FilterKind::QuasiAnalyticPlus,
        3 => FilterKind::QuasiAnalyticMinus,
        other => return Err(QwpError::Container(format!("unknown kind tag {other}"))),
    })
}

fn write_complex<W: Write>(out: &mut W, data: &[Complex<f64>]) -> Result<()> {
    for z in data {
        out.write_f64::<LittleEndian>(z.re)?;
        out.write_f64::<LittleEndian>(z.im)?;
    }
    Ok(())
}

fn read_complex<R: Read>(input: &mut R, len: usize) -> Result<Vec<Complex<f64>>> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let re = input.read_f64::<LittleEndian>()?;
        let im = input.read_f64::<LittleEndian>()?;
        out.push(Complex::new(re, im));
    }
    Ok(out)
}

/// Serializes a 1D coefficient tree.
pub fn write_tree1d<W: Write>(out: &mut W, tree: &CoeffTree1D<f64>) -> Result<()> {
    out.write_all(MAGIC_1D)?;
    out.write_u32::<LittleEndian>(VERSION)?;
    out.write_u32::<LittleEndian>(tree.order().get() as u32)?;
    out.write_u64::<LittleEndian>(tree.period().get() as u64)?;
    out.write_u32::<LittleEndian>(tree.depth() as u32)?;
    out.write_u8(kind_tag(tree.kind()))?;
    out.write_f64::<LittleEndian>(RECOMBINE_1D)?;
    for level in 1..=tree.depth() {
        for band in 0..1usize << level {
            write_complex(out, tree.subband(level, band)?)?;
        }
    }
    Ok(())
}

/// Deserializes a 1D coefficient tree.
pub fn read_tree1d<R: Read>(input: &mut R) -> Result<CoeffTree1D<f64>> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC_1D {
        return Err(QwpError::Container("bad QWP1 magic".into()));
    }
    let version = input.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(QwpError::Container(format!("unsupported version {version}")));
    }
    let p = input.read_u32::<LittleEndian>()? as usize;
    let n = input.read_u64::<LittleEndian>()? as usize;
    let depth = input.read_u32::<LittleEndian>()? as usize;
    let kind = kind_from_tag(input.read_u8()?)?;
    let _recombine = input.read_f64::<LittleEndian>()?;
    let order = SplineOrder::new(p)?;
    let period = PeriodLength::new(n)?;
    period.check_depth(depth)?;
    let mut levels = Vec::with_capacity(depth);
    for level in 1..=depth {
        let len = n >> level;
        let mut bands = Vec::with_capacity(1 << level);
        for _ in 0..1usize << level {
            bands.push(read_complex(input, len)?);
        }
        levels.push(bands);
    }
    Ok(CoeffTree1D::from_levels(order, period, kind, levels))
}

/// Serializes a dual-tree 2D coefficient set.
pub fn write_coeffs2d<W: Write>(out: &mut W, coeffs: &QwpCoeffs2D<f64>) -> Result<()> {
    out.write_all(MAGIC_2D)?;
    out.write_u32::<LittleEndian>(VERSION)?;
    out.write_u32::<LittleEndian>(coeffs.order().get() as u32)?;
    out.write_u64::<LittleEndian>(coeffs.period().get() as u64)?;
    out.write_u32::<LittleEndian>(coeffs.depth() as u32)?;
    out.write_f64::<LittleEndian>(RECOMBINE_2D)?;
    for (sign, tag) in [(TreeSign::Plus, b'+'), (TreeSign::Minus, b'-')] {
        out.write_u8(tag)?;
        for level in 1..=coeffs.depth() {
            let grid = 1usize << level;
            for j in 0..grid {
                for l in 0..grid {
                    write_complex(out, coeffs.block(sign, level, j, l)?)?;
                }
            }
        }
    }
    Ok(())
}

/// Deserializes a dual-tree 2D coefficient set.
pub fn read_coeffs2d<R: Read>(input: &mut R) -> Result<QwpCoeffs2D<f64>> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC_2D {
        return Err(QwpError::Container("bad QWP2 magic".into()));
    }
    let version = input.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(QwpError::Container(format!("unsupported version {version}")));
    }
    let p = input.read_u32::<LittleEndian>()? as usize;
    let n = input.read_u64::<LittleEndian>()? as usize;
    let depth = input.read_u32::<LittleEndian>()? as usize;
    let _recombine = input.read_f64::<LittleEndian>()?;
    let order = SplineOrder::new(p)?;
    let period = PeriodLength::new(n)?;
    period.check_depth(depth)?;
    let mut coeffs = QwpCoeffs2D::zeros(order, period, depth);
    for (sign, tag) in [(TreeSign::Plus, b'+'), (TreeSign::Minus, b'-')] {
        let got = input.read_u8()?;
        if got != tag {
            return Err(QwpError::Container(format!(
                "expected tree tag {}, got {}",
                tag as char, got as char
            )));
        }
        for level in 1..=depth {
            let grid = 1usize << level;
            let len = (n >> level) * (n >> level);
            for j in 0..grid {
                for l in 0..grid {
                    *coeffs.block_mut(sign, level, j, l)? = read_complex(input, len)?;
                }
            }
        }
    }
    Ok(coeffs)
}
