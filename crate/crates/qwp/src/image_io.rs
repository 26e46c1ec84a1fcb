//! Square 2D signals, grayscale image I/O (PGM/PNG) and symmetric boundary
//! extension.

use crate::error::{QwpError, Result};
use crate::{cast, Scalar};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Real `N x N` array; row index `k` is vertical, column index `n`
/// horizontal.
#[derive(Debug, Clone, PartialEq)]
pub struct Image2D<T> {
    side: usize,
    data: Vec<T>,
}

impl<T: Scalar> Image2D<T> {
    pub fn new(side: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != side * side {
            return Err(QwpError::LengthMismatch {
                got: data.len(),
                expected: side * side,
            });
        }
        Ok(Self { side, data })
    }

    pub fn zeros(side: usize) -> Self {
        Self {
            side,
            data: vec![T::zero(); side * side],
        }
    }

    pub fn from_fn(side: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(side * side);
        for k in 0..side {
            for n in 0..side {
                data.push(f(k, n));
            }
        }
        Self { side, data }
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> T {
        self.data[row * self.side + col]
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn energy(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &v| acc + v * v)
    }
}

/// A rectangular grayscale buffer as read from disk, values in the native
/// integer range of the file.
#[derive(Debug, Clone)]
pub struct GrayImage {
    pub rows: usize,
    pub cols: usize,
    /// Sample values; `max_value` is 255 or 65535.
    pub data: Vec<f64>,
    pub max_value: u32,
}

impl GrayImage {
    pub fn from_fn(rows: usize, cols: usize, max_value: u32, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self {
            rows,
            cols,
            data,
            max_value,
        }
    }
}

/// Record needed to undo [`extend_symmetric`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropRecord {
    pub rows: usize,
    pub cols: usize,
}

/// Smallest admissible square side for an `rows x cols` image at transform
/// depth `depth`: at least `max(rows, cols)` and divisible by `2^(depth+2)`.
pub fn extended_side(rows: usize, cols: usize, depth: usize) -> usize {
    let need = rows.max(cols);
    let div = 1usize << (depth + 2);
    need.div_ceil(div) * div
}

/// Even-reflective (whole-sample) index: `..., 2, 1, | 0, 1, ..., L-1, |
/// L-2, L-3, ...` without duplicating the fold samples.
fn reflect(idx: usize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * len - 2;
    let m = idx % period;
    if m < len {
        m
    } else {
        period - m
    }
}

/// Symmetric extension of a rectangular image to the square side required
/// by a depth-`depth` transform; the crop record inverts it exactly.
pub fn extend_symmetric<T: Scalar>(
    data: &[T],
    rows: usize,
    cols: usize,
    depth: usize,
) -> Result<(Image2D<T>, CropRecord)> {
    if rows < 8 || cols < 8 {
        return Err(QwpError::DegenerateImage { rows, cols });
    }
    if data.len() != rows * cols {
        return Err(QwpError::LengthMismatch {
            got: data.len(),
            expected: rows * cols,
        });
    }
    let side = extended_side(rows, cols, depth);
    let img = Image2D::from_fn(side, |r, c| data[reflect(r, rows) * cols + reflect(c, cols)]);
    Ok((img, CropRecord { rows, cols }))
}

/// Crops an extended image back to its original support.
pub fn crop<T: Scalar>(img: &Image2D<T>, record: CropRecord) -> Vec<T> {
    let mut out = Vec::with_capacity(record.rows * record.cols);
    for r in 0..record.rows {
        for c in 0..record.cols {
            out.push(img.at(r, c));
        }
    }
    out
}

/// Reads a grayscale image from PGM (binary P5) or PNG, by extension.
pub fn read_gray(path: &Path) -> Result<GrayImage> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => read_pgm(path),
        _ => read_png(path),
    }
}

/// Writes a grayscale image as PGM or PNG, by extension, clamping samples
/// to the image's integer range.
pub fn write_gray(path: &Path, img: &GrayImage) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => write_pgm(path, img),
        _ => write_png(path, img),
    }
}

fn read_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path)?;
    let mut pos = 0usize;
    let mut fields: Vec<u64> = Vec::new();
    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        return Err(QwpError::ImageFormat("missing P5 magic".into()));
    }
    pos += 2;
    // Header: width, height, maxval separated by whitespace and comments.
    while fields.len() < 3 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace()) {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(QwpError::ImageFormat("truncated PGM header".into()));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).unwrap();
        fields.push(text.parse::<u64>().map_err(|_| {
            QwpError::ImageFormat("bad integer in PGM header".into())
        })?);
    }
    pos += 1; // single whitespace after maxval
    let (cols, rows, maxval) = (fields[0] as usize, fields[1] as usize, fields[2] as u32);
    if maxval == 0 || maxval > 65535 {
        return Err(QwpError::ImageFormat("unsupported PGM maxval".into()));
    }
    let wide = maxval > 255;
    let expected = rows * cols * if wide { 2 } else { 1 };
    if bytes.len() < pos + expected {
        return Err(QwpError::ImageFormat("truncated PGM payload".into()));
    }
    let raster = &bytes[pos..pos + expected];
    let data: Vec<f64> = if wide {
        raster
            .chunks_exact(2)
            .map(|b| u16::from_be_bytes([b[0], b[1]]) as f64)
            .collect()
    } else {
        raster.iter().map(|&b| b as f64).collect()
    };
    Ok(GrayImage {
        rows,
        cols,
        data,
        max_value: maxval,
    })
}

fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "P5")?;
    writeln!(out, "{} {}", img.cols, img.rows)?;
    writeln!(out, "{}", img.max_value)?;
    let max = img.max_value as f64;
    if img.max_value > 255 {
        for &v in &img.data {
            let q = v.round().clamp(0.0, max) as u16;
            out.write_all(&q.to_be_bytes())?;
        }
    } else {
        let buf: Vec<u8> = img
            .data
            .iter()
            .map(|&v| v.round().clamp(0.0, max) as u8)
            .collect();
        out.write_all(&buf)?;
    }
    out.flush()?;
    Ok(())
}

fn read_png(path: &Path) -> Result<GrayImage> {
    let dynamic = ::image::open(path).map_err(|e| QwpError::ImageFormat(e.to_string()))?;
    let (cols, rows) = (dynamic.width() as usize, dynamic.height() as usize);
    match dynamic {
        ::image::DynamicImage::ImageLuma16(im) => Ok(GrayImage {
            rows,
            cols,
            data: im.into_raw().into_iter().map(|v| v as f64).collect(),
            max_value: 65535,
        }),
        other => {
            let im = other.into_luma8();
            Ok(GrayImage {
                rows,
                cols,
                data: im.into_raw().into_iter().map(|v| v as f64).collect(),
                max_value: 255,
            })
        }
    }
}

/// A one- or three-channel image; color data is processed channelwise.
#[derive(Debug, Clone)]
pub struct ChannelImage {
    pub rows: usize,
    pub cols: usize,
    pub max_value: u32,
    pub channels: Vec<Vec<f64>>,
}

/// Reads an image keeping color planes separate: PGM and grayscale PNG
/// yield one channel, RGB(A) PNG three (alpha is dropped).
pub fn read_channels(path: &Path) -> Result<ChannelImage> {
    if path.extension().and_then(|e| e.to_str()) == Some("pgm") {
        let g = read_pgm(path)?;
        return Ok(ChannelImage {
            rows: g.rows,
            cols: g.cols,
            max_value: g.max_value,
            channels: vec![g.data],
        });
    }
    let dynamic = ::image::open(path).map_err(|e| QwpError::ImageFormat(e.to_string()))?;
    let (cols, rows) = (dynamic.width() as usize, dynamic.height() as usize);
    let (raw, planes, max_value): (Vec<f64>, usize, u32) = match dynamic {
        ::image::DynamicImage::ImageLuma8(im) => {
            (im.into_raw().into_iter().map(f64::from).collect(), 1, 255)
        }
        ::image::DynamicImage::ImageLuma16(im) => {
            (im.into_raw().into_iter().map(f64::from).collect(), 1, 65535)
        }
        ::image::DynamicImage::ImageRgb8(im) => {
            (im.into_raw().into_iter().map(f64::from).collect(), 3, 255)
        }
        ::image::DynamicImage::ImageRgba8(im) => (
            im.into_raw().into_iter().map(f64::from).collect(),
            4,
            255,
        ),
        ::image::DynamicImage::ImageRgb16(im) => {
            (im.into_raw().into_iter().map(f64::from).collect(), 3, 65535)
        }
        other => {
            let im = other.into_rgb8();
            (im.into_raw().into_iter().map(f64::from).collect(), 3, 255)
        }
    };
    let keep = planes.min(3);
    let mut channels = vec![Vec::with_capacity(rows * cols); keep];
    for px in raw.chunks_exact(planes) {
        for (c, chan) in channels.iter_mut().enumerate() {
            chan.push(px[c]);
        }
    }
    Ok(ChannelImage {
        rows,
        cols,
        max_value,
        channels,
    })
}

/// Writes a channel image: one channel goes out as grayscale, three as RGB
/// PNG (PGM cannot hold color).
pub fn write_channels(path: &Path, img: &ChannelImage) -> Result<()> {
    match img.channels.len() {
        1 => write_gray(
            path,
            &GrayImage {
                rows: img.rows,
                cols: img.cols,
                data: img.channels[0].clone(),
                max_value: img.max_value,
            },
        ),
        3 => {
            if path.extension().and_then(|e| e.to_str()) == Some("pgm") {
                return Err(QwpError::ImageFormat(
                    "PGM cannot store color; use PNG".into(),
                ));
            }
            let max = img.max_value as f64;
            if img.max_value > 255 {
                let mut raw = Vec::with_capacity(img.rows * img.cols * 3);
                for i in 0..img.rows * img.cols {
                    for chan in &img.channels {
                        raw.push(chan[i].round().clamp(0.0, max) as u16);
                    }
                }
                let im = ::image::ImageBuffer::<::image::Rgb<u16>, _>::from_raw(
                    img.cols as u32,
                    img.rows as u32,
                    raw,
                )
                .expect("buffer sized from dimensions");
                im.save(path)
                    .map_err(|e| QwpError::ImageFormat(e.to_string()))?;
                return Ok(());
            }
            let mut raw = Vec::with_capacity(img.rows * img.cols * 3);
            for i in 0..img.rows * img.cols {
                for chan in &img.channels {
                    raw.push(chan[i].round().clamp(0.0, max) as u8);
                }
            }
            let im = ::image::ImageBuffer::<::image::Rgb<u8>, _>::from_raw(
                img.cols as u32,
                img.rows as u32,
                raw,
            )
            .expect("buffer sized from dimensions");
            im.save(path)
                .map_err(|e| QwpError::ImageFormat(e.to_string()))?;
            Ok(())
        }
        n => Err(QwpError::ImageFormat(format!(
            "unsupported channel count {n}"
        ))),
    }
}

fn write_png(path: &Path, img: &GrayImage) -> Result<()> {
    let max = img.max_value as f64;
    if img.max_value > 255 {
        let buf: Vec<u16> = img
            .data
            .iter()
            .map(|&v| v.round().clamp(0.0, max) as u16)
            .collect();
        let im = ::image::ImageBuffer::<::image::Luma<u16>, _>::from_raw(
            img.cols as u32,
            img.rows as u32,
            buf,
        )
        .expect("buffer sized from dimensions");
        im.save(path).map_err(|e| QwpError::ImageFormat(e.to_string()))?;
    } else {
        let buf: Vec<u8> = img
            .data
            .iter()
            .map(|&v| v.round().clamp(0.0, max) as u8)
            .collect();
        let im = ::image::ImageBuffer::<::image::Luma<u8>, _>::from_raw(
            img.cols as u32,
            img.rows as u32,
            buf,
        )
        .expect("buffer sized from dimensions");
        im.save(path).map_err(|e| QwpError::ImageFormat(e.to_string()))?;
    }
    Ok(())
}

/// Normalizes an arbitrary real array into `0..=255` for visual dumps.
pub fn normalize_to_u8<T: Scalar>(data: &[T]) -> Vec<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in data {
        let v = v.to_f64().unwrap();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = if hi > lo { hi - lo } else { 1.0 };
    data.iter()
        .map(|v| (v.to_f64().unwrap() - lo) / span * 255.0)
        .collect()
}

impl<T: Scalar> Image2D<T> {
    /// Converts file samples into a working image, without rescaling.
    pub fn from_gray_square(img: &GrayImage) -> Result<Self> {
        if img.rows != img.cols {
            return Err(QwpError::NonSquareImage {
                rows: img.rows,
                cols: img.cols,
            });
        }
        Ok(Self::from_fn(img.rows, |r, c| {
            cast::<T>(img.data[r * img.cols + c])
        }))
    }
}
