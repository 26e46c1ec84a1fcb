//! Implementations of the CLI subcommands.

use crate::formats::*;
use crate::{BadArgs, CliError};
use qwp::atlas::{gen_waveform, gen_waveform2d, orientation_angle, WaveformKind};
use qwp::container;
use qwp::denoise::{denoise, DenoiseParams};
use qwp::filterbank::{FilterKind, ModMatSet};
use qwp::hilbert::hilbert;
use qwp::image_io::{self, crop, extend_symmetric, GrayImage, Image2D};
use qwp::metrics::psnr;
use qwp::spline::{PeriodLength, SplineBasisTables, SplineOrder};
use qwp::wpt1d::Wpt1d;
use qwp::wpt2d::{Qwpt2d, TreeSign};
use qwp::QwpError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

fn build_mods(p: usize, n: usize) -> Result<Arc<ModMatSet<f64>>, CliError> {
    let order = SplineOrder::new(p)?;
    let period = PeriodLength::new(n)?;
    let tables = SplineBasisTables::<f64>::build(order, period)?;
    Ok(Arc::new(ModMatSet::new(Arc::new(tables))))
}

pub fn tables(p: usize, n: usize, out: &Path) -> Result<(), CliError> {
    let mods = build_mods(p, n)?;
    let t = mods.tables();
    let mut file = BufWriter::new(fs::File::create(out).map_err(QwpError::Io)?);
    writeln!(file, "n,u,v,beta,alpha_abs").map_err(QwpError::Io)?;
    for bin in 0..n {
        writeln!(
            file,
            "{bin},{:.17e},{:.17e},{:.17e},{:.17e}",
            t.u()[bin],
            t.v()[bin],
            t.beta()[bin],
            t.alpha()[bin].norm()
        )
        .map_err(QwpError::Io)?;
    }
    file.flush().map_err(QwpError::Io)?;
    Ok(())
}

pub fn decompose1d(
    p: usize,
    levels: usize,
    kind_text: &str,
    input: &Path,
    out: &Path,
) -> Result<(), CliError> {
    let kind = parse_kind(kind_text)?;
    let x = read_signal(input)?;
    let mods = build_mods(p, x.len())?;
    let engine = Wpt1d::new(mods);
    let tree = engine.forward(&x, levels, kind)?;
    let mut file = BufWriter::new(fs::File::create(out).map_err(QwpError::Io)?);
    container::write_tree1d(&mut file, &tree)?;
    file.flush().map_err(QwpError::Io)?;
    Ok(())
}

pub fn reconstruct1d(input: &Path, out: &Path, cover: &str, real: bool) -> Result<(), CliError> {
    let mut file = BufReader::new(fs::File::open(input).map_err(QwpError::Io)?);
    let tree = container::read_tree1d(&mut file)?;
    let selection = parse_cover_1d(cover, tree.depth())?;
    let mods = build_mods(tree.order().get(), tree.period().get())?;
    let engine = Wpt1d::new(mods);
    let rec = engine.inverse(&tree, &selection)?;
    if real {
        // Quasi-analytic trees invert to 2(x ± iH(x)); real/complementary
        // trees reproduce the signal directly.
        let scale = match tree.kind() {
            FilterKind::QuasiAnalyticPlus | FilterKind::QuasiAnalyticMinus => 0.5,
            _ => 1.0,
        };
        let signal: Vec<f64> = rec.iter().map(|z| z.re * scale).collect();
        write_signal(out, &signal)
    } else {
        write_complex_signal(out, &rec)
    }
}

pub fn hilbert_cmd(input: &Path, out: &Path) -> Result<(), CliError> {
    let x = read_signal(input)?;
    let h = hilbert(&x)?;
    write_signal(out, &h)
}

pub fn decompose2d(p: usize, levels: usize, input: &Path, out: &Path) -> Result<(), CliError> {
    let img = image_io::read_gray(input)?;
    let (extended, record) = extend_symmetric(&img.data, img.rows, img.cols, levels)?;
    if extended.side() != img.rows || extended.side() != img.cols {
        eprintln!(
            "note: extended {}x{} -> {side}x{side}; reconstruct with --crop {}x{}",
            img.rows,
            img.cols,
            record.rows,
            record.cols,
            side = extended.side(),
        );
    }
    let mods = build_mods(p, extended.side())?;
    let engine = Qwpt2d::new(mods);
    let coeffs = engine.forward(&extended, levels)?;
    let mut file = BufWriter::new(fs::File::create(out).map_err(QwpError::Io)?);
    container::write_coeffs2d(&mut file, &coeffs)?;
    file.flush().map_err(QwpError::Io)?;
    Ok(())
}

fn write_image_auto(path: &Path, data: &[f64], rows: usize, cols: usize) -> Result<(), CliError> {
    let max = data.iter().cloned().fold(0.0f64, f64::max);
    let max_value = if max > 255.5 { 65535 } else { 255 };
    let img = GrayImage {
        rows,
        cols,
        data: data.to_vec(),
        max_value,
    };
    image_io::write_gray(path, &img)?;
    Ok(())
}

pub fn reconstruct2d(
    input: &Path,
    out: &Path,
    tree: &str,
    cover: &str,
    crop_spec: Option<&str>,
    spectrum_out: Option<&Path>,
) -> Result<(), CliError> {
    let mut file = BufReader::new(fs::File::open(input).map_err(QwpError::Io)?);
    let coeffs = container::read_coeffs2d(&mut file)?;
    let selection = parse_cover_2d(cover, coeffs.depth())?;
    let mods = build_mods(coeffs.order().get(), coeffs.period().get())?;
    let engine = Qwpt2d::new(mods);
    let image: Image2D<f64> = match parse_tree(tree)? {
        None => engine.inverse(&coeffs, &selection, &selection)?.image,
        Some(sign) => engine.inverse_single_tree(&coeffs, sign, &selection)?,
    };
    let side = image.side();
    let (rows, cols, data) = match crop_spec {
        Some(spec) => {
            let (rows, cols) = parse_crop(spec)?;
            if rows > side || cols > side {
                return Err(BadArgs(format!("crop {rows}x{cols} exceeds image side {side}")).into());
            }
            let record = qwp::image_io::CropRecord { rows, cols };
            (rows, cols, crop(&image, record))
        }
        None => (side, side, image.data().to_vec()),
    };
    write_image_auto(out, &data, rows, cols)?;

    if let Some(spec_path) = spectrum_out {
        let engine = qwp::fft::FftEngine::<f64>::new();
        let mut spec: Vec<num_complex::Complex64> = image
            .data()
            .iter()
            .map(|&v| num_complex::Complex64::new(v, 0.0))
            .collect();
        engine.forward2d(&mut spec, side, side);
        let logmag: Vec<f64> = spec.iter().map(|z| (1.0 + z.norm()).ln()).collect();
        let bytes = image_io::normalize_to_u8(&logmag);
        let img = GrayImage {
            rows: side,
            cols: side,
            data: bytes,
            max_value: 255,
        };
        image_io::write_gray(spec_path, &img)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn denoise_cmd(
    p: usize,
    levels: usize,
    threshold: &str,
    sigma: Option<f64>,
    add_noise: Option<f64>,
    seed: u64,
    input: &Path,
    out: &Path,
    reference: Option<&Path>,
) -> Result<(), CliError> {
    let (rule, tau) = parse_threshold(threshold, sigma)?;
    // Color inputs are processed channel by channel.
    let img = image_io::read_channels(input)?;
    let peak = img.max_value as f64;
    let mut work = img.channels.clone();
    if let Some(noise_sigma) = add_noise {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gauss = Normal::new(0.0, noise_sigma)
            .map_err(|e| BadArgs(format!("bad noise sigma: {e}")))?;
        for chan in work.iter_mut() {
            for v in chan.iter_mut() {
                *v += gauss.sample(&mut rng);
            }
        }
    }
    let params = DenoiseParams {
        order: p,
        depth: levels,
        rule,
        tau,
    };
    let mut outputs = Vec::with_capacity(work.len());
    let mut per_level_energy = Vec::new();
    for chan in &work {
        let result = denoise(chan, img.rows, img.cols, &params)?;
        if per_level_energy.is_empty() {
            per_level_energy = vec![0.0; result.per_level_energy.len()];
        }
        for (acc, e) in per_level_energy.iter_mut().zip(&result.per_level_energy) {
            *acc += e;
        }
        outputs.push(result.data);
    }
    image_io::write_channels(
        out,
        &image_io::ChannelImage {
            rows: img.rows,
            cols: img.cols,
            max_value: img.max_value,
            channels: outputs.clone(),
        },
    )?;

    let flat = |chans: &[Vec<f64>]| -> Vec<f64> { chans.concat() };
    let vs_input = psnr(&flat(&work), &flat(&outputs), peak)?;
    println!("psnr_vs_input_db,{}", format_db(vs_input));
    if let Some(ref_path) = reference {
        let clean = image_io::read_channels(ref_path)?;
        let before = psnr(&flat(&clean.channels), &flat(&work), peak)?;
        let after = psnr(&flat(&clean.channels), &flat(&outputs), peak)?;
        println!("psnr_noisy_vs_ref_db,{}", format_db(before));
        println!("psnr_out_vs_ref_db,{}", format_db(after));
    }
    for (level, energy) in per_level_energy.iter().enumerate() {
        println!("coeff_energy_level_{},{energy:.6e}", level + 1);
    }
    Ok(())
}

fn format_db(db: f64) -> String {
    if db.is_infinite() {
        "inf".to_string()
    } else {
        format!("{db:.4}")
    }
}

#[derive(Serialize)]
struct AtlasEntry1D {
    p: usize,
    n: usize,
    m: usize,
    l: usize,
    kind: String,
    file: String,
}

#[derive(Serialize)]
struct AtlasEntry2D {
    p: usize,
    n: usize,
    m: usize,
    j: usize,
    l: usize,
    sign: String,
    orientation: [usize; 2],
    orientation_angle_deg: f64,
    direction_class: usize,
    spectral_center: [usize; 2],
    image: String,
    csv: String,
}

pub fn atlas_cmd(p: usize, n: usize, level: usize, kind: &str, out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(QwpError::Io)?;
    let mods = build_mods(p, n)?;
    match kind {
        "psi" | "phi" | "qplus" | "qminus" => {
            let wkind = match kind {
                "psi" => WaveformKind::Psi,
                "phi" => WaveformKind::Phi,
                "qplus" => WaveformKind::QPlus,
                _ => WaveformKind::QMinus,
            };
            let mut index = Vec::new();
            for band in 0..1usize << level {
                let w = gen_waveform(&mods, level, band, wkind)?;
                let name = format!("{kind}_m{level}_l{band}.csv");
                let mut text = String::from("# k,re,im\n");
                for (k, z) in w.samples.iter().enumerate() {
                    text.push_str(&format!("{k},{:.17e},{:.17e}\n", z.re, z.im));
                }
                fs::write(out.join(&name), text).map_err(QwpError::Io)?;
                index.push(AtlasEntry1D {
                    p,
                    n,
                    m: level,
                    l: band,
                    kind: kind.to_string(),
                    file: name,
                });
            }
            let json = serde_json::to_string_pretty(&index).expect("serializable index");
            fs::write(out.join("index.json"), json).map_err(QwpError::Io)?;
        }
        "theta" => {
            let mut index = Vec::new();
            for sign in TreeSign::BOTH {
                let tag = match sign {
                    TreeSign::Plus => "plus",
                    TreeSign::Minus => "minus",
                };
                for j in 0..1usize << level {
                    for l in 0..1usize << level {
                        let w = gen_waveform2d(&mods, level, j, l, sign)?;
                        let base = format!("theta_{tag}_m{level}_j{j}_l{l}");
                        let pgm = format!("{base}.pgm");
                        let csv = format!("{base}.csv");
                        let normalized = image_io::normalize_to_u8(&w.samples);
                        let img = GrayImage {
                            rows: n,
                            cols: n,
                            data: normalized,
                            max_value: 255,
                        };
                        image_io::write_gray(&out.join(&pgm), &img)?;
                        let mut text = String::from("# k,n,value\n");
                        for k in 0..n {
                            for q in 0..n {
                                text.push_str(&format!(
                                    "{k},{q},{:.17e}\n",
                                    w.samples[k * n + q]
                                ));
                            }
                        }
                        fs::write(out.join(&csv), text).map_err(QwpError::Io)?;
                        index.push(AtlasEntry2D {
                            p,
                            n,
                            m: level,
                            j,
                            l,
                            sign: tag.to_string(),
                            orientation: [w.orientation.0, w.orientation.1],
                            orientation_angle_deg: orientation_angle(&w).to_degrees(),
                            direction_class: w.direction_class,
                            spectral_center: [w.orientation.0, w.orientation.1],
                            image: pgm,
                            csv,
                        });
                    }
                }
            }
            let json = serde_json::to_string_pretty(&index).expect("serializable index");
            fs::write(out.join("index.json"), json).map_err(QwpError::Io)?;
        }
        other => {
            return Err(BadArgs(format!(
                "unknown atlas kind '{other}' (expected psi|phi|qplus|qminus|theta)"
            ))
            .into())
        }
    }
    Ok(())
}

pub fn bench(out: Option<&Path>) -> Result<(), CliError> {
    let mut lines = vec!["config,run1_s,run2_s".to_string()];

    // Reference 1D configuration: 8 levels, order 13, 245760 samples.
    {
        let mods = build_mods(13, 245760)?;
        let engine = Wpt1d::new(mods);
        let x: Vec<f64> = (0..245760).map(|k| ((k * 37 + 11) as f64 * 1e-4).sin()).collect();
        let mut times = Vec::new();
        for _ in 0..2 {
            let start = Instant::now();
            let tree = engine.forward(&x, 8, FilterKind::QuasiAnalyticPlus)?;
            times.push(start.elapsed().as_secs_f64());
            drop(tree);
        }
        lines.push(format!(
            "forward1d_n245760_m8_p13,{:.6},{:.6}",
            times[0], times[1]
        ));
    }

    // 2D 512x512, 4 levels, order 9: forward and inverse.
    {
        let mods = build_mods(9, 512)?;
        let engine = Qwpt2d::new(mods);
        let img = Image2D::from_fn(512, |r, c| ((r * 7 + c * 3) % 251) as f64);
        let sel = qwp::wpt2d::Selection2D::full_level(4);
        let mut fwd = Vec::new();
        let mut inv = Vec::new();
        for _ in 0..2 {
            let start = Instant::now();
            let coeffs = engine.forward(&img, 4)?;
            fwd.push(start.elapsed().as_secs_f64());
            let start = Instant::now();
            let rec = engine.inverse(&coeffs, &sel, &sel)?;
            inv.push(start.elapsed().as_secs_f64());
            drop(rec);
        }
        lines.push(format!("forward2d_n512_m4_p9,{:.6},{:.6}", fwd[0], fwd[1]));
        lines.push(format!("inverse2d_n512_m4_p9,{:.6},{:.6}", inv[0], inv[1]));
    }

    let text = lines.join("\n") + "\n";
    match out {
        Some(path) => fs::write(path, text).map_err(QwpError::Io)?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn psnr_cmd(reference: &Path, input: &Path) -> Result<(), CliError> {
    let a = image_io::read_channels(reference)?;
    let b = image_io::read_channels(input)?;
    if (a.rows, a.cols, a.channels.len()) != (b.rows, b.cols, b.channels.len()) {
        return Err(CliError::Qwp(QwpError::LengthMismatch {
            got: b.rows * b.cols * b.channels.len(),
            expected: a.rows * a.cols * a.channels.len(),
        }));
    }
    let db = psnr(&a.channels.concat(), &b.channels.concat(), a.max_value as f64)?;
    println!("psnr_db,{}", format_db(db));
    Ok(())
}
