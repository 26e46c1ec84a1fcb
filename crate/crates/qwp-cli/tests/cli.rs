//! End-to-end tests of the `qwp` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qwp"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write_signal(path: &Path, data: &[f64]) {
    let text: String = data.iter().map(|v| format!("{v:.17e}\n")).collect();
    fs::write(path, text).unwrap();
}

fn read_signal(path: &Path) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split(',').next().unwrap().trim().parse().unwrap())
        .collect()
}

fn write_pgm(path: &Path, rows: usize, cols: usize, f: impl Fn(usize, usize) -> u8) {
    let mut bytes = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    for r in 0..rows {
        for c in 0..cols {
            bytes.push(f(r, c));
        }
    }
    fs::write(path, bytes).unwrap();
}

fn read_pgm(path: &Path) -> (usize, usize, Vec<u8>) {
    let bytes = fs::read(path).unwrap();
    let text = String::from_utf8_lossy(&bytes[..64.min(bytes.len())]).to_string();
    let mut fields = text.split_ascii_whitespace();
    assert_eq!(fields.next(), Some("P5"));
    let cols: usize = fields.next().unwrap().parse().unwrap();
    let rows: usize = fields.next().unwrap().parse().unwrap();
    let maxval: usize = fields.next().unwrap().parse().unwrap();
    assert_eq!(maxval, 255);
    let data = bytes[bytes.len() - rows * cols..].to_vec();
    (rows, cols, data)
}

struct Dir {
    _guard: tempfile::TempDir,
    path: PathBuf,
}

fn dir() -> Dir {
    let guard = tempfile::tempdir().unwrap();
    let path = guard.path().to_path_buf();
    Dir {
        _guard: guard,
        path,
    }
}

#[test]
fn tables_exports_csv() {
    let d = dir();
    let out = d.path.join("tables.csv");
    assert_success(&run(&["tables", "--p", "9", "--n", "64", "--out", out.to_str().unwrap()]));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 65);
    assert_eq!(lines[0], "n,u,v,beta,alpha_abs");
    // u[0] = v[0] = 1
    let first: Vec<&str> = lines[1].split(',').collect();
    assert!((first[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    assert!((first[2].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn decompose_reconstruct_1d_round_trip() {
    let d = dir();
    let n = 128;
    let x: Vec<f64> = (0..n).map(|k| (k as f64 * 0.37).sin() + 0.2).collect();
    let sig = d.path.join("x.csv");
    write_signal(&sig, &x);
    let tree = d.path.join("x.qwp1");
    assert_success(&run(&[
        "decompose1d",
        "--p",
        "9",
        "--levels",
        "3",
        "--kind",
        "qplus",
        "--in",
        sig.to_str().unwrap(),
        "--out",
        tree.to_str().unwrap(),
    ]));
    let rec = d.path.join("rec.csv");
    assert_success(&run(&[
        "reconstruct1d",
        "--in",
        tree.to_str().unwrap(),
        "--out",
        rec.to_str().unwrap(),
        "--cover",
        "wavelet",
        "--real",
    ]));
    let y = read_signal(&rec);
    assert_eq!(y.len(), n);
    for (a, b) in x.iter().zip(&y) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn hilbert_maps_cos_to_sin() {
    let d = dir();
    let n = 64;
    let x: Vec<f64> = (0..n)
        .map(|k| (std::f64::consts::TAU * 5.0 * k as f64 / n as f64).cos())
        .collect();
    let input = d.path.join("x.csv");
    write_signal(&input, &x);
    let out = d.path.join("h.csv");
    assert_success(&run(&[
        "hilbert",
        "--in",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]));
    let h = read_signal(&out);
    for (k, v) in h.iter().enumerate() {
        let expect = (std::f64::consts::TAU * 5.0 * k as f64 / n as f64).sin();
        assert!((v - expect).abs() < 1e-12);
    }
}

#[test]
fn image_round_trip_with_extension_and_crop() {
    let d = dir();
    let (rows, cols) = (40, 56);
    let img = d.path.join("img.pgm");
    write_pgm(&img, rows, cols, |r, c| ((r * 5 + c * 3) % 240) as u8);
    let coeffs = d.path.join("img.qwp2");
    assert_success(&run(&[
        "decompose2d",
        "--p",
        "5",
        "--levels",
        "2",
        "--in",
        img.to_str().unwrap(),
        "--out",
        coeffs.to_str().unwrap(),
    ]));
    let rec = d.path.join("rec.pgm");
    assert_success(&run(&[
        "reconstruct2d",
        "--in",
        coeffs.to_str().unwrap(),
        "--out",
        rec.to_str().unwrap(),
        "--crop",
        &format!("{rows}x{cols}"),
    ]));
    let (rr, rc, data) = read_pgm(&rec);
    assert_eq!((rr, rc), (rows, cols));
    for r in 0..rows {
        for c in 0..cols {
            let expect = ((r * 5 + c * 3) % 240) as u8;
            assert_eq!(data[r * cols + c], expect, "pixel ({r},{c})");
        }
    }

    // PSNR of the round trip reports inf.
    let out = run(&[
        "psnr",
        "--ref",
        img.to_str().unwrap(),
        "--in",
        rec.to_str().unwrap(),
    ]);
    assert_success(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("psnr_db,inf"), "got: {text}");
}

#[test]
fn single_tree_reconstruction_works() {
    let d = dir();
    let img = d.path.join("img.pgm");
    write_pgm(&img, 32, 32, |r, c| ((r * 11 + c * 7) % 251) as u8);
    let coeffs = d.path.join("img.qwp2");
    assert_success(&run(&[
        "decompose2d",
        "--p",
        "3",
        "--levels",
        "2",
        "--in",
        img.to_str().unwrap(),
        "--out",
        coeffs.to_str().unwrap(),
    ]));
    let rec = d.path.join("plus.pgm");
    let spectrum = d.path.join("plus_spec.pgm");
    assert_success(&run(&[
        "reconstruct2d",
        "--in",
        coeffs.to_str().unwrap(),
        "--out",
        rec.to_str().unwrap(),
        "--tree",
        "plus",
        "--spectrum-out",
        spectrum.to_str().unwrap(),
    ]));
    assert!(rec.exists() && spectrum.exists());
}

#[test]
fn denoise_improves_psnr_and_reports() {
    let d = dir();
    let clean = d.path.join("clean.pgm");
    write_pgm(&clean, 64, 64, |r, c| {
        (120.0 + 60.0 * ((r as f64 / 9.0).sin() * (c as f64 / 7.0).cos())) as u8
    });
    let out = d.path.join("den.pgm");
    let result = run(&[
        "denoise",
        "--p",
        "9",
        "--levels",
        "2",
        "--threshold",
        "hard:3sigma",
        "--sigma",
        "20",
        "--add-noise",
        "20",
        "--seed",
        "7",
        "--in",
        clean.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--ref",
        clean.to_str().unwrap(),
    ]);
    assert_success(&result);
    let text = String::from_utf8_lossy(&result.stdout);
    let grab = |key: &str| -> f64 {
        text.lines()
            .find(|l| l.starts_with(key))
            .unwrap_or_else(|| panic!("missing {key} in: {text}"))
            .split(',')
            .nth(1)
            .unwrap()
            .parse()
            .unwrap()
    };
    let before = grab("psnr_noisy_vs_ref_db");
    let after = grab("psnr_out_vs_ref_db");
    assert!(after > before, "no improvement: {before} -> {after}");
}

#[test]
fn atlas_writes_waveforms_and_index() {
    let d = dir();
    let out = d.path.join("atlas");
    assert_success(&run(&[
        "atlas",
        "--p",
        "3",
        "--n",
        "32",
        "--level",
        "1",
        "--kind",
        "theta",
        "--out",
        out.to_str().unwrap(),
    ]));
    let index: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("index.json")).unwrap()).unwrap();
    let entries = index.as_array().unwrap();
    assert_eq!(entries.len(), 8); // 2 signs x 2x2 blocks
    for e in entries {
        assert!(out.join(e["image"].as_str().unwrap()).exists());
        assert!(out.join(e["csv"].as_str().unwrap()).exists());
    }

    let out1d = d.path.join("atlas1d");
    assert_success(&run(&[
        "atlas",
        "--p",
        "3",
        "--n",
        "32",
        "--level",
        "2",
        "--kind",
        "phi",
        "--out",
        out1d.to_str().unwrap(),
    ]));
    assert!(out1d.join("phi_m2_l3.csv").exists());
}

#[test]
fn color_png_denoised_channelwise() {
    let d = dir();
    let clean = d.path.join("clean.png");
    let buf: Vec<u8> = (0..32usize * 32)
        .flat_map(|i| {
            let (r, c) = (i / 32, i % 32);
            [
                ((r * 8) % 256) as u8,
                ((c * 8) % 256) as u8,
                ((r * 4 + c * 4) % 256) as u8,
            ]
        })
        .collect();
    image::ImageBuffer::<image::Rgb<u8>, _>::from_raw(32, 32, buf)
        .unwrap()
        .save(&clean)
        .unwrap();
    let out = d.path.join("den.png");
    let result = run(&[
        "denoise",
        "--p",
        "3",
        "--levels",
        "2",
        "--threshold",
        "hard:0",
        "--in",
        clean.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_success(&result);
    // tau = 0 leaves every channel untouched, so the round trip is exact.
    let psnr_out = run(&[
        "psnr",
        "--ref",
        clean.to_str().unwrap(),
        "--in",
        out.to_str().unwrap(),
    ]);
    assert_success(&psnr_out);
    let text = String::from_utf8_lossy(&psnr_out.stdout);
    assert!(text.contains("psnr_db,inf"), "got: {text}");
    let loaded = image::open(&out).unwrap();
    assert!(matches!(loaded, image::DynamicImage::ImageRgb8(_)));
}

#[test]
fn bench_emits_csv() {
    let d = dir();
    let out = d.path.join("bench.csv");
    assert_success(&run(&["bench", "--out", out.to_str().unwrap()]));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("config,run1_s,run2_s"));
    assert!(text.contains("forward1d_n245760_m8_p13"));
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert!(fields[1].parse::<f64>().unwrap() > 0.0);
        assert!(fields[2].parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn exit_codes_match_contract() {
    let d = dir();
    // 2: bad argument value.
    let sig = d.path.join("x.csv");
    write_signal(&sig, &[0.0; 16]);
    let out = run(&[
        "decompose1d",
        "--p",
        "3",
        "--levels",
        "2",
        "--kind",
        "bogus",
        "--in",
        sig.to_str().unwrap(),
        "--out",
        d.path.join("t.qwp1").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // 3: missing input file.
    let out = run(&[
        "hilbert",
        "--in",
        d.path.join("missing.csv").to_str().unwrap(),
        "--out",
        d.path.join("h.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));

    // 4: numeric precondition (order out of range).
    let out = run(&[
        "decompose1d",
        "--p",
        "1",
        "--levels",
        "2",
        "--kind",
        "real",
        "--in",
        sig.to_str().unwrap(),
        "--out",
        d.path.join("t.qwp1").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));

    // 2 is also clap's usage-error code.
    let out = run(&["tables", "--p", "9"]);
    assert_eq!(out.status.code(), Some(2));
}
