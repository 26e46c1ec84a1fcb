//! Command-line driver for the spline quasi-analytic wavelet packet
//! transforms.
//!
//! Exit codes: 0 success, 2 bad arguments, 3 I/O or file-format error,
//! 4 numeric precondition violated.

mod commands;
mod formats;

use clap::{Parser, Subcommand};
use qwp::QwpError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qwp", version, about = "Spline quasi-analytic wavelet packet transforms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the spline frequency tables (u, v, beta, |alpha|) as CSV.
    Tables {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decompose a 1D signal (CSV, one sample per line) into a QWP1 tree.
    Decompose1d {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        levels: usize,
        /// Filter family: real | complementary | qplus | qminus.
        #[arg(long, default_value = "real")]
        kind: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct a signal from a QWP1 tree.
    Reconstruct1d {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Cover: leaves | level:K | wavelet.
        #[arg(long, default_value = "leaves")]
        cover: String,
        /// Emit the recovered real signal instead of raw (complex) output.
        #[arg(long)]
        real: bool,
    },
    /// Discrete periodic Hilbert transform of a CSV signal.
    Hilbert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decompose a grayscale image into a QWP2 dual tree.
    Decompose2d {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        levels: usize,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct an image from a QWP2 dual tree.
    Reconstruct2d {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Trees to combine: both | plus | minus.
        #[arg(long, default_value = "both")]
        tree: String,
        /// Cover: leaves | level:K | wavelet.
        #[arg(long, default_value = "leaves")]
        cover: String,
        /// Crop ROWSxCOLS applied after reconstruction.
        #[arg(long)]
        crop: Option<String>,
        /// Also write the log-magnitude spectrum of the result.
        #[arg(long)]
        spectrum_out: Option<PathBuf>,
    },
    /// Denoise a grayscale image by coefficient thresholding.
    Denoise {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        levels: usize,
        /// Threshold spec: hard:VALUE | soft:VALUE | hard:3sigma | soft:3sigma.
        #[arg(long)]
        threshold: String,
        /// Noise level; required by the 3sigma threshold and --add-noise.
        #[arg(long)]
        sigma: Option<f64>,
        /// Add synthetic Gaussian noise with this sigma before denoising.
        #[arg(long)]
        add_noise: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Clean reference for PSNR reporting.
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
    },
    /// Write sampled waveforms with metadata to a directory.
    Atlas {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        level: usize,
        /// psi | phi | qplus | qminus | theta (2D directional).
        #[arg(long, default_value = "psi")]
        kind: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Wall-clock timing table for representative transform configurations.
    Bench {
        /// CSV output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// PSNR between two images of the same size.
    Psnr {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
    },
}

/// Argument errors detected past clap parsing.
#[derive(Debug)]
pub struct BadArgs(pub String);

pub enum CliError {
    Args(String),
    Qwp(QwpError),
}

impl From<QwpError> for CliError {
    fn from(e: QwpError) -> Self {
        CliError::Qwp(e)
    }
}

impl From<BadArgs> for CliError {
    fn from(e: BadArgs) -> Self {
        CliError::Args(e.0)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Tables { p, n, out } => commands::tables(p, n, &out),
        Command::Decompose1d {
            p,
            levels,
            kind,
            input,
            out,
        } => commands::decompose1d(p, levels, &kind, &input, &out),
        Command::Reconstruct1d {
            input,
            out,
            cover,
            real,
        } => commands::reconstruct1d(&input, &out, &cover, real),
        Command::Hilbert { input, out } => commands::hilbert_cmd(&input, &out),
        Command::Decompose2d {
            p,
            levels,
            input,
            out,
        } => commands::decompose2d(p, levels, &input, &out),
        Command::Reconstruct2d {
            input,
            out,
            tree,
            cover,
            crop,
            spectrum_out,
        } => commands::reconstruct2d(&input, &out, &tree, &cover, crop.as_deref(), spectrum_out.as_deref()),
        Command::Denoise {
            p,
            levels,
            threshold,
            sigma,
            add_noise,
            seed,
            input,
            out,
            reference,
        } => commands::denoise_cmd(
            p,
            levels,
            &threshold,
            sigma,
            add_noise,
            seed,
            &input,
            &out,
            reference.as_deref(),
        ),
        Command::Atlas {
            p,
            n,
            level,
            kind,
            out,
        } => commands::atlas_cmd(p, n, level, &kind, &out),
        Command::Bench { out } => commands::bench(out.as_deref()),
        Command::Psnr { reference, input } => commands::psnr_cmd(&reference, &input),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Args(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Qwp(e)) => {
            eprintln!("error: {e}");
            let code = match e {
                QwpError::Io(_) | QwpError::ImageFormat(_) | QwpError::Container(_) => 3,
                _ => 4,
            };
            ExitCode::from(code)
        }
    }
}
