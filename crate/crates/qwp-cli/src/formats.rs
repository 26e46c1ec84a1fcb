//! CSV signal I/O and small argument parsers.

use crate::{BadArgs, CliError};
use num_complex::Complex64;
use qwp::filterbank::FilterKind;
use qwp::wpt1d::Selection1D;
use qwp::wpt2d::{Selection2D, ThresholdRule, TreeSign};
use qwp::QwpError;
use std::fs;
use std::path::Path;

/// Reads a real signal: one sample per line, `#` comments allowed.
pub fn read_signal(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Qwp(QwpError::Io(e)))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        // take the first column to tolerate re/im CSVs
        let field = line.split(',').next().unwrap().trim();
        let v: f64 = field.parse().map_err(|_| {
            CliError::Qwp(QwpError::ImageFormat(format!(
                "{}: bad sample on line {}",
                path.display(),
                lineno + 1
            )))
        })?;
        out.push(v);
    }
    Ok(out)
}

pub fn write_signal(path: &Path, data: &[f64]) -> Result<(), CliError> {
    let mut text = String::with_capacity(data.len() * 24);
    for v in data {
        text.push_str(&format!("{v:.17e}\n"));
    }
    fs::write(path, text).map_err(|e| CliError::Qwp(QwpError::Io(e)))?;
    Ok(())
}

pub fn write_complex_signal(path: &Path, data: &[Complex64]) -> Result<(), CliError> {
    let mut text = String::with_capacity(data.len() * 48);
    text.push_str("# re,im\n");
    for z in data {
        text.push_str(&format!("{:.17e},{:.17e}\n", z.re, z.im));
    }
    fs::write(path, text).map_err(|e| CliError::Qwp(QwpError::Io(e)))?;
    Ok(())
}

pub fn parse_kind(text: &str) -> Result<FilterKind, BadArgs> {
    match text {
        "real" => Ok(FilterKind::Real),
        "complementary" => Ok(FilterKind::Complementary),
        "qplus" => Ok(FilterKind::QuasiAnalyticPlus),
        "qminus" => Ok(FilterKind::QuasiAnalyticMinus),
        other => Err(BadArgs(format!(
            "unknown kind '{other}' (expected real|complementary|qplus|qminus)"
        ))),
    }
}

pub fn parse_tree(text: &str) -> Result<Option<TreeSign>, BadArgs> {
    match text {
        "both" => Ok(None),
        "plus" => Ok(Some(TreeSign::Plus)),
        "minus" => Ok(Some(TreeSign::Minus)),
        other => Err(BadArgs(format!(
            "unknown tree '{other}' (expected both|plus|minus)"
        ))),
    }
}

pub fn parse_cover_1d(text: &str, depth: usize) -> Result<Selection1D, BadArgs> {
    match text {
        "leaves" => Ok(Selection1D::full_level(depth)),
        "wavelet" => Ok(Selection1D::wavelet(depth)),
        other => match other.strip_prefix("level:") {
            Some(k) => {
                let level: usize = k
                    .parse()
                    .map_err(|_| BadArgs(format!("bad cover level '{k}'")))?;
                Ok(Selection1D::full_level(level))
            }
            None => Err(BadArgs(format!(
                "unknown cover '{other}' (expected leaves|wavelet|level:K)"
            ))),
        },
    }
}

pub fn parse_cover_2d(text: &str, depth: usize) -> Result<Selection2D, BadArgs> {
    match text {
        "leaves" => Ok(Selection2D::full_level(depth)),
        "wavelet" => Ok(Selection2D::wavelet(depth)),
        other => match other.strip_prefix("level:") {
            Some(k) => {
                let level: usize = k
                    .parse()
                    .map_err(|_| BadArgs(format!("bad cover level '{k}'")))?;
                Ok(Selection2D::full_level(level))
            }
            None => Err(BadArgs(format!(
                "unknown cover '{other}' (expected leaves|wavelet|level:K)"
            ))),
        },
    }
}

/// Parses `hard:VALUE`, `soft:VALUE`, `hard:3sigma`, `soft:3sigma`.
pub fn parse_threshold(
    text: &str,
    sigma: Option<f64>,
) -> Result<(ThresholdRule, f64), BadArgs> {
    let (rule_text, value_text) = text
        .split_once(':')
        .ok_or_else(|| BadArgs(format!("threshold '{text}' must be rule:value")))?;
    let rule = match rule_text {
        "hard" => ThresholdRule::Hard,
        "soft" => ThresholdRule::Soft,
        other => return Err(BadArgs(format!("unknown threshold rule '{other}'"))),
    };
    let tau = if value_text == "3sigma" {
        let sigma =
            sigma.ok_or_else(|| BadArgs("threshold 3sigma needs --sigma".to_string()))?;
        qwp::denoise::three_sigma_tau(sigma)
    } else {
        let v: f64 = value_text
            .parse()
            .map_err(|_| BadArgs(format!("bad threshold value '{value_text}'")))?;
        v
    };
    if tau < 0.0 {
        return Err(BadArgs("threshold must be non-negative".to_string()));
    }
    Ok((rule, tau))
}

pub fn parse_crop(text: &str) -> Result<(usize, usize), BadArgs> {
    let (r, c) = text
        .split_once('x')
        .ok_or_else(|| BadArgs(format!("crop '{text}' must be ROWSxCOLS")))?;
    let rows = r
        .parse()
        .map_err(|_| BadArgs(format!("bad crop rows '{r}'")))?;
    let cols = c
        .parse()
        .map_err(|_| BadArgs(format!("bad crop cols '{c}'")))?;
    Ok((rows, cols))
}
