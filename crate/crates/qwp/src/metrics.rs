//! Reconstruction metrics.

use crate::error::{QwpError, Result};

/// PSNR in dB against a peak value: `10·log10(peak² / MSE)`; infinite when
/// the images agree exactly.
pub fn psnr(reference: &[f64], test: &[f64], peak: f64) -> Result<f64> {
    if reference.len() != test.len() {
        return Err(QwpError::LengthMismatch {
            got: test.len(),
            expected: reference.len(),
        });
    }
    let mse = reference
        .iter()
        .zip(test)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / reference.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

pub fn max_abs_err(reference: &[f64], test: &[f64]) -> f64 {
    reference
        .iter()
        .zip(test)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Metrics bundle produced by the processing pipelines.
#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub psnr_db: f64,
    pub max_abs_err: f64,
    /// Coefficient energy per level, both trees combined.
    pub per_level_energy: Vec<f64>,
}

impl MetricsReport {
    pub fn psnr_text(&self) -> String {
        if self.psnr_db.is_infinite() {
            "inf".to_string()
        } else {
            format!("{:.4}", self.psnr_db)
        }
    }
}
