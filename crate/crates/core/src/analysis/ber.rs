use serde::Serialize;

use crate::error::{Error, Result};
use crate::signal::BitSequence;

/// Error count with a Wilson score 95% interval on the rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerStats {
    pub errors: usize,
    pub bits: usize,
    pub rate: f64,
    pub ci95: (f64, f64),
}

const Z95: f64 = 1.959_963_984_540_054;

pub fn ber(tx: &BitSequence, rx: &BitSequence) -> Result<BerStats> {
    if tx.len() != rx.len() {
        return Err(Error::Mismatch(format!(
            "transmitted {} bits but received {}",
            tx.len(),
            rx.len()
        )));
    }
    let errors = tx.iter().zip(rx.iter()).filter(|(a, b)| a != b).count();
    Ok(BerStats::from_counts(errors, tx.len()))
}

impl BerStats {
    pub fn from_counts(errors: usize, bits: usize) -> Self {
        if bits == 0 {
            return Self {
                errors,
                bits,
                rate: 0.0,
                ci95: (0.0, 1.0),
            };
        }
        let n = bits as f64;
        let p = errors as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Self {
            errors,
            bits,
            rate: p,
            ci95: (
                if errors == 0 { 0.0 } else { (centre - half).max(0.0) },
                if errors == bits { 1.0 } else { (centre + half).min(1.0) },
            ),
        }
    }
}
