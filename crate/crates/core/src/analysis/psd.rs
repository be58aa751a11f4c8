//! Averaged windowed periodogram (Welch) power spectral density.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec;
use crate::signal::Waveform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralWindow {
    Rectangular,
    #[default]
    Hann,
}

impl SpectralWindow {
    fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Self::Rectangular => vec![1.0; len],
            // Periodic Hann, the usual choice for overlapped segments.
            Self::Hann => (0..len)
                .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdPoint {
    pub freq_hz: f64,
    /// One-sided density in V^2/Hz.
    pub density: f64,
}

impl PsdPoint {
    pub fn density_db(&self) -> f64 {
        10.0 * self.density.max(1e-300).log10()
    }
}

/// One-sided density integrated over frequency (V^2).
pub fn integrated_power(points: &[PsdPoint]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let df = points[1].freq_hz - points[0].freq_hz;
    points.iter().map(|p| p.density).sum::<f64>() * df
}

/// Welch estimate from `segment_len`-sample segments overlapping by
/// `overlap_frac`, scaled so the density integrates to the mean-square value.
pub fn psd(
    wave: &Waveform,
    segment_len: usize,
    overlap_frac: f64,
    window: SpectralWindow,
) -> Result<Vec<PsdPoint>> {
    if segment_len < 2 || segment_len > wave.len() {
        return Err(invalid(
            "segment_len",
            format!("must lie in [2, {}], got {segment_len}", wave.len()),
        ));
    }
    if !(0.0..=0.9).contains(&overlap_frac) {
        return Err(invalid("overlap_frac", "must lie in [0, 0.9]"));
    }
    let overlap = (overlap_frac * segment_len as f64).round() as usize;
    let step = (segment_len - overlap).max(1);
    let n_segments = (wave.len() - segment_len) / step + 1;
    let win = window.coefficients(segment_len);
    let win_power: f64 = win.iter().map(|w| w * w).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(segment_len);

    let periodograms = exec::map_range(n_segments, |s| {
        let seg = &wave.samples()[s * step..s * step + segment_len];
        let mut buf: Vec<Complex<f64>> = seg
            .iter()
            .zip(&win)
            .map(|(x, w)| Complex::new(x * w, 0.0))
            .collect();
        fft.process(&mut buf);
        buf.iter().map(|c| c.norm_sqr()).collect::<Vec<f64>>()
    });

    let fs = wave.sample_rate();
    let n_bins = segment_len / 2 + 1;
    let scale = 1.0 / (fs * win_power * n_segments as f64);
    Ok((0..n_bins)
        .map(|k| {
            let sum: f64 = periodograms.iter().map(|p| p[k]).sum();
            let one_sided = if k == 0 || (segment_len.is_multiple_of(2) && k == segment_len / 2) {
                1.0
            } else {
                2.0
            };
            PsdPoint {
                freq_hz: k as f64 * fs / segment_len as f64,
                density: one_sided * sum * scale,
            }
        })
        .collect())
}
