//! Eye diagrams: the waveform folded modulo one symbol period.
//!
//! Eye height is measured against the decision threshold: twice the smaller
//! of the two rail margins `min(upper) - threshold` and `threshold - max(lower)`.
//! For an eye centred on the threshold this is the usual `min(upper) -
//! max(lower)`; an eye whose rails sit on one side of the threshold reports a
//! negative height even though its rails are still separated.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::signal::Waveform;

const MIN_FOLDS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct EyeDiagram {
    pub fold_period: f64,
    /// Absolute time of the first fold start.
    pub offset: f64,
    /// Instant within the fold at which the height is measured (seconds from fold start).
    pub sampling_instant: f64,
    /// Index within each trace of the sample taken as the sampling instant.
    pub sample_index: usize,
    pub sample_period: f64,
    /// Time of the first sample of each fold relative to the fold start.
    pub first_sample_time: f64,
    /// Folded segments, one per period.
    pub traces: Vec<Vec<f64>>,
    /// Rail of each trace: `true` for the upper rail.
    pub upper: Vec<bool>,
    pub threshold: f64,
    pub eye_height: f64,
    pub eye_width: f64,
}

/// Summary written next to exported eye data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EyeMetrics {
    pub eye_height: f64,
    pub eye_width_s: f64,
    pub sampling_instant_s: f64,
    pub fold_period_s: f64,
    pub threshold: f64,
    pub traces: usize,
}

impl EyeDiagram {
    pub fn metrics(&self) -> EyeMetrics {
        EyeMetrics {
            eye_height: self.eye_height,
            eye_width_s: self.eye_width,
            sampling_instant_s: self.sampling_instant,
            fold_period_s: self.fold_period,
            threshold: self.threshold,
            traces: self.traces.len(),
        }
    }

    /// Time of sample `j` within a fold, relative to the fold start.
    pub fn fold_time(&self, j: usize) -> f64 {
        self.first_sample_time + j as f64 * self.sample_period
    }

    /// Eye height at every in-fold sample position.
    pub fn height_profile(&self) -> Vec<f64> {
        let spf = self.traces.first().map_or(0, Vec::len);
        (0..spf)
            .map(|j| rail_height(self.traces.iter().map(|t| t[j]).zip(self.upper.iter().copied()), self.threshold))
            .collect()
    }
}

fn rail_height(values: impl Iterator<Item = (f64, bool)>, threshold: f64) -> f64 {
    let mut min_upper = f64::INFINITY;
    let mut max_lower = f64::NEG_INFINITY;
    for (v, up) in values {
        if up {
            min_upper = min_upper.min(v);
        } else {
            max_lower = max_lower.max(v);
        }
    }
    let upper_margin = min_upper - threshold;
    let lower_margin = threshold - max_lower;
    match (min_upper.is_finite(), max_lower.is_finite()) {
        (true, true) => 2.0 * upper_margin.min(lower_margin),
        (true, false) => 2.0 * upper_margin,
        (false, true) => 2.0 * lower_margin,
        (false, false) => f64::NAN,
    }
}

/// Folds `wave` with rails assigned by the sign of each trace at the sampling
/// instant (threshold 0).
pub fn eye_diagram(wave: &Waveform, fold_period: f64, offset: f64, sampling_instant: f64) -> Result<EyeDiagram> {
    fold(wave, fold_period, offset, sampling_instant, None, 0.0)
}

/// Folds `wave` with rails assigned from the known symbol of each fold
/// (`labels[m]` for the fold starting at `offset + m * fold_period`).
pub fn eye_diagram_labelled(
    wave: &Waveform,
    fold_period: f64,
    offset: f64,
    sampling_instant: f64,
    labels: &[u8],
    threshold: f64,
) -> Result<EyeDiagram> {
    fold(wave, fold_period, offset, sampling_instant, Some(labels), threshold)
}

fn fold(
    wave: &Waveform,
    fold_period: f64,
    offset: f64,
    sampling_instant: f64,
    labels: Option<&[u8]>,
    threshold: f64,
) -> Result<EyeDiagram> {
    if !(fold_period.is_finite() && fold_period > 0.0) {
        return Err(invalid("fold_period", "must be positive"));
    }
    if !(0.0..=fold_period).contains(&sampling_instant) {
        return Err(invalid("sampling_instant", "must lie within one fold period"));
    }
    let fs = wave.sample_rate();
    let dt = wave.dt();
    let exact = fold_period * fs;
    let spf = exact.round() as usize;
    if spf < 2 || (exact - spf as f64).abs() > 1e-6 * exact {
        return Err(invalid(
            "fold_period",
            format!("must span a whole number of samples, got {exact}"),
        ));
    }
    let s0 = ((offset - wave.t0()) * fs - 1e-9).ceil().max(0.0) as usize;
    let mut n_folds = wave.len().saturating_sub(s0) / spf;
    if let Some(l) = labels {
        n_folds = n_folds.min(l.len());
    }
    if n_folds < MIN_FOLDS {
        return Err(invalid(
            "wave",
            format!("eye needs at least {MIN_FOLDS} fold periods, found {n_folds}"),
        ));
    }
    let first_rel = wave.time(s0) - offset;
    let sample_index = (((sampling_instant - first_rel) / dt + 0.5 + 1e-9).floor().max(0.0) as usize).min(spf - 1);

    let traces: Vec<Vec<f64>> = (0..n_folds)
        .map(|m| wave.samples()[s0 + m * spf..s0 + (m + 1) * spf].to_vec())
        .collect();
    let upper: Vec<bool> = match labels {
        Some(l) => l[..n_folds].iter().map(|&b| b == 1).collect(),
        None => traces.iter().map(|t| t[sample_index] > threshold).collect(),
    };
    let mut eye = EyeDiagram {
        fold_period,
        offset,
        sampling_instant,
        sample_index,
        sample_period: dt,
        first_sample_time: first_rel,
        traces,
        upper,
        threshold,
        eye_height: 0.0,
        eye_width: 0.0,
    };
    let profile = eye.height_profile();
    eye.eye_height = profile[sample_index];
    let mut best = 0usize;
    let mut run = 0usize;
    for h in &profile {
        run = if *h > 0.0 { run + 1 } else { 0 };
        best = best.max(run);
    }
    eye.eye_width = best as f64 * dt;
    Ok(eye)
}

/// Eye opening estimated from decision samples alone, with no reference data:
/// samples are split by the threshold and each rail is represented by its
/// mean less three standard deviations. Pure noise gives a negative value.
pub fn statistical_eye_height(samples: &[f64], threshold: f64) -> f64 {
    let stats = |vals: &mut dyn Iterator<Item = f64>| -> Option<(f64, f64)> {
        let v: Vec<f64> = vals.collect();
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Some((mean, var.sqrt()))
    };
    let upper = stats(&mut samples.iter().copied().filter(|&v| v > threshold));
    let lower = stats(&mut samples.iter().copied().filter(|&v| v <= threshold));
    match (upper, lower) {
        (Some((mu, su)), Some((ml, sl))) => (mu - 3.0 * su) - (ml + 3.0 * sl),
        (Some((m, s)), None) | (None, Some((m, s))) => 2.0 * ((m - threshold).abs() - 3.0 * s),
        (None, None) => f64::NEG_INFINITY,
    }
}
