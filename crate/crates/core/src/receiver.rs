//! Integrating dual-data-rate receiver and the direct-sampling baseline.
//!
//! Each DDR path integrates the received voltage over one bit period, the
//! result is sampled at the end of the window (less an optional offset) and
//! the integrator is reset for the following bit period, during which the
//! other path integrates. A sinusoidal interferer whose period divides the bit
//! period integrates to zero over every window regardless of its phase, which
//! places a notch at the bit rate and its harmonics.
//!
//! Integrals are exact integrals of the sample-and-hold reconstruction of the
//! input. With window edges on sample instants this is the trapezoidal rule;
//! with edges on cell boundaries (the NRZ grid) it is the midpoint rule. Both
//! are second order for smooth inputs and exact for NRZ levels.

use serde::{Deserialize, Serialize};

use crate::analysis::eye::statistical_eye_height;
use crate::error::{invalid, Error, Result};
use crate::exec;
use crate::signal::{BitSequence, LinkParams, Waveform, MIN_SAMPLES_PER_BIT};

/// Relative slack (in sample cells) for window edges that should sit on a grid point.
const EDGE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverConfig {
    pub k_int_per_s: f64,
    pub delta_frac: f64,
    #[serde(default)]
    pub threshold: f64,
    /// Clock phase (0 or 180 degrees) of the path that integrates bit 0.
    #[serde(default)]
    pub start_phase_deg: u16,
}

impl ReceiverConfig {
    pub fn for_link(link: &LinkParams) -> Self {
        Self {
            k_int_per_s: link.k_int_per_s,
            delta_frac: link.delta_frac,
            threshold: 0.0,
            start_phase_deg: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_int_per_s.is_finite() && self.k_int_per_s > 0.0) {
            return Err(invalid("k_int_per_s", "must be positive"));
        }
        if !(0.0..0.25).contains(&self.delta_frac) {
            return Err(invalid("delta_frac", "must lie in [0, 0.25)"));
        }
        if !self.threshold.is_finite() {
            return Err(invalid("threshold", "must be finite"));
        }
        if self.start_phase_deg != 0 && self.start_phase_deg != 180 {
            return Err(invalid("start_phase_deg", "must be 0 or 180"));
        }
        Ok(())
    }

    /// DDR path (0 or 1) that integrates bit `k`.
    pub fn path_of(&self, k: usize) -> usize {
        (k + usize::from(self.start_phase_deg == 180)) % 2
    }
}

/// Integrator output over one window.
#[derive(Debug, Clone, PartialEq)]
pub struct Integration {
    /// Running integral at the right edge of every sample cell touching the
    /// window (the last value is taken at the window end).
    pub trace: Waveform,
    pub final_value: f64,
}

/// Output of a demodulator.
#[derive(Debug, Clone, PartialEq)]
pub struct DemodResult {
    pub bits: BitSequence,
    /// Value presented to the decision circuit for each bit.
    pub samples: Vec<f64>,
    /// DDR: the two per-path integrator outputs (zero while a path resets).
    /// Direct: the input as seen by the sampler.
    pub traces: Vec<Waveform>,
    /// Bit-clock index of the first decided bit.
    pub first_bit: usize,
    /// Start of bit-clock window 0 (seconds).
    pub clock_offset: f64,
}

impl DemodResult {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Pointwise sum of the traces; for the DDR receiver this is the
    /// integrated waveform with each bit shown on the path that owns it.
    pub fn combined_trace(&self) -> Waveform {
        let mut acc = self.traces[0].samples().to_vec();
        for t in &self.traces[1..] {
            for (a, b) in acc.iter_mut().zip(t.samples()) {
                *a += b;
            }
        }
        let t = &self.traces[0];
        Waveform::from_parts_unchecked(acc, t.sample_rate(), t.t0())
    }

    /// Decisions made by one DDR path, in time order.
    pub fn path_bits(&self, cfg: &ReceiverConfig, path: usize) -> Vec<u8> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(j, _)| cfg.path_of(self.first_bit + j) == path)
            .map(|(_, b)| b)
            .collect()
    }
}

/// Cell weights of `[a, b]` in units of the sample period.
struct CellSpan {
    first: usize,
    weights: Vec<f64>,
}

fn snap(w: f64) -> f64 {
    if (w - 1.0).abs() < EDGE_EPS {
        1.0
    } else {
        w.clamp(0.0, 1.0)
    }
}

fn cell_span(wave: &Waveform, a: f64, b: f64) -> Result<CellSpan> {
    let fs = wave.sample_rate();
    let n = wave.len();
    let xa = (a - wave.span_start()) * fs;
    let xb = (b - wave.span_start()) * fs;
    if !(xa.is_finite() && xb.is_finite()) || xa < -EDGE_EPS || xb > n as f64 + EDGE_EPS || xb < xa {
        return Err(Error::WindowOutOfRange {
            start: a,
            end: b,
            span_start: wave.span_start(),
            span_end: wave.span_end(),
        });
    }
    let xa = xa.max(0.0);
    let xb = xb.min(n as f64);
    let first = ((xa + EDGE_EPS).floor() as usize).min(n - 1);
    let last = (((xb - EDGE_EPS).ceil() as usize).max(first + 1) - 1).min(n - 1);
    let weights = (first..=last)
        .map(|i| {
            let lo = xa.max(i as f64);
            let hi = xb.min(i as f64 + 1.0);
            snap(hi - lo)
        })
        .collect();
    Ok(CellSpan { first, weights })
}

fn span_integral(wave: &Waveform, span: &CellSpan) -> f64 {
    let s = &wave.samples()[span.first..span.first + span.weights.len()];
    s.iter().zip(&span.weights).map(|(v, w)| v * w).sum::<f64>() * wave.dt()
}

/// `k_int` times the integral of `wave` from `start` to `end`, from a reset state.
pub fn integrate(wave: &Waveform, start: f64, end: f64, k_int: f64) -> Result<f64> {
    let span = cell_span(wave, start, end)?;
    Ok(k_int * span_integral(wave, &span))
}

/// Resettable integrator over `[window_start, window_start + window_len]`.
pub fn integrate_and_dump(
    wave: &Waveform,
    window_start: f64,
    window_len: f64,
    k_int: f64,
) -> Result<Integration> {
    if !(window_len.is_finite() && window_len > 0.0) {
        return Err(invalid("window_len", "must be positive"));
    }
    let span = cell_span(wave, window_start, window_start + window_len)?;
    if span.weights.len() < MIN_SAMPLES_PER_BIT {
        return Err(Error::WindowTooShort {
            found: span.weights.len(),
            required: MIN_SAMPLES_PER_BIT,
        });
    }
    let (trace, final_value) = running_integral(wave, &span, k_int);
    let t0 = wave.time(span.first) + 0.5 * wave.dt();
    Ok(Integration {
        trace: Waveform::new(trace, wave.sample_rate(), t0)?,
        final_value,
    })
}

fn running_integral(wave: &Waveform, span: &CellSpan, k_int: f64) -> (Vec<f64>, f64) {
    let scale = k_int * wave.dt();
    let s = &wave.samples()[span.first..span.first + span.weights.len()];
    let mut acc = 0.0;
    let trace = s
        .iter()
        .zip(&span.weights)
        .map(|(v, w)| {
            acc += v * w * scale;
            acc
        })
        .collect();
    (trace, acc)
}

/// Whole bit-clock windows `[offset + k T_b, offset + (k+1) T_b]`, `k >= 0`,
/// lying inside the waveform span.
fn bit_windows(wave: &Waveform, t_b: f64, offset: f64) -> (usize, usize) {
    let lo = ((wave.span_start() - offset) / t_b - EDGE_EPS).ceil().max(0.0) as usize;
    let hi = ((wave.span_end() - offset) / t_b + EDGE_EPS).floor().max(0.0) as usize;
    (lo, hi.max(lo))
}

struct BitIntegration {
    sample: f64,
    span_first: usize,
    trace: Vec<f64>,
}

/// Integrating DDR receiver with the bit clock aligned to `t = 0`.
pub fn ddr_demodulate(wave: &Waveform, link: &LinkParams, cfg: &ReceiverConfig) -> Result<DemodResult> {
    ddr_demodulate_with_offset(wave, link, cfg, 0.0)
}

/// Integrating DDR receiver whose bit windows start at `clock_offset + k T_b`.
pub fn ddr_demodulate_with_offset(
    wave: &Waveform,
    link: &LinkParams,
    cfg: &ReceiverConfig,
    clock_offset: f64,
) -> Result<DemodResult> {
    let (first_bit, per_bit) = ddr_integrate(wave, link, cfg, clock_offset, true)?;

    let mut paths = [vec![0.0; wave.len()], vec![0.0; wave.len()]];
    let mut samples = Vec::with_capacity(per_bit.len());
    for (j, bit) in per_bit.into_iter().enumerate() {
        let path = &mut paths[cfg.path_of(first_bit + j)];
        for (dst, v) in path[bit.span_first..].iter_mut().zip(&bit.trace) {
            *dst = *v;
        }
        samples.push(bit.sample);
    }
    let t0 = wave.t0() + 0.5 * wave.dt();
    let [p0, p1] = paths;
    let traces = vec![
        Waveform::new(p0, wave.sample_rate(), t0)?,
        Waveform::new(p1, wave.sample_rate(), t0)?,
    ];
    Ok(DemodResult {
        bits: decide(&samples, cfg.threshold),
        samples,
        traces,
        first_bit,
        clock_offset,
    })
}

fn ddr_integrate(
    wave: &Waveform,
    link: &LinkParams,
    cfg: &ReceiverConfig,
    clock_offset: f64,
    with_traces: bool,
) -> Result<(usize, Vec<BitIntegration>)> {
    link.validate()?;
    cfg.validate()?;
    let t_b = link.bit_period();
    let (lo, hi) = bit_windows(wave, t_b, clock_offset);
    if hi == lo {
        return Err(invalid(
            "wave",
            format!("{:e} s span holds no whole bit period of {t_b:e} s", wave.duration()),
        ));
    }
    let delta = cfg.delta_frac * t_b;
    let per_bit = exec::try_map_range(hi - lo, |j| -> Result<BitIntegration> {
        let start = clock_offset + (lo + j) as f64 * t_b;
        let end = start + t_b;
        let span = cell_span(wave, start, end)?;
        let (trace, final_value) = if with_traces {
            running_integral(wave, &span, cfg.k_int_per_s)
        } else {
            (Vec::new(), cfg.k_int_per_s * span_integral(wave, &span))
        };
        let sample = if delta > 0.0 {
            integrate(wave, start, end - delta, cfg.k_int_per_s)?
        } else {
            final_value
        };
        Ok(BitIntegration {
            sample,
            span_first: span.first,
            trace,
        })
    })?;
    Ok((lo, per_bit))
}

fn decide(samples: &[f64], threshold: f64) -> BitSequence {
    BitSequence::from_bools(samples.iter().map(|&v| v > threshold))
}

/// Baseline receiver: one raw sample per bit at `(k + sample_phase) T_b`, decided against 0.
pub fn direct_demodulate(wave: &Waveform, link: &LinkParams, sample_phase: f64) -> Result<DemodResult> {
    direct_demodulate_with_offset(wave, link, sample_phase, 0.0)
}

pub fn direct_demodulate_with_offset(
    wave: &Waveform,
    link: &LinkParams,
    sample_phase: f64,
    clock_offset: f64,
) -> Result<DemodResult> {
    link.validate()?;
    if !(0.0..1.0).contains(&sample_phase) {
        return Err(invalid("sample_phase", "must lie in [0, 1)"));
    }
    let t_b = link.bit_period();
    let (lo, hi) = bit_windows(wave, t_b, clock_offset);
    if hi == lo {
        return Err(invalid("wave", "no whole bit period in the waveform"));
    }
    let samples = (lo..hi)
        .map(|k| {
            let t = clock_offset + (k as f64 + sample_phase) * t_b;
            let i = wave
                .cell_index(t)
                .ok_or_else(|| invalid("sample_phase", format!("instant {t:e} s outside waveform")))?;
            Ok(wave.samples()[i])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DemodResult {
        bits: decide(&samples, 0.0),
        samples,
        traces: vec![wave.clone()],
        first_bit: lo,
        clock_offset,
    })
}

/// Result of the bit-clock search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseEstimate {
    /// Start of bit window 0, in `[0, T_b)`.
    pub offset_s: f64,
    /// Statistical eye height of the integrated samples at that offset.
    pub eye_height: f64,
}

impl PhaseEstimate {
    /// Offset folded into `(-T_b/2, T_b/2]`.
    pub fn signed_offset(&self, t_b: f64) -> f64 {
        if self.offset_s > 0.5 * t_b {
            self.offset_s - t_b
        } else {
            self.offset_s
        }
    }
}

/// Grid search over `n_steps` bit-clock offsets in `[0, T_b)` for the one
/// that maximises the integrated eye opening.
pub fn recover_sampling_phase(
    wave: &Waveform,
    link: &LinkParams,
    cfg: &ReceiverConfig,
    n_steps: usize,
) -> Result<PhaseEstimate> {
    let t_b = link.bit_period();
    if n_steps < 8 {
        return Err(invalid("n_steps", "at least 8 candidate offsets required"));
    }
    if wave.duration() < 32.0 * t_b * (1.0 - EDGE_EPS) {
        return Err(invalid("wave", "phase recovery needs at least 32 bit periods"));
    }
    let (min, max) = wave
        .samples()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if min == max {
        return Err(Error::NoEye("waveform is flat".into()));
    }
    let heights = exec::try_map_range(n_steps, |j| -> Result<f64> {
        let offset = j as f64 * t_b / n_steps as f64;
        let (_, bits) = ddr_integrate(wave, link, cfg, offset, false)?;
        let samples: Vec<f64> = bits.iter().map(|b| b.sample).collect();
        Ok(statistical_eye_height(&samples, cfg.threshold))
    })?;
    let (best, eye_height) = heights
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (j, h)| if h > acc.1 { (j, h) } else { acc });
    Ok(PhaseEstimate {
        offset_s: best as f64 * t_b / n_steps as f64,
        eye_height,
    })
}
