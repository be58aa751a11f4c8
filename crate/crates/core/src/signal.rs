//! Waveform and bit-sequence primitives, NRZ modulation, PRBS data and
//! power calibration helpers.
//!
//! A [`Waveform`] sample `i` stands for the interval of width `1/sample_rate`
//! centred on `t0 + i/sample_rate`; the continuous signal it represents is the
//! sample-and-hold reconstruction over those cells. The NRZ modulator places
//! its samples at cell centres so that every bit period is tiled by exactly
//! `samples_per_bit` whole cells.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Lower bound on samples per bit for the integrator to resolve a bit window.
pub const MIN_SAMPLES_PER_BIT: usize = 16;

/// Default oversampling: 10 GS/s at 100 Mb/s.
pub const DEFAULT_SAMPLES_PER_BIT: usize = 100;

/// Default reference impedance for dBm conversions.
pub const DEFAULT_R_REF_OHM: f64 = 50.0;

/// Uniform sampling grid: `len` samples at `sample_rate`, first at `t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub sample_rate: f64,
    pub t0: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(sample_rate: f64, t0: f64, len: usize) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(invalid("sample_rate", format!("must be positive, got {sample_rate}")));
        }
        if !t0.is_finite() {
            return Err(invalid("t0", "must be finite"));
        }
        if len == 0 {
            return Err(invalid("len", "waveform needs at least one sample"));
        }
        Ok(Self { sample_rate, t0, len })
    }

    /// Grid starting at `t = 0` covering `duration` seconds.
    pub fn from_duration(sample_rate: f64, duration: f64) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(invalid("duration", format!("must be positive, got {duration}")));
        }
        let len = (duration * sample_rate).round().max(1.0) as usize;
        Self::new(sample_rate, 0.0, len)
    }

    /// Grid whose cells tile `[0, len/sample_rate]` exactly (samples at cell centres).
    pub fn cell_centred(sample_rate: f64, len: usize) -> Result<Self> {
        Self::new(sample_rate, 0.5 / sample_rate, len)
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.sample_rate
    }

    pub fn nyquist(&self) -> f64 {
        0.5 * self.sample_rate
    }
}

/// Uniformly sampled real voltage trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: f64,
    t0: f64,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: f64, t0: f64) -> Result<Self> {
        TimeGrid::new(sample_rate, t0, samples.len())?;
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(invalid("samples", format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate,
            t0,
        })
    }

    /// Samples a function of time on `grid`.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = (0..grid.len).map(|i| f(grid.time(i))).collect();
        Self::new(samples, grid.sample_rate, grid.t0)
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self {
            samples: vec![0.0; grid.len],
            sample_rate: grid.sample_rate,
            t0: grid.t0,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid {
            sample_rate: self.sample_rate,
            t0: self.t0,
            len: self.samples.len(),
        }
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.sample_rate
    }

    /// Left edge of the first sample cell.
    pub fn span_start(&self) -> f64 {
        self.t0 - 0.5 * self.dt()
    }

    /// Right edge of the last sample cell.
    pub fn span_end(&self) -> f64 {
        self.t0 + (self.samples.len() as f64 - 0.5) * self.dt()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt()
    }

    /// Index of the sample cell containing `t`, if any.
    pub fn cell_index(&self, t: f64) -> Option<usize> {
        let x = (t - self.span_start()) * self.sample_rate;
        // Absorb rounding so instants on a cell edge land in the later cell.
        let i = (x + 1e-9).floor();
        if i < 0.0 || i >= self.samples.len() as f64 {
            None
        } else {
            Some(i as usize)
        }
    }

    /// Mean-square value (average power into 1 Ω).
    pub fn mean_square(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>() / self.samples.len() as f64
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|v| v * gain).collect(),
            ..self.clone()
        }
    }

    /// Same samples with the time origin moved to `t0`.
    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub(crate) fn from_parts_unchecked(samples: Vec<f64>, sample_rate: f64, t0: f64) -> Self {
        debug_assert!(!samples.is_empty());
        Self {
            samples,
            sample_rate,
            t0,
        }
    }
}

/// Ordered binary payload.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct BitSequence(Vec<u8>);

impl BitSequence {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(i) = bits.iter().position(|&b| b > 1) {
            return Err(invalid("bits", format!("element {i} is {}, expected 0 or 1", bits[i])));
        }
        Ok(Self(bits))
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        Self(bits.into_iter().map(u8::from).collect())
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.0.iter().copied()
    }

    pub fn inverted(&self) -> Self {
        Self(self.0.iter().map(|b| b ^ 1).collect())
    }

    pub fn slice(&self, start: usize, len: usize) -> Self {
        Self(self.0[start..start + len].to_vec())
    }
}

impl TryFrom<Vec<u8>> for BitSequence {
    type Error = Error;

    fn try_from(bits: Vec<u8>) -> Result<Self> {
        Self::new(bits)
    }
}

impl From<BitSequence> for Vec<u8> {
    fn from(bits: BitSequence) -> Self {
        bits.0
    }
}

impl std::ops::Index<usize> for BitSequence {
    type Output = u8;

    fn index(&self, i: usize) -> &u8 {
        &self.0[i]
    }
}

/// Physical-layer link parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    pub bit_rate_hz: f64,
    pub samples_per_bit: usize,
    /// Transmitted NRZ amplitude (V).
    pub a_sig_v: f64,
    /// Integrator gain (1/s).
    pub k_int_per_s: f64,
    /// Sampling offset before the end of the integration window, as a fraction of a bit.
    pub delta_frac: f64,
}

impl LinkParams {
    /// Link with the default integrator gain `1/T_b` (integrated rail equals
    /// the NRZ rail) and no sampling offset.
    pub fn new(bit_rate_hz: f64, samples_per_bit: usize, a_sig_v: f64) -> Result<Self> {
        let params = Self {
            bit_rate_hz,
            samples_per_bit,
            a_sig_v,
            k_int_per_s: bit_rate_hz,
            delta_frac: 0.0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bit_rate_hz.is_finite() && self.bit_rate_hz > 0.0) {
            return Err(invalid("bit_rate_hz", "must be positive"));
        }
        if self.samples_per_bit < MIN_SAMPLES_PER_BIT {
            return Err(invalid(
                "samples_per_bit",
                format!("must be at least {MIN_SAMPLES_PER_BIT}, got {}", self.samples_per_bit),
            ));
        }
        if !(self.a_sig_v.is_finite() && self.a_sig_v > 0.0) {
            return Err(invalid("a_sig_v", "must be positive"));
        }
        if !(self.k_int_per_s.is_finite() && self.k_int_per_s > 0.0) {
            return Err(invalid("k_int_per_s", "must be positive"));
        }
        if !(0.0..0.25).contains(&self.delta_frac) {
            return Err(invalid("delta_frac", "must lie in [0, 0.25)"));
        }
        Ok(())
    }

    pub fn bit_period(&self) -> f64 {
        1.0 / self.bit_rate_hz
    }

    pub fn sample_rate(&self) -> f64 {
        self.bit_rate_hz * self.samples_per_bit as f64
    }

    /// Grid covering `n_bits` whole bit periods starting at `t = 0`.
    pub fn grid(&self, n_bits: usize) -> Result<TimeGrid> {
        TimeGrid::cell_centred(self.sample_rate(), n_bits * self.samples_per_bit)
    }
}

/// Fibonacci LFSR producing maximal-length PRBS7 (x^7 + x^6 + 1) or
/// PRBS15 (x^15 + x^14 + 1) streams. The output is the register MSB; the
/// feedback `s[n-1] ^ s[n-2]` shifts into bit 0.
#[derive(Debug, Clone)]
pub struct Lfsr {
    state: u32,
    order: u32,
}

impl Lfsr {
    pub fn new(order: u32, seed: u32) -> Result<Self> {
        if order != 7 && order != 15 {
            return Err(invalid("order", format!("supported orders are 7 and 15, got {order}")));
        }
        if seed == 0 {
            return Err(invalid("seed", "zero seed is the LFSR lockup state"));
        }
        if seed >> order != 0 {
            return Err(invalid("seed", format!("{seed:#x} does not fit in {order} bits")));
        }
        Ok(Self { state: seed, order })
    }

    pub fn period(&self) -> usize {
        (1usize << self.order) - 1
    }
}

impl Iterator for Lfsr {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        let n = self.order;
        let out = (self.state >> (n - 1)) & 1;
        let fb = ((self.state >> (n - 1)) ^ (self.state >> (n - 2))) & 1;
        self.state = ((self.state << 1) | fb) & ((1 << n) - 1);
        Some(out as u8)
    }
}

/// First `n` bits of the PRBS of the given order from `seed`.
pub fn prbs(order: u32, seed: u32, n: usize) -> Result<BitSequence> {
    if n == 0 {
        return Err(invalid("n", "at least one bit required"));
    }
    Ok(BitSequence(Lfsr::new(order, seed)?.take(n).collect()))
}

/// Bipolar NRZ: bit 1 holds `+a_sig`, bit 0 holds `-a_sig`, each for one bit period.
pub fn nrz_modulate(bits: &BitSequence, params: &LinkParams) -> Result<Waveform> {
    if bits.is_empty() {
        return Err(invalid("bits", "cannot modulate an empty sequence"));
    }
    params.validate()?;
    let spb = params.samples_per_bit;
    let mut samples = Vec::with_capacity(bits.len() * spb);
    for b in bits.iter() {
        let v = if b == 1 { params.a_sig_v } else { -params.a_sig_v };
        samples.extend(std::iter::repeat_n(v, spb));
    }
    let grid = params.grid(bits.len())?;
    Ok(Waveform::from_parts_unchecked(samples, grid.sample_rate, grid.t0))
}

/// Peak amplitude of a sinusoid that dissipates `power_dbm` on average in `r_ref_ohm`.
pub fn dbm_to_peak_amplitude(power_dbm: f64, r_ref_ohm: f64) -> f64 {
    debug_assert!(r_ref_ohm > 0.0);
    (2.0 * dbm_to_watts(power_dbm) * r_ref_ohm).sqrt()
}

/// Inverse of [`dbm_to_peak_amplitude`].
pub fn peak_amplitude_to_dbm(a_peak: f64, r_ref_ohm: f64) -> f64 {
    watts_to_dbm(a_peak * a_peak / (2.0 * r_ref_ohm))
}

pub fn dbm_to_watts(power_dbm: f64) -> f64 {
    10f64.powf((power_dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// How signal and interference power are compared when a scenario is
/// calibrated by SIR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SirConvention {
    /// NRZ power `A_sig^2` against the interferer's average power.
    AveragePower,
    /// NRZ peak `A_sig` against the interferer's equivalent sinusoid peak
    /// `sqrt(2 P_intf)`.
    #[default]
    PeakAmplitude,
}

/// Signal amplitude giving `sir_db` against a CW interferer of peak
/// `a_intf`, comparing NRZ power `A_sig^2` with CW power `A_intf^2 / 2`.
pub fn sig_amplitude_from_sir(a_intf: f64, sir_db: f64) -> f64 {
    a_intf / std::f64::consts::SQRT_2 * 10f64.powf(sir_db / 20.0)
}

/// Signal amplitude giving `sir_db` against an interferer of average power
/// `p_intf` (V^2, i.e. mean square) under `convention`.
pub fn sig_amplitude_for_interference_power(
    p_intf: f64,
    sir_db: f64,
    convention: SirConvention,
) -> f64 {
    let ratio = 10f64.powf(sir_db / 20.0);
    match convention {
        SirConvention::AveragePower => p_intf.sqrt() * ratio,
        SirConvention::PeakAmplitude => (2.0 * p_intf).sqrt() * ratio,
    }
}

/// Measured SIR in dB from the mean-square powers of two waveforms.
pub fn measured_sir_db(signal: &Waveform, interference: &Waveform) -> f64 {
    10.0 * (signal.mean_square() / interference.mean_square()).log10()
}

/// Per-sample noise standard deviation for an NRZ signal of amplitude `a_sig` at `snr_db`.
pub fn noise_sigma_from_snr(a_sig: f64, snr_db: f64) -> f64 {
    a_sig * 10f64.powf(-snr_db / 20.0)
}
