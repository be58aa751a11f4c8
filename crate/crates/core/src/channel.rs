//! Body channel and interference sources.
//!
//! The channel is a first-order RC high-pass (capacitive coupling) followed by
//! flat loss. Interference is picked up by the body acting as an antenna and
//! adds at the receiver input together with white noise.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::signal::{dbm_to_peak_amplitude, dbm_to_watts, TimeGrid, Waveform};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    /// High-pass corner of the coupling capacitance; 0 disables it.
    #[serde(default)]
    pub coupling_corner_hz: f64,
    #[serde(default)]
    pub attenuation_db: f64,
}

impl ChannelParams {
    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        if !(self.coupling_corner_hz.is_finite() && self.coupling_corner_hz >= 0.0) {
            return Err(invalid("coupling_corner_hz", "must be non-negative"));
        }
        if self.coupling_corner_hz >= 0.5 * sample_rate {
            return Err(Error::Nyquist {
                freq_hz: self.coupling_corner_hz,
                nyquist_hz: 0.5 * sample_rate,
            });
        }
        if !(self.attenuation_db.is_finite() && self.attenuation_db >= 0.0) {
            return Err(invalid("attenuation_db", "must be non-negative"));
        }
        Ok(())
    }

    /// In-band amplitude gain of the channel.
    pub fn gain(&self) -> f64 {
        10f64.powf(-self.attenuation_db / 20.0)
    }

    pub fn apply(&self, wave: &Waveform) -> Result<Waveform> {
        self.validate(wave.sample_rate())?;
        attenuate(&rc_highpass(wave, self.coupling_corner_hz)?, self.attenuation_db)
    }
}

/// First-order high-pass `s / (s + w_c)`, bilinear transform pre-warped so the
/// -3 dB point falls exactly on `corner_hz`. The filter starts from rest.
pub fn rc_highpass(wave: &Waveform, corner_hz: f64) -> Result<Waveform> {
    let nyquist = 0.5 * wave.sample_rate();
    if !(corner_hz.is_finite() && corner_hz >= 0.0) {
        return Err(invalid("corner_hz", "must be non-negative"));
    }
    if corner_hz >= nyquist {
        return Err(Error::Nyquist {
            freq_hz: corner_hz,
            nyquist_hz: nyquist,
        });
    }
    if corner_hz == 0.0 {
        return Ok(wave.clone());
    }
    let k = (PI * corner_hz / wave.sample_rate()).tan();
    let b0 = 1.0 / (1.0 + k);
    let a1 = (k - 1.0) / (k + 1.0);
    let mut x_prev = 0.0;
    let mut y_prev = 0.0;
    let out = wave
        .samples()
        .iter()
        .map(|&x| {
            let y = b0 * (x - x_prev) - a1 * y_prev;
            x_prev = x;
            y_prev = y;
            y
        })
        .collect();
    Waveform::new(out, wave.sample_rate(), wave.t0())
}

pub fn attenuate(wave: &Waveform, attenuation_db: f64) -> Result<Waveform> {
    if !(attenuation_db.is_finite() && attenuation_db >= 0.0) {
        return Err(invalid("attenuation_db", "must be non-negative"));
    }
    if attenuation_db == 0.0 {
        return Ok(wave.clone());
    }
    Ok(wave.scaled(10f64.powf(-attenuation_db / 20.0)))
}

/// Continuous-wave tone `A sin(2 pi f t + phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CwSpec {
    pub power_dbm: f64,
    pub freq_hz: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

/// Amplitude-modulated carrier `A_c (1 + m cos(2 pi f_m t)) sin(2 pi f_c t + phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmSpec {
    pub power_dbm: f64,
    #[serde(default = "AmSpec::default_carrier")]
    pub carrier_hz: f64,
    #[serde(default = "AmSpec::default_mod")]
    pub mod_hz: f64,
    #[serde(default = "AmSpec::default_index")]
    pub mod_index: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

impl AmSpec {
    fn default_carrier() -> f64 {
        98e6
    }
    fn default_mod() -> f64 {
        1e6
    }
    fn default_index() -> f64 {
        0.5
    }

    pub fn with_power(power_dbm: f64) -> Self {
        Self {
            power_dbm,
            carrier_hz: Self::default_carrier(),
            mod_hz: Self::default_mod(),
            mod_index: Self::default_index(),
            phase_rad: 0.0,
        }
    }
}

/// Equal-power tones spread uniformly over a band, standing in for a crowded
/// FM broadcast spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultitoneSpec {
    pub power_dbm: f64,
    #[serde(default = "MultitoneSpec::default_lo")]
    pub band_lo_hz: f64,
    #[serde(default = "MultitoneSpec::default_hi")]
    pub band_hi_hz: f64,
    #[serde(default = "MultitoneSpec::default_tones")]
    pub n_tones: usize,
    #[serde(default)]
    pub phase_seed: u64,
}

impl MultitoneSpec {
    fn default_lo() -> f64 {
        88e6
    }
    fn default_hi() -> f64 {
        108e6
    }
    fn default_tones() -> usize {
        21
    }

    pub fn with_power(power_dbm: f64, phase_seed: u64) -> Self {
        Self {
            power_dbm,
            band_lo_hz: Self::default_lo(),
            band_hi_hz: Self::default_hi(),
            n_tones: Self::default_tones(),
            phase_seed,
        }
    }

    pub fn tone_frequencies(&self) -> Vec<f64> {
        if self.n_tones == 1 {
            return vec![0.5 * (self.band_lo_hz + self.band_hi_hz)];
        }
        let step = (self.band_hi_hz - self.band_lo_hz) / (self.n_tones - 1) as f64;
        (0..self.n_tones)
            .map(|j| self.band_lo_hz + j as f64 * step)
            .collect()
    }

    pub fn tone_phases(&self) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.phase_seed);
        (0..self.n_tones).map(|_| rng.gen::<f64>() * TAU).collect()
    }
}

/// One interferer at the receiver input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InterferenceSpec {
    Cw(CwSpec),
    Am(AmSpec),
    Multitone(MultitoneSpec),
}

impl InterferenceSpec {
    pub fn power_dbm(&self) -> f64 {
        match self {
            Self::Cw(s) => s.power_dbm,
            Self::Am(s) => s.power_dbm,
            Self::Multitone(s) => s.power_dbm,
        }
    }

    pub fn power_dbm_mut(&mut self) -> &mut f64 {
        match self {
            Self::Cw(s) => &mut s.power_dbm,
            Self::Am(s) => &mut s.power_dbm,
            Self::Multitone(s) => &mut s.power_dbm,
        }
    }

    /// Average power in watts.
    pub fn power_watts(&self) -> f64 {
        dbm_to_watts(self.power_dbm())
    }

    /// Highest frequency component.
    pub fn max_freq_hz(&self) -> f64 {
        match self {
            Self::Cw(s) => s.freq_hz,
            Self::Am(s) => s.carrier_hz + s.mod_hz,
            Self::Multitone(s) => s.band_hi_hz,
        }
    }

    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        let nyquist = 0.5 * sample_rate;
        if !self.power_dbm().is_finite() {
            return Err(invalid("power_dbm", "must be finite"));
        }
        match self {
            Self::Cw(s) => {
                if !(s.freq_hz.is_finite() && s.freq_hz > 0.0) {
                    return Err(invalid("freq_hz", "must be positive"));
                }
                if !s.phase_rad.is_finite() {
                    return Err(invalid("phase_rad", "must be finite"));
                }
            }
            Self::Am(s) => {
                if !(s.carrier_hz.is_finite() && s.carrier_hz > 0.0) {
                    return Err(invalid("carrier_hz", "must be positive"));
                }
                if !(s.mod_hz > 0.0 && s.mod_hz < s.carrier_hz) {
                    return Err(invalid("mod_hz", "must lie in (0, carrier_hz)"));
                }
                if !(0.0..=1.0).contains(&s.mod_index) {
                    return Err(invalid("mod_index", "must lie in [0, 1]"));
                }
                if !s.phase_rad.is_finite() {
                    return Err(invalid("phase_rad", "must be finite"));
                }
            }
            Self::Multitone(s) => {
                if !(s.band_lo_hz > 0.0 && s.band_lo_hz < s.band_hi_hz) {
                    return Err(invalid("band_lo_hz", "need 0 < band_lo_hz < band_hi_hz"));
                }
                if s.n_tones == 0 {
                    return Err(invalid("n_tones", "at least one tone required"));
                }
            }
        }
        if self.max_freq_hz() >= nyquist {
            return Err(Error::Nyquist {
                freq_hz: self.max_freq_hz(),
                nyquist_hz: nyquist,
            });
        }
        Ok(())
    }

    pub fn render(&self, grid: TimeGrid, r_ref_ohm: f64) -> Result<Waveform> {
        match self {
            Self::Cw(s) => cw_interference(s, grid, r_ref_ohm),
            Self::Am(s) => am_interference(s, grid, r_ref_ohm),
            Self::Multitone(s) => multitone_fm_band(s, grid, r_ref_ohm),
        }
    }
}

pub fn cw_interference(spec: &CwSpec, grid: TimeGrid, r_ref_ohm: f64) -> Result<Waveform> {
    InterferenceSpec::Cw(*spec).validate(grid.sample_rate)?;
    let a = dbm_to_peak_amplitude(spec.power_dbm, r_ref_ohm);
    let w = TAU * spec.freq_hz;
    Waveform::from_fn(grid, |t| a * (w * t + spec.phase_rad).sin())
}

pub fn am_interference(spec: &AmSpec, grid: TimeGrid, r_ref_ohm: f64) -> Result<Waveform> {
    InterferenceSpec::Am(*spec).validate(grid.sample_rate)?;
    let m = spec.mod_index;
    // Sidebands carry m^2/2 of the carrier power on top of the carrier itself.
    let carrier_watts = dbm_to_watts(spec.power_dbm) / (1.0 + 0.5 * m * m);
    let a_c = (2.0 * carrier_watts * r_ref_ohm).sqrt();
    let wc = TAU * spec.carrier_hz;
    let wm = TAU * spec.mod_hz;
    Waveform::from_fn(grid, |t| {
        a_c * (1.0 + m * (wm * t).cos()) * (wc * t + spec.phase_rad).sin()
    })
}

pub fn multitone_fm_band(spec: &MultitoneSpec, grid: TimeGrid, r_ref_ohm: f64) -> Result<Waveform> {
    InterferenceSpec::Multitone(*spec).validate(grid.sample_rate)?;
    let per_tone_dbm = spec.power_dbm - 10.0 * (spec.n_tones as f64).log10();
    let a = dbm_to_peak_amplitude(per_tone_dbm, r_ref_ohm);
    let tones: Vec<(f64, f64)> = spec
        .tone_frequencies()
        .into_iter()
        .map(|f| TAU * f)
        .zip(spec.tone_phases())
        .collect();
    Waveform::from_fn(grid, |t| {
        tones.iter().map(|&(w, phi)| a * (w * t + phi).sin()).sum()
    })
}

/// Adds zero-mean white Gaussian noise of standard deviation `sigma`.
pub fn add_awgn(wave: &Waveform, sigma: f64, seed: u64) -> Result<Waveform> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(invalid("sigma", "must be non-negative"));
    }
    if sigma == 0.0 {
        return Ok(wave.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| invalid("sigma", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = wave
        .samples()
        .iter()
        .map(|&v| v + normal.sample(&mut rng))
        .collect();
    Waveform::new(samples, wave.sample_rate(), wave.t0())
}

/// Pointwise sum of waveforms sharing one sampling grid.
pub fn superpose(waves: &[Waveform]) -> Result<Waveform> {
    let (first, rest) = waves
        .split_first()
        .ok_or_else(|| invalid("waves", "nothing to superpose"))?;
    let mut acc = first.samples().to_vec();
    for (k, w) in rest.iter().enumerate() {
        if w.len() != first.len() {
            return Err(Error::Mismatch(format!(
                "waveform {} has {} samples, expected {}",
                k + 1,
                w.len(),
                first.len()
            )));
        }
        if w.sample_rate() != first.sample_rate() || w.t0() != first.t0() {
            return Err(Error::Mismatch(format!(
                "waveform {} is on a different time grid",
                k + 1
            )));
        }
        for (a, b) in acc.iter_mut().zip(w.samples()) {
            *a += b;
        }
    }
    Waveform::new(acc, first.sample_rate(), first.t0())
}
