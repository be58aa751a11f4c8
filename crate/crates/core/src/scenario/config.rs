//! Scenario files: a JSON description of the transmitter, channel,
//! interferers, noise and receiver. Every physical quantity carries its unit
//! in the key name.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, InterferenceSpec};
use crate::error::{config, Error, Result};
use crate::receiver::ReceiverConfig;
use crate::signal::{
    sig_amplitude_for_interference_power, LinkParams, SirConvention, DEFAULT_R_REF_OHM,
    DEFAULT_SAMPLES_PER_BIT,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub link: LinkSection,
    #[serde(default)]
    pub data: DataSection,
    pub calibration: Calibration,
    #[serde(default)]
    pub interferers: Vec<InterferenceSpec>,
    #[serde(default)]
    pub noise: Option<NoiseSection>,
    #[serde(default)]
    pub channel: ChannelParams,
    #[serde(default)]
    pub receiver: ReceiverSection,
    #[serde(default)]
    pub outputs: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub bit_rate_hz: f64,
    #[serde(default = "default_spb")]
    pub samples_per_bit: usize,
    /// Integrator gain; defaults to the bit rate so the integrated rail equals the NRZ rail.
    #[serde(default)]
    pub k_int_per_s: Option<f64>,
    #[serde(default)]
    pub delta_frac: f64,
}

fn default_spb() -> usize {
    DEFAULT_SAMPLES_PER_BIT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    #[serde(default = "default_order")]
    pub prbs_order: u32,
    #[serde(default = "default_prbs_seed")]
    pub prbs_seed: u32,
    #[serde(default = "default_n_bits")]
    pub n_bits: usize,
}

fn default_order() -> u32 {
    7
}
fn default_prbs_seed() -> u32 {
    0x7f
}
fn default_n_bits() -> usize {
    10_000
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            prbs_order: default_order(),
            prbs_seed: default_prbs_seed(),
            n_bits: default_n_bits(),
        }
    }
}

/// How the received signal amplitude is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Calibration {
    /// Signal amplitude from a target SIR against one of the interferers.
    Sir {
        sir_db: f64,
        #[serde(default)]
        reference_interferer: usize,
        #[serde(default)]
        sir_convention: SirConvention,
        #[serde(default = "default_r_ref")]
        r_ref_ohm: f64,
    },
    /// Received signal amplitude given directly.
    Explicit {
        a_sig_v: f64,
        #[serde(default = "default_r_ref")]
        r_ref_ohm: f64,
    },
}

fn default_r_ref() -> f64 {
    DEFAULT_R_REF_OHM
}

impl Calibration {
    pub fn r_ref_ohm(&self) -> f64 {
        match self {
            Self::Sir { r_ref_ohm, .. } | Self::Explicit { r_ref_ohm, .. } => *r_ref_ohm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub snr_db: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverSection {
    #[serde(default)]
    pub threshold: f64,
    #[serde(default)]
    pub start_phase_deg: u16,
    #[serde(default = "yes")]
    pub recover_phase: bool,
    #[serde(default = "default_phase_steps")]
    pub phase_steps: usize,
    #[serde(default = "default_direct_phase")]
    pub direct_sample_phase: f64,
}

fn yes() -> bool {
    true
}
fn default_phase_steps() -> usize {
    32
}
fn default_direct_phase() -> f64 {
    0.5
}

impl Default for ReceiverSection {
    fn default() -> Self {
        Self {
            threshold: 0.0,
            start_phase_deg: 0,
            recover_phase: true,
            phase_steps: default_phase_steps(),
            direct_sample_phase: default_direct_phase(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "yes")]
    pub decisions: bool,
    #[serde(default = "yes")]
    pub eye_direct: bool,
    #[serde(default = "yes")]
    pub eye_integrated: bool,
    #[serde(default = "yes")]
    pub psd: bool,
    /// Bits of time-domain trace to export; 0 disables the waveform file.
    #[serde(default)]
    pub waveform_bits: usize,
    /// Cap on folded traces written to eye files (metrics always use all of them).
    #[serde(default = "default_max_traces")]
    pub max_eye_traces: usize,
    #[serde(default = "default_psd_segment")]
    pub psd_segment_len: usize,
}

fn default_max_traces() -> usize {
    200
}
fn default_psd_segment() -> usize {
    2000
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            decisions: true,
            eye_direct: true,
            eye_integrated: true,
            psd: true,
            waveform_bits: 0,
            max_eye_traces: default_max_traces(),
            psd_segment_len: default_psd_segment(),
        }
    }
}

/// Quantities derived from a scenario, echoed in run reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derived {
    pub bit_period_s: f64,
    pub sample_rate_hz: f64,
    pub k_int_per_s: f64,
    /// Signal amplitude at the receiver input.
    pub a_sig_rx_v: f64,
    /// Amplitude driven by the transmitter (before channel loss).
    pub a_sig_tx_v: f64,
    pub noise_sigma_v: Option<f64>,
    pub interference_power_v2: f64,
}

fn at(prefix: &str, err: Error) -> Error {
    match err {
        Error::InvalidParameter { name, reason } => config(format!("{prefix}.{name}"), reason),
        Error::Nyquist { freq_hz, nyquist_hz } => config(
            prefix.to_string(),
            format!("frequency {freq_hz:e} Hz is at or above Nyquist {nyquist_hz:e} Hz"),
        ),
        other => other,
    }
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config(if path == "." { "<root>".into() } else { path }, e.into_inner().to_string())
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config("<file>", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn sample_rate(&self) -> f64 {
        self.link.bit_rate_hz * self.link.samples_per_bit as f64
    }

    /// Copy with every optional value made explicit.
    pub fn resolved(&self) -> Self {
        let mut s = self.clone();
        s.link.k_int_per_s = Some(self.link.k_int_per_s.unwrap_or(self.link.bit_rate_hz));
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(config("name", "must be non-empty and use only [A-Za-z0-9_-]"));
        }
        let probe = self.link_params(1.0);
        probe.validate().map_err(|e| at("link", e))?;
        let fs = self.sample_rate();
        if self.data.n_bits < 32 {
            return Err(config("data.n_bits", "at least 32 bits required"));
        }
        crate::signal::Lfsr::new(self.data.prbs_order, self.data.prbs_seed).map_err(|e| match e {
            Error::InvalidParameter { name: "order", reason } => config("data.prbs_order", reason),
            Error::InvalidParameter { reason, .. } => config("data.prbs_seed", reason),
            other => other,
        })?;
        for (i, intf) in self.interferers.iter().enumerate() {
            intf.validate(fs).map_err(|e| at(&format!("interferers[{i}]"), e))?;
        }
        match &self.calibration {
            Calibration::Sir {
                sir_db,
                reference_interferer,
                r_ref_ohm,
                ..
            } => {
                if !sir_db.is_finite() {
                    return Err(config("calibration.sir_db", "must be finite"));
                }
                if *reference_interferer >= self.interferers.len() {
                    return Err(config(
                        "calibration.reference_interferer",
                        format!("no interferer with index {reference_interferer}"),
                    ));
                }
                if r_ref_ohm.is_nan() || *r_ref_ohm <= 0.0 {
                    return Err(config("calibration.r_ref_ohm", "must be positive"));
                }
            }
            Calibration::Explicit { a_sig_v, r_ref_ohm } => {
                if !(a_sig_v.is_finite() && *a_sig_v > 0.0) {
                    return Err(config("calibration.a_sig_v", "must be positive"));
                }
                if r_ref_ohm.is_nan() || *r_ref_ohm <= 0.0 {
                    return Err(config("calibration.r_ref_ohm", "must be positive"));
                }
            }
        }
        if let Some(noise) = &self.noise {
            if !noise.snr_db.is_finite() {
                return Err(config("noise.snr_db", "must be finite"));
            }
        }
        self.channel.validate(fs).map_err(|e| at("channel", e))?;
        self.receiver_config()
            .validate()
            .map_err(|e| at("receiver", e))?;
        let r = &self.receiver;
        if r.phase_steps < 8 {
            return Err(config("receiver.phase_steps", "at least 8 steps required"));
        }
        if !(0.0..1.0).contains(&r.direct_sample_phase) {
            return Err(config("receiver.direct_sample_phase", "must lie in [0, 1)"));
        }
        let o = &self.outputs;
        if o.psd && !(2..=self.data.n_bits * self.link.samples_per_bit).contains(&o.psd_segment_len) {
            return Err(config("outputs.psd_segment_len", "must lie between 2 and the waveform length"));
        }
        Ok(())
    }

    pub fn link_params(&self, a_sig_tx: f64) -> LinkParams {
        LinkParams {
            bit_rate_hz: self.link.bit_rate_hz,
            samples_per_bit: self.link.samples_per_bit,
            a_sig_v: a_sig_tx,
            k_int_per_s: self.link.k_int_per_s.unwrap_or(self.link.bit_rate_hz),
            delta_frac: self.link.delta_frac,
        }
    }

    pub fn receiver_config(&self) -> ReceiverConfig {
        ReceiverConfig {
            k_int_per_s: self.link.k_int_per_s.unwrap_or(self.link.bit_rate_hz),
            delta_frac: self.link.delta_frac,
            threshold: self.receiver.threshold,
            start_phase_deg: self.receiver.start_phase_deg,
        }
    }

    pub fn derived(&self) -> Derived {
        let r_ref = self.calibration.r_ref_ohm();
        let interference_power_v2 = self
            .interferers
            .iter()
            .map(|i| i.power_watts() * r_ref)
            .sum();
        let a_sig_rx_v = match &self.calibration {
            Calibration::Sir {
                sir_db,
                reference_interferer,
                sir_convention,
                ..
            } => {
                let p = self.interferers[*reference_interferer].power_watts() * r_ref;
                sig_amplitude_for_interference_power(p, *sir_db, *sir_convention)
            }
            Calibration::Explicit { a_sig_v, .. } => *a_sig_v,
        };
        Derived {
            bit_period_s: 1.0 / self.link.bit_rate_hz,
            sample_rate_hz: self.sample_rate(),
            k_int_per_s: self.link.k_int_per_s.unwrap_or(self.link.bit_rate_hz),
            a_sig_rx_v,
            a_sig_tx_v: a_sig_rx_v / self.channel.gain(),
            noise_sigma_v: self
                .noise
                .map(|n| crate::signal::noise_sigma_from_snr(a_sig_rx_v, n.snr_db)),
            interference_power_v2,
        }
    }

    /// Same scenario with interference removed and the signal amplitude pinned
    /// to its calibrated value.
    pub fn without_interference(&self) -> Self {
        let mut s = self.clone();
        s.calibration = Calibration::Explicit {
            a_sig_v: self.derived().a_sig_rx_v,
            r_ref_ohm: self.calibration.r_ref_ohm(),
        };
        s.interferers.clear();
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "t",
        "link": {"bit_rate_hz": 1e8},
        "calibration": {"mode": "explicit", "a_sig_v": 0.01}
    }"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let s = Scenario::from_json_str(MINIMAL).unwrap();
        assert_eq!(s.link.samples_per_bit, 100);
        assert_eq!(s.data.n_bits, 10_000);
        assert!(s.receiver.recover_phase);
        let r = s.resolved();
        assert_eq!(r.link.k_int_per_s, Some(1e8));
        let d = s.derived();
        assert_eq!(d.a_sig_rx_v, 0.01);
        assert_eq!(d.noise_sigma_v, None);
    }

    fn key_of(text: &str) -> String {
        match Scenario::from_json_str(text) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(key_of(&MINIMAL.replace("1e8}", "1e8, \"samples_per_bit\": 8}")), "link.samples_per_bit");
        assert_eq!(key_of(&MINIMAL.replace("1e8}", "1e8, \"bogus\": 1}")), "link.bogus");
        assert_eq!(key_of(&MINIMAL.replace("0.01", "-1")), "calibration.a_sig_v");
        let nyq = MINIMAL.replace(
            "\"calibration\"",
            "\"interferers\": [{\"kind\": \"cw\", \"power_dbm\": 0, \"freq_hz\": 6e9}], \"calibration\"",
        );
        assert_eq!(key_of(&nyq), "interferers[0]");
        let sir = MINIMAL.replace(
            "{\"mode\": \"explicit\", \"a_sig_v\": 0.01}",
            "{\"mode\": \"sir\", \"sir_db\": -10}",
        );
        assert_eq!(key_of(&sir), "calibration.reference_interferer");
    }

    #[test]
    fn sir_calibration_conventions() {
        let base = MINIMAL
            .replace("{\"mode\": \"explicit\", \"a_sig_v\": 0.01}", "{\"mode\": \"sir\", \"sir_db\": -23, \"sir_convention\": \"CONV\"}")
            .replace(
                "\"calibration\"",
                "\"interferers\": [{\"kind\": \"cw\", \"power_dbm\": -17, \"freq_hz\": 1e8}], \"calibration\"",
            );
        let avg = Scenario::from_json_str(&base.replace("CONV", "average_power")).unwrap();
        let a = avg.derived().a_sig_rx_v;
        assert!((a - 2.2367e-3).abs() < 1e-6, "{a}");
        let peak = Scenario::from_json_str(&base.replace("CONV", "peak_amplitude")).unwrap();
        assert!((peak.derived().a_sig_rx_v / a - std::f64::consts::SQRT_2).abs() < 1e-12);
    }
}
