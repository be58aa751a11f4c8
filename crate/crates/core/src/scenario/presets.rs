//! The five reference interference cases at 100 Mb/s.

use std::f64::consts::PI;

use crate::channel::{AmSpec, ChannelParams, CwSpec, InterferenceSpec};
use crate::signal::{SirConvention, DEFAULT_R_REF_OHM};

use super::config::{
    Calibration, DataSection, LinkSection, NoiseSection, OutputSection, ReceiverSection, Scenario,
};

pub const PRESET_NAMES: [&str; 5] = ["fig8a", "fig8f", "fig8k", "fig8p", "fig8u"];

const BIT_RATE_HZ: f64 = 100e6;
const SNR_DB: f64 = 20.0;
const NOISE_SEED: u64 = 1;
/// Interferer phase relative to the bit clock for the CW cases.
const CW_PHASE_RAD: f64 = PI / 3.0;

fn base(name: &str, calibration: Calibration, interferers: Vec<InterferenceSpec>) -> Scenario {
    Scenario {
        name: name.to_string(),
        link: LinkSection {
            bit_rate_hz: BIT_RATE_HZ,
            samples_per_bit: 100,
            k_int_per_s: None,
            delta_frac: 0.0,
        },
        data: DataSection::default(),
        calibration,
        interferers,
        noise: Some(NoiseSection {
            snr_db: SNR_DB,
            seed: NOISE_SEED,
        }),
        channel: ChannelParams::default(),
        receiver: ReceiverSection::default(),
        outputs: OutputSection::default(),
    }
}

fn sir(sir_db: f64) -> Calibration {
    Calibration::Sir {
        sir_db,
        reference_interferer: 0,
        sir_convention: SirConvention::PeakAmplitude,
        r_ref_ohm: DEFAULT_R_REF_OHM,
    }
}

fn cw(power_dbm: f64, freq_hz: f64) -> InterferenceSpec {
    InterferenceSpec::Cw(CwSpec {
        power_dbm,
        freq_hz,
        phase_rad: CW_PHASE_RAD,
    })
}

/// Built-in scenario by name.
pub fn preset(name: &str) -> Option<Scenario> {
    let s = match name {
        // Noisy NRZ, no interference.
        "fig8a" => base(
            name,
            Calibration::Explicit {
                a_sig_v: 10e-3,
                r_ref_ohm: DEFAULT_R_REF_OHM,
            },
            Vec::new(),
        ),
        // -39 dBm CW on the notch, SIR -11 dB.
        "fig8f" => base(name, sir(-11.0), vec![cw(-39.0, BIT_RATE_HZ)]),
        // -17 dBm CW on the notch, SIR -23 dB.
        "fig8k" => base(name, sir(-23.0), vec![cw(-17.0, BIT_RATE_HZ)]),
        // -17 dBm CW 5% off the notch (95 MHz), SIR -23 dB.
        "fig8p" => base(name, sir(-23.0), vec![cw(-17.0, 95e6)]),
        // -17 dBm AM carrier mid FM band, SIR -23 dB.
        "fig8u" => base(
            name,
            sir(-23.0),
            vec![InterferenceSpec::Am(AmSpec::with_power(-17.0))],
        ),
        _ => return None,
    };
    Some(s)
}
