//! Parameter sweeps written as CSV tables.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{rejection_curve_capped, BerStats};
use crate::channel::InterferenceSpec;
use crate::error::{config, invalid, Result};
use crate::exec::try_map_range;

use super::config::{Calibration, NoiseSection, Scenario};
use super::export::{fmt_sig, write_text};
use super::run::simulate;

/// Writes `freq_hz,rejection_db` for `n_points` frequencies spanning `[f_lo, f_hi]`.
pub fn sweep_rejection(
    t_b: f64,
    f_lo: f64,
    f_hi: f64,
    n_points: usize,
    cap_db: f64,
    out_path: &Path,
) -> Result<PathBuf> {
    let curve = rejection_curve_capped(t_b, f_lo, f_hi, n_points, cap_db)?;
    let mut out = String::from("freq_hz,rejection_db\n");
    for (f, r) in &curve.points {
        let _ = writeln!(out, "{},{}", fmt_sig(*f, 9), fmt_sig(*r, 6));
    }
    write_text(out_path, &out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Calibrated signal-to-interference ratio.
    SirDb,
    /// Frequency of the reference interferer (AM: carrier).
    FreqHz,
    /// Signal-to-noise ratio; adds a noise section when the base has none.
    SnrDb,
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sir_db" => Ok(Self::SirDb),
            "freq_hz" => Ok(Self::FreqHz),
            "snr_db" => Ok(Self::SnrDb),
            other => Err(format!("expected sir_db, freq_hz or snr_db, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub direct: BerStats,
    pub integrated: BerStats,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Noise seed of sweep point `index`; independent of thread scheduling.
pub fn point_seed(base_seed: u64, index: usize) -> u64 {
    splitmix64(base_seed ^ splitmix64(index as u64))
}

/// The base scenario with the swept parameter set to `value`.
pub fn sweep_scenario(base: &Scenario, axis: SweepAxis, value: f64, index: usize) -> Result<Scenario> {
    let mut s = base.clone();
    s.name = format!("{}_{index}", base.name);
    match axis {
        SweepAxis::SirDb => match &mut s.calibration {
            Calibration::Sir { sir_db, .. } => *sir_db = value,
            Calibration::Explicit { .. } => {
                return Err(config("calibration.mode", "sweeping sir_db needs sir calibration"))
            }
        },
        SweepAxis::FreqHz => {
            let idx = match &s.calibration {
                Calibration::Sir { reference_interferer, .. } => *reference_interferer,
                Calibration::Explicit { .. } => 0,
            };
            match s.interferers.get_mut(idx) {
                Some(InterferenceSpec::Cw(cw)) => cw.freq_hz = value,
                Some(InterferenceSpec::Am(am)) => am.carrier_hz = value,
                Some(InterferenceSpec::Multitone(_)) => {
                    return Err(config(format!("interferers[{idx}]"), "cannot sweep the frequency of a multitone"))
                }
                None => return Err(config("interferers", "sweeping freq_hz needs an interferer")),
            }
        }
        SweepAxis::SnrDb => {
            let seed = base.noise.map_or(0, |n| n.seed);
            s.noise = Some(NoiseSection { snr_db: value, seed });
        }
    }
    if let Some(noise) = &mut s.noise {
        noise.seed = point_seed(noise.seed, index);
    }
    Ok(s)
}

/// Runs one simulation per value (in parallel, rows kept in input order).
pub fn sweep_ber_points(base: &Scenario, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(invalid("values", "sweep needs at least one value"));
    }
    try_map_range(values.len(), |i| {
        let sim = simulate(&sweep_scenario(base, axis, values[i], i)?)?;
        Ok(SweepPoint {
            axis_value: values[i],
            direct: sim.ber_direct()?,
            integrated: sim.ber_integrated()?,
        })
    })
}

/// Writes `axis_value,ber_direct,ber_integrated,ci95_lo,ci95_hi`; the interval
/// is that of the integrated receiver. Rates are printed at round-trip
/// precision so they equal a recount of the decisions exactly.
pub fn sweep_ber(base: &Scenario, axis: SweepAxis, values: &[f64], out_path: &Path) -> Result<PathBuf> {
    let points = sweep_ber_points(base, axis, values)?;
    let mut out = String::from("axis_value,ber_direct,ber_integrated,ci95_lo,ci95_hi\n");
    for p in &points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_sig(p.axis_value, 9),
            p.direct.rate,
            p.integrated.rate,
            p.integrated.ci95.0,
            p.integrated.ci95.1
        );
    }
    write_text(out_path, &out)
}
