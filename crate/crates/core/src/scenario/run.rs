//! Transmitter -> channel -> interference + noise -> both receivers.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::eye::{eye_diagram_labelled, EyeDiagram};
use crate::analysis::psd::{psd, SpectralWindow};
use crate::analysis::{ber, BerStats};
use crate::channel::{add_awgn, superpose};
use crate::error::Result;
use crate::receiver::{
    ddr_demodulate_with_offset, direct_demodulate_with_offset, recover_sampling_phase, DemodResult,
    PhaseEstimate, ReceiverConfig,
};
use crate::signal::{nrz_modulate, prbs, BitSequence, LinkParams, Waveform};

use super::config::{Derived, Scenario};
use super::export::{fmt_sig, write_eye, write_psd, write_text};

/// Everything produced by one pass through the link.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub scenario: Scenario,
    pub derived: Derived,
    pub link: LinkParams,
    pub receiver: ReceiverConfig,
    pub tx_bits: BitSequence,
    /// Receiver input: channel output plus interference and noise.
    pub rx: Waveform,
    pub phase: Option<PhaseEstimate>,
    /// Start of bit window 0 used by both receivers.
    pub clock_offset: f64,
    pub direct: DemodResult,
    pub integrated: DemodResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Direct,
    Integrated,
}

impl std::str::FromStr for Which {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "direct" => Ok(Self::Direct),
            "integrated" => Ok(Self::Integrated),
            other => Err(format!("expected `direct` or `integrated`, got `{other}`")),
        }
    }
}

pub fn simulate(scenario: &Scenario) -> Result<Simulation> {
    scenario.validate()?;
    let scenario = scenario.resolved();
    let derived = scenario.derived();
    let link = scenario.link_params(derived.a_sig_tx_v);
    let receiver = scenario.receiver_config();

    let tx_bits = prbs(scenario.data.prbs_order, scenario.data.prbs_seed, scenario.data.n_bits)?;
    let signal = scenario.channel.apply(&nrz_modulate(&tx_bits, &link)?)?;
    let r_ref = scenario.calibration.r_ref_ohm();
    let mut parts = vec![signal];
    for intf in &scenario.interferers {
        parts.push(intf.render(parts[0].grid(), r_ref)?);
    }
    let mut rx = superpose(&parts)?;
    if let (Some(noise), Some(sigma)) = (scenario.noise, derived.noise_sigma_v) {
        rx = add_awgn(&rx, sigma, noise.seed)?;
    }

    let t_b = link.bit_period();
    let phase = if scenario.receiver.recover_phase {
        Some(recover_sampling_phase(&rx, &link, &receiver, scenario.receiver.phase_steps)?)
    } else {
        None
    };
    let clock_offset = phase.map_or(0.0, |p| p.signed_offset(t_b));
    let integrated = ddr_demodulate_with_offset(&rx, &link, &receiver, clock_offset)?;
    let direct =
        direct_demodulate_with_offset(&rx, &link, scenario.receiver.direct_sample_phase, clock_offset)?;

    Ok(Simulation {
        scenario,
        derived,
        link,
        receiver,
        tx_bits,
        rx,
        phase,
        clock_offset,
        direct,
        integrated,
    })
}

impl Simulation {
    /// Transmitted bits lined up with a demodulator's decisions.
    pub fn reference_bits(&self, demod: &DemodResult) -> BitSequence {
        let len = demod.len().min(self.tx_bits.len().saturating_sub(demod.first_bit));
        self.tx_bits.slice(demod.first_bit, len)
    }

    fn ber_of(&self, demod: &DemodResult) -> Result<BerStats> {
        let reference = self.reference_bits(demod);
        ber(&reference, &demod.bits.slice(0, reference.len()))
    }

    pub fn ber_direct(&self) -> Result<BerStats> {
        self.ber_of(&self.direct)
    }

    pub fn ber_integrated(&self) -> Result<BerStats> {
        self.ber_of(&self.integrated)
    }

    pub fn demod(&self, which: Which) -> &DemodResult {
        match which {
            Which::Direct => &self.direct,
            Which::Integrated => &self.integrated,
        }
    }

    /// Eye of the waveform a receiver decides on, rails from the transmitted bits.
    pub fn eye(&self, which: Which) -> Result<EyeDiagram> {
        let t_b = self.link.bit_period();
        let demod = self.demod(which);
        let labels = self.reference_bits(demod);
        let fold_start = self.clock_offset + demod.first_bit as f64 * t_b;
        match which {
            Which::Direct => eye_diagram_labelled(
                &self.rx,
                t_b,
                fold_start,
                self.scenario.receiver.direct_sample_phase * t_b,
                labels.as_slice(),
                0.0,
            ),
            Which::Integrated => eye_diagram_labelled(
                &demod.combined_trace(),
                t_b,
                fold_start,
                (1.0 - self.receiver.delta_frac) * t_b,
                labels.as_slice(),
                self.receiver.threshold,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub derived: Derived,
    pub ber_direct: BerStats,
    pub ber_integrated: BerStats,
    pub eye_height_direct: f64,
    pub eye_height_integrated: f64,
    pub eye_width_direct_s: f64,
    pub eye_width_integrated_s: f64,
    /// Bit-clock offset applied by both receivers.
    pub recovered_phase_s: f64,
    pub phase_search_eye_height: Option<f64>,
    pub artifacts: Vec<String>,
}

impl RunReport {
    pub fn from_simulation(sim: &Simulation) -> Result<Self> {
        let eye_d = sim.eye(Which::Direct)?;
        let eye_i = sim.eye(Which::Integrated)?;
        Ok(Self {
            scenario: sim.scenario.clone(),
            derived: sim.derived,
            ber_direct: sim.ber_direct()?,
            ber_integrated: sim.ber_integrated()?,
            eye_height_direct: eye_d.eye_height,
            eye_height_integrated: eye_i.eye_height,
            eye_width_direct_s: eye_d.eye_width,
            eye_width_integrated_s: eye_i.eye_width,
            recovered_phase_s: sim.clock_offset,
            phase_search_eye_height: sim.phase.map(|p| p.eye_height),
            artifacts: Vec::new(),
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs a scenario and writes the requested artifacts under `out_dir`.
pub fn run(scenario: &Scenario, out_dir: &Path) -> Result<RunReport> {
    let sim = simulate(scenario)?;
    let mut report = RunReport::from_simulation(&sim)?;
    let name = &sim.scenario.name;
    let file = |suffix: &str| out_dir.join(format!("{name}_{suffix}"));
    let outputs = &sim.scenario.outputs;
    let mut written: Vec<PathBuf> = Vec::new();

    if outputs.decisions {
        written.push(write_decisions(&sim, &file("decisions.csv"))?);
    }
    if outputs.eye_direct {
        written.extend(write_eye(&sim.eye(Which::Direct)?, outputs.max_eye_traces, &file("eye_direct.csv"))?);
    }
    if outputs.eye_integrated {
        written.extend(write_eye(
            &sim.eye(Which::Integrated)?,
            outputs.max_eye_traces,
            &file("eye_integrated.csv"),
        )?);
    }
    if outputs.psd {
        let points = psd(&sim.rx, outputs.psd_segment_len, 0.5, SpectralWindow::Hann)?;
        written.push(write_psd(&points, &file("psd.csv"))?);
    }
    if outputs.waveform_bits > 0 {
        written.push(write_waveform(&sim, outputs.waveform_bits, &file("waveform.csv"))?);
    }
    let report_path = file("report.json");
    written.push(report_path.clone());
    report.artifacts = written.iter().map(|p| p.display().to_string()).collect();
    write_text(&report_path, &(report.to_json_pretty() + "\n"))?;
    Ok(report)
}

/// `bit_index,tx,rx_direct,rx_integrated,sample_direct_v,sample_integrated`
/// over the bits both receivers decided.
fn write_decisions(sim: &Simulation, path: &Path) -> Result<PathBuf> {
    let d = &sim.direct;
    let i = &sim.integrated;
    let first = d.first_bit.max(i.first_bit);
    let end = (d.first_bit + d.len()).min(i.first_bit + i.len());
    let mut out = String::from("bit_index,tx,rx_direct,rx_integrated,sample_direct_v,sample_integrated\n");
    for k in first..end {
        let (jd, ji) = (k - d.first_bit, k - i.first_bit);
        let _ = writeln!(
            out,
            "{k},{},{},{},{},{}",
            sim.tx_bits[k],
            d.bits[jd],
            i.bits[ji],
            fmt_sig(d.samples[jd], 9),
            fmt_sig(i.samples[ji], 9)
        );
    }
    write_text(path, &out)
}

/// `t_s,rx_v,integrator_path0,integrator_path1` for the first `n_bits` bits.
fn write_waveform(sim: &Simulation, n_bits: usize, path: &Path) -> Result<PathBuf> {
    let n = (n_bits * sim.link.samples_per_bit).min(sim.rx.len());
    let [p0, p1] = [&sim.integrated.traces[0], &sim.integrated.traces[1]];
    let mut out = String::from("t_s,rx_v,integrator_path0,integrator_path1\n");
    for k in 0..n {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_sig(sim.rx.time(k), 9),
            fmt_sig(sim.rx.samples()[k], 9),
            fmt_sig(p0.samples()[k], 9),
            fmt_sig(p1.samples()[k], 9)
        );
    }
    write_text(path, &out)
}

/// Exports one eye (traces CSV plus metrics sidecar).
pub fn export_eye(scenario: &Scenario, which: Which, out_path: &Path) -> Result<Vec<PathBuf>> {
    let sim = simulate(scenario)?;
    write_eye(&sim.eye(which)?, scenario.outputs.max_eye_traces, out_path)
}
