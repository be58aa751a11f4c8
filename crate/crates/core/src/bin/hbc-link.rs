use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hbc_link::analysis::{integrated_interference_trajectory, DEFAULT_REJECTION_CAP_DB};
use hbc_link::scenario::export::fmt_sig;
use hbc_link::scenario::{
    export_eye, preset, run, sweep_ber, sweep_rejection, Scenario, SweepAxis, Which, PRESET_NAMES,
};
use hbc_link::{Error, Result};

/// Link-level simulator for NRZ body-channel links with an integrating DDR receiver.
#[derive(Parser)]
#[command(name = "hbc-link", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario with both receivers and write its artifacts.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Worst-case interference rejection versus interferer frequency.
    SweepRejection {
        #[arg(long, default_value_t = 1e-8)]
        bit_period_s: f64,
        #[arg(long, default_value_t = 88e6)]
        f_lo_hz: f64,
        #[arg(long, default_value_t = 108e6)]
        f_hi_hz: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long, default_value_t = DEFAULT_REJECTION_CAP_DB)]
        cap_db: f64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Output file (default: <out-dir>/rejection.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// BER of both receivers along one scenario parameter.
    SweepBer {
        #[command(flatten)]
        source: Source,
        /// sir_db, freq_hz or snr_db.
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        values: Vec<f64>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Output file (default: <out-dir>/<name>_ber_<axis>.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Folded eye traces of one receiver plus a metrics sidecar.
    Eye {
        #[command(flatten)]
        source: Source,
        /// direct or integrated.
        #[arg(long, default_value = "integrated")]
        which: Which,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Output file (default: <out-dir>/<name>_eye_<which>.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrator output over one bit period for a single tone.
    Trajectory {
        #[arg(long)]
        freq_hz: f64,
        #[arg(long, default_value_t = 0.0)]
        phase_rad: f64,
        #[arg(long, default_value_t = 1.0)]
        amplitude_v: f64,
        #[arg(long, default_value_t = 1e-8)]
        bit_period_s: f64,
        /// Integrator gain (default: 1 / bit period).
        #[arg(long)]
        k_int_per_s: Option<f64>,
        #[arg(long, default_value_t = 401)]
        points: usize,
        #[arg(long, default_value = "trajectory.csv")]
        out: PathBuf,
    },
    /// List the built-in scenarios, or write them as JSON files.
    Presets {
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Source {
    /// Scenario JSON file.
    #[arg(conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario name.
    #[arg(long)]
    preset: Option<String>,
    /// Overrides the noise seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Source {
    fn load(&self) -> Result<Scenario> {
        let mut scenario = match (&self.config, &self.preset) {
            (Some(path), _) => Scenario::from_path(path)?,
            (None, Some(name)) => preset(name).ok_or_else(|| Error::Config {
                key: "preset".into(),
                reason: format!("unknown preset `{name}` (known: {})", PRESET_NAMES.join(", ")),
            })?,
            (None, None) => unreachable!("clap requires a config or a preset"),
        };
        if let (Some(seed), Some(noise)) = (self.seed, scenario.noise.as_mut()) {
            noise.seed = seed;
        }
        scenario.validate()?;
        Ok(scenario)
    }
}

fn axis_name(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::SirDb => "sir_db",
        SweepAxis::FreqHz => "freq_hz",
        SweepAxis::SnrDb => "snr_db",
    }
}

fn which_name(which: Which) -> &'static str {
    match which {
        Which::Direct => "direct",
        Which::Integrated => "integrated",
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { source, out_dir } => {
            let report = run(&source.load()?, &out_dir)?;
            println!("{}", report.to_json_pretty());
        }
        Command::SweepRejection {
            bit_period_s,
            f_lo_hz,
            f_hi_hz,
            points,
            cap_db,
            out_dir,
            out,
        } => {
            let path = out.unwrap_or_else(|| out_dir.join("rejection.csv"));
            let path = sweep_rejection(bit_period_s, f_lo_hz, f_hi_hz, points, cap_db, &path)?;
            println!("{}", path.display());
        }
        Command::SweepBer {
            source,
            axis,
            values,
            out_dir,
            out,
        } => {
            let base = source.load()?;
            let path = out.unwrap_or_else(|| out_dir.join(format!("{}_ber_{}.csv", base.name, axis_name(axis))));
            println!("{}", sweep_ber(&base, axis, &values, &path)?.display());
        }
        Command::Eye {
            source,
            which,
            out_dir,
            out,
        } => {
            let scenario = source.load()?;
            let path =
                out.unwrap_or_else(|| out_dir.join(format!("{}_eye_{}.csv", scenario.name, which_name(which))));
            for p in export_eye(&scenario, which, &path)? {
                println!("{}", p.display());
            }
        }
        Command::Trajectory {
            freq_hz,
            phase_rad,
            amplitude_v,
            bit_period_s,
            k_int_per_s,
            points,
            out,
        } => {
            let k = k_int_per_s.unwrap_or(1.0 / bit_period_s);
            let w = integrated_interference_trajectory(amplitude_v, freq_hz, phase_rad, bit_period_s, k, points)?;
            let mut text = String::from("t_s,integrated_v\n");
            for (i, v) in w.samples().iter().enumerate() {
                let _ = writeln!(text, "{},{}", fmt_sig(w.time(i), 9), fmt_sig(*v, 9));
            }
            write_file(&out, &text)?;
            println!("{}", out.display());
        }
        Command::Presets { out_dir } => {
            for name in PRESET_NAMES {
                match &out_dir {
                    Some(dir) => {
                        let scenario = preset(name).expect("listed preset exists");
                        let path = dir.join(format!("{name}.json"));
                        write_file(&path, &(scenario.to_json_pretty() + "\n"))?;
                        println!("{}", path.display());
                    }
                    None => println!("{name}"),
                }
            }
        }
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let msg = err.to_string().replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
