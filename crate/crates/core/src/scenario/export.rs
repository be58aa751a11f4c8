//! CSV and JSON writers. CSV files have a header row, `.` decimals and `\n`
//! line endings; numbers are printed deterministically.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::eye::EyeDiagram;
use crate::analysis::psd::PsdPoint;
use crate::error::Result;

/// Formats `x` with `digits` significant digits, fixed-point for moderate
/// magnitudes and scientific otherwise, without trailing zeros.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<PathBuf> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, text)?;
    Ok(path.to_path_buf())
}

pub(crate) fn write_json_line<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Sidecar path for an exported CSV: `eye.csv` -> `eye.metrics.json`.
pub fn metrics_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("metrics.json")
}

/// Writes folded traces as `trace_id,t_s,v` and the metrics sidecar.
pub fn write_eye(eye: &EyeDiagram, max_traces: usize, csv_path: &Path) -> Result<Vec<PathBuf>> {
    let mut out = String::from("trace_id,t_s,v\n");
    for (m, trace) in eye.traces.iter().take(max_traces).enumerate() {
        for (j, v) in trace.iter().enumerate() {
            let _ = writeln!(out, "{m},{},{}", fmt_sig(eye.fold_time(j), 9), fmt_sig(*v, 9));
        }
    }
    let csv = write_text(csv_path, &out)?;
    let sidecar = write_json_line(&metrics_path(csv_path), &eye.metrics())?;
    Ok(vec![csv, sidecar])
}

pub fn write_psd(points: &[PsdPoint], path: &Path) -> Result<PathBuf> {
    let mut out = String::from("freq_hz,psd_db_per_hz\n");
    for p in points {
        let _ = writeln!(out, "{},{}", fmt_sig(p.freq_hz, 9), fmt_sig(p.density_db(), 6));
    }
    write_text(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(25.610820732519848, 6), "25.6108");
        assert_eq!(fmt_sig(120.0, 6), "120");
        assert_eq!(fmt_sig(95e6, 6), "9.5e7");
        assert_eq!(fmt_sig(88.1e6, 9), "88100000");
        assert_eq!(fmt_sig(-3.2e-9, 6), "-3.2e-9");
        assert_eq!(fmt_sig(0.000123456789, 6), "0.000123457");
        assert_eq!(fmt_sig(0.0, 6), "0");
        assert_eq!(fmt_sig(f64::NAN, 6), "nan");
        assert_eq!(fmt_sig(999999.7, 6), "1e6");
    }

    #[test]
    fn sidecar_naming() {
        assert_eq!(metrics_path(Path::new("out/eye_direct.csv")), Path::new("out/eye_direct.metrics.json"));
    }
}
