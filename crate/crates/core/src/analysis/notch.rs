//! Frequency response of the resettable integrator to a sinusoidal interferer.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::exec;
use crate::signal::Waveform;

/// Rejection reported at exact notches instead of an infinite value.
pub const DEFAULT_REJECTION_CAP_DB: f64 = 120.0;

/// `sin(pi x) / (pi x)`, 1 at the origin.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Integrator output at the end of a window of length `t_b` for the input
/// `a_intf sin(2 pi f_i t + phi)` with the window opening at `t = 0`:
/// `k A [cos(phi) - cos(w T_b + phi)] / w`.
pub fn integrated_interference_closed_form(a_intf: f64, f_i: f64, phi: f64, t_b: f64, k_int: f64) -> f64 {
    let w = TAU * f_i;
    k_int * a_intf * (phi.cos() - (w * t_b + phi).cos()) / w
}

/// Running integral `-k A [cos(w t + phi) - cos(phi)] / w` on `n_points`
/// uniform instants over `[0, t_b]`.
pub fn integrated_interference_trajectory(
    a_intf: f64,
    f_i: f64,
    phi: f64,
    t_b: f64,
    k_int: f64,
    n_points: usize,
) -> Result<Waveform> {
    if n_points < 2 {
        return Err(invalid("n_points", "at least two points required"));
    }
    if !(f_i > 0.0 && t_b > 0.0) {
        return Err(invalid("f_i", "frequency and window length must be positive"));
    }
    let w = TAU * f_i;
    let dt = t_b / (n_points - 1) as f64;
    let samples = (0..n_points)
        .map(|j| {
            let t = j as f64 * dt;
            -k_int * a_intf * ((w * t + phi).cos() - phi.cos()) / w
        })
        .collect();
    Waveform::new(samples, 1.0 / dt, 0.0)
}

/// Worst case over interferer phase of the sampled interference, relative
/// to a DC interferer of the same amplitude: `-20 log10 |sinc(f_i t_b)|`,
/// capped at [`DEFAULT_REJECTION_CAP_DB`].
pub fn worst_case_rejection_db(f_i: f64, t_b: f64) -> f64 {
    worst_case_rejection_db_capped(f_i, t_b, DEFAULT_REJECTION_CAP_DB)
}

pub fn worst_case_rejection_db_capped(f_i: f64, t_b: f64, cap_db: f64) -> f64 {
    let mag = sinc(f_i * t_b).abs();
    if mag == 0.0 {
        return cap_db;
    }
    (-20.0 * mag.log10()).min(cap_db)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectionCurve {
    /// `(interferer frequency in Hz, rejection in dB)`.
    pub points: Vec<(f64, f64)>,
}

impl RejectionCurve {
    /// Lowest rejection on the curve and where it occurs.
    pub fn minimum(&self) -> (f64, f64) {
        self.points
            .iter()
            .copied()
            .fold((f64::NAN, f64::INFINITY), |m, p| if p.1 < m.1 { p } else { m })
    }
}

pub fn rejection_curve(t_b: f64, f_lo: f64, f_hi: f64, n_points: usize) -> Result<RejectionCurve> {
    rejection_curve_capped(t_b, f_lo, f_hi, n_points, DEFAULT_REJECTION_CAP_DB)
}

pub fn rejection_curve_capped(
    t_b: f64,
    f_lo: f64,
    f_hi: f64,
    n_points: usize,
    cap_db: f64,
) -> Result<RejectionCurve> {
    if !(t_b.is_finite() && t_b > 0.0) {
        return Err(invalid("t_b", "must be positive"));
    }
    if !(f_lo > 0.0 && f_lo < f_hi && f_hi.is_finite()) {
        return Err(invalid("f_lo", "need 0 < f_lo < f_hi"));
    }
    if n_points < 2 {
        return Err(invalid("n_points", "at least two points required"));
    }
    if cap_db.is_nan() || cap_db <= 0.0 {
        return Err(invalid("cap_db", "must be positive"));
    }
    let step = (f_hi - f_lo) / (n_points - 1) as f64;
    let points = exec::map_range(n_points, |j| {
        let f = if j + 1 == n_points { f_hi } else { f_lo + j as f64 * step };
        (f, worst_case_rejection_db_capped(f, t_b, cap_db))
    });
    Ok(RejectionCurve { points })
}
