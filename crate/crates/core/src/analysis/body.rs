use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Half-wave (floating) or quarter-wave (grounded) resonance of a body of
/// height `length_m`.
pub fn body_resonance(length_m: f64, grounded: bool) -> Result<f64> {
    if !(length_m.is_finite() && length_m > 0.0) {
        return Err(invalid("length_m", "must be positive"));
    }
    let wavelengths = if grounded { 4.0 } else { 2.0 };
    Ok(SPEED_OF_LIGHT / (wavelengths * length_m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Medium {
    Wban,
    Hbc,
}

/// Probability that an eavesdropper recovers the link: the encryption
/// failure probability, times the chance of touching the wearer for HBC.
pub fn hack_probability(eq: f64, p_touch: f64, medium: Medium) -> Result<f64> {
    if !(0.0..=1.0).contains(&eq) {
        return Err(invalid("eq", "must be a probability"));
    }
    if !(0.0..=1.0).contains(&p_touch) {
        return Err(invalid("p_touch", "must be a probability"));
    }
    Ok(match medium {
        Medium::Wban => eq,
        Medium::Hbc => eq * p_touch,
    })
}
