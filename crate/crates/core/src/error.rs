use thiserror::Error;

/// Errors produced by the simulator and its tooling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("integration window [{start:e}, {end:e}] s lies outside the waveform span [{span_start:e}, {span_end:e}] s")]
    WindowOutOfRange {
        start: f64,
        end: f64,
        span_start: f64,
        span_end: f64,
    },

    #[error("integration window holds {found} samples, at least {required} required")]
    WindowTooShort { found: usize, required: usize },

    #[error("waveform mismatch: {0}")]
    Mismatch(String),

    #[error("frequency {freq_hz:e} Hz is at or above the Nyquist limit {nyquist_hz:e} Hz")]
    Nyquist { freq_hz: f64, nyquist_hz: f64 },

    #[error("no eye found: {0}")]
    NoEye(String),

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        reason: reason.into(),
    }
}
