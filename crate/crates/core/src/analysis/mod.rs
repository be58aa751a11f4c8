//! Closed-form notch math, eye and spectrum measurements, error counting and
//! the body-antenna and security arithmetic.

pub mod ber;
pub mod body;
pub mod eye;
pub mod notch;
pub mod psd;

pub use ber::{ber, BerStats};
pub use body::{body_resonance, hack_probability, Medium, SPEED_OF_LIGHT};
pub use eye::{eye_diagram, statistical_eye_height, EyeDiagram};
pub use notch::{
    integrated_interference_closed_form, integrated_interference_trajectory, rejection_curve,
    rejection_curve_capped, sinc, worst_case_rejection_db, worst_case_rejection_db_capped,
    RejectionCurve, DEFAULT_REJECTION_CAP_DB,
};
pub use psd::{psd, PsdPoint, SpectralWindow};
