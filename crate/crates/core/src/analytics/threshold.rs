use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::units::{intensity_from_rabi, ConversionMode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CptThreshold {
    /// √(Ω₁² + Ω₂²) at threshold, rad/s.
    pub rabi: f64,
    /// Intensity giving that Rabi frequency, W/cm².
    pub intensity: f64,
    pub mode: ConversionMode,
}

/// Equality point of Ω₁² + Ω₂² ≫ γ_cb Γ_ab.
pub fn cpt_threshold(gamma_cb: f64, gamma_ab: f64, mode: ConversionMode) -> Result<CptThreshold> {
    for (name, v) in [("gamma_cb", gamma_cb), ("gamma_ab", gamma_ab)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(name, format!("must be finite and > 0, got {v}")));
        }
    }
    let rabi = (gamma_cb * gamma_ab).sqrt();
    Ok(CptThreshold {
        rabi,
        intensity: intensity_from_rabi(rabi, mode)?,
        mode,
    })
}

/// (Ω₁² + Ω₂²)/(γ_cb Γ_ab): how far above threshold a pair of fields is.
pub fn threshold_margin(omega1: f64, omega2: f64, gamma_cb: f64, gamma_ab: f64) -> f64 {
    (omega1 * omega1 + omega2 * omega2) / (gamma_cb * gamma_ab)
}
