use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::I;

/// Γ_ab = γ_ab + iδ_p, Γ_ca = γ_ca + iδ_d, Γ_cb = γ_cb + i(δ_p − δ_d).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexLinewidths {
    pub ab: Complex64,
    pub ca: Complex64,
    pub cb: Complex64,
}

impl ComplexLinewidths {
    pub fn new(gamma_ab: f64, gamma_ca: f64, gamma_cb: f64, probe_detuning: f64, drive_detuning: f64) -> Self {
        ComplexLinewidths {
            ab: Complex64::new(gamma_ab, probe_detuning),
            ca: Complex64::new(gamma_ca, drive_detuning),
            cb: Complex64::new(gamma_cb, probe_detuning - drive_detuning),
        }
    }
}

/// Quasi-static level populations entering the coherence formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Populations {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for Populations {
    fn default() -> Self {
        Populations { a: 0.0, b: 1.0, c: 0.0 }
    }
}

impl Populations {
    fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.c];
        if all.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(invalid("populations", "must be finite and >= 0"));
        }
        if all.iter().sum::<f64>() > 1.0 + 1e-9 {
            return Err(invalid("populations", "sum exceeds 1"));
        }
        Ok(())
    }
}

/// Probe coherence of a Λ system,
///
/// ρ_ab = i (n_ab + |Ω|²/(Γ_cb Γ_ca) n_ca) / (Γ_ab + |Ω|²/Γ_cb) · Ω_p,
///
/// with n_ab = n_a − n_b and n_ca = n_c − n_a, evaluated exactly as written:
/// Ω and Ω_p enter as given, with no factor ½ and no frame convention.
pub fn probe_coherence(
    pop: &Populations,
    lw: &ComplexLinewidths,
    drive_rabi: f64,
    probe_rabi: f64,
) -> Result<Complex64> {
    pop.validate()?;
    let n_ab = pop.a - pop.b;
    let n_ca = pop.c - pop.a;
    let w2 = drive_rabi * drive_rabi;
    if w2 == 0.0 {
        return Ok(I * n_ab / lw.ab * probe_rabi);
    }
    if lw.cb == Complex64::new(0.0, 0.0) {
        return Err(invalid(
            "gamma_cb",
            "Γ_cb = 0 makes the formula singular when the drive is on",
        ));
    }
    let num = Complex64::new(n_ab, 0.0) + w2 / (lw.cb * lw.ca) * n_ca;
    let den = lw.ab + w2 / lw.cb;
    Ok(I * num / den * probe_rabi)
}

/// The same coherence expressed in the engine's conventions: couplings
/// −Ω/2 on the off-diagonals and ρ_ab = ⟨a|ρ|b⟩, so Im ρ_ab > 0 is absorption.
pub fn probe_coherence_rotating_frame(
    pop: &Populations,
    lw: &ComplexLinewidths,
    drive_rabi: f64,
    probe_rabi: f64,
) -> Result<Complex64> {
    let mapped = ComplexLinewidths {
        ca: lw.ca.conj(),
        ..*lw
    };
    Ok(-probe_coherence(pop, &mapped, 0.5 * drive_rabi, 0.5 * probe_rabi)?)
}
