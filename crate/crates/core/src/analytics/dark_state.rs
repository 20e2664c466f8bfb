use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::error::{invalid, Result};
use crate::linalg::CMatrix;
use crate::scheme::{A, B, C};

/// Ground-subspace vectors over (|b⟩, |c⟩).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarkBright {
    pub dark: [Complex64; 2],
    pub bright: [Complex64; 2],
}

impl DarkBright {
    /// Dark vector embedded in the Λ basis (a, b, c).
    pub fn dark_ket(&self) -> [Complex64; 3] {
        [Complex64::new(0.0, 0.0), self.dark[0], self.dark[1]]
    }

    pub fn bright_ket(&self) -> [Complex64; 3] {
        [Complex64::new(0.0, 0.0), self.bright[0], self.bright[1]]
    }

    pub fn dark_state(&self) -> DensityMatrix {
        DensityMatrix::pure(&self.dark_ket()).expect("dark vector is normalized")
    }
}

/// Interaction part of the Λ Hamiltonian: −(Ω₁/2)e^{iφ₁} on a–b and
/// −(Ω₂/2)e^{iφ₂} on a–c, plus Hermitian conjugates.
pub fn lambda_interaction(omega1: f64, omega2: f64, phi1: f64, phi2: f64) -> CMatrix {
    let mut v = CMatrix::zeros(3, 3);
    let v1 = Complex64::from_polar(-0.5 * omega1, phi1);
    let v2 = Complex64::from_polar(-0.5 * omega2, phi2);
    v[(A, B)] = v1;
    v[(B, A)] = v1.conj();
    v[(A, C)] = v2;
    v[(C, A)] = v2.conj();
    v
}

/// Dark state (annihilated by the interaction) and its orthogonal bright partner.
pub fn dark_bright_decomposition(omega1: f64, omega2: f64) -> Result<DarkBright> {
    dark_bright_with_phases(omega1, omega2, 0.0, 0.0)
}

pub fn dark_bright_with_phases(omega1: f64, omega2: f64, phi1: f64, phi2: f64) -> Result<DarkBright> {
    if !(omega1 >= 0.0 && omega2 >= 0.0 && omega1.is_finite() && omega2.is_finite()) {
        return Err(invalid("rabi", "Rabi frequencies must be finite and >= 0"));
    }
    let norm = omega1.hypot(omega2);
    if norm == 0.0 {
        return Err(invalid("rabi", "at least one field must be on"));
    }
    let (x1, x2) = (omega1 / norm, omega2 / norm);
    let e1 = Complex64::from_polar(1.0, phi1);
    let e2 = Complex64::from_polar(1.0, phi2);
    Ok(DarkBright {
        dark: [e2 * x2, -e1 * x1],
        bright: [e1.conj() * x1, e2.conj() * x2],
    })
}
