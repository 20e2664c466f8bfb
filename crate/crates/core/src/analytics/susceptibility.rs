use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coherence::{probe_coherence_rotating_frame, ComplexLinewidths, Populations};
use crate::constants::{per_cm3_to_si, HBAR, VACUUM_PERMITTIVITY};
use crate::error::{invalid, Error, Result};
use crate::liouvillian::cw_steady_state;
use crate::rates::RateSet;
use crate::scheme::{DriveField, LevelScheme, Rabi, SchemeKind, A, B};
use crate::sweep::map_grid;

/// Probe Rabi frequency above this fraction of γ_ab leaves linear response.
pub const LINEAR_RESPONSE_LIMIT: f64 = 1e-2;
/// Im χ below −GAIN_TOL·max|χ| is reported as gain.
pub const GAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SusceptibilityMode {
    /// Closed-form Λ coherence with fixed populations.
    Analytic,
    /// Stationary state of the full master equation.
    Numeric,
}

/// A scheme probed on its a–b transition (slot 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSetup {
    pub scheme: LevelScheme,
    pub rates: RateSet,
    /// One CW field per slot; `fields[0]` is the probe, whose detuning is swept.
    pub fields: Vec<DriveField>,
    /// Populations for analytic mode.
    pub populations: Populations,
}

impl ProbeSetup {
    pub fn probe_rabi(&self) -> Result<f64> {
        match self.fields.first().map(|f| &f.rabi) {
            Some(Rabi::Constant(r)) if *r > 0.0 => Ok(*r),
            _ => Err(invalid("probe", "the probe must be a CW field with Ω_p > 0")),
        }
    }

    fn with_probe_detuning(&self, detuning: f64) -> Vec<DriveField> {
        let mut f = self.fields.clone();
        f[0].detuning = detuning;
        f
    }

    /// Probe coherence ⟨a|ρ|b⟩ at one probe detuning.
    pub fn coherence(&self, detuning: f64, mode: SusceptibilityMode) -> Result<Complex64> {
        let probe = self.probe_rabi()?;
        match mode {
            SusceptibilityMode::Numeric => {
                let rho = cw_steady_state(&self.scheme, &self.with_probe_detuning(detuning), &self.rates)?;
                Ok(rho.coherence(A, B))
            }
            SusceptibilityMode::Analytic => {
                if self.scheme.kind != SchemeKind::Lambda {
                    return Err(Error::WrongScheme {
                        operation: "analytic susceptibility",
                        expected: SchemeKind::Lambda.name().to_string(),
                        got: self.scheme.kind.name().to_string(),
                    });
                }
                let drive = &self.fields[1];
                let Rabi::Constant(omega) = drive.rabi else {
                    return Err(invalid("drive", "analytic mode needs a CW drive"));
                };
                let rate = |i: &str, j: &str| {
                    self.rates
                        .coherence(i, j)
                        .ok_or_else(|| invalid(format!("gamma_{i}{j}"), "required by analytic mode"))
                };
                let lw = ComplexLinewidths::new(
                    rate("a", "b")?,
                    rate("a", "c")?,
                    rate("c", "b")?,
                    detuning,
                    drive.detuning,
                );
                probe_coherence_rotating_frame(&self.populations, &lw, omega, probe)
            }
        }
    }
}

/// χ = N d² ρ_ab / (ε₀ ħ Ω_p), with N in 1/cm³ and d in e·Å.
pub fn chi_from_coherence(rho_ab: Complex64, probe_rabi: f64, dipole_ea: f64, density_cm3: f64) -> Complex64 {
    let d = crate::constants::dipole_ea_to_si(dipole_ea);
    rho_ab * (per_cm3_to_si(density_cm3) * d * d / (VACUUM_PERMITTIVITY * HBAR * probe_rabi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Susceptibility {
    /// ω_ab, rad/s.
    pub transition_frequency: f64,
    /// Probe detunings δ = ω_ab − ν, rad/s.
    pub detunings: Vec<f64>,
    pub chi: Vec<Complex64>,
    /// 1/cm³
    pub density_cm3: f64,
}

impl Susceptibility {
    /// Probe carrier frequencies ν = ω_ab − δ.
    pub fn frequencies(&self) -> Vec<f64> {
        self.detunings.iter().map(|d| self.transition_frequency - d).collect()
    }

    /// Group index at probe detuning `detuning`.
    pub fn group_index_at_detuning(&self, detuning: f64) -> Result<f64> {
        group_index(&self.frequencies(), &self.chi, self.transition_frequency - detuning)
    }
}

/// χ over a probe-detuning grid. Points are independent and evaluated in
/// parallel when `parallel` is set; results are identical either way.
pub fn susceptibility(
    grid: &[f64],
    setup: &ProbeSetup,
    density_cm3: f64,
    mode: SusceptibilityMode,
    parallel: bool,
) -> Result<Susceptibility> {
    if !(density_cm3 >= 0.0 && density_cm3.is_finite()) {
        return Err(invalid(
            "density",
            format!("must be finite and >= 0, got {density_cm3}"),
        ));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(invalid("grid", "probe grid must be finite"));
    }
    let probe = setup.probe_rabi()?;
    if let Some(g) = setup.rates.coherence("a", "b") {
        if probe > LINEAR_RESPONSE_LIMIT * g {
            log::warn!("probe Ω_p = {probe:e} exceeds {LINEAR_RESPONSE_LIMIT}·γ_ab; outside linear response");
        }
    }
    let rho = map_grid(grid, parallel, |_, d| setup.coherence(d, mode))?;
    let chi: Vec<Complex64> = rho
        .iter()
        .map(|r| chi_from_coherence(*r, probe, setup.rates.dipole_ea, density_cm3))
        .collect();
    let peak = chi.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    if let Some((k, c)) = chi.iter().enumerate().find(|(_, c)| c.im < -GAIN_TOL * peak) {
        return Err(Error::Gain {
            detuning: grid[k],
            value: c.im,
        });
    }
    Ok(Susceptibility {
        transition_frequency: setup.scheme.transition_frequency(1)?,
        detunings: grid.to_vec(),
        chi,
        density_cm3,
    })
}

/// n_g = n + ν₀ dn/dν at ν₀, with n = 1 + Re χ/2. The derivative comes from
/// the quadratic through the three grid points nearest ν₀ (the central
/// difference when ν₀ is a grid point).
pub fn group_index(frequencies: &[f64], chi: &[Complex64], nu0: f64) -> Result<f64> {
    if frequencies.len() != chi.len() {
        return Err(Error::DimensionMismatch {
            expected: frequencies.len(),
            got: chi.len(),
        });
    }
    if frequencies.len() < 3 {
        return Err(invalid("grid", "group index needs at least 3 points"));
    }
    let mut order: Vec<usize> = (0..frequencies.len()).collect();
    order.sort_by(|&i, &j| frequencies[i].total_cmp(&frequencies[j]));
    let nu: Vec<f64> = order.iter().map(|&k| frequencies[k]).collect();
    if nu.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("grid", "frequencies must be distinct"));
    }
    let m = nu.len();
    if !(nu0 >= nu[0] && nu0 <= nu[m - 1]) {
        return Err(invalid(
            "nu0",
            format!("{nu0:e} rad/s lies outside the grid [{:e}, {:e}]", nu[0], nu[m - 1]),
        ));
    }
    let n: Vec<f64> = order.iter().map(|&k| 1.0 + 0.5 * chi[k].re).collect();
    let nearest = (0..m)
        .min_by(|&i, &j| (nu[i] - nu0).abs().total_cmp(&(nu[j] - nu0).abs()))
        .unwrap();
    let c = nearest.clamp(1, m - 2);
    let (x0, x1, x2) = (nu[c - 1] - nu0, nu[c] - nu0, nu[c + 1] - nu0);
    let (y0, y1, y2) = (n[c - 1], n[c], n[c + 1]);
    // Lagrange basis values and derivatives at x = 0.
    let l0 = x1 * x2 / ((x0 - x1) * (x0 - x2));
    let l1 = x0 * x2 / ((x1 - x0) * (x1 - x2));
    let l2 = x0 * x1 / ((x2 - x0) * (x2 - x1));
    let d0 = -(x1 + x2) / ((x0 - x1) * (x0 - x2));
    let d1 = -(x0 + x2) / ((x1 - x0) * (x1 - x2));
    let d2 = -(x0 + x1) / ((x2 - x0) * (x2 - x1));
    let n0 = l0 * y0 + l1 * y1 + l2 * y2;
    let dn = d0 * y0 + d1 * y1 + d2 * y2;
    Ok(n0 + nu0 * dn)
}
