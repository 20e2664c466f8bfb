//! Unit-bearing quantities at the input boundary and the intensity ↔ Rabi conversions.
//!
//! Everything inside the crate is SI with angular frequencies in rad/s. The
//! only exceptions are the user-facing scalars that the literature quotes in
//! mixed units: energies in eV, intensities in W/cm², dipoles in e·Å and
//! number densities per cm³. [`parse_quantity`] converts text such as
//! `"1 us"` or `"10 meV"` into those canonical units.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{
    dipole_ea_to_si, w_per_cm2_to_si, ANGSTROM, DEBYE, ELEMENTARY_CHARGE, HBAR, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY,
};
use crate::error::{invalid, Result};

/// Prefactor of the empirical intensity fit, rad/s per √(W/cm²).
pub const PAPER_FIT_COEFFICIENT: f64 = 5e9;

/// How an intensity in W/cm² maps to a Rabi frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ConversionMode {
    /// Ω = 5·10⁹ √P, the quoted order-of-magnitude fit.
    PaperFit,
    /// Ω = d·E/ħ with E the peak field of a plane wave of intensity P.
    Physical { dipole_ea: f64 },
}

impl ConversionMode {
    pub fn name(&self) -> &'static str {
        match self {
            ConversionMode::PaperFit => "paper_fit",
            ConversionMode::Physical { .. } => "physical",
        }
    }

    /// Rabi frequency per √(W/cm²).
    fn coefficient(&self) -> Result<f64> {
        match *self {
            ConversionMode::PaperFit => Ok(PAPER_FIT_COEFFICIENT),
            ConversionMode::Physical { dipole_ea } => {
                if !(dipole_ea > 0.0 && dipole_ea.is_finite()) {
                    return Err(invalid("dipole", format!("must be positive, got {dipole_ea}")));
                }
                let field_per_root_intensity =
                    (2.0 * w_per_cm2_to_si(1.0) / (SPEED_OF_LIGHT * VACUUM_PERMITTIVITY)).sqrt();
                Ok(dipole_ea_to_si(dipole_ea) * field_per_root_intensity / HBAR)
            }
        }
    }
}

/// Rabi frequency (rad/s) driven by intensity `p` in W/cm².
pub fn rabi_from_intensity(p: f64, mode: ConversionMode) -> Result<f64> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(invalid(
            "intensity",
            format!("must be finite and non-negative, got {p}"),
        ));
    }
    Ok(mode.coefficient()? * p.sqrt())
}

/// Inverse of [`rabi_from_intensity`].
pub fn intensity_from_rabi(omega: f64, mode: ConversionMode) -> Result<f64> {
    if !(omega >= 0.0) || !omega.is_finite() {
        return Err(invalid("rabi", format!("must be finite and non-negative, got {omega}")));
    }
    let k = mode.coefficient()?;
    Ok((omega / k) * (omega / k))
}

/// Mean intensity in W/cm² of a pulse of `energy` J lasting `duration` s over `spot_area` cm².
pub fn intensity_from_pulse(energy: f64, duration: f64, spot_area: f64) -> Result<f64> {
    if !(energy >= 0.0) || !energy.is_finite() {
        return Err(invalid("energy", format!("must be non-negative, got {energy}")));
    }
    if !(duration > 0.0) {
        return Err(invalid("duration", format!("must be positive, got {duration}")));
    }
    if !(spot_area > 0.0) {
        return Err(invalid("spot_area", format!("must be positive, got {spot_area}")));
    }
    Ok(energy / (duration * spot_area))
}

/// Physical dimension of a configured quantity, with its canonical unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    /// rad/s
    AngularFrequency,
    /// 1/s
    Rate,
    /// s
    Time,
    /// eV
    Energy,
    /// J
    PulseEnergy,
    /// cm²
    Area,
    /// W/cm²
    Intensity,
    /// e·Å
    Dipole,
    /// 1/cm³
    Density,
    /// rad
    Angle,
}

impl Dimension {
    pub fn canonical_unit(self) -> &'static str {
        match self {
            Dimension::AngularFrequency => "rad/s",
            Dimension::Rate => "/s",
            Dimension::Time => "s",
            Dimension::Energy => "eV",
            Dimension::PulseEnergy => "J",
            Dimension::Area => "cm2",
            Dimension::Intensity => "W/cm2",
            Dimension::Dipole => "eA",
            Dimension::Density => "/cm3",
            Dimension::Angle => "rad",
        }
    }

    /// (unit, factor to canonical). Time units also carry the exact inverse so
    /// that lifetimes convert to rates without rounding (1 us → 1e6 /s).
    fn table(self) -> &'static [(&'static str, f64)] {
        use std::f64::consts::{PI, TAU};
        const EV: f64 = ELEMENTARY_CHARGE / HBAR;
        match self {
            Dimension::AngularFrequency => &[
                ("rad/s", 1.0),
                ("Hz", TAU),
                ("kHz", TAU * 1e3),
                ("MHz", TAU * 1e6),
                ("GHz", TAU * 1e9),
                ("THz", TAU * 1e12),
                ("eV", EV),
                ("meV", EV * 1e-3),
                ("ueV", EV * 1e-6),
            ],
            Dimension::Rate => &[
                ("/s", 1.0),
                ("1/s", 1.0),
                ("s^-1", 1.0),
                ("/ms", 1e3),
                ("/us", 1e6),
                ("/ns", 1e9),
                ("/ps", 1e12),
                ("/fs", 1e15),
            ],
            Dimension::Time => &[
                ("s", 1.0),
                ("ms", 1e-3),
                ("us", 1e-6),
                ("μs", 1e-6),
                ("ns", 1e-9),
                ("ps", 1e-12),
                ("fs", 1e-15),
            ],
            Dimension::Energy => &[
                ("eV", 1.0),
                ("meV", 1e-3),
                ("ueV", 1e-6),
                ("J", 1.0 / ELEMENTARY_CHARGE),
            ],
            Dimension::PulseEnergy => &[
                ("J", 1.0),
                ("mJ", 1e-3),
                ("uJ", 1e-6),
                ("μJ", 1e-6),
                ("nJ", 1e-9),
                ("pJ", 1e-12),
            ],
            Dimension::Area => &[("cm2", 1.0), ("mm2", 1e-2), ("um2", 1e-8), ("m2", 1e4)],
            Dimension::Intensity => &[("W/cm2", 1.0), ("kW/cm2", 1e3), ("MW/cm2", 1e6), ("W/m2", 1e-4)],
            Dimension::Dipole => &[
                ("eA", 1.0),
                ("eÅ", 1.0),
                ("D", DEBYE / (ELEMENTARY_CHARGE * ANGSTROM)),
                ("Cm", 1.0 / (ELEMENTARY_CHARGE * ANGSTROM)),
            ],
            Dimension::Density => &[("/cm3", 1.0), ("/m3", 1e-6)],
            Dimension::Angle => &[("rad", 1.0), ("deg", PI / 180.0)],
        }
    }
}

/// Exact reciprocal factors for time units, used when a lifetime becomes a rate.
fn inverse_time_factor(unit: &str) -> Option<f64> {
    Some(match unit {
        "s" => 1.0,
        "ms" => 1e3,
        "us" | "μs" => 1e6,
        "ns" => 1e9,
        "ps" => 1e12,
        "fs" => 1e15,
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantityError {
    #[error("missing unit (expected e.g. '{example}')")]
    MissingUnit { example: String },
    #[error("unknown unit '{unit}' for a quantity in {canonical}")]
    UnknownUnit { unit: String, canonical: &'static str },
    #[error("malformed number '{0}'")]
    MalformedNumber(String),
}

fn split_quantity(text: &str) -> std::result::Result<(f64, Option<&str>), QuantityError> {
    let text = text.trim();
    let (num, unit) = match text.find(char::is_whitespace) {
        Some(i) => (&text[..i], Some(text[i..].trim())),
        None => (text, None),
    };
    let value = f64::from_str(num).map_err(|_| QuantityError::MalformedNumber(num.to_string()))?;
    if !value.is_finite() {
        return Err(QuantityError::MalformedNumber(num.to_string()));
    }
    Ok((value, unit.filter(|u| !u.is_empty())))
}

/// Parse `"<number> <unit>"` into the canonical unit of `dim`.
pub fn parse_quantity(text: &str, dim: Dimension) -> std::result::Result<f64, QuantityError> {
    let (value, unit) = split_quantity(text)?;
    let unit = unit.ok_or_else(|| QuantityError::MissingUnit {
        example: format!("1 {}", dim.canonical_unit()),
    })?;
    dim.table()
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, f)| value * f)
        .ok_or_else(|| QuantityError::UnknownUnit {
            unit: unit.to_string(),
            canonical: dim.canonical_unit(),
        })
}

/// A rate given either directly (`"1e6 /s"`) or as a lifetime (`"1 us"`), in 1/s.
pub fn parse_rate_or_lifetime(text: &str) -> std::result::Result<f64, QuantityError> {
    let (value, unit) = split_quantity(text)?;
    let unit = unit.ok_or_else(|| QuantityError::MissingUnit {
        example: "1e6 /s".to_string(),
    })?;
    if let Some(inv) = inverse_time_factor(unit) {
        if value <= 0.0 {
            return Err(QuantityError::MalformedNumber(format!(
                "lifetime {value} must be positive"
            )));
        }
        return Ok(inv / value);
    }
    parse_quantity(text, Dimension::Rate)
}

/// Lifetime string (`"1 us"`) to a rate in 1/s.
pub fn parse_lifetime(text: &str) -> std::result::Result<f64, QuantityError> {
    let (value, unit) = split_quantity(text)?;
    let unit = unit.ok_or_else(|| QuantityError::MissingUnit {
        example: "1 us".to_string(),
    })?;
    let inv = inverse_time_factor(unit).ok_or_else(|| QuantityError::UnknownUnit {
        unit: unit.to_string(),
        canonical: "s",
    })?;
    if value <= 0.0 {
        return Err(QuantityError::MalformedNumber(format!(
            "lifetime {value} must be positive"
        )));
    }
    Ok(inv / value)
}

/// Shortest round-trip scientific notation, e.g. `5e9`, `1.25e-7`.
pub fn fmt_sci(x: f64) -> String {
    format!("{x:e}")
}

/// Formats a canonical value with its unit so that [`parse_quantity`] reads it back exactly.
pub struct Quantity(pub f64, pub Dimension);

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} {}", self.0, self.1.canonical_unit())
    }
}
