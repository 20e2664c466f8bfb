//! Fixed physical constants (CODATA 2018) and the conversions built on them.

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// One ångström in metres.
pub const ANGSTROM: f64 = 1e-10;
/// One debye in C·m.
pub const DEBYE: f64 = 3.335_640_952e-30;

/// Angular frequency (rad/s) corresponding to an energy in eV.
pub fn ev_to_rad_per_s(ev: f64) -> f64 {
    ev * ELEMENTARY_CHARGE / HBAR
}

pub fn rad_per_s_to_ev(omega: f64) -> f64 {
    omega * HBAR / ELEMENTARY_CHARGE
}

/// Dipole moment in e·Å to C·m.
pub fn dipole_ea_to_si(d_ea: f64) -> f64 {
    d_ea * ELEMENTARY_CHARGE * ANGSTROM
}

/// W/cm² to W/m².
pub fn w_per_cm2_to_si(p: f64) -> f64 {
    p * 1e4
}

/// Number density per cm³ to per m³.
pub fn per_cm3_to_si(n: f64) -> f64 {
    n * 1e6
}
