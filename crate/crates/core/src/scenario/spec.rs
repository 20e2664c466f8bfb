use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytics::SusceptibilityMode;
use crate::error::{invalid, Result};
use crate::integrate::EvolveOptions;
use crate::presets::{
    preset_rates, stirap_rates, DEFAULT_DENSITY_CM3, GAMMA_CB_FAST, GAMMA_CB_SLOW, STIRAP_AREA, STIRAP_FWHM,
};
use crate::rates::RateSet;
use crate::scheme::{DriveField, SchemeKind, SchemeParams};
use crate::units::ConversionMode;

/// Drive multiple of threshold for the transparency scan. With coupling −Ω/2
/// the line-centre absorption falls as 1/(1 + x²/4), so x must exceed 20 for
/// a hundredfold reduction.
pub const EIT_DRIVE_LEVEL: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    CptScan,
    EitScan,
    ThresholdMap,
    StirapDelayScan,
    FwmScan,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 5] = [
        ScenarioName::CptScan,
        ScenarioName::EitScan,
        ScenarioName::ThresholdMap,
        ScenarioName::StirapDelayScan,
        ScenarioName::FwmScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioName::CptScan => "cpt_scan",
            ScenarioName::EitScan => "eit_scan",
            ScenarioName::ThresholdMap => "threshold_map",
            ScenarioName::StirapDelayScan => "stirap_delay_scan",
            ScenarioName::FwmScan => "fwm_scan",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioName::CptScan => "Λ excited population and probe coherence vs two-photon detuning",
            ScenarioName::EitScan => "Λ probe susceptibility and group index, drive on and off",
            ScenarioName::ThresholdMap => "dark-state threshold Rabi frequency and intensity vs γ_cb",
            ScenarioName::StirapDelayScan => "pulsed b→c transfer efficiency vs pump–Stokes delay",
            ScenarioName::FwmScan => "double-Λ generated-field coherence vs probe or preparation strength",
        }
    }

    /// Sweep parameters this scenario accepts; the first is the default.
    pub fn allowed_parameters(self) -> &'static [SweepParameter] {
        match self {
            ScenarioName::CptScan => &[SweepParameter::TwoPhotonDetuning],
            ScenarioName::EitScan => &[SweepParameter::ProbeDetuning],
            ScenarioName::ThresholdMap => &[SweepParameter::GammaCb],
            ScenarioName::StirapDelayScan => &[SweepParameter::Delay],
            ScenarioName::FwmScan => &[SweepParameter::Rabi3, SweepParameter::PreparationRabi],
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioName {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.name() == s)
            .ok_or_else(|| invalid("scenario", format!("unknown scenario '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// δ₁ − δ₂, rad/s.
    TwoPhotonDetuning,
    /// δ₁, rad/s.
    ProbeDetuning,
    /// Dark–ground coherence decay rate, 1/s.
    GammaCb,
    /// t_pump − t_stokes, s.
    Delay,
    /// Ω₃, rad/s.
    #[serde(rename = "rabi_3")]
    Rabi3,
    /// Ω₁ = Ω₂, rad/s.
    PreparationRabi,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 6] = [
        SweepParameter::TwoPhotonDetuning,
        SweepParameter::ProbeDetuning,
        SweepParameter::GammaCb,
        SweepParameter::Delay,
        SweepParameter::Rabi3,
        SweepParameter::PreparationRabi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::TwoPhotonDetuning => "two_photon_detuning",
            SweepParameter::ProbeDetuning => "probe_detuning",
            SweepParameter::GammaCb => "gamma_cb",
            SweepParameter::Delay => "delay",
            SweepParameter::Rabi3 => "rabi_3",
            SweepParameter::PreparationRabi => "preparation_rabi",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            SweepParameter::TwoPhotonDetuning
            | SweepParameter::ProbeDetuning
            | SweepParameter::Rabi3
            | SweepParameter::PreparationRabi => "rad/s",
            SweepParameter::GammaCb => "1/s",
            SweepParameter::Delay => "s",
        }
    }
}

impl FromStr for SweepParameter {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepParameter::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| invalid("sweep.parameter", format!("unknown parameter '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Geometric,
    /// x = scale·sinh(u) with u uniform: dense near zero, sparse in the wings.
    Sinh {
        scale: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

/// Uniform points with exact mirror symmetry when start = −stop.
fn symmetric_linear(start: f64, stop: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![start];
    }
    let mid = 0.5 * (start + stop);
    let half = 0.5 * (stop - start);
    let m = (n - 1) as f64;
    (0..n)
        .map(|k| {
            if k == 0 {
                start
            } else if k == n - 1 {
                stop
            } else {
                mid + half * ((2 * k) as f64 - m) / m
            }
        })
        .collect()
}

fn asinh_odd(x: f64) -> f64 {
    x.signum() * x.abs().asinh()
}

impl Sweep {
    pub fn grid(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.points;
        let g = match self.spacing {
            Spacing::Linear => symmetric_linear(self.start, self.stop, n),
            Spacing::Geometric => {
                let (l0, l1) = (self.start.abs().ln(), self.stop.abs().ln());
                let sign = self.start.signum();
                let mut g: Vec<f64> = symmetric_linear(l0, l1, n)
                    .into_iter()
                    .map(|l| sign * l.exp())
                    .collect();
                g[0] = self.start;
                g[n - 1] = self.stop;
                g
            }
            Spacing::Sinh { scale } => {
                let (u0, u1) = (asinh_odd(self.start / scale), asinh_odd(self.stop / scale));
                let mut g: Vec<f64> = symmetric_linear(u0, u1, n)
                    .into_iter()
                    .map(|u| scale * u.signum() * u.abs().sinh())
                    .collect();
                g[0] = self.start;
                g[n - 1] = self.stop;
                g
            }
        };
        if g.windows(2).any(|w| !(w[1] > w[0]) && !(w[1] < w[0])) {
            return Err(invalid("sweep", "grid is not strictly monotone"));
        }
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(invalid("sweep", "start and stop must be finite"));
        }
        if self.points == 0 {
            return Err(invalid("sweep.points", "must be at least 1"));
        }
        if self.points > 1 && self.start == self.stop {
            return Err(invalid(
                "sweep",
                "start equals stop; grid would not be strictly monotone",
            ));
        }
        match self.spacing {
            Spacing::Linear => {}
            Spacing::Geometric => {
                if self.start == 0.0 || self.stop == 0.0 || self.start.signum() != self.stop.signum() {
                    return Err(invalid(
                        "sweep.spacing",
                        "geometric spacing needs non-zero endpoints of one sign",
                    ));
                }
            }
            Spacing::Sinh { scale } => {
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(invalid("sweep.spacing", "sinh scale must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// Gaussian transfer pulses of equal width and area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSettings {
    /// s
    pub fwhm: f64,
    /// rad
    pub area: f64,
}

impl Default for PulseSettings {
    fn default() -> Self {
        PulseSettings {
            fwhm: STIRAP_FWHM,
            area: STIRAP_AREA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Local error tolerance of time integration.
    pub evolve_tol: f64,
    pub max_steps: usize,
    /// States reported (and checked) per time integration.
    pub output_points: usize,
    /// Evaluate grid points on a worker pool.
    pub parallel: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let e = EvolveOptions::default();
        SolverSettings {
            evolve_tol: e.tol,
            max_steps: e.max_steps,
            output_points: 101,
            parallel: true,
        }
    }
}

impl SolverSettings {
    pub fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            tol: self.evolve_tol,
            max_steps: self.max_steps,
        }
    }
}

/// Everything needed to reproduce one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: ScenarioName,
    pub scheme: SchemeKind,
    pub scheme_params: SchemeParams,
    pub rates: RateSet,
    /// One CW field per slot; the scenario overwrites the swept quantity.
    pub fields: Vec<DriveField>,
    /// When set, drive Rabi frequencies are this multiple of the dark-state
    /// threshold √(γ_cb γ_ab) (total, split equally for the dark-state scan).
    pub drive_level: Option<f64>,
    pub sweep: Sweep,
    /// 1/cm³
    pub density_cm3: f64,
    pub susceptibility_mode: SusceptibilityMode,
    pub conversion: ConversionMode,
    pub pulse: PulseSettings,
    pub solver: SolverSettings,
}

impl ScenarioSpec {
    /// The stock configuration of each scenario.
    pub fn preset(name: ScenarioName) -> Self {
        let lambda = |fields: Vec<DriveField>, level: Option<f64>, sweep: Sweep| ScenarioSpec {
            scenario: name,
            scheme: SchemeKind::Lambda,
            scheme_params: SchemeParams::default(),
            rates: preset_rates(SchemeKind::Lambda, GAMMA_CB_SLOW),
            fields,
            drive_level: level,
            sweep,
            density_cm3: DEFAULT_DENSITY_CM3,
            susceptibility_mode: SusceptibilityMode::Numeric,
            conversion: ConversionMode::PaperFit,
            pulse: PulseSettings::default(),
            solver: SolverSettings::default(),
        };
        match name {
            ScenarioName::CptScan => lambda(
                vec![DriveField::off(), DriveField::off()],
                Some(10.0),
                Sweep {
                    parameter: SweepParameter::TwoPhotonDetuning,
                    start: -2e9,
                    stop: 2e9,
                    points: 201,
                    spacing: Spacing::Linear,
                },
            ),
            ScenarioName::EitScan => ScenarioSpec {
                density_cm3: 1e12,
                ..lambda(
                    vec![DriveField::cw(1e7, 0.0), DriveField::off()],
                    Some(EIT_DRIVE_LEVEL),
                    Sweep {
                        parameter: SweepParameter::ProbeDetuning,
                        start: -3e12,
                        stop: 3e12,
                        points: 201,
                        spacing: Spacing::Sinh { scale: 2.5e6 },
                    },
                )
            },
            ScenarioName::ThresholdMap => lambda(
                vec![DriveField::off(), DriveField::off()],
                None,
                Sweep {
                    parameter: SweepParameter::GammaCb,
                    start: GAMMA_CB_SLOW,
                    stop: GAMMA_CB_FAST,
                    points: 21,
                    spacing: Spacing::Geometric,
                },
            ),
            ScenarioName::StirapDelayScan => ScenarioSpec {
                rates: stirap_rates(),
                ..lambda(
                    vec![DriveField::off(), DriveField::off()],
                    None,
                    Sweep {
                        parameter: SweepParameter::Delay,
                        start: -1.5 * STIRAP_FWHM,
                        stop: 1.5 * STIRAP_FWHM,
                        points: 31,
                        spacing: Spacing::Linear,
                    },
                )
            },
            ScenarioName::FwmScan => ScenarioSpec {
                scheme: SchemeKind::DoubleLambda,
                rates: preset_rates(SchemeKind::DoubleLambda, GAMMA_CB_SLOW),
                ..lambda(
                    vec![
                        DriveField::cw(1e10, 0.0),
                        DriveField::cw(1e10, 0.0),
                        DriveField::off(),
                        DriveField::off(),
                    ],
                    None,
                    Sweep {
                        parameter: SweepParameter::Rabi3,
                        start: 0.0,
                        stop: 1e9,
                        points: 21,
                        spacing: Spacing::Linear,
                    },
                )
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.scenario.allowed_parameters().contains(&self.sweep.parameter) {
            return Err(invalid(
                "sweep.parameter",
                format!(
                    "'{}' is not a parameter of {} (expected one of: {})",
                    self.sweep.parameter.name(),
                    self.scenario,
                    self.scenario
                        .allowed_parameters()
                        .iter()
                        .map(|p| p.name())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            ));
        }
        self.sweep.validate()?;
        let required = match self.scenario {
            ScenarioName::FwmScan => SchemeKind::DoubleLambda,
            _ => SchemeKind::Lambda,
        };
        if self.scheme != required {
            return Err(invalid(
                "scheme",
                format!("{} runs on the {} scheme, got {}", self.scenario, required, self.scheme),
            ));
        }
        if self.fields.len() < self.scheme.topology().len() {
            return Err(crate::error::Error::MissingField(self.fields.len() + 1));
        }
        if let Some(x) = self.drive_level {
            if !(x > 0.0 && x.is_finite()) {
                return Err(invalid("drive_level", format!("must be positive, got {x}")));
            }
        }
        if !(self.density_cm3 >= 0.0 && self.density_cm3.is_finite()) {
            return Err(invalid("density", "must be finite and >= 0"));
        }
        if !(self.pulse.fwhm > 0.0 && self.pulse.area >= 0.0) {
            return Err(invalid("pulse", "fwhm must be > 0 and area >= 0"));
        }
        if !(self.solver.evolve_tol > 0.0) || self.solver.max_steps == 0 || self.solver.output_points < 2 {
            return Err(invalid(
                "solver",
                "tolerance > 0, max_steps > 0 and output_points >= 2 required",
            ));
        }
        self.rates.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for n in ScenarioName::ALL {
            ScenarioSpec::preset(n).validate().unwrap();
            assert_eq!(n.name().parse::<ScenarioName>().unwrap(), n);
        }
    }

    #[test]
    fn symmetric_grid_is_exactly_mirrored() {
        for spacing in [Spacing::Linear, Spacing::Sinh { scale: 2.5e6 }] {
            let g = Sweep {
                parameter: SweepParameter::ProbeDetuning,
                start: -3e12,
                stop: 3e12,
                points: 201,
                spacing,
            }
            .grid()
            .unwrap();
            assert_eq!(g[100], 0.0);
            for k in 0..201 {
                assert_eq!(g[k], -g[200 - k]);
            }
        }
    }

    #[test]
    fn geometric_endpoints_exact() {
        let g = ScenarioSpec::preset(ScenarioName::ThresholdMap).sweep.grid().unwrap();
        assert_eq!(g[0], GAMMA_CB_SLOW);
        assert_eq!(g[20], GAMMA_CB_FAST);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn refinement_keeps_existing_points() {
        let coarse = Sweep {
            parameter: SweepParameter::TwoPhotonDetuning,
            start: -2e9,
            stop: 2e9,
            points: 11,
            spacing: Spacing::Linear,
        };
        let fine = Sweep { points: 21, ..coarse };
        let (c, f) = (coarse.grid().unwrap(), fine.grid().unwrap());
        for k in 0..11 {
            assert!((c[k] - f[2 * k]).abs() <= 1e-15 * 2e9);
        }
    }

    #[test]
    fn bad_sweeps_are_rejected() {
        let mut s = ScenarioSpec::preset(ScenarioName::CptScan);
        s.sweep.parameter = SweepParameter::Delay;
        assert!(s.validate().is_err());
        let mut s = ScenarioSpec::preset(ScenarioName::ThresholdMap);
        s.sweep.start = 0.0;
        assert!(s.validate().is_err());
        let mut s = ScenarioSpec::preset(ScenarioName::CptScan);
        s.sweep.stop = s.sweep.start;
        assert!(s.validate().is_err());
        let mut s = ScenarioSpec::preset(ScenarioName::FwmScan);
        s.scheme = SchemeKind::Lambda;
        assert!(s.validate().is_err());
    }

    #[test]
    fn spec_serde_round_trip() {
        for n in ScenarioName::ALL {
            let s = ScenarioSpec::preset(n);
            let json = serde_json::to_string(&s).unwrap();
            let back: ScenarioSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(back, s);
        }
    }
}
