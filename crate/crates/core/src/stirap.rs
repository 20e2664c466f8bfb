//! Pulsed population transfer b → c in the Λ scheme.

use crate::density::DensityMatrix;
use crate::error::{invalid, Error, Result};
use crate::integrate::{evolve, linear_grid, DrivenSystem, EvolveOptions, Trajectory};
use crate::pulse::PulseEnvelope;
use crate::rates::{build_dissipator, RateSet};
use crate::scheme::{DriveField, LevelScheme, RwaHamiltonian, SchemeKind, B, C};

/// Below this normalized overlap the pulses are flagged as not overlapping.
pub const OVERLAP_WARN: f64 = 1e-3;
const OVERLAP_SAMPLES: usize = 4001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StirapOptions {
    /// Pump detuning on a–b, rad/s.
    pub pump_detuning: f64,
    /// Stokes detuning on a–c, rad/s.
    pub stokes_detuning: f64,
    pub evolve: EvolveOptions,
    /// Number of reported (and checked) states across the pulse window.
    pub output_points: usize,
}

impl Default for StirapOptions {
    fn default() -> Self {
        StirapOptions {
            pump_detuning: 0.0,
            stokes_detuning: 0.0,
            evolve: EvolveOptions::default(),
            output_points: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StirapResult {
    /// Final population of c.
    pub efficiency: f64,
    pub final_state: DensityMatrix,
    /// ∫Ω_P Ω_S dt / √(∫Ω_P² dt ∫Ω_S² dt)
    pub overlap: f64,
    /// False when the pulses do not meaningfully overlap.
    pub pulses_overlap: bool,
    pub trajectory: Trajectory,
}

/// Normalized overlap of two envelopes over the union of their supports.
pub fn pulse_overlap(a: &PulseEnvelope, b: &PulseEnvelope) -> f64 {
    let (Some((a0, a1)), Some((b0, b1))) = (a.support(), b.support()) else {
        return 1.0;
    };
    let grid = linear_grid(a0.min(b0), a1.max(b1), OVERLAP_SAMPLES);
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for t in &grid {
        let (x, y) = (a.eval(*t), b.eval(*t));
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        0.0
    } else {
        ab / (aa * bb).sqrt()
    }
}

/// Starts in |b⟩, drives a–b with `pump` and a–c with `stokes`, and reports
/// the population reaching c once both pulses are over.
pub fn stirap_run(
    scheme: &LevelScheme,
    stokes: &PulseEnvelope,
    pump: &PulseEnvelope,
    rates: &RateSet,
    opts: &StirapOptions,
) -> Result<StirapResult> {
    if scheme.kind != SchemeKind::Lambda {
        return Err(Error::WrongScheme {
            operation: "population transfer",
            expected: SchemeKind::Lambda.name().to_string(),
            got: scheme.kind.name().to_string(),
        });
    }
    let (Some((s0, s1)), Some((p0, p1))) = (stokes.support(), pump.support()) else {
        return Err(invalid("pulses", "transfer pulses need finite support"));
    };
    if opts.output_points < 2 {
        return Err(invalid("output_points", "need at least 2"));
    }
    let fields = [
        DriveField::pulsed(pump.clone(), opts.pump_detuning),
        DriveField::pulsed(stokes.clone(), opts.stokes_detuning),
    ];
    let h = RwaHamiltonian::new(scheme, &fields)?;
    let system = DrivenSystem::new(h, &build_dissipator(scheme, rates)?)?;

    let overlap = pulse_overlap(pump, stokes);
    let pulses_overlap = overlap >= OVERLAP_WARN;
    if !pulses_overlap {
        log::warn!("pump and Stokes pulses do not overlap (normalized overlap {overlap:e}); transfer is not adiabatic");
    }

    let grid = linear_grid(s0.min(p0), s1.max(p1), opts.output_points);
    let trajectory = evolve(&DensityMatrix::basis(scheme.dim(), B), &system, &grid, &opts.evolve)?;
    let final_state = trajectory.last().clone();
    Ok(StirapResult {
        efficiency: final_state.population(C).clamp(0.0, 1.0),
        final_state,
        overlap,
        pulses_overlap,
        trajectory,
    })
}
