use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{invalid, Error, Result};
use crate::liouvillian::cw_steady_state;
use crate::rates::RateSet;
use crate::scheme::{DriveField, LevelScheme, SchemeKind, B, C};

/// Slot of the generated field in the double-Λ scheme.
const GENERATED_SLOT: usize = 4;

fn require_double_lambda(scheme: &LevelScheme) -> Result<()> {
    if scheme.kind != SchemeKind::DoubleLambda {
        return Err(Error::WrongScheme {
            operation: "four-wave-mixing figure of merit",
            expected: SchemeKind::DoubleLambda.name().to_string(),
            got: scheme.kind.name().to_string(),
        });
    }
    Ok(())
}

/// |⟨upper|ρ|lower⟩| on the generated (slot 4) transition: the local source
/// of the generated field.
pub fn fwm_figure_of_merit(scheme: &LevelScheme, rho: &DensityMatrix) -> Result<f64> {
    require_double_lambda(scheme)?;
    let t = scheme
        .transition(GENERATED_SLOT)
        .ok_or_else(|| invalid("scheme", "no generated transition"))?;
    Ok(rho.coherence(t.upper, t.lower).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FwmPoint {
    /// Figure of merit on the generated transition.
    pub figure_of_merit: f64,
    /// |ρ_bc| prepared by the first two fields.
    pub ground_coherence: f64,
}

/// Stationary double-Λ state with slots 1–3 driven and slot 4 left free.
pub fn fwm_steady_state(scheme: &LevelScheme, fields: &[DriveField], rates: &RateSet) -> Result<FwmPoint> {
    require_double_lambda(scheme)?;
    if fields.len() >= GENERATED_SLOT && !fields[GENERATED_SLOT - 1].is_off() {
        return Err(invalid("field 4", "the generated field must not be driven"));
    }
    let rho = cw_steady_state(scheme, fields, rates)?;
    Ok(FwmPoint {
        figure_of_merit: fwm_figure_of_merit(scheme, &rho)?,
        ground_coherence: rho.coherence(B, C).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset_rates;
    use crate::scheme::{build_scheme, SchemeParams};

    fn run(o1: f64, o2: f64, o3: f64) -> FwmPoint {
        let s = build_scheme(SchemeKind::DoubleLambda, &SchemeParams::default()).unwrap();
        let fields = [
            DriveField::cw(o1, 0.0),
            DriveField::cw(o2, 0.0),
            DriveField::cw(o3, 0.0),
            DriveField::off(),
        ];
        fwm_steady_state(&s, &fields, &preset_rates(SchemeKind::DoubleLambda, 1e6)).unwrap()
    }

    #[test]
    fn no_probe_no_signal() {
        assert!(run(1e10, 1e10, 0.0).figure_of_merit < 1e-15);
    }

    #[test]
    fn no_preparation_no_signal() {
        let prepared = run(1e10, 1e10, 1e10).figure_of_merit;
        assert!(prepared > 0.0);
        assert!(run(0.0, 1e10, 1e10).figure_of_merit < 1e-9 * prepared);
    }

    #[test]
    fn wrong_scheme_and_driven_output_are_rejected() {
        let s = build_scheme(SchemeKind::Lambda, &SchemeParams::default()).unwrap();
        assert!(matches!(
            fwm_figure_of_merit(&s, &DensityMatrix::basis(3, 1)),
            Err(Error::WrongScheme { .. })
        ));
        let s = build_scheme(SchemeKind::DoubleLambda, &SchemeParams::default()).unwrap();
        let fields = vec![DriveField::cw(1e9, 0.0); 4];
        assert!(fwm_steady_state(&s, &fields, &preset_rates(SchemeKind::DoubleLambda, 1e6)).is_err());
    }
}
