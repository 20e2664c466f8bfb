//! Default parameter sets for the four schemes and for population transfer.

use crate::pulse::PulseEnvelope;
use crate::rates::RateSet;
use crate::scheme::SchemeKind;

/// Optical coherence decay rate of every upper–lower pair, 1/s.
pub const GAMMA_OPTICAL: f64 = 1e12;
/// Coherence between the two upper states of a four-level scheme, 1/s.
pub const GAMMA_UPPER_PAIR: f64 = 1.5e12;
/// Each radiative branch out of an upper state, 1/s.
pub const BRANCH_DECAY: f64 = 5e11;
/// Slow end of the dark–ground coherence decay range (1 μs).
pub const GAMMA_CB_SLOW: f64 = 1e6;
/// Fast end of the dark–ground coherence decay range (30 ns).
pub const GAMMA_CB_FAST: f64 = 1.0 / 30e-9;
/// e·Å
pub const DIPOLE_EA: f64 = 6.0;
/// Nanotube number density used by susceptibility magnitudes, 1/cm³.
pub const DEFAULT_DENSITY_CM3: f64 = 1e10;

/// Threshold intensity window quoted for the 30 ns – 1 μs range, W/cm².
pub const QUOTED_THRESHOLD_WINDOW: (f64, f64) = (0.2, 20.0);

/// Full-width at half-maximum of the transfer pulses, s.
pub const STIRAP_FWHM: f64 = 100e-15;
/// Pulse area of each transfer pulse, rad.
pub const STIRAP_AREA: f64 = 10.0 * std::f64::consts::PI;
pub const STIRAP_DECAY_AB: f64 = 1e11;
pub const STIRAP_DECAY_AC: f64 = 1e10;

/// Relaxation constants of `kind` with dark–ground coherence rate `gamma_cb`.
///
/// The dark state c relaxes to b at `gamma_cb`; with `gamma_cb = 0` it is
/// stable.
pub fn preset_rates(kind: SchemeKind, gamma_cb: f64) -> RateSet {
    let mut r = RateSet {
        dipole_ea: DIPOLE_EA,
        ..RateSet::default()
    };
    r.set_coherence("a", "b", GAMMA_OPTICAL);
    r.set_coherence("a", "c", GAMMA_OPTICAL);
    r.set_coherence("c", "b", gamma_cb);
    r.set_decay("a", "b", BRANCH_DECAY);
    r.set_decay("a", "c", BRANCH_DECAY);
    if gamma_cb > 0.0 {
        r.set_decay("c", "b", gamma_cb);
    }
    match kind {
        SchemeKind::Lambda => {}
        SchemeKind::DoubleLambda | SchemeKind::NScheme => {
            r.set_coherence("d", "b", GAMMA_OPTICAL);
            r.set_coherence("d", "c", GAMMA_OPTICAL);
            r.set_coherence("a", "d", GAMMA_UPPER_PAIR);
            r.set_decay("d", "b", BRANCH_DECAY);
            r.set_decay("d", "c", BRANCH_DECAY);
        }
        SchemeKind::LadderLambda => {
            r.set_coherence("d", "b", GAMMA_OPTICAL);
            r.set_coherence("d", "c", GAMMA_OPTICAL);
            r.set_coherence("a", "d", GAMMA_UPPER_PAIR);
            r.set_decay("d", "a", BRANCH_DECAY);
            r.set_decay("d", "c", BRANCH_DECAY);
        }
    }
    r
}

/// Λ rates for population transfer: weak radiative decay on the pulse time scale.
pub fn stirap_rates() -> RateSet {
    let mut r = RateSet {
        dipole_ea: DIPOLE_EA,
        ..RateSet::default()
    };
    r.set_coherence("a", "b", GAMMA_OPTICAL);
    r.set_coherence("a", "c", GAMMA_OPTICAL);
    r.set_coherence("c", "b", GAMMA_CB_SLOW);
    r.set_decay("a", "b", STIRAP_DECAY_AB);
    r.set_decay("a", "c", STIRAP_DECAY_AC);
    r.set_decay("c", "b", GAMMA_CB_SLOW);
    r
}

/// Peak Rabi frequency of a Gaussian with the given area and FWHM.
pub fn gaussian_peak_for_area(area: f64, fwhm: f64) -> f64 {
    area / PulseEnvelope::gaussian(0.0, fwhm, 1.0).area()
}

/// Stokes and pump envelopes separated by `delay = t_pump − t_stokes`,
/// centred on t = 0. Positive delay is the counterintuitive order.
pub fn stirap_pulse_pair(fwhm: f64, peak: f64, delay: f64) -> (PulseEnvelope, PulseEnvelope) {
    (
        PulseEnvelope::gaussian(-0.5 * delay, fwhm, peak),
        PulseEnvelope::gaussian(0.5 * delay, fwhm, peak),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::{build_dissipator, realized_coherence_rate};
    use crate::scheme::{build_scheme, SchemeParams};

    #[test]
    fn presets_are_realizable() {
        for kind in SchemeKind::ALL {
            for g in [0.0, GAMMA_CB_SLOW, GAMMA_CB_FAST, 1e9] {
                let s = build_scheme(kind, &SchemeParams::default()).unwrap();
                let rates = preset_rates(kind, g);
                let ch = build_dissipator(&s, &rates).unwrap();
                for c in &rates.coherences {
                    let (i, j) = (s.index_of(&c.i).unwrap(), s.index_of(&c.j).unwrap());
                    let r = realized_coherence_rate(&ch, i, j);
                    assert!(
                        (r - c.gamma).abs() <= 1e-9 * c.gamma.max(1.0),
                        "{kind} {g} {}{}",
                        c.i,
                        c.j
                    );
                }
            }
        }
        let s = build_scheme(SchemeKind::Lambda, &SchemeParams::default()).unwrap();
        build_dissipator(&s, &stirap_rates()).unwrap();
    }

    #[test]
    fn dark_coherence_is_slowest() {
        for kind in SchemeKind::ALL {
            let r = preset_rates(kind, GAMMA_CB_FAST);
            let cb = r.coherence("c", "b").unwrap();
            assert!(cb <= r.coherence("a", "b").unwrap());
            assert!(cb <= r.coherence("a", "c").unwrap());
        }
    }

    #[test]
    fn pulse_area_is_respected() {
        let peak = gaussian_peak_for_area(STIRAP_AREA, STIRAP_FWHM);
        let (s, p) = stirap_pulse_pair(STIRAP_FWHM, peak, 50e-15);
        assert!((s.area() / STIRAP_AREA - 1.0).abs() < 1e-14);
        assert!((p.area() / STIRAP_AREA - 1.0).abs() < 1e-14);
        assert!(s.eval(-25e-15) == peak && p.eval(25e-15) == peak);
    }
}
