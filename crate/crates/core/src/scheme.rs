//! Level schemes, drive fields and the rotating-frame Hamiltonian.
//!
//! States are labelled `a` (bright exciton), `b` (ground), `c` (dark exciton)
//! and, for the four-level schemes, `d` (a second upper level). Transitions are
//! stored as (upper, lower, slot) where the slot number 1..=4 names the drive
//! field Ω₁..Ω₄ addressing it.
//!
//! Coupling convention: a field of Rabi frequency Ω and phase φ on the
//! transition upper–lower contributes −(Ω/2)e^{iφ} at (upper, lower) and its
//! conjugate at (lower, upper). Each driven transition gets its own rotating
//! frame, chained outward from the ground state, so the diagonal carries only
//! detunings δ = ω_transition − ν.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::ev_to_rad_per_s;
use crate::error::{invalid, Error, Result};
use crate::linalg::CMatrix;
use crate::pulse::PulseEnvelope;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Lambda,
    DoubleLambda,
    NScheme,
    LadderLambda,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::Lambda,
        SchemeKind::DoubleLambda,
        SchemeKind::NScheme,
        SchemeKind::LadderLambda,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Lambda => "lambda",
            SchemeKind::DoubleLambda => "double_lambda",
            SchemeKind::NScheme => "n_scheme",
            SchemeKind::LadderLambda => "ladder_lambda",
        }
    }

    pub fn state_count(self) -> usize {
        match self {
            SchemeKind::Lambda => 3,
            _ => 4,
        }
    }

    /// Canonical (upper, lower, slot) topology over state indices a=0, b=1, c=2, d=3.
    pub fn topology(self) -> &'static [(usize, usize, usize)] {
        match self {
            SchemeKind::Lambda => &[(A, B, 1), (A, C, 2)],
            SchemeKind::DoubleLambda => &[(A, B, 1), (A, C, 2), (D, C, 3), (D, B, 4)],
            SchemeKind::NScheme => &[(A, B, 1), (A, C, 2), (D, C, 3)],
            SchemeKind::LadderLambda => &[(A, B, 1), (D, A, 2), (D, C, 3)],
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(SchemeKind::Lambda),
            "double_lambda" => Ok(SchemeKind::DoubleLambda),
            "n_scheme" => Ok(SchemeKind::NScheme),
            "ladder_lambda" => Ok(SchemeKind::LadderLambda),
            other => Err(Error::UnknownScheme(other.to_string())),
        }
    }
}

pub const A: usize = 0;
pub const B: usize = 1;
pub const C: usize = 2;
pub const D: usize = 3;

const LABELS: [&str; 4] = ["a", "b", "c", "d"];

/// Energetics used to place the bare levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    /// Bright exciton above the dark exciton, eV.
    pub bright_dark_splitting_ev: f64,
    /// Ground to bright exciton, eV.
    pub optical_gap_ev: f64,
    /// Ground to the fourth level `d` (four-level schemes only), eV.
    pub upper_level_ev: f64,
}

impl Default for SchemeParams {
    fn default() -> Self {
        SchemeParams {
            bright_dark_splitting_ev: 0.010,
            optical_gap_ev: 1.2,
            upper_level_ev: 2.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub upper: usize,
    pub lower: usize,
    pub slot: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelScheme {
    pub kind: SchemeKind,
    pub states: Vec<String>,
    pub transitions: Vec<Transition>,
    /// Bare angular frequency of each state, rad/s, ground at zero.
    pub bare_frequencies: Vec<f64>,
    pub bright_dark_splitting_ev: f64,
}

impl LevelScheme {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::UnknownState(label.to_string()))
    }

    pub fn slot_count(&self) -> usize {
        self.transitions.iter().map(|t| t.slot).max().unwrap_or(0)
    }

    pub fn transition(&self, slot: usize) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.slot == slot)
    }

    /// ω_upper − ω_lower for the transition addressed by `slot`.
    pub fn transition_frequency(&self, slot: usize) -> Result<f64> {
        let t = self.transition(slot).ok_or(Error::MissingField(slot))?;
        Ok(self.bare_frequencies[t.upper] - self.bare_frequencies[t.lower])
    }

    pub fn validate(&self) -> Result<()> {
        let expected = self.kind.topology();
        let got: Vec<_> = self.transitions.iter().map(|t| (t.upper, t.lower, t.slot)).collect();
        if got != expected || self.states.len() != self.kind.state_count() {
            return Err(invalid(
                "transitions",
                format!("topology does not match the canonical {} graph", self.kind),
            ));
        }
        if self.bare_frequencies.len() != self.states.len() {
            return Err(Error::DimensionMismatch {
                expected: self.states.len(),
                got: self.bare_frequencies.len(),
            });
        }
        if !(self.bright_dark_splitting_ev > 0.0) {
            return Err(invalid("bright_dark_splitting", "must be positive"));
        }
        Ok(())
    }
}

/// Builds the canonical level model for `kind`.
pub fn build_scheme(kind: SchemeKind, params: &SchemeParams) -> Result<LevelScheme> {
    let SchemeParams {
        bright_dark_splitting_ev: split,
        optical_gap_ev: gap,
        upper_level_ev: upper,
    } = *params;
    if !(split > 0.0 && split.is_finite()) {
        return Err(invalid(
            "bright_dark_splitting",
            format!("must be positive, got {split}"),
        ));
    }
    if !(gap > split && gap.is_finite()) {
        return Err(invalid(
            "optical_gap",
            format!("must exceed the bright-dark splitting ({split} eV), got {gap}"),
        ));
    }
    let n = kind.state_count();
    if n == 4 && !(upper > gap && upper.is_finite()) {
        return Err(invalid(
            "upper_level",
            format!("must lie above the optical gap ({gap} eV), got {upper}"),
        ));
    }
    let energies_ev = [gap, 0.0, gap - split, upper];
    let scheme = LevelScheme {
        kind,
        states: LABELS[..n].iter().map(|s| s.to_string()).collect(),
        transitions: kind
            .topology()
            .iter()
            .map(|&(upper, lower, slot)| Transition { upper, lower, slot })
            .collect(),
        bare_frequencies: energies_ev[..n].iter().map(|&e| ev_to_rad_per_s(e)).collect(),
        bright_dark_splitting_ev: split,
    };
    scheme.validate()?;
    Ok(scheme)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rabi {
    Constant(f64),
    Pulse(PulseEnvelope),
}

/// One coherent beam addressing one transition slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveField {
    /// δ = ω_transition − ν, rad/s.
    pub detuning: f64,
    pub rabi: Rabi,
    /// rad
    pub phase: f64,
}

impl DriveField {
    pub fn cw(rabi: f64, detuning: f64) -> Self {
        DriveField {
            detuning,
            rabi: Rabi::Constant(rabi),
            phase: 0.0,
        }
    }

    pub fn pulsed(envelope: PulseEnvelope, detuning: f64) -> Self {
        DriveField {
            detuning,
            rabi: Rabi::Pulse(envelope),
            phase: 0.0,
        }
    }

    pub fn off() -> Self {
        DriveField::cw(0.0, 0.0)
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn rabi_at(&self, t: f64) -> f64 {
        match &self.rabi {
            Rabi::Constant(r) => *r,
            Rabi::Pulse(p) => p.eval(t),
        }
    }

    pub fn is_off(&self) -> bool {
        match &self.rabi {
            Rabi::Constant(r) => *r == 0.0,
            Rabi::Pulse(p) => p.is_zero(),
        }
    }

    pub fn is_cw(&self) -> bool {
        matches!(self.rabi, Rabi::Constant(_))
    }

    pub fn validate(&self, slot: usize) -> Result<()> {
        if !self.detuning.is_finite() || !self.phase.is_finite() {
            return Err(invalid(format!("field {slot}"), "detuning and phase must be finite"));
        }
        match &self.rabi {
            Rabi::Constant(r) if !(*r >= 0.0 && r.is_finite()) => Err(invalid(
                format!("field {slot}"),
                format!("Rabi frequency must be finite and >= 0, got {r}"),
            )),
            Rabi::Constant(_) => Ok(()),
            Rabi::Pulse(p) => p.validate(),
        }
    }
}

/// δ = ω_transition − ν.
pub fn detuning_from_carrier(transition_frequency: f64, carrier: f64) -> f64 {
    transition_frequency - carrier
}

/// Rotating-frame Hamiltonian with its frame resolved once; [`RwaHamiltonian::at`]
/// evaluates it at any time.
#[derive(Debug, Clone)]
pub struct RwaHamiltonian {
    diagonal: Vec<f64>,
    couplings: Vec<(usize, usize, usize)>,
    fields: Vec<DriveField>,
}

/// Relative tolerance for the frequency-closure check on loop transitions.
const CLOSURE_TOL: f64 = 1e-9;

impl RwaHamiltonian {
    /// `fields[k]` drives slot k+1.
    pub fn new(scheme: &LevelScheme, fields: &[DriveField]) -> Result<Self> {
        let n_slots = scheme.slot_count();
        if fields.len() < n_slots {
            return Err(Error::MissingField(fields.len() + 1));
        }
        for (k, f) in fields.iter().enumerate() {
            f.validate(k + 1)?;
        }
        let dim = scheme.dim();
        let mut diag: Vec<Option<f64>> = vec![None; dim];
        let root = scheme.index_of("b")?;
        diag[root] = Some(0.0);
        // Spanning tree of frames: driven transitions first, in slot order,
        // so an undriven (generated) field never fixes a frame.
        let mut order: Vec<usize> = (0..scheme.transitions.len()).collect();
        order.sort_by_key(|&k| {
            let t = &scheme.transitions[k];
            (fields[t.slot - 1].is_off(), t.slot)
        });
        let mut used = vec![false; scheme.transitions.len()];
        let mut progress = true;
        while progress {
            progress = false;
            for &k in &order {
                let t = &scheme.transitions[k];
                if used[k] {
                    continue;
                }
                let delta = fields[t.slot - 1].detuning;
                match (diag[t.upper], diag[t.lower]) {
                    (None, Some(l)) => diag[t.upper] = Some(l + delta),
                    (Some(u), None) => diag[t.lower] = Some(u - delta),
                    _ => continue,
                }
                used[k] = true;
                progress = true;
                break;
            }
        }
        let diagonal: Vec<f64> = diag
            .into_iter()
            .enumerate()
            .map(|(i, d)| d.ok_or_else(|| invalid("scheme", format!("state {i} is not connected"))))
            .collect::<Result<_>>()?;

        // Transitions closing a loop inherit their frame from the chain; a
        // driven field there must be consistent with it.
        let scale: f64 = fields.iter().map(|f| f.detuning.abs()).sum::<f64>().max(1.0);
        for (k, t) in scheme.transitions.iter().enumerate() {
            if used[k] {
                continue;
            }
            let f = &fields[t.slot - 1];
            let implied = diagonal[t.upper] - diagonal[t.lower];
            let mismatch = implied - f.detuning;
            if !f.is_off() && mismatch.abs() > CLOSURE_TOL * scale {
                return Err(Error::FrequencyClosure { slot: t.slot, mismatch });
            }
        }

        Ok(RwaHamiltonian {
            diagonal,
            couplings: scheme
                .transitions
                .iter()
                .map(|t| (t.upper, t.lower, t.slot - 1))
                .collect(),
            fields: fields.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_time_independent(&self) -> bool {
        self.fields.iter().all(|f| f.is_cw())
    }

    /// Diagonal (detuning) part.
    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn at(&self, t: f64) -> CMatrix {
        let n = self.dim();
        let mut h = CMatrix::zeros(n, n);
        self.fill(t, &mut h);
        h
    }

    /// Writes H(t) into `h` (must be dim × dim).
    pub fn fill(&self, t: f64, h: &mut CMatrix) {
        h.fill(Complex64::new(0.0, 0.0));
        for (i, &d) in self.diagonal.iter().enumerate() {
            h[(i, i)] = Complex64::new(d, 0.0);
        }
        for &(u, l, k) in &self.couplings {
            let f = &self.fields[k];
            let omega = f.rabi_at(t);
            if omega == 0.0 {
                continue;
            }
            let v = Complex64::from_polar(-0.5 * omega, f.phase);
            h[(u, l)] += v;
            h[(l, u)] += v.conj();
        }
    }
}

/// H(t) in rad/s for `scheme` driven by `fields` (`fields[k]` on slot k+1).
pub fn build_hamiltonian(scheme: &LevelScheme, fields: &[DriveField], t: f64) -> Result<CMatrix> {
    Ok(RwaHamiltonian::new(scheme, fields)?.at(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_deviation;

    fn default(kind: SchemeKind) -> LevelScheme {
        build_scheme(kind, &SchemeParams::default()).unwrap()
    }

    #[test]
    fn lambda_defaults() {
        let s = default(SchemeKind::Lambda);
        assert_eq!(s.states, ["a", "b", "c"]);
        let pairs: Vec<_> = s.transitions.iter().map(|t| (t.upper, t.lower)).collect();
        assert_eq!(pairs, [(A, B), (A, C)]);
        // a–c is the bright–dark splitting
        let w_ac = s.transition_frequency(2).unwrap();
        assert!((w_ac / ev_to_rad_per_s(0.010) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn n_scheme_defaults() {
        let s = default(SchemeKind::NScheme);
        assert_eq!(s.dim(), 4);
        assert_eq!(s.transitions.len(), 3);
    }

    #[test]
    fn four_level_topologies() {
        let dl = default(SchemeKind::DoubleLambda);
        assert_eq!(dl.transitions.len(), 4);
        let ll = default(SchemeKind::LadderLambda);
        let pairs: Vec<_> = ll.transitions.iter().map(|t| (t.upper, t.lower)).collect();
        assert_eq!(pairs, [(A, B), (D, A), (D, C)]);
    }

    #[test]
    fn zero_splitting_rejected() {
        let p = SchemeParams {
            bright_dark_splitting_ev: 0.0,
            ..SchemeParams::default()
        };
        assert!(build_scheme(SchemeKind::Lambda, &p).is_err());
        let p = SchemeParams {
            optical_gap_ev: 0.005,
            ..SchemeParams::default()
        };
        assert!(build_scheme(SchemeKind::Lambda, &p).is_err());
    }

    #[test]
    fn unknown_kind_rejected() {
        assert!(matches!("v_scheme".parse::<SchemeKind>(), Err(Error::UnknownScheme(_))));
        for k in SchemeKind::ALL {
            assert_eq!(k.name().parse::<SchemeKind>().unwrap(), k);
        }
    }

    #[test]
    fn deterministic() {
        for k in SchemeKind::ALL {
            assert_eq!(default(k), default(k));
        }
    }

    #[test]
    fn zero_fields_give_zero_matrix() {
        for k in SchemeKind::ALL {
            let s = default(k);
            let fields = vec![DriveField::off(); s.slot_count()];
            let h = build_hamiltonian(&s, &fields, 0.0).unwrap();
            assert!(h.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        }
    }

    #[test]
    fn lambda_matrix_written_out_by_hand() {
        // H = Δ|a⟩⟨a| − (Ω₁/2)(|a⟩⟨b| + h.c.) − (Ω₂/2)(|a⟩⟨c| + h.c.)
        let s = default(SchemeKind::Lambda);
        let (o1, o2, delta) = (3.0e9, 5.0e9, 7.0e10);
        let h = build_hamiltonian(&s, &[DriveField::cw(o1, delta), DriveField::cw(o2, delta)], 0.0).unwrap();
        let r = |x: f64| Complex64::new(x, 0.0);
        let expected = CMatrix::from_row_slice(
            3,
            3,
            &[
                r(delta),
                r(-o1 / 2.0),
                r(-o2 / 2.0),
                r(-o1 / 2.0),
                r(0.0),
                r(0.0),
                r(-o2 / 2.0),
                r(0.0),
                r(0.0),
            ],
        );
        assert_eq!(h, expected);
    }

    #[test]
    fn lambda_two_photon_detuning_on_c() {
        let s = default(SchemeKind::Lambda);
        let h = build_hamiltonian(&s, &[DriveField::cw(1.0, 4.0), DriveField::cw(1.0, 1.5)], 0.0).unwrap();
        assert_eq!(h[(C, C)].re, 4.0 - 1.5);
    }

    #[test]
    fn missing_slot_is_an_error() {
        let s = default(SchemeKind::NScheme);
        let r = build_hamiltonian(&s, &[DriveField::cw(1.0, 0.0), DriveField::cw(1.0, 0.0)], 0.0);
        assert_eq!(r, Err(Error::MissingField(3)));
    }

    #[test]
    fn double_lambda_closure() {
        let s = default(SchemeKind::DoubleLambda);
        let (d1, d2, d3) = (1e9, 3e8, -2e9);
        let mut fields = vec![
            DriveField::cw(1e9, d1),
            DriveField::cw(1e9, d2),
            DriveField::cw(1e9, d3),
            DriveField::cw(1e9, d1 - d2 + d3),
        ];
        assert!(build_hamiltonian(&s, &fields, 0.0).is_ok());
        fields[3].detuning += 1e6;
        assert!(matches!(
            build_hamiltonian(&s, &fields, 0.0),
            Err(Error::FrequencyClosure { slot: 4, .. })
        ));
        // an undriven generated field does not constrain the frame
        fields[3] = DriveField::cw(0.0, 123.0);
        assert!(build_hamiltonian(&s, &fields, 0.0).is_ok());
    }

    #[test]
    fn phase_enters_off_diagonal() {
        let s = default(SchemeKind::Lambda);
        let f1 = DriveField::cw(2.0, 0.0).with_phase(std::f64::consts::FRAC_PI_2);
        let h = build_hamiltonian(&s, &[f1, DriveField::off()], 0.0).unwrap();
        assert!((h[(A, B)] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((h[(B, A)] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn hamiltonian_is_hermitian(
            kind in 0usize..4,
            rabis in proptest::collection::vec(0.0f64..1e13, 4),
            dets in proptest::collection::vec(-1e12f64..1e12, 3),
            phases in proptest::collection::vec(-7.0f64..7.0, 4),
            t in -1e-9f64..1e-9,
        ) {
            let s = default(SchemeKind::ALL[kind]);
            let mut fields: Vec<DriveField> = (0..4)
                .map(|k| DriveField::cw(rabis[k], dets[k.min(2)]).with_phase(phases[k]))
                .collect();
            if s.kind == SchemeKind::DoubleLambda {
                fields[3].detuning = dets[0] - dets[1] + dets[2];
            }
            fields[0].rabi = Rabi::Pulse(PulseEnvelope::gaussian(0.0, 1e-9, rabis[0]));
            let h = build_hamiltonian(&s, &fields, t).unwrap();
            let norm = h.norm();
            proptest::prop_assert!(hermitian_deviation(&h) <= 1e-12 * norm.max(1e-300));
        }
    }
}
