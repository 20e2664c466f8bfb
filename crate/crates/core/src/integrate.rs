//! Adaptive Dormand–Prince 5(4) integration of dρ/dt = L(t)ρ.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::error::{invalid, Error, Result};
use crate::linalg::{unvectorize, vectorize, CMatrix, I};
use crate::liouvillian::{assemble_liouvillian, Liouvillian};
use crate::rates::LindbladChannel;
use crate::scheme::RwaHamiltonian;

type CVector = DVector<Complex64>;

/// A possibly time-dependent Liouvillian acting on row-major vectorized states.
pub trait Generator: Sync {
    /// Hilbert-space dimension.
    fn dim(&self) -> usize;
    /// out = L(t) v
    fn apply(&self, t: f64, v: &CVector, out: &mut CVector);
    /// Rough upper bound on the fastest rate at time t, used for the first step.
    fn rate_scale(&self, t: f64) -> f64;
}

impl Generator for Liouvillian {
    fn dim(&self) -> usize {
        Liouvillian::dim(self)
    }

    fn apply(&self, _t: f64, v: &CVector, out: &mut CVector) {
        out.gemv(Complex64::new(1.0, 0.0), self.matrix(), v, Complex64::new(0.0, 0.0));
    }

    fn rate_scale(&self, _t: f64) -> f64 {
        self.matrix().iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }
}

/// Time-dependent Hamiltonian plus a fixed dissipator.
#[derive(Debug, Clone)]
pub struct DrivenSystem {
    hamiltonian: RwaHamiltonian,
    dissipator: Liouvillian,
    dissipation_scale: f64,
}

impl DrivenSystem {
    pub fn new(hamiltonian: RwaHamiltonian, channels: &[LindbladChannel]) -> Result<Self> {
        let d = hamiltonian.dim();
        let dissipator = assemble_liouvillian(&CMatrix::zeros(d, d), channels)?;
        let dissipation_scale = Generator::rate_scale(&dissipator, 0.0);
        Ok(DrivenSystem {
            hamiltonian,
            dissipator,
            dissipation_scale,
        })
    }

    pub fn hamiltonian(&self) -> &RwaHamiltonian {
        &self.hamiltonian
    }

    /// L(t) as a matrix.
    pub fn liouvillian_at(&self, t: f64) -> Liouvillian {
        let d = self.hamiltonian.dim();
        let h = self.hamiltonian.at(t);
        let id = CMatrix::identity(d, d);
        let coherent = (h.kronecker(&id) - id.kronecker(&h.transpose())) * (-I);
        Liouvillian::from_parts(d, coherent + self.dissipator.matrix())
    }
}

impl Generator for DrivenSystem {
    fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    fn apply(&self, t: f64, v: &CVector, out: &mut CVector) {
        let d = self.hamiltonian.dim();
        let h = self.hamiltonian.at(t);
        let rho = unvectorize(v, d);
        let comm = (&h * &rho - &rho * &h) * (-I);
        out.gemv(
            Complex64::new(1.0, 0.0),
            self.dissipator.matrix(),
            v,
            Complex64::new(0.0, 0.0),
        );
        *out += vectorize(&comm);
    }

    fn rate_scale(&self, t: f64) -> f64 {
        let h = self.hamiltonian.at(t);
        let hmax = h.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        2.0 * hmax + self.dissipation_scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Error tolerance on reported states (absolute and relative).
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            tol: 1e-10,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory is never empty")
    }

    /// Largest trace error over all reported states.
    pub fn max_trace_error(&self) -> f64 {
        self.states.iter().map(|s| s.check().trace_error).fold(0.0, f64::max)
    }
}

// Dormand–Prince coefficients.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth minus fourth order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
/// Per-step error budget as a fraction of `tol`, so that error accumulated
/// over many steps stays within `tol`.
const LOCAL_TOL_FRACTION: f64 = 0.1;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

fn combine(out: &mut CVector, y: &CVector, h: f64, terms: &[(f64, &CVector)]) {
    out.copy_from(y);
    for &(c, k) in terms {
        if c != 0.0 {
            out.axpy(Complex64::new(h * c, 0.0), k, Complex64::new(1.0, 0.0));
        }
    }
}

fn symmetrize(v: &mut CVector, d: usize) {
    for i in 0..d {
        v[i * d + i].im = 0.0;
        for j in (i + 1)..d {
            let avg = 0.5 * (v[i * d + j] + v[j * d + i].conj());
            v[i * d + j] = avg;
            v[j * d + i] = avg.conj();
        }
    }
}

/// Integrates from `t_grid[0]` (where the state is `rho0`) through every grid
/// point, returning the state at each. Every reported state is checked for
/// trace, Hermiticity and positivity; a violation is an error.
pub fn evolve<G: Generator + ?Sized>(
    rho0: &DensityMatrix,
    generator: &G,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let d = generator.dim();
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rho0.dim(),
        });
    }
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(invalid("tol", format!("must be finite and > 0, got {}", opts.tol)));
    }
    if t_grid.is_empty() || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(invalid("t_grid", "must be non-empty and finite"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("t_grid", "must be strictly increasing"));
    }

    let n = d * d;
    let t0 = t_grid[0];
    let span = t_grid[t_grid.len() - 1] - t0;
    let mut y = vectorize(rho0.matrix());
    let mut times = vec![t0];
    let mut states = vec![rho0.clone()];

    let mut k: Vec<CVector> = (0..7).map(|_| CVector::zeros(n)).collect();
    let mut stage = CVector::zeros(n);
    let mut y_new = CVector::zeros(n);
    let mut t = t0;
    let scale = generator.rate_scale(t0);
    let mut h = if scale > 0.0 { 0.01 / scale } else { span };
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut fsal_valid = false;
    let local_tol = LOCAL_TOL_FRACTION * opts.tol;

    for &t_out in &t_grid[1..] {
        while t < t_out {
            if accepted + rejected >= opts.max_steps {
                return Err(Error::TooManySteps {
                    time: t,
                    max_steps: opts.max_steps,
                });
            }
            let remaining = t_out - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step <= 16.0 * f64::EPSILON * t.abs().max(span) {
                return Err(Error::StepUnderflow { time: t, step });
            }

            if !fsal_valid {
                let (k0, _) = k.split_at_mut(1);
                generator.apply(t, &y, &mut k0[0]);
            }
            {
                let (done, rest) = k.split_at_mut(1);
                combine(&mut stage, &y, step, &[(A21, &done[0])]);
                generator.apply(t + C2 * step, &stage, &mut rest[0]);
            }
            {
                let (done, rest) = k.split_at_mut(2);
                combine(&mut stage, &y, step, &[(A31, &done[0]), (A32, &done[1])]);
                generator.apply(t + C3 * step, &stage, &mut rest[0]);
            }
            {
                let (done, rest) = k.split_at_mut(3);
                combine(
                    &mut stage,
                    &y,
                    step,
                    &[(A41, &done[0]), (A42, &done[1]), (A43, &done[2])],
                );
                generator.apply(t + C4 * step, &stage, &mut rest[0]);
            }
            {
                let (done, rest) = k.split_at_mut(4);
                combine(
                    &mut stage,
                    &y,
                    step,
                    &[(A51, &done[0]), (A52, &done[1]), (A53, &done[2]), (A54, &done[3])],
                );
                generator.apply(t + C5 * step, &stage, &mut rest[0]);
            }
            {
                let (done, rest) = k.split_at_mut(5);
                combine(
                    &mut stage,
                    &y,
                    step,
                    &[
                        (A61, &done[0]),
                        (A62, &done[1]),
                        (A63, &done[2]),
                        (A64, &done[3]),
                        (A65, &done[4]),
                    ],
                );
                generator.apply(t + step, &stage, &mut rest[0]);
            }
            combine(
                &mut y_new,
                &y,
                step,
                &[(B1, &k[0]), (B3, &k[2]), (B4, &k[3]), (B5, &k[4]), (B6, &k[5])],
            );
            {
                let (done, rest) = k.split_at_mut(6);
                generator.apply(t + step, &y_new, &mut rest[0]);
                let _ = done;
            }

            let mut err = 0.0f64;
            for i in 0..n {
                let e =
                    (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * step;
                let sc = local_tol * (1.0 + y[i].norm().max(y_new[i].norm()));
                err = err.max(e.norm() / sc);
            }

            if err <= 1.0 {
                t = if last { t_out } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                symmetrize(&mut y, d);
                k.swap(0, 6);
                // The symmetrized state differs from the one k[6] was evaluated at
                // only by rounding, so first-same-as-last stays valid.
                fsal_valid = true;
                accepted += 1;
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                if !last || factor < 1.0 {
                    h = step * factor;
                }
            } else {
                rejected += 1;
                fsal_valid = true;
                h = step * (SAFETY * err.powf(-0.2)).max(MIN_FACTOR);
            }
        }
        let state = DensityMatrix::new(unvectorize(&y, d)).map_err(|e| match e {
            Error::InvalidDensityMatrix(msg) => Error::InvalidDensityMatrix(format!("at t = {t_out:e} s: {msg}")),
            other => other,
        })?;
        times.push(t_out);
        states.push(state);
    }
    Ok(Trajectory {
        times,
        states,
        accepted_steps: accepted,
        rejected_steps: rejected,
    })
}

/// `n` equally spaced points from `t0` to `t1` inclusive.
pub fn linear_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t0],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    t1
                } else {
                    t0 + (t1 - t0) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::scheme::{build_scheme, DriveField, SchemeKind, SchemeParams};

    fn superposition() -> DensityMatrix {
        let s = 0.5f64.sqrt();
        DensityMatrix::pure(&[Complex64::new(s, 0.0), Complex64::new(0.0, s), Complex64::new(0.0, 0.0)]).unwrap()
    }

    #[test]
    fn zero_generator_is_identity() {
        let rho = superposition();
        let traj = evolve(
            &rho,
            &Liouvillian::zero(3),
            &linear_grid(0.0, 1e-9, 5),
            &EvolveOptions::default(),
        )
        .unwrap();
        for s in &traj.states {
            assert_eq!(s, &rho);
        }
    }

    #[test]
    fn lossless_rabi_oscillation() {
        // Resonant a–b with coupling −Ω/2: P_a(t) = sin²(Ωt/2).
        let scheme = build_scheme(SchemeKind::Lambda, &SchemeParams::default()).unwrap();
        let omega = 2e12;
        let h = RwaHamiltonian::new(&scheme, &[DriveField::cw(omega, 0.0), DriveField::off()]).unwrap();
        let sys = DrivenSystem::new(h, &[]).unwrap();
        let period = 2.0 * std::f64::consts::PI / omega;
        let grid = linear_grid(0.0, 2.0 * period, 41);
        let traj = evolve(
            &DensityMatrix::basis(3, 1),
            &sys,
            &grid,
            &EvolveOptions {
                tol: 1e-12,
                ..Default::default()
            },
        )
        .unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let expected = (omega * t / 2.0).sin().powi(2);
            assert!((s.population(0) - expected).abs() < 1e-9, "t = {t}");
        }
        assert!((traj.last().population(1) - 1.0).abs() < 1e-9);
        assert!(traj.max_trace_error() < 1e-9);
    }

    #[test]
    fn time_dependent_matches_frozen_liouvillian() {
        let scheme = build_scheme(SchemeKind::Lambda, &SchemeParams::default()).unwrap();
        let h = RwaHamiltonian::new(&scheme, &[DriveField::cw(1e12, 3e11), DriveField::cw(5e11, 1e11)]).unwrap();
        let ch = [LindbladChannel {
            label: "x".into(),
            op: crate::linalg::ket_bra(3, 1, 0).scale(1e6),
        }];
        let sys = DrivenSystem::new(h, &ch).unwrap();
        let frozen = sys.liouvillian_at(0.0);
        let grid = linear_grid(0.0, 5e-12, 11);
        let opts = EvolveOptions {
            tol: 1e-12,
            ..Default::default()
        };
        let a = evolve(&superposition(), &sys, &grid, &opts).unwrap();
        let b = evolve(&superposition(), &frozen, &grid, &opts).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            assert!(max_abs(&(x.matrix() - y.matrix())) < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let rho = superposition();
        let l = Liouvillian::zero(3);
        let opts = EvolveOptions::default();
        assert!(evolve(&rho, &l, &[0.0, 0.0], &opts).is_err());
        assert!(evolve(&rho, &l, &[], &opts).is_err());
        assert!(evolve(&rho, &l, &[0.0, 1.0], &EvolveOptions { tol: 0.0, ..opts }).is_err());
        assert!(matches!(
            evolve(&DensityMatrix::basis(2, 0), &l, &[0.0, 1.0], &opts),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn step_budget_is_enforced() {
        let l = crate::liouvillian::assemble_liouvillian(
            &CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                Complex64::new(1e12, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ])),
            &[],
        )
        .unwrap();
        let r = evolve(
            &superposition(),
            &l,
            &[0.0, 1e-6],
            &EvolveOptions {
                tol: 1e-10,
                max_steps: 100,
            },
        );
        assert!(matches!(r, Err(Error::TooManySteps { .. })));
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let g = linear_grid(-1.0, 3.0, 7);
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[6], 3.0);
        assert!(linear_grid(0.0, 1.0, 0).is_empty());
    }
}
