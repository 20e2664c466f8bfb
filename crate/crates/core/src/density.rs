//! Density matrices with their physical invariants checked on construction.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, hermitian_part, min_hermitian_eigenvalue, CMatrix, ONE};

/// max |ρ − ρ†|
pub const HERMITIAN_TOL: f64 = 1e-10;
/// |tr ρ − 1|
pub const TRACE_TOL: f64 = 1e-9;
/// Smallest admissible eigenvalue.
pub const POSITIVITY_FLOOR: f64 = -1e-9;

/// Diagnostics of how far a matrix is from being a valid state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateCheck {
    pub hermitian_deviation: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl StateCheck {
    pub fn of(m: &CMatrix) -> Self {
        StateCheck {
            hermitian_deviation: hermitian_deviation(m),
            trace_error: (m.trace() - ONE).norm(),
            min_eigenvalue: min_hermitian_eigenvalue(m),
        }
    }

    pub fn passes(&self) -> bool {
        self.hermitian_deviation <= HERMITIAN_TOL
            && self.trace_error <= TRACE_TOL
            && self.min_eigenvalue >= POSITIVITY_FLOOR
    }

    fn into_result(self) -> Result<()> {
        if self.hermitian_deviation > HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "Hermiticity deviation {:e}",
                self.hermitian_deviation
            )));
        }
        if self.trace_error > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace error {:e}",
                self.trace_error
            )));
        }
        if self.min_eigenvalue < POSITIVITY_FLOOR {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {:e}",
                self.min_eigenvalue
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Validates `m` against all invariants, then stores its Hermitian part.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        StateCheck::of(&m).into_result()?;
        Ok(DensityMatrix(hermitian_part(&m)))
    }

    /// |i⟩⟨i|
    pub fn basis(dim: usize, i: usize) -> Self {
        DensityMatrix(crate::linalg::ket_bra(dim, i, i))
    }

    /// |ψ⟩⟨ψ| for a normalized copy of `psi`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidDensityMatrix("zero state vector".into()));
        }
        let n = psi.len();
        Ok(DensityMatrix(CMatrix::from_fn(n, n, |i, j| {
            psi[i] * psi[j].conj() / (norm * norm)
        })))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn population(&self, i: usize) -> f64 {
        self.0[(i, i)].re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.population(i)).collect()
    }

    /// ⟨i|ρ|j⟩
    pub fn coherence(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn check(&self) -> StateCheck {
        StateCheck::of(&self.0)
    }

    /// Largest elementwise distance to another state.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        crate::linalg::max_abs(&(&self.0 - &other.0))
    }
}
