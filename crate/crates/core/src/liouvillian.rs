//! The Liouvillian superoperator and its steady state.
//!
//! Density matrices are vectorized row-major, v[i·d + j] = ρ_ij, so that
//! vec(AρB) = (A ⊗ Bᵀ) vec(ρ).

use nalgebra::DVector;
use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{unvectorize, vectorize, CMatrix, I, ONE};
use crate::rates::{build_dissipator, LindbladChannel, RateSet};
use crate::scheme::{build_hamiltonian, DriveField, LevelScheme};

/// Singular values below this fraction of the largest count as null.
pub const NULL_SPACE_TOL: f64 = 1e-13;
/// Required ‖Lρ‖ / ‖L‖ of a steady state.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    dim: usize,
    matrix: CMatrix,
}

/// Builds L with Lρ = −i[H, ρ] + Σ_k (C_k ρ C_k† − ½{C_k†C_k, ρ}).
pub fn assemble_liouvillian(h: &CMatrix, channels: &[LindbladChannel]) -> Result<Liouvillian> {
    let d = h.nrows();
    if h.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: h.ncols(),
        });
    }
    for ch in channels {
        if ch.op.nrows() != d || ch.op.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: ch.op.nrows().max(ch.op.ncols()),
            });
        }
    }
    let id = CMatrix::identity(d, d);
    let mut l = (h.kronecker(&id) - id.kronecker(&h.transpose())) * (-I);
    for ch in channels {
        let c = &ch.op;
        let cdc = c.adjoint() * c;
        l += c.kronecker(&c.conjugate());
        l -= cdc.kronecker(&id).scale(0.5);
        l -= id.kronecker(&cdc.transpose()).scale(0.5);
    }
    Ok(Liouvillian { dim: d, matrix: l })
}

impl Liouvillian {
    pub fn zero(dim: usize) -> Self {
        Liouvillian {
            dim,
            matrix: CMatrix::zeros(dim * dim, dim * dim),
        }
    }

    pub(crate) fn from_parts(dim: usize, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), dim * dim);
        Liouvillian { dim, matrix }
    }

    /// Hilbert-space dimension d (the map is d² × d²).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        unvectorize(&(&self.matrix * vectorize(rho)), self.dim)
    }

    pub fn apply_vec(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.matrix * v
    }

    /// ‖vec(1)ᵀ L‖ / ‖L‖; zero for a trace-preserving generator.
    pub fn trace_annihilation_residual(&self) -> f64 {
        let d = self.dim;
        let n = d * d;
        let mut row = DVector::<Complex64>::zeros(n);
        for i in 0..d {
            row += self.matrix.row(i * d + i).transpose();
        }
        let norm = self.norm();
        if norm == 0.0 {
            0.0
        } else {
            row.norm() / norm
        }
    }

    /// Eigenvalues of L.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.matrix
            .clone()
            .schur()
            .eigenvalues()
            .map(|v| v.iter().copied().collect())
            .unwrap_or_default()
    }

    /// Slowest non-zero relaxation rate, min |Re λ| over eigenvalues that are
    /// not numerically zero.
    pub fn slowest_relaxation_rate(&self) -> Option<f64> {
        let norm = self.norm();
        self.eigenvalues()
            .into_iter()
            .filter(|l| l.norm() > 1e-11 * norm)
            .map(|l| -l.re)
            .filter(|&r| r > 0.0)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Number of singular values below `NULL_SPACE_TOL · σ_max`.
    pub fn null_space_dimension(&self) -> usize {
        let n = self.dim * self.dim;
        let norm = self.norm();
        if norm == 0.0 {
            return n;
        }
        let svd = self.matrix.scale(1.0 / norm).svd(false, false);
        let smax = svd.singular_values.max();
        svd.singular_values
            .iter()
            .filter(|&&s| s < NULL_SPACE_TOL * smax)
            .count()
    }
}

/// Unique stationary state of `l`.
///
/// The structurally redundant last row (a diagonal element; the diagonal rows
/// sum to zero by trace preservation) is replaced by the trace constraint and
/// the square system solved by LU. If that residual is poor the null vector
/// from the SVD is used instead.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let d = l.dim;
    let n = d * d;
    let nulls = l.null_space_dimension();
    if nulls != 1 {
        return Err(Error::DegenerateSteadyState(nulls));
    }
    let norm = l.norm();
    let scaled = l.matrix.scale(1.0 / norm);

    let mut a = scaled.clone();
    a.row_mut(n - 1).fill(Complex64::new(0.0, 0.0));
    for i in 0..d {
        a[(n - 1, i * d + i)] = ONE;
    }
    let mut rhs = DVector::<Complex64>::zeros(n);
    rhs[n - 1] = ONE;

    let residual = |v: &DVector<Complex64>| (&scaled * v).norm() / v.norm();
    let candidate = a.lu().solve(&rhs).filter(|v| residual(v) < STEADY_RESIDUAL_TOL);
    let v = match candidate {
        Some(v) => v,
        None => {
            let svd = scaled.clone().svd(false, true);
            let v_t = svd.v_t.expect("requested V^H");
            let k = svd
                .singular_values
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(k, _)| k)
                .unwrap();
            let v: DVector<Complex64> = v_t.row(k).adjoint();
            let tr: Complex64 = (0..d).map(|i| v[i * d + i]).sum();
            let v = v / tr;
            let r = residual(&v);
            if r >= STEADY_RESIDUAL_TOL {
                return Err(Error::SteadyStateResidual {
                    residual: r,
                    tolerance: STEADY_RESIDUAL_TOL,
                });
            }
            v
        }
    };
    DensityMatrix::new(unvectorize(&v, d))
}

/// Liouvillian of a scheme under CW fields (`fields[k]` on slot k+1).
pub fn cw_liouvillian(scheme: &LevelScheme, fields: &[DriveField], rates: &RateSet) -> Result<Liouvillian> {
    if let Some(k) = fields.iter().position(|f| !f.is_cw()) {
        return Err(crate::error::invalid(
            format!("field {}", k + 1),
            "a stationary state needs CW fields",
        ));
    }
    let h = build_hamiltonian(scheme, fields, 0.0)?;
    assemble_liouvillian(&h, &build_dissipator(scheme, rates)?)
}

/// Stationary state of a scheme under CW fields.
pub fn cw_steady_state(scheme: &LevelScheme, fields: &[DriveField], rates: &RateSet) -> Result<DensityMatrix> {
    steady_state(&cw_liouvillian(scheme, fields, rates)?)
}
