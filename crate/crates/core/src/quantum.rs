//! Pure states, density matrices, the interaction unitary, the channel it
//! induces on the looped register, and fixed-point iteration of that channel.

use nalgebra::linalg::SymmetricEigen;

use crate::qmath::{self, CMatrix, CVector, Keep, RVector, C64};
use crate::synthesis::UnitarySet;
use crate::{Error, Result};

pub(crate) const HERMITIAN_TOL: f64 = 1e-10;
pub(crate) const NORM_TOL: f64 = 1e-10;
pub(crate) const UNITARY_TOL: f64 = 1e-10;

/// Unit-norm complex vector in a d-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    /// Wraps an amplitude vector, requiring unit norm within 1e-10.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            amplitudes: amplitudes / C64::new(norm, 0.0),
        })
    }

    /// The computational basis state |i⟩ in dimension `dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        let mut v = CVector::zeros(dim);
        v[i] = C64::new(1.0, 0.0);
        Self { amplitudes: v }
    }

    /// Qubit state cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩.
    pub fn from_bloch(theta: f64, phi: f64) -> Self {
        let v = CVector::from_vec(vec![
            C64::new((theta / 2.0).cos(), 0.0),
            C64::from_polar((theta / 2.0).sin(), phi),
        ]);
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// |⟨self|other⟩|².
    pub fn overlap_sq(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Embeds into a larger space by padding with zero amplitudes, matching
    /// |ψ̃⟩ = |ψ⟩|0⟩^⊗(ℓ−1) when the target dimension is a power of two.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot embed dim-{} state into dim {dim}",
                self.dim()
            )));
        }
        let mut v = CVector::zeros(dim);
        for i in 0..self.dim() {
            v[i] = self.amplitudes[i];
        }
        Ok(Self { amplitudes: v })
    }

    /// |ψ⟩⟨ψ| as a density matrix.
    pub fn projector(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix { matrix: m }
    }
}

/// Positive semidefinite, unit-trace complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace, and positive semidefiniteness
    /// (eigenvalues ≥ −1e-10).
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotDensity("matrix is not square".into()));
        }
        let herm_dev = (&matrix - matrix.adjoint()).norm();
        if herm_dev > HERMITIAN_TOL {
            return Err(Error::NotDensity(format!(
                "not Hermitian (deviation {herm_dev:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > HERMITIAN_TOL || tr.im.abs() > HERMITIAN_TOL {
            return Err(Error::NotDensity(format!("trace is {tr}, expected 1")));
        }
        let min_eig = SymmetricEigen::new(matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -HERMITIAN_TOL {
            return Err(Error::NotDensity(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// I/d on a d-dimensional space.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0),
        }
    }

    /// |i⟩⟨i| in dimension `dim`.
    pub fn basis_projector(dim: usize, i: usize) -> Self {
        PureState::basis(dim, i).projector()
    }

    /// Density matrix with the given diagonal (a probability vector) and zero
    /// off-diagonal entries.
    pub fn from_diagonal(probs: &RVector) -> Result<Self> {
        let sum: f64 = probs.sum();
        if probs.iter().any(|&p| p < -1e-12) || (sum - 1.0).abs() > 1e-10 {
            return Err(Error::NotDensity(format!(
                "diagonal is not a probability vector (sum {sum})"
            )));
        }
        let matrix = CMatrix::from_diagonal(&CVector::from_iterator(
            probs.len(),
            probs.iter().map(|&p| C64::new(p, 0.0)),
        ));
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Real parts of the diagonal (populations in the measurement basis).
    pub fn diagonal_probs(&self) -> RVector {
        RVector::from_iterator(self.dim(), self.matrix.diagonal().iter().map(|c| c.re))
    }
}

/// The N²×N² unitary `(Σ_i |i⟩⟨i| ⊗ U_i) ∘ SWAP` coupling the input register
/// to the looped register.
#[derive(Debug, Clone)]
pub struct InteractionUnitary {
    matrix: CMatrix,
    n_outcomes: usize,
}

impl InteractionUnitary {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn n_outcomes(&self) -> usize {
        self.n_outcomes
    }
}

/// SWAP on two n-dimensional registers: e_a ⊗ e_b ↦ e_b ⊗ e_a.
pub fn swap_matrix(n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            m[(b * n + a, a * n + b)] = C64::new(1.0, 0.0);
        }
    }
    m
}

pub(crate) fn unitarity_deviation(m: &CMatrix) -> f64 {
    (m.adjoint() * m - CMatrix::identity(m.nrows(), m.ncols())).norm()
}

/// Builds the interaction unitary `(Σ_i |i⟩⟨i| ⊗ U_i) · SWAP` from a set of
/// N unitaries of dimension N.
pub fn build_interaction_unitary(unitaries: &UnitarySet) -> Result<InteractionUnitary> {
    let n = unitaries.n();
    if unitaries.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "interaction unitary needs N unitaries of dim N, got {} of dim {}",
            n,
            unitaries.dim()
        )));
    }
    let mut controlled = CMatrix::zeros(n * n, n * n);
    for i in 0..n {
        let u = unitaries.get(i);
        for r in 0..n {
            for c in 0..n {
                controlled[(i * n + r, i * n + c)] = u[(r, c)];
            }
        }
    }
    let matrix = controlled * swap_matrix(n);
    let dev = unitarity_deviation(&matrix);
    if dev > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation: dev });
    }
    Ok(InteractionUnitary {
        matrix,
        n_outcomes: n,
    })
}

/// One application of the induced channel: σ ↦ Tr_S{V (ρ ⊗ σ) V†}.
pub fn ctc_channel(
    v: &InteractionUnitary,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<DensityMatrix> {
    let n = v.n_outcomes;
    if rho.dim() != n || sigma.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "channel expects dim-{n} inputs, got rho {} and sigma {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let joint = qmath::kron(rho.matrix(), sigma.matrix());
    let evolved = v.matrix() * joint * v.matrix().adjoint();
    let out = qmath::partial_trace(&evolved, (n, n), Keep::Second)?;
    DensityMatrix::new(out)
}

/// Trace norm ‖m‖₁ of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm(m: &CMatrix) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .sum()
}

/// Trace distance (1/2)‖a − b‖₁, in [0, 1] for density matrices.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "trace_distance dims {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(0.5 * trace_norm(&(a.matrix() - b.matrix())))
}

/// Outcome of iterating the channel toward its self-consistent fixed point.
#[derive(Debug, Clone)]
pub struct FixedPointResult {
    /// Last iterate σ*.
    pub state: DensityMatrix,
    /// Number of channel applications performed.
    pub iters: usize,
    /// Self-consistency residual ‖N(σ*) − σ*‖₁.
    pub residual: f64,
    /// Whether the residual dropped below the tolerance.
    pub converged: bool,
    /// Residual after each iteration (residual of the iterate *before* that
    /// application), starting with iteration 0.
    pub residual_history: Vec<f64>,
}

/// Repeatedly applies the channel starting from `omega` until the
/// self-consistency residual ‖N(σ) − σ‖₁ falls below `tol` or the iteration
/// budget runs out. Non-convergence is reported in the result, not an error.
pub fn iterate_to_fixed_point(
    v: &InteractionUnitary,
    rho: &DensityMatrix,
    omega: &DensityMatrix,
    max_iters: usize,
    tol: f64,
) -> Result<FixedPointResult> {
    assert!(tol > 0.0, "tolerance must be positive");
    let mut sigma = omega.clone();
    let mut history = Vec::new();
    for iters in 0..=max_iters {
        let next = ctc_channel(v, rho, &sigma)?;
        let residual = trace_norm(&(next.matrix() - sigma.matrix()));
        history.push(residual);
        if residual <= tol || iters == max_iters {
            return Ok(FixedPointResult {
                state: sigma,
                iters,
                residual,
                converged: residual <= tol,
                residual_history: history,
            });
        }
        sigma = next;
    }
    unreachable!()
}

pub const DEFAULT_MAX_ITERS: usize = 10_000;
pub const DEFAULT_FIXED_POINT_TOL: f64 = 1e-10;
