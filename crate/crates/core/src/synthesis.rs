//! Construction and validation of discrimination unitary sets: the two-state
//! form, the isometry construction for arbitrary qubit sets with a
//! deterministic unitary extension, and the explicit BB84 gate set.

use crate::qmath::{CMatrix, CVector, C64};
use crate::quantum::{unitarity_deviation, PureState, UNITARY_TOL};
use crate::{Error, Result};

/// Residual norms below this are treated as linearly dependent during
/// Gram-Schmidt completion.
const GS_RESIDUAL_TOL: f64 = 1e-8;

/// The N unitaries {U_i} with U_i|ψ̃_i⟩ = |i⟩ (up to global phase).
#[derive(Debug, Clone)]
pub struct UnitarySet {
    unitaries: Vec<CMatrix>,
}

impl UnitarySet {
    /// Validates that all matrices are square, share one dimension, and are
    /// unitary within 1e-10.
    pub fn new(unitaries: Vec<CMatrix>) -> Result<Self> {
        if unitaries.is_empty() {
            return Err(Error::DimensionMismatch("empty unitary set".into()));
        }
        let dim = unitaries[0].nrows();
        for u in &unitaries {
            if u.nrows() != dim || u.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "expected {dim}x{dim} unitaries, got {}x{}",
                    u.nrows(),
                    u.ncols()
                )));
            }
            let dev = unitarity_deviation(u);
            if dev > UNITARY_TOL {
                return Err(Error::NotUnitary { deviation: dev });
            }
        }
        Ok(Self { unitaries })
    }

    pub fn n(&self) -> usize {
        self.unitaries.len()
    }

    /// Dimension of the target space each U_i acts on.
    pub fn dim(&self) -> usize {
        self.unitaries[0].nrows()
    }

    pub fn get(&self, i: usize) -> &CMatrix {
        &self.unitaries[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &CMatrix> {
        self.unitaries.iter()
    }
}

/// The ensemble to discriminate: N pure states with prior probabilities.
#[derive(Debug, Clone)]
pub struct StateSet {
    states: Vec<PureState>,
    priors: Vec<f64>,
}

impl StateSet {
    /// Validates priors (nonnegative, sum 1 within 1e-12, one per state) and
    /// that no two states coincide up to a global phase.
    pub fn new(states: Vec<PureState>, priors: Vec<f64>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::DegenerateStates(
                "need at least two states to discriminate".into(),
            ));
        }
        if priors.len() != states.len() {
            return Err(Error::InvalidPriors(format!(
                "{} priors for {} states",
                priors.len(),
                states.len()
            )));
        }
        if priors.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidPriors("negative prior".into()));
        }
        let sum: f64 = priors.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPriors(format!("priors sum to {sum}")));
        }
        let dim = states[0].dim();
        for s in &states {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch(
                    "states have mixed dimensions".into(),
                ));
            }
        }
        for i in 0..states.len() {
            for j in (i + 1)..states.len() {
                if states[i].overlap_sq(&states[j]) > 1.0 - 1e-10 {
                    return Err(Error::DegenerateStates(format!(
                        "states {i} and {j} coincide up to phase"
                    )));
                }
            }
        }
        Ok(Self { states, priors })
    }

    /// Uniform priors over the given states.
    pub fn uniform(states: Vec<PureState>) -> Result<Self> {
        let n = states.len();
        Self::new(states, vec![1.0 / n as f64; n])
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    /// Largest pairwise squared overlap max_{i≠j} |⟨ψ_i|ψ_j⟩|².
    pub fn max_overlap_sq(&self) -> f64 {
        let mut best = 0.0_f64;
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                best = best.max(self.states[i].overlap_sq(&self.states[j]));
            }
        }
        best
    }
}

/// A unit vector orthogonal to the given qubit state: (α, β) ↦ (−β̄, ᾱ).
pub fn orthogonal_complement(psi: &PureState) -> Result<PureState> {
    if psi.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "orthogonal_complement is defined for qubits, got dim {}",
            psi.dim()
        )));
    }
    let a = psi.amplitudes()[0];
    let b = psi.amplitudes()[1];
    PureState::new(CVector::from_vec(vec![-b.conj(), a.conj()]))
}

/// Builds the pair U_0 = e^{iφ_0}|0⟩⟨ψ_0| + e^{iφ_1}|1⟩⟨ψ_0^⊥|,
/// U_1 = e^{iφ_2}|1⟩⟨ψ_1| + e^{iφ_3}|0⟩⟨ψ_1^⊥| for a two-state problem.
///
/// The resulting transition probabilities are independent of the four free
/// phases, so `[0.0; 4]` is the canonical choice.
pub fn two_state_unitaries(
    psi0: &PureState,
    psi1: &PureState,
    phases: [f64; 4],
) -> Result<UnitarySet> {
    if psi0.dim() != 2 || psi1.dim() != 2 {
        return Err(Error::DimensionMismatch(
            "two_state_unitaries expects qubit states".into(),
        ));
    }
    if psi0.overlap_sq(psi1) > 1.0 - 1e-10 {
        return Err(Error::DegenerateStates(
            "the two states coincide up to phase".into(),
        ));
    }
    let perp0 = orthogonal_complement(psi0)?;
    let perp1 = orthogonal_complement(psi1)?;
    let phase = |p: f64| C64::from_polar(1.0, p);

    let mut u0 = CMatrix::zeros(2, 2);
    let mut u1 = CMatrix::zeros(2, 2);
    for c in 0..2 {
        u0[(0, c)] = phase(phases[0]) * psi0.amplitudes()[c].conj();
        u0[(1, c)] = phase(phases[1]) * perp0.amplitudes()[c].conj();
        u1[(1, c)] = phase(phases[2]) * psi1.amplitudes()[c].conj();
        u1[(0, c)] = phase(phases[3]) * perp1.amplitudes()[c].conj();
    }
    UnitarySet::new(vec![u0, u1])
}

/// Completes a set of orthonormal columns to a full `dim`-dimensional unitary.
///
/// The remaining columns are obtained deterministically by Gram-Schmidt over
/// the standard basis vectors in index order, skipping candidates whose
/// residual norm falls below 1e-8.
pub fn complete_isometry(iso_columns: &[CVector], dim: usize) -> Result<CMatrix> {
    if iso_columns.len() > dim {
        return Err(Error::DimensionMismatch(format!(
            "{} columns exceed target dim {dim}",
            iso_columns.len()
        )));
    }
    for (i, c) in iso_columns.iter().enumerate() {
        if c.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "column {i} has length {}, expected {dim}",
                c.len()
            )));
        }
        let norm_dev = (c.norm() - 1.0).abs();
        if norm_dev > UNITARY_TOL {
            return Err(Error::NotOrthonormal { deviation: norm_dev });
        }
        for prev in iso_columns.iter().take(i) {
            let overlap = prev.dotc(c).norm();
            if overlap > UNITARY_TOL {
                return Err(Error::NotOrthonormal { deviation: overlap });
            }
        }
    }

    let mut columns: Vec<CVector> = iso_columns.to_vec();
    for b in 0..dim {
        if columns.len() == dim {
            break;
        }
        let mut v = CVector::zeros(dim);
        v[b] = C64::new(1.0, 0.0);
        for c in &columns {
            let coeff = c.dotc(&v);
            v -= c * coeff;
        }
        let norm = v.norm();
        if norm < GS_RESIDUAL_TOL {
            continue;
        }
        columns.push(v / C64::new(norm, 0.0));
    }
    if columns.len() != dim {
        return Err(Error::NotOrthonormal {
            deviation: f64::NAN,
        });
    }
    Ok(CMatrix::from_columns(&columns))
}

/// Builds unitaries for N ≥ 3 qubit states by extending the isometries
/// V_i = |i⟩⟨ψ_i| + |i⊕1⟩⟨ψ_i^⊥| (⊕ is addition mod N) to N×N unitaries.
///
/// Qubit states are embedded into the N-dimensional target space by padding
/// with zero amplitudes, so U_i is pinned on span{e_0, e_1} and completed
/// elsewhere.
pub fn qubit_set_unitaries(states: &StateSet) -> Result<UnitarySet> {
    let n = states.n();
    if states.dim() != 2 {
        return Err(Error::DimensionMismatch(
            "qubit_set_unitaries expects qubit states".into(),
        ));
    }
    if n < 3 {
        return Err(Error::DegenerateStates(
            "qubit_set_unitaries needs N >= 3; use two_state_unitaries for N = 2".into(),
        ));
    }
    let mut unitaries = Vec::with_capacity(n);
    for (i, psi) in states.states().iter().enumerate() {
        let perp = orthogonal_complement(psi)?;
        // Column for basis vector e_b of the embedded domain: V_i|b⟩.
        let mut cols = Vec::with_capacity(2);
        for b in 0..2 {
            let mut col = CVector::zeros(n);
            col[i] = psi.amplitudes()[b].conj();
            col[(i + 1) % n] = perp.amplitudes()[b].conj();
            cols.push(col);
        }
        unitaries.push(complete_isometry(&cols, n)?);
    }
    UnitarySet::new(unitaries)
}

/// The BB84 ensemble {|00⟩, |10⟩, |+0⟩, |−0⟩} with uniform priors, together
/// with the gate-level unitaries U_0 = SWAP, U_1 = X⊗X, U_2 = (X⊗I)(H⊗I),
/// U_3 = (X⊗H)·SWAP under the encoding |i⟩ = |i₁i₀⟩.
pub fn bb84_unitaries() -> (StateSet, UnitarySet) {
    let r = |x: f64| C64::new(x, 0.0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = CMatrix::from_row_slice(2, 2, &[r(0.0), r(1.0), r(1.0), r(0.0)]);
    let h = CMatrix::from_row_slice(2, 2, &[r(s), r(s), r(s), -r(s)]);
    let i2 = CMatrix::identity(2, 2);
    let swap = crate::quantum::swap_matrix(2);

    let u0 = swap.clone();
    let u1 = x.kronecker(&x);
    let u2 = x.kronecker(&i2) * h.kronecker(&i2);
    let u3 = x.kronecker(&h) * swap;

    let ket = |amps: Vec<C64>| PureState::new(CVector::from_vec(amps)).expect("unit norm");
    let psi0 = ket(vec![r(1.0), r(0.0), r(0.0), r(0.0)]); // |00⟩
    let psi1 = ket(vec![r(0.0), r(0.0), r(1.0), r(0.0)]); // |10⟩
    let psi2 = ket(vec![r(s), r(0.0), r(s), r(0.0)]); // |+0⟩
    let psi3 = ket(vec![r(s), r(0.0), -r(s), r(0.0)]); // |−0⟩

    let states = StateSet::uniform(vec![psi0, psi1, psi2, psi3]).expect("valid BB84 ensemble");
    let us = UnitarySet::new(vec![u0, u1, u2, u3]).expect("standard gates are unitary");
    (states, us)
}

/// Diagnostic report for a (states, unitaries) pair.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    /// Per i: 1 − |⟨i|U_i|ψ̃_i⟩|, the deviation of U_i|ψ̃_i⟩ from |i⟩ up to
    /// a global phase.
    pub mapping_deviations: Vec<f64>,
    /// Per i: ‖U_i†U_i − I‖.
    pub unitarity_deviations: Vec<f64>,
    /// Pairs (i, j), i ≠ j, with |⟨j|U_i|ψ̃_j⟩| below the flag threshold.
    /// Informational only: legitimate constructions contain such zeros.
    pub zero_cross_elements: Vec<(usize, usize, f64)>,
    /// Threshold used for the cross-element flags.
    pub zero_flag_threshold: f64,
}

impl ValidationReport {
    /// True when the mapping and unitarity checks pass at `tol`.
    pub fn passes(&self, tol: f64) -> bool {
        self.mapping_deviations.iter().all(|&d| d <= tol)
            && self.unitarity_deviations.iter().all(|&d| d <= tol)
    }
}

/// Checks U_i|ψ̃_i⟩ = |i⟩ (up to phase), unitarity, and flags vanishing cross
/// elements ⟨j|U_i|ψ̃_j⟩.
pub fn validate_unitary_set(states: &StateSet, us: &UnitarySet) -> Result<ValidationReport> {
    let n = states.n();
    if us.n() != n || us.dim() < states.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} states of dim {} vs {} unitaries of dim {}",
            n,
            states.dim(),
            us.n(),
            us.dim()
        )));
    }
    let dim = us.dim();
    if n > dim {
        return Err(Error::DimensionMismatch(format!(
            "{n} outcomes need target dim >= {n}, got {dim}"
        )));
    }
    let embedded: Vec<CVector> = states
        .states()
        .iter()
        .map(|s| s.embed(dim).map(|e| e.amplitudes().clone()))
        .collect::<Result<_>>()?;

    let mut mapping = Vec::with_capacity(n);
    let mut unitarity = Vec::with_capacity(n);
    let mut zeros = Vec::new();
    let threshold = 1e-9;
    for i in 0..n {
        let u = us.get(i);
        unitarity.push(unitarity_deviation(u));
        let image = u * &embedded[i];
        mapping.push(1.0 - image[i].norm());
        for (j, emb_j) in embedded.iter().enumerate() {
            if j == i {
                continue;
            }
            let cross = (u * emb_j)[j].norm();
            if cross < threshold {
                zeros.push((i, j, cross));
            }
        }
    }
    Ok(ValidationReport {
        mapping_deviations: mapping,
        unitarity_deviations: unitarity,
        zero_cross_elements: zeros,
        zero_flag_threshold: threshold,
    })
}
