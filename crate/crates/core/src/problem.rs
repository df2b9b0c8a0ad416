//! One discrimination experiment: states, priors, unitaries, and the initial
//! state of the looped register, plus seeded random instance generators.

use rand::Rng;

use crate::qmath::{CMatrix, RVector, C64};
use crate::quantum::{DensityMatrix, PureState};
use crate::synthesis::{self, StateSet, UnitarySet};
use crate::{Error, Result};

/// Bundle of states, priors, unitaries, and initial register state.
///
/// States are kept both in their native dimension and embedded (zero-padded)
/// into the unitaries' target dimension, where all transition probabilities
/// are evaluated.
#[derive(Debug, Clone)]
pub struct DiscriminationProblem {
    states: StateSet,
    embedded: Vec<PureState>,
    unitaries: UnitarySet,
    omega: DensityMatrix,
}

impl DiscriminationProblem {
    /// Assembles and validates a problem. `omega` defaults to |0⟩⟨0| in the
    /// unitaries' dimension when `None`.
    pub fn new(
        states: StateSet,
        unitaries: UnitarySet,
        omega: Option<DensityMatrix>,
    ) -> Result<Self> {
        let report = synthesis::validate_unitary_set(&states, &unitaries)?;
        if !report.passes(1e-8) {
            return Err(Error::DegenerateStates(format!(
                "unitaries do not map states to basis vectors (max mapping deviation {:.3e}, max unitarity deviation {:.3e})",
                report
                    .mapping_deviations
                    .iter()
                    .cloned()
                    .fold(0.0, f64::max),
                report
                    .unitarity_deviations
                    .iter()
                    .cloned()
                    .fold(0.0, f64::max),
            )));
        }
        let dim = unitaries.dim();
        let omega = match omega {
            Some(w) => {
                if w.dim() != dim {
                    return Err(Error::DimensionMismatch(format!(
                        "omega dim {} does not match target dim {dim}",
                        w.dim()
                    )));
                }
                w
            }
            None => DensityMatrix::basis_projector(dim, 0),
        };
        let embedded = states
            .states()
            .iter()
            .map(|s| s.embed(dim))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            states,
            embedded,
            unitaries,
            omega,
        })
    }

    /// The builtin BB84 problem: {|0⟩, |1⟩, |+⟩, |−⟩} with uniform priors.
    pub fn bb84() -> Self {
        let (states, us) = synthesis::bb84_unitaries();
        Self::new(states, us, None).expect("builtin BB84 problem is valid")
    }

    /// Two-qubit-state problem with the canonical (zero-phase) unitaries.
    pub fn two_state(psi0: PureState, psi1: PureState, priors: [f64; 2]) -> Result<Self> {
        let us = synthesis::two_state_unitaries(&psi0, &psi1, [0.0; 4])?;
        let states = StateSet::new(vec![psi0, psi1], priors.to_vec())?;
        Self::new(states, us, None)
    }

    /// Problem over N ≥ 3 qubit states with the isometry-extension unitaries.
    pub fn qubit_set(states: StateSet) -> Result<Self> {
        let us = synthesis::qubit_set_unitaries(&states)?;
        Self::new(states, us, None)
    }

    /// Replaces the initial register state.
    pub fn with_omega(mut self, omega: DensityMatrix) -> Result<Self> {
        if omega.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "omega dim {} does not match target dim {}",
                omega.dim(),
                self.dim()
            )));
        }
        self.omega = omega;
        Ok(self)
    }

    /// Number of states / outcomes N.
    pub fn n(&self) -> usize {
        self.states.n()
    }

    /// Target Hilbert-space dimension d′ on which the unitaries act.
    pub fn dim(&self) -> usize {
        self.unitaries.dim()
    }

    pub fn states(&self) -> &StateSet {
        &self.states
    }

    pub fn priors(&self) -> &[f64] {
        self.states.priors()
    }

    pub fn unitaries(&self) -> &UnitarySet {
        &self.unitaries
    }

    pub fn omega(&self) -> &DensityMatrix {
        &self.omega
    }

    /// |ψ̃_k⟩, the k-th state embedded into the target dimension.
    pub fn embedded_state(&self, k: usize) -> &PureState {
        &self.embedded[k]
    }

    /// Initial outcome distribution u⁽⁰⁾: the diagonal of ω in the
    /// measurement basis, truncated to the N outcome indices.
    pub fn initial_distribution(&self) -> RVector {
        let diag = self.omega.diagonal_probs();
        RVector::from_iterator(self.n(), diag.iter().take(self.n()).copied())
    }
}

/// Uniformly random qubit pure state (Haar on the Bloch sphere, with a random
/// relative phase).
pub fn random_qubit_state(rng: &mut impl Rng) -> PureState {
    let cos_theta: f64 = rng.random_range(-1.0..=1.0);
    let theta = cos_theta.acos();
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    PureState::from_bloch(theta, phi)
}

/// N random qubit states with uniform priors, resampled so that every pairwise
/// squared overlap stays at most 0.95 (keeps instances numerically
/// non-degenerate).
pub fn random_qubit_state_set(n: usize, rng: &mut impl Rng) -> StateSet {
    loop {
        let states: Vec<PureState> = (0..n).map(|_| random_qubit_state(rng)).collect();
        if let Ok(set) = StateSet::uniform(states) {
            if set.max_overlap_sq() <= 0.95 {
                return set;
            }
        }
    }
}

/// Random qubit-set problem over N states.
pub fn random_qubit_problem(n: usize, rng: &mut impl Rng) -> DiscriminationProblem {
    if n == 2 {
        loop {
            let psi0 = random_qubit_state(rng);
            let psi1 = random_qubit_state(rng);
            if psi0.overlap_sq(&psi1) <= 0.95 {
                if let Ok(p) = DiscriminationProblem::two_state(psi0, psi1, [0.5, 0.5]) {
                    return p;
                }
            }
        }
    }
    DiscriminationProblem::qubit_set(random_qubit_state_set(n, rng))
        .expect("random qubit set yields a valid problem")
}

/// Random full-rank density matrix G G† / Tr(G G†).
pub fn random_density_matrix(dim: usize, rng: &mut impl Rng) -> DensityMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let mut m = &g * g.adjoint();
    m /= m.trace();
    DensityMatrix::new(m).expect("Gram matrix is a valid density matrix")
}
