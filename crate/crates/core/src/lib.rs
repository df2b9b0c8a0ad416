//! Multi-copy discrimination of non-orthogonal pure states with an iterated
//! circuit that simulates a Deutschian closed timelike curve.
//!
//! The scheme discriminates a set of pure states `{|ψ_i⟩}` by repeatedly
//! applying an interaction unitary `V = (Σ_i |i⟩⟨i| ⊗ U_i) ∘ SWAP` built from
//! unitaries satisfying `U_i|ψ_i⟩ = |i⟩`. Equivalently, it is a local adaptive
//! protocol: measure a copy, apply the unitary labeled by the outcome to the
//! next copy, and guess the final outcome. Successive outcomes form a Markov
//! chain, which makes error probabilities and their decay exponents exactly
//! computable.
//!
//! Layout:
//! - [`qmath`]: dense complex linear algebra (Kronecker, partial trace,
//!   matrix powers, real non-symmetric spectra).
//! - [`quantum`]: pure states, density matrices, the interaction unitary, the
//!   induced channel, and fixed-point iteration.
//! - [`synthesis`]: construction of discrimination unitary sets (two-state
//!   form, qubit-set isometry extension, BB84 gate set).
//! - [`problem`]: the bundle of states, priors, unitaries, and initial
//!   register state defining one experiment, plus random instance generators.
//! - [`markov`]: transition matrices, exact error/success probabilities,
//!   spectral exponents and Gerschgorin bounds, brute-force path enumeration.
//! - [`simulate`]: seeded Monte Carlo simulation of the adaptive protocol and
//!   regression estimates of the error exponent.

pub mod markov;
pub mod problem;
pub mod qmath;
pub mod quantum;
pub mod simulate;
pub mod synthesis;

pub use problem::DiscriminationProblem;
pub use qmath::{CMatrix, CVector, RMatrix, RVector, C64};
pub use quantum::{DensityMatrix, InteractionUnitary, PureState};
pub use synthesis::{StateSet, UnitarySet};

/// Errors surfaced by the library. Validation failures signal structural
/// misuse; hard-but-valid instances (slow convergence, degenerate exponents)
/// are reported through result types instead.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("matrix is not a valid density matrix: {0}")]
    NotDensity(String),
    #[error("degenerate state set: {0}")]
    DegenerateStates(String),
    #[error("columns are not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },
    #[error("index {index} out of range ({len} states)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid prior distribution: {0}")]
    InvalidPriors(String),
    #[error("invalid outcome distribution: {0}")]
    InvalidDistribution(String),
    #[error("eigenvalue iteration did not converge within {0} QR steps")]
    EigenNotConverged(usize),
    #[error("instance too large for path enumeration: N^n = {paths:.3e} exceeds {limit:.3e}")]
    InstanceTooLarge { paths: f64, limit: f64 },
    #[error("insufficient data points for regression: {0}")]
    InsufficientPoints(String),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
