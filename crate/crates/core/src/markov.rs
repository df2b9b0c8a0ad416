//! Exact analysis of the adaptive protocol through its Markov chain of
//! measurement outcomes: transition matrices, closed-form error and success
//! probabilities, spectral decay exponents, and an independent brute-force
//! path enumeration.

use crate::problem::DiscriminationProblem;
use crate::qmath::{self, RMatrix, RVector};
use crate::quantum::DensityMatrix;
use crate::{Error, Result};

/// Maximum number of outcome sequences `brute_force_error` will enumerate.
pub const BRUTE_FORCE_PATH_LIMIT: f64 = 1e7;

/// Column-stochastic outcome transition matrix conditioned on true state k:
/// entry (i, j) = |⟨i|U_j|ψ̃_k⟩|².
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    p: RMatrix,
    k: usize,
}

impl TransitionMatrix {
    pub fn matrix(&self) -> &RMatrix {
        &self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }
}

/// P_k with the absorbing row and column k deleted; its spectral radius
/// governs the error decay.
#[derive(Debug, Clone)]
pub struct ReducedMatrix {
    q: RMatrix,
    k: usize,
}

impl ReducedMatrix {
    pub fn matrix(&self) -> &RMatrix {
        &self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// Outcome probabilities after some number of protocol rounds.
#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    probs: RVector,
}

impl OutcomeDistribution {
    pub fn new(probs: RVector) -> Result<Self> {
        if probs.iter().any(|&p| p < -1e-10) {
            return Err(Error::InvalidDistribution("negative entry".into()));
        }
        let sum = probs.sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDistribution(format!("sums to {sum}")));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &RVector {
        &self.probs
    }
}

/// Builds P_k for true state k.
pub fn transition_matrix(problem: &DiscriminationProblem, k: usize) -> Result<TransitionMatrix> {
    let n = problem.n();
    if k >= n {
        return Err(Error::IndexOutOfRange { index: k, len: n });
    }
    let psi = problem.embedded_state(k);
    let mut p = RMatrix::zeros(n, n);
    for j in 0..n {
        let image = problem.unitaries().get(j) * psi.amplitudes();
        for i in 0..n {
            p[(i, j)] = image[i].norm_sqr();
        }
    }
    // Column-stochasticity and the absorbing column U_k|ψ_k⟩ = |k⟩ are
    // structural; verify them rather than trusting the construction.
    for j in 0..n {
        let col_sum: f64 = p.column(j).sum();
        if (col_sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDistribution(format!(
                "column {j} of P_{k} sums to {col_sum}; unitaries leak outside the outcome basis"
            )));
        }
    }
    if (p[(k, k)] - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDistribution(format!(
            "column {k} of P_{k} is not absorbing"
        )));
    }
    Ok(TransitionMatrix { p, k })
}

/// All N transition matrices of a problem.
pub fn transition_matrices(problem: &DiscriminationProblem) -> Result<Vec<TransitionMatrix>> {
    (0..problem.n()).map(|k| transition_matrix(problem, k)).collect()
}

/// Deletes row and column k of P_k.
pub fn reduced_matrix(p: &TransitionMatrix) -> ReducedMatrix {
    let q = p.p.clone().remove_row(p.k).remove_column(p.k);
    ReducedMatrix { q, k: p.k }
}

fn reduce_vector(v: &RVector, k: usize) -> RVector {
    RVector::from_iterator(
        v.len() - 1,
        v.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &x)| x),
    )
}

/// Exact error and success probabilities after n rounds.
#[derive(Debug, Clone)]
pub struct Probabilities {
    pub p_e: f64,
    pub p_s: f64,
    /// Per true state k: the outcome distribution P_k^n u⁽⁰⁾.
    pub per_state: Vec<OutcomeDistribution>,
}

/// Exact probabilities p_e⁽ⁿ⁾, p_s⁽ⁿ⁾ from the matrix-power formula
/// p_s⁽ⁿ⁾ = Σ_k p_k e_{k+1}ᵀ P_kⁿ u⁽⁰⁾.
pub fn exact_probabilities(problem: &DiscriminationProblem, n: u64) -> Result<Probabilities> {
    let u0 = problem.initial_distribution();
    let mut p_s = 0.0;
    let mut per_state = Vec::with_capacity(problem.n());
    for k in 0..problem.n() {
        let pk = transition_matrix(problem, k)?;
        let un = qmath::mat_power(pk.matrix(), n) * &u0;
        p_s += problem.priors()[k] * un[k];
        per_state.push(OutcomeDistribution::new(un)?);
    }
    // p_e via the reduced recurrence rather than 1 − p_s: the subtraction
    // loses all relative accuracy once p_e falls near machine epsilon.
    Ok(Probabilities {
        p_e: exact_error_reduced(problem, n)?,
        p_s,
        per_state,
    })
}

/// Error probability from the reduced formula p_e⁽ⁿ⁾ = Σ_k p_k Σ_j e_jᵀ Q_kⁿ v⁽⁰⁾.
pub fn exact_error_reduced(problem: &DiscriminationProblem, n: u64) -> Result<f64> {
    let u0 = problem.initial_distribution();
    let mut p_e = 0.0;
    for k in 0..problem.n() {
        let q = reduced_matrix(&transition_matrix(problem, k)?);
        let v0 = reduce_vector(&u0, k);
        let vn = qmath::mat_power(q.matrix(), n) * v0;
        p_e += problem.priors()[k] * vn.sum();
    }
    Ok(p_e)
}

/// Success probability after n rounds with initial register state ω = |i⟩⟨i|.
fn success_from_basis(transitions: &[TransitionMatrix], priors: &[f64], n: u64, i: usize) -> f64 {
    let mut p_s = 0.0;
    for (k, pk) in transitions.iter().enumerate() {
        let pn = qmath::mat_power(pk.matrix(), n);
        p_s += priors[k] * pn[(k, i)];
    }
    p_s
}

/// Checks the decomposition p_s⁽ⁿ⁾(ω) = Σ_i ⟨i|ω|i⟩ p_{s,i}⁽ⁿ⁾. Returns the
/// two sides; callers assert their agreement.
pub fn success_linearity_check(
    problem: &DiscriminationProblem,
    n: u64,
    omega: &DensityMatrix,
) -> Result<(f64, f64)> {
    let with_omega = problem.clone().with_omega(omega.clone())?;
    let lhs = exact_probabilities(&with_omega, n)?.p_s;
    let transitions = transition_matrices(problem)?;
    let diag = omega.diagonal_probs();
    let rhs: f64 = (0..problem.n())
        .map(|i| diag[i] * success_from_basis(&transitions, problem.priors(), n, i))
        .sum();
    Ok((lhs, rhs))
}

/// The basis state ω = |j⟩⟨j| maximizing the n-round success probability,
/// with ties broken toward the smallest index. By linearity in the diagonal
/// of ω, no density matrix does better.
pub fn best_initial_state(problem: &DiscriminationProblem, n: u64) -> Result<(usize, f64)> {
    let transitions = transition_matrices(problem)?;
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..problem.n() {
        let p_s = success_from_basis(&transitions, problem.priors(), n, i);
        if p_s > best.1 {
            best = (i, p_s);
        }
    }
    Ok(best)
}

/// Spectral and overlap-based decay exponents for one problem.
#[derive(Debug, Clone)]
pub struct ExponentReport {
    /// Largest absolute eigenvalue over all reduced matrices Q_k.
    pub tau: f64,
    /// Spectral lower bound on the error exponent: −ln τ.
    pub xi_lower: f64,
    /// Gerschgorin column bound: −ln(1 − min_{j≠k} |⟨k|U_j|ψ̃_k⟩|²).
    pub gersh_col: f64,
    /// Gerschgorin row bound: −ln(max_{j≠k} Σ_{i≠k} |⟨j|U_i|ψ̃_k⟩|²).
    pub gersh_row: f64,
    /// Multiple Chernoff exponent for pure states:
    /// −ln(max_{i≠j} |⟨ψ_i|ψ_j⟩|²).
    pub chernoff: f64,
}

/// Computes τ, its exponent bound, both Gerschgorin bounds, and the Chernoff
/// benchmark.
pub fn exponent_report(problem: &DiscriminationProblem) -> Result<ExponentReport> {
    let transitions = transition_matrices(problem)?;
    let mut tau = 0.0_f64;
    let mut min_return = f64::INFINITY; // min_{j≠k} |⟨k|U_j|ψ_k⟩|²
    let mut max_row_sum = 0.0_f64; // max_{j,k: j≠k} Σ_{i≠k} |⟨j|U_i|ψ_k⟩|²
    for pk in &transitions {
        let k = pk.k();
        let q = reduced_matrix(pk);
        tau = tau.max(qmath::spectral_radius(q.matrix())?);
        let p = pk.matrix();
        for j in 0..pk.n() {
            if j == k {
                continue;
            }
            min_return = min_return.min(p[(k, j)]);
            let row_sum: f64 = (0..pk.n()).filter(|&i| i != k).map(|i| p[(j, i)]).sum();
            max_row_sum = max_row_sum.max(row_sum);
        }
    }
    let chernoff = -problem.states().max_overlap_sq().ln();
    Ok(ExponentReport {
        tau,
        xi_lower: -tau.ln(),
        gersh_col: -(1.0 - min_return).ln(),
        gersh_row: -max_row_sum.ln(),
        chernoff,
    })
}

/// Independent oracle for the exact probability formulas: enumerates every
/// outcome sequence of the Markov chain and sums path probabilities whose
/// final outcome differs from the true state.
///
/// Guarded at N^n ≤ 10⁷ paths.
pub fn brute_force_error(problem: &DiscriminationProblem, n: u32) -> Result<f64> {
    let n_states = problem.n();
    let paths = (n_states as f64).powi(n as i32);
    if paths > BRUTE_FORCE_PATH_LIMIT {
        return Err(Error::InstanceTooLarge {
            paths,
            limit: BRUTE_FORCE_PATH_LIMIT,
        });
    }
    let u0 = problem.initial_distribution();
    let mut p_e = 0.0;
    for k in 0..n_states {
        let pk = transition_matrix(problem, k)?;
        let p = pk.matrix();
        // Depth-first walk over outcome sequences (i_0, i_1, ..., i_n).
        fn walk(
            p: &RMatrix,
            k: usize,
            depth_left: u32,
            current: usize,
            prob: f64,
            err: &mut f64,
        ) {
            if depth_left == 0 {
                if current != k {
                    *err += prob;
                }
                return;
            }
            for next in 0..p.nrows() {
                let t = p[(next, current)];
                if t > 0.0 {
                    walk(p, k, depth_left - 1, next, prob * t, err);
                }
            }
        }
        let mut err_k = 0.0;
        for (i0, &w) in u0.iter().enumerate() {
            if w > 0.0 {
                walk(p, k, n, i0, w, &mut err_k);
            }
        }
        p_e += problem.priors()[k] * err_k;
    }
    Ok(p_e)
}

/// ln p_e⁽ⁿ⁾ for n = 0..=n_max, computed with the renormalized recurrence
/// v ← Q_k v so the curve stays exact far below floating-point underflow.
pub fn log_error_curve(problem: &DiscriminationProblem, n_max: usize) -> Result<Vec<f64>> {
    let u0 = problem.initial_distribution();
    struct Chain {
        q: RMatrix,
        v: RVector,
        log_mass: f64, // ln(p_k · Σ v) accumulated so far; −inf once exhausted
    }
    let mut chains = Vec::with_capacity(problem.n());
    for k in 0..problem.n() {
        let q = reduced_matrix(&transition_matrix(problem, k)?);
        let mut v = reduce_vector(&u0, k);
        let mass = v.sum();
        let p_k = problem.priors()[k];
        let log_mass = if mass > 0.0 && p_k > 0.0 {
            v /= mass;
            p_k.ln() + mass.ln()
        } else {
            f64::NEG_INFINITY
        };
        chains.push(Chain {
            q: q.matrix().clone(),
            v,
            log_mass,
        });
    }

    let logsumexp = |xs: &[f64]| -> f64 {
        let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
    };

    let mut curve = Vec::with_capacity(n_max + 1);
    curve.push(logsumexp(
        &chains.iter().map(|c| c.log_mass).collect::<Vec<_>>(),
    ));
    for _ in 0..n_max {
        for c in &mut chains {
            if c.log_mass == f64::NEG_INFINITY {
                continue;
            }
            c.v = &c.q * &c.v;
            let mass = c.v.sum();
            if mass <= 0.0 {
                c.log_mass = f64::NEG_INFINITY;
            } else {
                c.log_mass += mass.ln();
                c.v /= mass;
            }
        }
        curve.push(logsumexp(
            &chains.iter().map(|c| c.log_mass).collect::<Vec<_>>(),
        ));
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{random_density_matrix, random_qubit_problem};
    use crate::quantum::PureState;
    use crate::DiscriminationProblem;
    use approx::assert_abs_diff_eq;
    use rand::{RngCore, SeedableRng};

    fn two_state_overlap_half() -> DiscriminationProblem {
        let psi0 = PureState::basis(2, 0);
        let psi1 = PureState::from_bloch(std::f64::consts::FRAC_PI_2, 0.0);
        DiscriminationProblem::two_state(psi0, psi1, [0.5, 0.5]).unwrap()
    }

    #[test]
    fn two_state_transition_matrix_form() {
        // P_0 = [[1, 1−c], [0, c]] with c = |⟨ψ_0|ψ_1⟩|².
        let p = two_state_overlap_half();
        let c = 0.5;
        let p0 = transition_matrix(&p, 0).unwrap();
        assert_abs_diff_eq!(p0.matrix()[(0, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p0.matrix()[(0, 1)], 1.0 - c, epsilon = 1e-12);
        assert_abs_diff_eq!(p0.matrix()[(1, 0)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p0.matrix()[(1, 1)], c, epsilon = 1e-12);
    }

    #[test]
    fn orthogonal_states_discriminate_in_one_step() {
        let p = DiscriminationProblem::two_state(
            PureState::basis(2, 0),
            PureState::basis(2, 1),
            [0.5, 0.5],
        )
        .unwrap();
        let p0 = transition_matrix(&p, 0).unwrap();
        assert_abs_diff_eq!(p0.matrix()[(0, 0)], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p0.matrix()[(0, 1)], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p0.matrix()[(1, 0)], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p0.matrix()[(1, 1)], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(exact_probabilities(&p, 1).unwrap().p_e, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn qubit_set_matrix_has_bidiagonal_plus_corner_form() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(41);
        let p = random_qubit_problem(4, &mut rng);
        let n = p.n();
        for k in 0..n {
            let pk = transition_matrix(&p, k).unwrap();
            let m = pk.matrix();
            for j in 0..n {
                // Column j has support only on rows j and j+1 mod N, with the
                // diagonal entry |⟨ψ_j|ψ_k⟩|².
                let expected_diag = p.states().states()[j].overlap_sq(&p.states().states()[k]);
                assert_abs_diff_eq!(m[(j, j)], expected_diag, epsilon = 1e-10);
                for i in 0..n {
                    if i != j && i != (j + 1) % n {
                        assert_abs_diff_eq!(m[(i, j)], 0.0, epsilon = 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn reduced_matrix_deletes_correct_row_and_column() {
        // Labeled 4x4 matrix: entry (i, j) = 10 i + j.
        let labeled = RMatrix::from_fn(4, 4, |i, j| (10 * i + j) as f64);
        let t = TransitionMatrix { p: labeled, k: 1 };
        let q = reduced_matrix(&t);
        let expected = RMatrix::from_row_slice(
            3,
            3,
            &[0.0, 2.0, 3.0, 20.0, 22.0, 23.0, 30.0, 32.0, 33.0],
        );
        assert_eq!(*q.matrix(), expected);
    }

    #[test]
    fn two_state_reduced_matrix_is_overlap_scalar() {
        let p = two_state_overlap_half();
        for k in 0..2 {
            let q = reduced_matrix(&transition_matrix(&p, k).unwrap());
            assert_eq!(q.matrix().nrows(), 1);
            assert_abs_diff_eq!(q.matrix()[(0, 0)], 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn bb84_reduced_spectral_radius_is_half() {
        let p = DiscriminationProblem::bb84();
        for k in 0..4 {
            let q = reduced_matrix(&transition_matrix(&p, k).unwrap());
            assert_abs_diff_eq!(
                qmath::spectral_radius(q.matrix()).unwrap(),
                0.5,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn zero_rounds_guess_the_initial_register() {
        let p = DiscriminationProblem::bb84()
            .with_omega(DensityMatrix::basis_projector(4, 2))
            .unwrap();
        let probs = exact_probabilities(&p, 0).unwrap();
        assert_abs_diff_eq!(probs.p_s, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn two_state_error_is_geometric() {
        // p_e^(n) = c^n / 2 with equal priors and ω = |0⟩⟨0|.
        let p = two_state_overlap_half();
        for n in 0..12u64 {
            let probs = exact_probabilities(&p, n).unwrap();
            assert_abs_diff_eq!(probs.p_e, 0.5_f64.powi(n as i32) / 2.0, epsilon = 1e-12);
            assert_abs_diff_eq!(probs.p_e + probs.p_s, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bb84_error_rate_approaches_ln_two() {
        let p = DiscriminationProblem::bb84();
        let curve = log_error_curve(&p, 200).unwrap();
        // Slope over [50, 200]; the ratio at a single point still carries the
        // polynomial prefactor from the repeated eigenvalue.
        let rate = -(curve[200] - curve[50]) / 150.0;
        assert!((rate - std::f64::consts::LN_2).abs() / std::f64::consts::LN_2 < 0.02);
    }

    #[test]
    fn reduced_formula_matches_full_formula() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(43);
        for _ in 0..100 {
            let n_states = 2 + (rng.next_u64() % 3) as usize;
            let p = random_qubit_problem(n_states, &mut rng);
            let rounds = rng.next_u64() % 51;
            let full = 1.0 - exact_probabilities(&p, rounds).unwrap().p_s;
            let reduced = exact_error_reduced(&p, rounds).unwrap();
            assert_abs_diff_eq!(full, reduced, epsilon = 1e-12);
        }
    }

    #[test]
    fn reduced_zero_rounds() {
        let p = DiscriminationProblem::bb84();
        // p_e^(0) = Σ_k p_k (1 − ⟨k|ω|k⟩) = 3/4 with ω = |0⟩⟨0|.
        assert_abs_diff_eq!(exact_error_reduced(&p, 0).unwrap(), 0.75, epsilon = 1e-12);
    }

    #[test]
    fn linearity_in_omega() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(47);
        let p = DiscriminationProblem::bb84();
        // Basis-state omega: both sides collapse to p_{s,j}.
        let (lhs, rhs) =
            success_linearity_check(&p, 5, &DensityMatrix::basis_projector(4, 1)).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        // Random full-rank omega.
        let omega = random_density_matrix(4, &mut rng);
        let (lhs, rhs) = success_linearity_check(&p, 10, &omega).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
        // Maximally mixed: rhs is the mean over basis starts.
        let (lhs, rhs) =
            success_linearity_check(&p, 7, &DensityMatrix::maximally_mixed(4)).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn best_initial_state_symmetric_two_state_ties_to_zero() {
        let p = two_state_overlap_half();
        let (idx, _) = best_initial_state(&p, 5).unwrap();
        assert_eq!(idx, 0);
    }

    #[test]
    fn best_initial_state_beats_maximally_mixed() {
        let p = DiscriminationProblem::bb84();
        let (_, best) = best_initial_state(&p, 10).unwrap();
        let mixed = p
            .clone()
            .with_omega(DensityMatrix::maximally_mixed(4))
            .unwrap();
        assert!(best >= exact_probabilities(&mixed, 10).unwrap().p_s - 1e-12);
    }

    #[test]
    fn best_initial_state_zero_rounds_is_max_prior() {
        let psi0 = PureState::basis(2, 0);
        let psi1 = PureState::from_bloch(1.0, 0.0);
        let p = DiscriminationProblem::two_state(psi0, psi1, [0.3, 0.7]).unwrap();
        let (idx, p_s) = best_initial_state(&p, 0).unwrap();
        assert_eq!(idx, 1);
        assert_abs_diff_eq!(p_s, 0.7, epsilon = 1e-12);
    }

    #[test]
    fn exponent_report_two_state() {
        let p = two_state_overlap_half();
        let rep = exponent_report(&p).unwrap();
        assert_abs_diff_eq!(rep.tau, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(rep.xi_lower, std::f64::consts::LN_2, epsilon = 1e-10);
        assert_abs_diff_eq!(rep.chernoff, std::f64::consts::LN_2, epsilon = 1e-10);
    }

    #[test]
    fn exponent_report_bb84() {
        let rep = exponent_report(&DiscriminationProblem::bb84()).unwrap();
        assert_abs_diff_eq!(rep.tau, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(rep.xi_lower, std::f64::consts::LN_2, epsilon = 1e-9);
        assert_abs_diff_eq!(rep.chernoff, std::f64::consts::LN_2, epsilon = 1e-9);
    }

    #[test]
    fn exponent_report_random_qubit_sets_saturate_chernoff() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(53);
        for _ in 0..10 {
            let p = random_qubit_problem(3, &mut rng);
            let rep = exponent_report(&p).unwrap();
            assert_abs_diff_eq!(rep.xi_lower, rep.chernoff, epsilon = 1e-9);
        }
    }

    #[test]
    fn gerschgorin_bounds_dominate_tau() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(59);
        for _ in 0..20 {
            let n = 2 + (rng.next_u64() % 4) as usize;
            let p = random_qubit_problem(n, &mut rng);
            let rep = exponent_report(&p).unwrap();
            assert!(rep.tau <= (-rep.gersh_col).exp() * (1.0 + 1e-10) + 1e-10);
            assert!(rep.tau <= (-rep.gersh_row).exp() * (1.0 + 1e-10) + 1e-10);
        }
    }

    #[test]
    fn brute_force_single_step_formula() {
        let p = DiscriminationProblem::bb84();
        let direct: f64 = {
            let u0 = p.initial_distribution();
            (0..4)
                .map(|k| {
                    let pk = transition_matrix(&p, k).unwrap();
                    p.priors()[k] * (1.0 - (pk.matrix() * &u0)[k])
                })
                .sum()
        };
        assert_abs_diff_eq!(brute_force_error(&p, 1).unwrap(), direct, epsilon = 1e-14);
    }

    #[test]
    fn brute_force_matches_exact_on_bb84() {
        let p = DiscriminationProblem::bb84();
        for n in 0..=6u32 {
            let brute = brute_force_error(&p, n).unwrap();
            let exact = exact_probabilities(&p, n as u64).unwrap().p_e;
            assert_abs_diff_eq!(brute, exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn brute_force_two_state_closed_form() {
        let p = two_state_overlap_half();
        assert_abs_diff_eq!(
            brute_force_error(&p, 8).unwrap(),
            0.001953125,
            epsilon = 1e-14
        );
    }

    #[test]
    fn brute_force_guard_trips() {
        let p = DiscriminationProblem::bb84();
        assert!(matches!(
            brute_force_error(&p, 30),
            Err(Error::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn log_curve_matches_direct_computation_in_range() {
        let p = DiscriminationProblem::bb84();
        let curve = log_error_curve(&p, 40).unwrap();
        for n in 0..=40u64 {
            let exact = exact_probabilities(&p, n).unwrap().p_e;
            assert_abs_diff_eq!(curve[n as usize], exact.ln(), epsilon = 1e-9);
        }
    }

    #[test]
    fn error_probability_monotone_on_qubit_sets() {
        // Tracked empirically, not asserted as a theorem elsewhere.
        let mut rng = rand::rngs::StdRng::seed_from_u64(61);
        for _ in 0..5 {
            let p = random_qubit_problem(4, &mut rng);
            let curve = log_error_curve(&p, 30).unwrap();
            for w in curve.windows(2) {
                assert!(w[1] <= w[0] + 1e-9);
            }
        }
    }
}
