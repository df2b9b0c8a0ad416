//! Seeded Monte Carlo simulation of the local adaptive protocol and
//! regression estimation of the error exponent.
//!
//! Trials use independent ChaCha substreams keyed by trial index, so runs are
//! bit-reproducible for a fixed config regardless of how trials are scheduled
//! across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::markov::{self, TransitionMatrix};
use crate::problem::DiscriminationProblem;
use crate::qmath::RVector;
use crate::{Error, Result};

/// How the first "previous outcome" of a trial is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialOutcomePolicy {
    /// Always start from outcome j (ω = |j⟩⟨j|).
    FixedIndex(usize),
    /// Draw the starting outcome from the diagonal of the problem's ω.
    SampleFromOmega,
}

/// Monte Carlo run parameters.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n_copies: u32,
    pub n_trials: u64,
    pub seed: u64,
    pub initial_outcome_policy: InitialOutcomePolicy,
    /// Keep the first `keep_trajectories` full outcome sequences for
    /// inspection (0 keeps none).
    pub keep_trajectories: usize,
}

impl SimConfig {
    pub fn new(n_copies: u32, n_trials: u64, seed: u64) -> Self {
        Self {
            n_copies,
            n_trials,
            seed,
            initial_outcome_policy: InitialOutcomePolicy::FixedIndex(0),
            keep_trajectories: 0,
        }
    }

    fn validate(&self, n_states: usize) -> Result<()> {
        if self.n_copies < 1 {
            return Err(Error::InvalidConfig("n_copies must be >= 1".into()));
        }
        if self.n_trials < 1 {
            return Err(Error::InvalidConfig("n_trials must be >= 1".into()));
        }
        if let InitialOutcomePolicy::FixedIndex(j) = self.initial_outcome_policy {
            if j >= n_states {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    len: n_states,
                });
            }
        }
        Ok(())
    }
}

/// One simulated run of the adaptive protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub true_state: usize,
    /// Outcome of each of the `n_copies` measurements.
    pub outcomes: Vec<usize>,
    /// Equals the last outcome; that is the protocol's guess rule.
    pub final_guess: usize,
    pub correct: bool,
}

/// Aggregated Monte Carlo results.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub empirical_p_e: f64,
    /// Binomial standard error √(p̂(1−p̂)/trials).
    pub std_error: f64,
    /// Row = true state, column = guess; rows sum to per-state trial counts.
    pub per_state_confusion: Vec<Vec<u64>>,
    pub n_trials: u64,
    pub trajectories: Vec<Trajectory>,
}

/// Inverse-CDF sampling over cumulative sums in index order.
pub fn sample_outcome(distribution: &RVector, rng: &mut impl Rng) -> Result<usize> {
    if distribution.iter().any(|&p| p < -1e-12) {
        return Err(Error::InvalidDistribution(
            "negative probability".into(),
        ));
    }
    let total = distribution.sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("sums to {total}")));
    }
    let x: f64 = rng.random_range(0.0..1.0) * total;
    let mut acc = 0.0;
    for (i, &p) in distribution.iter().enumerate() {
        acc += p.max(0.0);
        if x < acc {
            return Ok(i);
        }
    }
    Ok(distribution.len() - 1)
}

fn sample_cdf(cdf: &[f64], x: f64) -> usize {
    match cdf.iter().position(|&c| x < c) {
        Some(i) => i,
        None => cdf.len() - 1,
    }
}

fn cumsum(v: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    v.map(|p| {
        acc += p;
        acc
    })
    .collect()
}

/// Runs the adaptive protocol: per trial, draw the true state from the
/// priors, pick a starting outcome, then for each copy sample the next
/// outcome from column `previous` of P_k; the guess is the final outcome.
pub fn run_adaptive(problem: &DiscriminationProblem, cfg: &SimConfig) -> Result<SimResult> {
    let n_states = problem.n();
    cfg.validate(n_states)?;
    let transitions = markov::transition_matrices(problem)?;
    // Per state: per previous-outcome column CDFs.
    let column_cdfs: Vec<Vec<Vec<f64>>> = transitions
        .iter()
        .map(|t: &TransitionMatrix| {
            (0..n_states)
                .map(|j| cumsum(t.matrix().column(j).iter().copied()))
                .collect()
        })
        .collect();
    let prior_cdf = cumsum(problem.priors().iter().copied());
    let omega_cdf = cumsum(problem.initial_distribution().iter().copied());

    let run_trial = |trial: u64| -> Trajectory {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(trial.wrapping_add(1));
        let true_state = sample_cdf(&prior_cdf, rng.random_range(0.0..1.0));
        let mut current = match cfg.initial_outcome_policy {
            InitialOutcomePolicy::FixedIndex(j) => j,
            InitialOutcomePolicy::SampleFromOmega => {
                sample_cdf(&omega_cdf, rng.random_range(0.0..1.0))
            }
        };
        let mut outcomes = Vec::with_capacity(cfg.n_copies as usize);
        for _ in 0..cfg.n_copies {
            current = sample_cdf(
                &column_cdfs[true_state][current],
                rng.random_range(0.0..1.0),
            );
            outcomes.push(current);
        }
        Trajectory {
            true_state,
            final_guess: current,
            correct: current == true_state,
            outcomes,
        }
    };

    let confusion = (0..cfg.n_trials)
        .into_par_iter()
        .fold(
            || vec![vec![0u64; n_states]; n_states],
            |mut acc, trial| {
                let t = run_trial(trial);
                acc[t.true_state][t.final_guess] += 1;
                acc
            },
        )
        .reduce(
            || vec![vec![0u64; n_states]; n_states],
            |mut a, b| {
                for (ra, rb) in a.iter_mut().zip(b) {
                    for (ca, cb) in ra.iter_mut().zip(rb) {
                        *ca += cb;
                    }
                }
                a
            },
        );

    let trajectories: Vec<Trajectory> = (0..cfg.keep_trajectories.min(cfg.n_trials as usize))
        .map(|t| run_trial(t as u64))
        .collect();

    let errors: u64 = confusion
        .iter()
        .enumerate()
        .map(|(k, row)| {
            row.iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &c)| c)
                .sum::<u64>()
        })
        .sum();
    let p_hat = errors as f64 / cfg.n_trials as f64;
    Ok(SimResult {
        empirical_p_e: p_hat,
        std_error: (p_hat * (1.0 - p_hat) / cfg.n_trials as f64).sqrt(),
        per_state_confusion: confusion,
        n_trials: cfg.n_trials,
        trajectories,
    })
}

/// Data source for exponent estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentSource {
    /// Exact error probabilities from the matrix formulas (feasible at all
    /// desk-scale sizes).
    Exact,
    /// Empirical error rates from Monte Carlo runs.
    MonteCarlo,
}

/// Result of the least-squares exponent fit.
#[derive(Debug, Clone)]
pub struct ExponentEstimate {
    pub xi_hat: f64,
    /// 95% confidence interval from the regression residuals.
    pub ci: (f64, f64),
    /// Grid points dropped because no errors were observed there.
    pub dropped: Vec<u32>,
}

/// Weighted least-squares slope of −ln p_e⁽ⁿ⁾ against n over `n_grid`.
///
/// Monte Carlo points are weighted by the inverse variance of ln p̂; exact
/// points are weighted uniformly. Grid points with zero observed errors are
/// dropped and reported.
pub fn estimate_exponent(
    problem: &DiscriminationProblem,
    n_grid: &[u32],
    cfg: &SimConfig,
    source: ExponentSource,
) -> Result<ExponentEstimate> {
    if n_grid.len() < 2 {
        return Err(Error::InsufficientPoints(format!(
            "need at least 2 grid points, got {}",
            n_grid.len()
        )));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InsufficientPoints(
            "n_grid must be strictly increasing".into(),
        ));
    }

    let mut xs = Vec::new();
    let mut ys = Vec::new(); // −ln p_e
    let mut ws = Vec::new();
    let mut dropped = Vec::new();
    match source {
        ExponentSource::Exact => {
            let max_n = *n_grid.last().unwrap() as usize;
            let curve = markov::log_error_curve(problem, max_n)?;
            for &n in n_grid {
                let ln_pe = curve[n as usize];
                if ln_pe == f64::NEG_INFINITY {
                    dropped.push(n);
                    continue;
                }
                xs.push(n as f64);
                ys.push(-ln_pe);
                ws.push(1.0);
            }
        }
        ExponentSource::MonteCarlo => {
            for &n in n_grid {
                let mut point_cfg = cfg.clone();
                point_cfg.n_copies = n;
                // Distinct seed per grid point keeps the substreams independent.
                point_cfg.seed = cfg
                    .seed
                    .wrapping_add((n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
                let res = run_adaptive(problem, &point_cfg)?;
                if res.empirical_p_e <= 0.0 {
                    dropped.push(n);
                    continue;
                }
                xs.push(n as f64);
                ys.push(-res.empirical_p_e.ln());
                // Var(ln p̂) ≈ (1−p)/(p·trials).
                let var =
                    (1.0 - res.empirical_p_e) / (res.empirical_p_e * res.n_trials as f64);
                ws.push(1.0 / var.max(1e-300));
            }
        }
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientPoints(format!(
            "only {} usable grid points after dropping zero-error counts",
            xs.len()
        )));
    }

    let (slope, se) = weighted_slope(&xs, &ys, &ws);
    Ok(ExponentEstimate {
        xi_hat: slope,
        ci: (slope - 1.96 * se, slope + 1.96 * se),
        dropped,
    })
}

/// WLS slope and its standard error for y = a + b·x.
fn weighted_slope(xs: &[f64], ys: &[f64], ws: &[f64]) -> (f64, f64) {
    let sw: f64 = ws.iter().sum();
    let mx = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = ys.iter().zip(ws).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = xs.iter().zip(ws).map(|(x, w)| w * (x - mx).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .zip(ws)
        .map(|((x, y), w)| w * (x - mx) * (y - my))
        .sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let n = xs.len() as f64;
    if n <= 2.0 {
        return (slope, 0.0);
    }
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .zip(ws)
        .map(|((x, y), w)| w * (y - intercept - slope * x).powi(2))
        .sum();
    let se = (rss / ((n - 2.0) * sxx)).sqrt();
    (slope, se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::exact_probabilities;
    use crate::quantum::PureState;
    use crate::DiscriminationProblem;

    fn two_state_overlap_half() -> DiscriminationProblem {
        DiscriminationProblem::two_state(
            PureState::basis(2, 0),
            PureState::from_bloch(std::f64::consts::FRAC_PI_2, 0.0),
            [0.5, 0.5],
        )
        .unwrap()
    }

    #[test]
    fn sample_outcome_point_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dist = RVector::from_vec(vec![0.0, 0.0, 1.0, 0.0]);
        for _ in 0..100 {
            assert_eq!(sample_outcome(&dist, &mut rng).unwrap(), 2);
        }
    }

    #[test]
    fn sample_outcome_uniform_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let dist = RVector::from_vec(vec![0.25; 4]);
        let draws = 1_000_000usize;
        let mut counts = [0u64; 4];
        for _ in 0..draws {
            counts[sample_outcome(&dist, &mut rng).unwrap()] += 1;
        }
        let sigma = (0.25 * 0.75 * draws as f64).sqrt();
        for &c in &counts {
            assert!((c as f64 - 0.25 * draws as f64).abs() < 5.0 * sigma);
        }
    }

    #[test]
    fn sample_outcome_rejects_bad_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dist = RVector::from_vec(vec![0.5, 0.4]);
        assert!(sample_outcome(&dist, &mut rng).is_err());
    }

    #[test]
    fn sample_outcome_deterministic_given_seed() {
        let dist = RVector::from_vec(vec![0.1, 0.2, 0.3, 0.4]);
        let seq = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..100)
                .map(|_| sample_outcome(&dist, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(seq(9), seq(9));
    }

    #[test]
    fn orthogonal_problem_has_zero_error() {
        let p = DiscriminationProblem::two_state(
            PureState::basis(2, 0),
            PureState::basis(2, 1),
            [0.5, 0.5],
        )
        .unwrap();
        let res = run_adaptive(&p, &SimConfig::new(1, 10_000, 4)).unwrap();
        assert_eq!(res.empirical_p_e, 0.0);
    }

    #[test]
    fn two_state_matches_closed_form_within_four_sigma() {
        let p = two_state_overlap_half();
        let res = run_adaptive(&p, &SimConfig::new(8, 1_000_000, 5)).unwrap();
        let exact = 0.001953125; // 0.5^8 / 2
        assert!((res.empirical_p_e - exact).abs() <= 4.0 * res.std_error.max(1e-9));
    }

    #[test]
    fn bb84_matches_exact_within_four_sigma() {
        let p = DiscriminationProblem::bb84();
        let res = run_adaptive(&p, &SimConfig::new(10, 200_000, 6)).unwrap();
        let exact = exact_probabilities(&p, 10).unwrap().p_e;
        assert!((res.empirical_p_e - exact).abs() <= 4.0 * res.std_error);
    }

    #[test]
    fn identical_config_reproduces_counts() {
        let p = DiscriminationProblem::bb84();
        let cfg = SimConfig::new(5, 50_000, 7);
        let a = run_adaptive(&p, &cfg).unwrap();
        let b = run_adaptive(&p, &cfg).unwrap();
        assert_eq!(a.per_state_confusion, b.per_state_confusion);
    }

    #[test]
    fn confusion_rows_sum_to_trial_counts() {
        let p = DiscriminationProblem::bb84();
        let res = run_adaptive(&p, &SimConfig::new(3, 10_000, 8)).unwrap();
        let total: u64 = res
            .per_state_confusion
            .iter()
            .map(|r| r.iter().sum::<u64>())
            .sum();
        assert_eq!(total, 10_000);
    }

    #[test]
    fn outcome_frequencies_match_markov_prediction() {
        // Per-outcome z-test at 5σ against P_k^n u0 for each true state.
        let p = DiscriminationProblem::bb84();
        let n = 4u32;
        let trials = 1_000_000u64;
        let cfg = SimConfig::new(n, trials, 11);
        let res = run_adaptive(&p, &cfg).unwrap();
        let exact = exact_probabilities(&p, n as u64).unwrap();
        for k in 0..4 {
            let row = &res.per_state_confusion[k];
            let row_total: u64 = row.iter().sum();
            let predicted = exact.per_state[k].probs();
            for j in 0..4 {
                let q = predicted[j];
                let sigma = (q * (1.0 - q) * row_total as f64).sqrt().max(1.0);
                assert!(
                    (row[j] as f64 - q * row_total as f64).abs() < 5.0 * sigma,
                    "state {k} outcome {j}"
                );
            }
        }
    }

    #[test]
    fn exponent_from_exact_curve_bb84() {
        let p = DiscriminationProblem::bb84();
        let grid: Vec<u32> = (50..=200).step_by(10).collect();
        let est = estimate_exponent(&p, &grid, &SimConfig::new(1, 1, 0), ExponentSource::Exact)
            .unwrap();
        assert!((est.xi_hat - std::f64::consts::LN_2).abs() / std::f64::consts::LN_2 < 0.02);
    }

    #[test]
    fn exponent_from_exact_curve_two_state() {
        // c = 0.25 ⇒ ξ = ln 4.
        let theta = 2.0 * (0.5_f64).acos(); // |⟨0|ψ⟩|² = cos²(θ/2) = 1/4
        let p = DiscriminationProblem::two_state(
            PureState::basis(2, 0),
            PureState::from_bloch(theta, 0.0),
            [0.5, 0.5],
        )
        .unwrap();
        let grid: Vec<u32> = (50..=200).step_by(25).collect();
        let est = estimate_exponent(&p, &grid, &SimConfig::new(1, 1, 0), ExponentSource::Exact)
            .unwrap();
        let target = 4.0_f64.ln();
        assert!((est.xi_hat - target).abs() / target < 0.02);
    }

    #[test]
    fn exponent_rejects_single_point_grid() {
        let p = DiscriminationProblem::bb84();
        assert!(matches!(
            estimate_exponent(&p, &[10], &SimConfig::new(1, 1, 0), ExponentSource::Exact),
            Err(Error::InsufficientPoints(_))
        ));
    }

    #[test]
    fn monte_carlo_exponent_is_in_the_right_range() {
        let p = two_state_overlap_half();
        let grid = [2u32, 4, 6, 8, 10];
        let est = estimate_exponent(
            &p,
            &grid,
            &SimConfig::new(1, 400_000, 12),
            ExponentSource::MonteCarlo,
        )
        .unwrap();
        assert!((est.xi_hat - std::f64::consts::LN_2).abs() < 0.1);
    }
}
