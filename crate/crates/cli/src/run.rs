//! Mode dispatch and CSV emission.
//!
//! CSV output is byte-stable for a fixed config and seed: floats are printed
//! with 17 significant digits, '.' decimal separator, and '\n' line endings.

use std::path::{Path, PathBuf};

use ctcdisc::markov;
use ctcdisc::quantum::{self, DEFAULT_FIXED_POINT_TOL};
use ctcdisc::simulate::{self, ExponentSource, SimConfig};
use ctcdisc::DiscriminationProblem;

use crate::config::{lib_err, CliError, ExperimentConfig, Mode};

/// One-line result echoed to stdout.
#[derive(Debug, Clone)]
pub struct Summary {
    pub mode: Mode,
    pub headline: String,
    pub output_path: PathBuf,
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mode = match self.mode {
            Mode::Exact => "exact",
            Mode::Montecarlo => "montecarlo",
            Mode::Exponent => "exponent",
            Mode::Fixedpoint => "fixedpoint",
        };
        write!(
            f,
            "{mode}: {} -> {}",
            self.headline,
            self.output_path.display()
        )
    }
}

/// 17 significant digits, locale-independent.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn default_seed(cfg: &ExperimentConfig) -> u64 {
    cfg.seed.unwrap_or(0)
}

fn round_grid(cfg: &ExperimentConfig, default: Vec<u32>) -> Result<Vec<u32>, CliError> {
    if let Some(grid) = &cfg.n_grid {
        if grid.is_empty() {
            return Err(CliError::Config("n_grid is empty".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config("n_grid must be strictly increasing".into()));
        }
        return Ok(grid.clone());
    }
    if let Some(n) = cfg.n {
        return Ok((0..=n).collect());
    }
    Ok(default)
}

/// Runs the configured experiment and writes its CSV into `out_dir`.
pub fn execute(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Summary, CliError> {
    let problem = cfg.problem.build(cfg.omega.as_ref())?;
    std::fs::create_dir_all(out_dir)?;
    let default_name = match cfg.mode {
        Mode::Exact => "exact.csv",
        Mode::Montecarlo => "montecarlo.csv",
        Mode::Exponent => "exponent.csv",
        Mode::Fixedpoint => "fixedpoint.csv",
    };
    let output_path = out_dir.join(cfg.output.as_deref().unwrap_or(default_name));

    let (csv, headline) = match cfg.mode {
        Mode::Exact => run_exact(&problem, cfg)?,
        Mode::Montecarlo => run_montecarlo(&problem, cfg)?,
        Mode::Exponent => run_exponent(&problem, cfg)?,
        Mode::Fixedpoint => run_fixedpoint(&problem, cfg)?,
    };
    std::fs::write(&output_path, csv)?;
    Ok(Summary {
        mode: cfg.mode,
        headline,
        output_path,
    })
}

/// Decay table: n, p_e_exact, p_s_exact, neg_log_pe_over_n, and optional
/// Monte Carlo columns when trials are configured.
fn run_exact(
    problem: &DiscriminationProblem,
    cfg: &ExperimentConfig,
) -> Result<(String, String), CliError> {
    let grid = round_grid(cfg, (0..=20).collect())?;
    let with_mc = cfg.trials.is_some();
    let brute = cfg.brute_force.unwrap_or(false);
    let mut csv = String::from("n,p_e_exact,p_s_exact,neg_log_pe_over_n");
    if with_mc {
        csv.push_str(",p_e_mc,mc_stderr");
    }
    csv.push('\n');

    let mut last = (0u32, 0.0f64);
    for &n in &grid {
        let probs = markov::exact_probabilities(problem, n as u64).map_err(lib_err)?;
        if brute {
            let reference = markov::brute_force_error(problem, n).map_err(lib_err)?;
            if (reference - probs.p_e).abs() > 1e-10 {
                return Err(CliError::Validation(format!(
                    "path enumeration disagrees with matrix formula at n = {n}: {reference} vs {}",
                    probs.p_e
                )));
            }
        }
        let rate = if n == 0 {
            String::new()
        } else {
            fmt_float(-probs.p_e.ln() / n as f64)
        };
        csv.push_str(&format!(
            "{n},{},{},{rate}",
            fmt_float(probs.p_e),
            fmt_float(probs.p_s)
        ));
        if with_mc {
            let mut sim = SimConfig::new(n.max(1), cfg.trials.unwrap(), default_seed(cfg));
            sim.seed = sim
                .seed
                .wrapping_add((n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            if n == 0 {
                // No measurement rounds: the guess is the initial register.
                csv.push_str(",,");
            } else {
                let res = simulate::run_adaptive(problem, &sim).map_err(lib_err)?;
                csv.push_str(&format!(
                    ",{},{}",
                    fmt_float(res.empirical_p_e),
                    fmt_float(res.std_error)
                ));
            }
        }
        csv.push('\n');
        last = (n, probs.p_e);
    }
    Ok((csv, format!("p_e({}) = {:.6e}", last.0, last.1)))
}

/// Single-row Monte Carlo summary against the exact value.
fn run_montecarlo(
    problem: &DiscriminationProblem,
    cfg: &ExperimentConfig,
) -> Result<(String, String), CliError> {
    let n = cfg
        .n
        .ok_or_else(|| CliError::Config("montecarlo mode needs n".into()))?;
    if n == 0 {
        return Err(CliError::Config("montecarlo mode needs n >= 1".into()));
    }
    let trials = cfg
        .trials
        .ok_or_else(|| CliError::Config("montecarlo mode needs trials".into()))?;
    let seed = default_seed(cfg);
    let sim = SimConfig::new(n, trials, seed);
    let res = simulate::run_adaptive(problem, &sim).map_err(lib_err)?;
    let exact = markov::exact_probabilities(problem, n as u64).map_err(lib_err)?;
    let mut csv = String::from("n,trials,seed,p_e_exact,p_e_mc,mc_stderr\n");
    csv.push_str(&format!(
        "{n},{trials},{seed},{},{},{}\n",
        fmt_float(exact.p_e),
        fmt_float(res.empirical_p_e),
        fmt_float(res.std_error)
    ));
    Ok((
        csv,
        format!(
            "p_e_mc = {:.6e} (exact {:.6e}, stderr {:.2e})",
            res.empirical_p_e, exact.p_e, res.std_error
        ),
    ))
}

/// Exponent report plus the regression estimate over the round grid.
fn run_exponent(
    problem: &DiscriminationProblem,
    cfg: &ExperimentConfig,
) -> Result<(String, String), CliError> {
    let report = markov::exponent_report(problem).map_err(lib_err)?;
    let grid = round_grid(cfg, (50..=200).step_by(10).collect())?;
    if grid.len() < 2 {
        return Err(CliError::Config(
            "exponent mode needs an n_grid with at least 2 points".into(),
        ));
    }
    let sim = SimConfig::new(1, cfg.trials.unwrap_or(1), default_seed(cfg));
    let source = if cfg.trials.is_some() {
        ExponentSource::MonteCarlo
    } else {
        ExponentSource::Exact
    };
    let est = simulate::estimate_exponent(problem, &grid, &sim, source).map_err(lib_err)?;
    let mut csv = String::from(
        "tau,xi_lower,gersh_col,gersh_row,chernoff,xi_hat_regression,ci_lo,ci_hi\n",
    );
    csv.push_str(&format!(
        "{},{},{},{},{},{},{},{}\n",
        fmt_float(report.tau),
        fmt_float(report.xi_lower),
        fmt_float(report.gersh_col),
        fmt_float(report.gersh_row),
        fmt_float(report.chernoff),
        fmt_float(est.xi_hat),
        fmt_float(est.ci.0),
        fmt_float(est.ci.1)
    ));
    Ok((
        csv,
        format!(
            "tau = {:.9}, xi_lower = {:.9}, xi_hat = {:.9}",
            report.tau, report.xi_lower, est.xi_hat
        ),
    ))
}

/// Fixed-point iteration trace: per-iteration residual and distance to the
/// target basis state.
fn run_fixedpoint(
    problem: &DiscriminationProblem,
    cfg: &ExperimentConfig,
) -> Result<(String, String), CliError> {
    let a = cfg.state_index.unwrap_or(0);
    if a >= problem.n() {
        return Err(CliError::Config(format!(
            "state_index {a} out of range for {} states",
            problem.n()
        )));
    }
    let max_iters = cfg.n.unwrap_or(200) as usize;
    let v = quantum::build_interaction_unitary(problem.unitaries()).map_err(lib_err)?;
    let rho = problem.embedded_state(a).projector();
    let target = ctcdisc::quantum::DensityMatrix::basis_projector(problem.dim(), a);

    let mut csv = String::from("iter,residual,trace_distance_to_target\n");
    let mut sigma = problem.omega().clone();
    let mut final_dist = quantum::trace_distance(&sigma, &target).map_err(lib_err)?;
    for iter in 0..=max_iters {
        let next = quantum::ctc_channel(&v, &rho, &sigma).map_err(lib_err)?;
        let residual = quantum::trace_norm(&(next.matrix() - sigma.matrix()));
        final_dist = quantum::trace_distance(&sigma, &target).map_err(lib_err)?;
        csv.push_str(&format!(
            "{iter},{},{}\n",
            fmt_float(residual),
            fmt_float(final_dist)
        ));
        if residual <= DEFAULT_FIXED_POINT_TOL {
            break;
        }
        sigma = next;
    }
    Ok((
        csv,
        format!("trace distance to |{a}><{a}| = {final_dist:.6e}"),
    ))
}
