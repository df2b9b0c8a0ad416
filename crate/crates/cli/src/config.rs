//! Experiment configuration: TOML schema, `--override key=value` handling,
//! and complex-amplitude parsing ("re+imi" strings).

use serde::Deserialize;

use ctcdisc::qmath::{CMatrix, CVector, RVector, C64};
use ctcdisc::quantum::{DensityMatrix, PureState};
use ctcdisc::synthesis::{self, StateSet, UnitarySet};
use ctcdisc::DiscriminationProblem;

#[derive(Debug)]
pub enum CliError {
    /// Malformed or inconsistent configuration (exit 2).
    Config(String),
    /// The configured problem fails structural validation (exit 3).
    Validation(String),
    /// A resource guard tripped, e.g. the path-enumeration limit (exit 4).
    ResourceGuard(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::ResourceGuard(m) => write!(f, "resource guard: {m}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Maps library errors to exit classes: the enumeration guard is a resource
/// limit, everything else that escapes problem construction is validation.
pub(crate) fn lib_err(e: ctcdisc::Error) -> CliError {
    match e {
        ctcdisc::Error::InstanceTooLarge { .. } => CliError::ResourceGuard(e.to_string()),
        other => CliError::Validation(other.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Montecarlo,
    Exponent,
    Fixedpoint,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// "bb84" is the only builtin.
    pub builtin: Option<String>,
    /// Two-state problem: the two amplitude pairs.
    pub psi0: Option<Vec<String>>,
    pub psi1: Option<Vec<String>>,
    /// Qubit-set problem as Bloch angles [theta, phi] per state.
    pub bloch: Option<Vec<[f64; 2]>>,
    /// States as amplitude lists. Qubit-set when `unitaries` is absent,
    /// explicit-matrix problem when it is present.
    pub states: Option<Vec<Vec<String>>>,
    /// Explicit unitaries, row-major, one matrix per state.
    pub unitaries: Option<Vec<Vec<Vec<String>>>>,
    pub priors: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaConfig {
    /// "basis" (default), "mixed", or "diag".
    pub kind: String,
    pub index: Option<usize>,
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub problem: ProblemConfig,
    pub omega: Option<OmegaConfig>,
    /// Number of rounds (exact decay table upper end, Monte Carlo copies,
    /// fixed-point iteration budget).
    pub n: Option<u32>,
    /// Explicit round grid (exponent regression, or exact-table rows).
    pub n_grid: Option<Vec<u32>>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    /// Output CSV file name, joined onto the output directory.
    pub output: Option<String>,
    /// True-state index for fixedpoint mode.
    pub state_index: Option<usize>,
    /// Exact mode: also cross-check each row against path enumeration.
    pub brute_force: Option<bool>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.problem.check_single_source()?;
        Ok(cfg)
    }

    /// Parses a config file after applying `--override key=value` pairs.
    /// Keys are dotted TOML paths; values are parsed as TOML when possible
    /// and fall back to strings.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut value: toml::Value =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        for ov in overrides {
            let (key, raw) = ov
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override '{ov}' is not key=value")))?;
            let parsed: toml::Value = toml::from_str(&format!("v = {raw}"))
                .ok()
                .and_then(|t: toml::Value| t.get("v").cloned())
                .unwrap_or_else(|| toml::Value::String(raw.to_string()));
            set_path(&mut value, key, parsed)?;
        }
        let cfg: ExperimentConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        cfg.problem.check_single_source()?;
        Ok(cfg)
    }
}

fn set_path(root: &mut toml::Value, key: &str, new: toml::Value) -> Result<(), CliError> {
    let mut cursor = root;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        let table = cursor
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override path '{key}' is not a table")))?;
        cursor = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let table = cursor
        .as_table_mut()
        .ok_or_else(|| CliError::Config(format!("override path '{key}' is not a table")))?;
    table.insert(parts[parts.len() - 1].to_string(), new);
    Ok(())
}

impl ProblemConfig {
    fn check_single_source(&self) -> Result<(), CliError> {
        let two_state = self.psi0.is_some() || self.psi1.is_some();
        let sources = [
            self.builtin.is_some(),
            two_state,
            self.bloch.is_some(),
            self.states.is_some(),
        ];
        match sources.iter().filter(|&&s| s).count() {
            0 => Err(CliError::Config(
                "problem needs one of: builtin, psi0/psi1, bloch, states".into(),
            )),
            1 => {
                if two_state && (self.psi0.is_none() || self.psi1.is_none()) {
                    return Err(CliError::Config(
                        "two-state problem needs both psi0 and psi1".into(),
                    ));
                }
                if self.unitaries.is_some() && self.states.is_none() {
                    return Err(CliError::Config(
                        "explicit unitaries require explicit states".into(),
                    ));
                }
                Ok(())
            }
            _ => Err(CliError::Config(
                "problem must have exactly one source".into(),
            )),
        }
    }

    /// Builds the discrimination problem, applying the omega spec if present.
    pub fn build(&self, omega: Option<&OmegaConfig>) -> Result<DiscriminationProblem, CliError> {
        let problem = if let Some(name) = &self.builtin {
            match name.as_str() {
                "bb84" => {
                    if self.priors.is_some() {
                        let (states, us) = synthesis::bb84_unitaries();
                        let set = StateSet::new(
                            states.states().to_vec(),
                            self.priors.clone().unwrap(),
                        )
                        .map_err(lib_err)?;
                        DiscriminationProblem::new(set, us, None).map_err(lib_err)?
                    } else {
                        DiscriminationProblem::bb84()
                    }
                }
                other => {
                    return Err(CliError::Config(format!("unknown builtin '{other}'")));
                }
            }
        } else if let (Some(a0), Some(a1)) = (&self.psi0, &self.psi1) {
            let psi0 = parse_state(a0)?;
            let psi1 = parse_state(a1)?;
            let priors = match &self.priors {
                Some(p) if p.len() == 2 => [p[0], p[1]],
                Some(p) => {
                    return Err(CliError::Config(format!(
                        "two-state problem needs 2 priors, got {}",
                        p.len()
                    )))
                }
                None => [0.5, 0.5],
            };
            DiscriminationProblem::two_state(psi0, psi1, priors).map_err(lib_err)?
        } else if let Some(angles) = &self.bloch {
            let states: Vec<PureState> = angles
                .iter()
                .map(|&[theta, phi]| PureState::from_bloch(theta, phi))
                .collect();
            self.qubit_or_two_state(states)?
        } else if let Some(amp_lists) = &self.states {
            let states: Vec<PureState> = amp_lists
                .iter()
                .map(|a| parse_state(a))
                .collect::<Result<_, _>>()?;
            if let Some(raw_unitaries) = &self.unitaries {
                let set = self.state_set(states)?;
                let unitaries: Vec<CMatrix> = raw_unitaries
                    .iter()
                    .map(|rows| parse_matrix(rows))
                    .collect::<Result<_, _>>()?;
                let us = UnitarySet::new(unitaries).map_err(lib_err)?;
                DiscriminationProblem::new(set, us, None).map_err(lib_err)?
            } else {
                self.qubit_or_two_state(states)?
            }
        } else {
            return Err(CliError::Config("no problem source".into()));
        };

        match omega {
            None => Ok(problem),
            Some(spec) => {
                let dim = problem.dim();
                let w = build_omega(spec, dim)?;
                problem.with_omega(w).map_err(lib_err)
            }
        }
    }

    fn state_set(&self, states: Vec<PureState>) -> Result<StateSet, CliError> {
        match &self.priors {
            Some(p) => StateSet::new(states, p.clone()).map_err(lib_err),
            None => StateSet::uniform(states).map_err(lib_err),
        }
    }

    fn qubit_or_two_state(
        &self,
        states: Vec<PureState>,
    ) -> Result<DiscriminationProblem, CliError> {
        if states.iter().any(|s| s.dim() != 2) {
            return Err(CliError::Config(
                "qubit-set problems require 2-amplitude states".into(),
            ));
        }
        if states.len() == 2 {
            let priors = match &self.priors {
                Some(p) if p.len() == 2 => [p[0], p[1]],
                Some(_) => return Err(CliError::Config("need 2 priors".into())),
                None => [0.5, 0.5],
            };
            let mut it = states.into_iter();
            let psi0 = it.next().unwrap();
            let psi1 = it.next().unwrap();
            DiscriminationProblem::two_state(psi0, psi1, priors).map_err(lib_err)
        } else {
            DiscriminationProblem::qubit_set(self.state_set(states)?).map_err(lib_err)
        }
    }
}

fn build_omega(spec: &OmegaConfig, dim: usize) -> Result<DensityMatrix, CliError> {
    match spec.kind.as_str() {
        "basis" => {
            let i = spec.index.unwrap_or(0);
            if i >= dim {
                return Err(CliError::Config(format!(
                    "omega basis index {i} out of range for dim {dim}"
                )));
            }
            Ok(DensityMatrix::basis_projector(dim, i))
        }
        "mixed" => Ok(DensityMatrix::maximally_mixed(dim)),
        "diag" => {
            let values = spec
                .values
                .as_ref()
                .ok_or_else(|| CliError::Config("omega kind 'diag' needs values".into()))?;
            if values.len() != dim {
                return Err(CliError::Config(format!(
                    "omega diagonal has {} entries, problem dim is {dim}",
                    values.len()
                )));
            }
            DensityMatrix::from_diagonal(&RVector::from_vec(values.clone())).map_err(lib_err)
        }
        other => Err(CliError::Config(format!("unknown omega kind '{other}'"))),
    }
}

/// Parses "re+imi" complex literals: "1", "-0.5", "0.25i", "0.5+0.5i",
/// "1e-3-2e-2i".
pub fn parse_complex(s: &str) -> Result<C64, CliError> {
    let t = s.trim().replace(' ', "");
    if t.is_empty() {
        return Err(CliError::Config("empty complex literal".into()));
    }
    let bad = || CliError::Config(format!("cannot parse complex number '{s}'"));
    if let Some(body) = t.strip_suffix('i') {
        // Split at the last +/- that starts the imaginary term (skip a
        // leading sign and exponent signs).
        let bytes = body.as_bytes();
        let mut split = None;
        for idx in (1..bytes.len()).rev() {
            let c = bytes[idx] as char;
            if (c == '+' || c == '-') && !matches!(bytes[idx - 1] as char, 'e' | 'E') {
                split = Some(idx);
                break;
            }
        }
        match split {
            Some(idx) => {
                let re: f64 = body[..idx].parse().map_err(|_| bad())?;
                let im_str = &body[idx..];
                let im: f64 = if im_str == "+" {
                    1.0
                } else if im_str == "-" {
                    -1.0
                } else {
                    im_str.parse().map_err(|_| bad())?
                };
                Ok(C64::new(re, im))
            }
            None => {
                let im: f64 = if body.is_empty() {
                    1.0
                } else if body == "-" {
                    -1.0
                } else {
                    body.parse().map_err(|_| bad())?
                };
                Ok(C64::new(0.0, im))
            }
        }
    } else {
        let re: f64 = t.parse().map_err(|_| bad())?;
        Ok(C64::new(re, 0.0))
    }
}

/// Parses an amplitude list into a pure state. The raw vector must already be
/// normalized to within 1e-6; it is then renormalized exactly.
pub fn parse_state(amps: &[String]) -> Result<PureState, CliError> {
    let v: Vec<C64> = amps
        .iter()
        .map(|a| parse_complex(a))
        .collect::<Result<_, _>>()?;
    let vec = CVector::from_vec(v);
    let norm = vec.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(CliError::Config(format!(
            "state amplitudes have norm {norm}, expected 1 within 1e-6"
        )));
    }
    PureState::normalized(vec).map_err(lib_err)
}

fn parse_matrix(rows: &[Vec<String>]) -> Result<CMatrix, CliError> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(CliError::Config("empty matrix".into()));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(CliError::Config("ragged matrix rows".into()));
    }
    let mut m = CMatrix::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            m[(i, j)] = parse_complex(cell)?;
        }
    }
    Ok(m)
}
