use std::collections::BTreeSet;

use qvac::thermo::EPSILON_MIN;
use qvac::vacuum::required_cutoff;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{CliError, Result};

/// A list of real values, written either as an explicit list or as an
/// inclusive `{ min, max, steps }` range.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<f64>);

#[derive(Deserialize)]
#[serde(untagged)]
enum GridSpec {
    List(Vec<f64>),
    Range { min: f64, max: f64, steps: usize },
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match GridSpec::deserialize(d)? {
            GridSpec::List(v) => Ok(Grid(v)),
            GridSpec::Range { min, max, steps } => match steps {
                0 => Err(serde::de::Error::custom("grid steps must be at least 1")),
                1 => Ok(Grid(vec![min])),
                n => Ok(Grid((0..n).map(|k| min + (max - min) * k as f64 / (n - 1) as f64).collect())),
            },
        }
    }
}

impl Grid {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Momentum {
    pub label: i64,
    pub omega: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgebraConfig {
    pub cutoff: usize,
    pub margin: usize,
    pub q: Grid,
}

impl Default for AlgebraConfig {
    fn default() -> Self {
        Self { cutoff: 16, margin: 2, q: Grid(vec![0.5, 1.0, 2.0, std::f64::consts::E]) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BogoliubovConfig {
    pub bridge_epsilon: Grid,
    pub bridge_cutoff: usize,
    pub epsilon: f64,
    pub cutoff: usize,
    pub margin: usize,
}

impl Default for BogoliubovConfig {
    fn default() -> Self {
        Self { bridge_epsilon: Grid(vec![0.1, 0.5]), bridge_cutoff: 3, epsilon: 0.3, cutoff: 20, margin: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VacuumConfig {
    /// Cutoff of the space on which `H_ε` is applied to `|0(ε)>`.
    pub hamiltonian_cutoff: usize,
}

impl Default for VacuumConfig {
    fn default() -> Self {
        Self { hamiltonian_cutoff: 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermoConfig {
    pub beta: Grid,
    pub omega: Grid,
}

impl Default for ThermoConfig {
    fn default() -> Self {
        Self { beta: Grid(vec![0.2, 0.5, 1.0, 2.0, 5.0]), omega: Grid(vec![0.5, 1.0, 2.0]) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntangleConfig {
    pub epsilon: Grid,
    pub max_n: usize,
    pub conjugation_epsilon: f64,
    pub conjugation_cutoff: usize,
    pub conjugation_margin: usize,
}

impl Default for EntangleConfig {
    fn default() -> Self {
        Self {
            epsilon: Grid(vec![0.2, 0.5, 1.0]),
            max_n: 10,
            conjugation_epsilon: 0.3,
            conjugation_cutoff: 6,
            conjugation_margin: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OverlapConfig {
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub n_pairs: usize,
}

impl Default for OverlapConfig {
    fn default() -> Self {
        Self { epsilon: 1.0, epsilon_prime: 0.0, n_pairs: 10 }
    }
}

fn default_tolerance() -> f64 {
    1e-10
}

fn default_out_dir() -> String {
    "reports".into()
}

/// Validated run configuration. After [`parse_config`] the cutoff is always set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub momenta: Vec<Momentum>,
    #[serde(default)]
    pub cutoff: Option<usize>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    /// Reserved; every experiment is deterministic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub algebra: AlgebraConfig,
    #[serde(default)]
    pub bogoliubov: BogoliubovConfig,
    #[serde(default)]
    pub vacuum: VacuumConfig,
    #[serde(default)]
    pub thermo: ThermoConfig,
    #[serde(default)]
    pub entangle: EntangleConfig,
    #[serde(default)]
    pub overlap: OverlapConfig,
}

impl RunConfig {
    pub fn cutoff(&self) -> usize {
        self.cutoff.unwrap_or_else(|| self.planned_cutoff())
    }

    pub fn max_abs_epsilon(&self) -> f64 {
        self.momenta.iter().map(|m| m.epsilon.abs()).fold(0.0, f64::max)
    }

    fn planned_cutoff(&self) -> usize {
        required_cutoff(self.max_abs_epsilon(), self.tolerance)
    }

    fn validate(mut self) -> Result<Self> {
        if self.momenta.is_empty() {
            return Err(invalid("momenta", "at least one momentum is required"));
        }
        let mut labels = BTreeSet::new();
        for m in &self.momenta {
            if !labels.insert(m.label) {
                return Err(invalid("label", format!("momentum label {} appears twice", m.label)));
            }
            if !(m.omega > 0.0 && m.omega.is_finite()) {
                return Err(invalid("omega", format!("must be positive and finite, got {}", m.omega)));
            }
            if !m.epsilon.is_finite() {
                return Err(invalid("epsilon", "must be finite"));
            }
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(invalid("tolerance", format!("must lie in (0, 1), got {}", self.tolerance)));
        }
        let need = self.planned_cutoff();
        match self.cutoff {
            None => self.cutoff = Some(need),
            Some(c) if c < need || c == 0 => {
                return Err(invalid(
                    "cutoff",
                    format!(
                        "{c} violates tanh^(2(N+1)) < {:e} at |epsilon| = {}; the minimal admissible cutoff is {need}",
                        self.tolerance,
                        self.max_abs_epsilon()
                    ),
                ))
            }
            Some(_) => {}
        }

        check_min("algebra.cutoff", self.algebra.cutoff, 1)?;
        check_positive_grid("algebra.q", &self.algebra.q)?;
        check_min("bogoliubov.bridge_cutoff", self.bogoliubov.bridge_cutoff, 1)?;
        check_min("bogoliubov.cutoff", self.bogoliubov.cutoff, 1)?;
        check_finite_grid("bogoliubov.bridge_epsilon", &self.bogoliubov.bridge_epsilon)?;
        check_finite("bogoliubov.epsilon", self.bogoliubov.epsilon)?;
        check_min("vacuum.hamiltonian_cutoff", self.vacuum.hamiltonian_cutoff, 1)?;
        check_positive_grid("thermo.beta", &self.thermo.beta)?;
        check_positive_grid("thermo.omega", &self.thermo.omega)?;
        check_finite_grid("entangle.epsilon", &self.entangle.epsilon)?;
        check_finite("entangle.conjugation_epsilon", self.entangle.conjugation_epsilon)?;
        check_min("entangle.conjugation_cutoff", self.entangle.conjugation_cutoff, 1)?;
        check_finite("overlap.epsilon", self.overlap.epsilon)?;
        check_finite("overlap.epsilon_prime", self.overlap.epsilon_prime)?;
        check_min("overlap.n_pairs", self.overlap.n_pairs, 2)?;
        Ok(self)
    }

    /// Experiment-specific preconditions.
    pub fn check_for(&self, experiment: Experiment) -> Result<()> {
        if matches!(experiment, Experiment::EntangleReport | Experiment::VerifyAll) {
            let eps = self.momenta.iter().map(|m| m.epsilon).chain(self.entangle.epsilon.values().iter().copied());
            for e in eps {
                if e.abs() < EPSILON_MIN {
                    return Err(invalid(
                        "epsilon",
                        format!("{e} is below the entropy guard epsilon_min = {EPSILON_MIN:e}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

fn check_min(field: &str, v: usize, min: usize) -> Result<()> {
    if v < min {
        return Err(invalid(field, format!("must be at least {min}, got {v}")));
    }
    Ok(())
}

fn check_finite(field: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(invalid(field, "must be finite"));
    }
    Ok(())
}

fn check_finite_grid(field: &str, g: &Grid) -> Result<()> {
    if g.values().is_empty() {
        return Err(invalid(field, "grid is empty"));
    }
    g.values().iter().try_for_each(|&v| check_finite(field, v))
}

fn check_positive_grid(field: &str, g: &Grid) -> Result<()> {
    check_finite_grid(field, g)?;
    match g.values().iter().find(|&&v| v <= 0.0) {
        Some(v) => Err(invalid(field, format!("values must be positive, got {v}"))),
        None => Ok(()),
    }
}

/// Parse and validate a TOML run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, None)
}

/// As [`parse_config`], with the document's tolerance replaced before the
/// cutoff is planned or checked.
pub fn parse_config_with(text: &str, tolerance: Option<f64>) -> Result<RunConfig> {
    let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(t) = tolerance {
        cfg.tolerance = t;
    }
    cfg.validate()
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    AlgebraCheck,
    BogoliubovCheck,
    VacuumCheck,
    ThermoScan,
    EntangleReport,
    OverlapScaling,
    VerifyAll,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::AlgebraCheck,
        Experiment::BogoliubovCheck,
        Experiment::VacuumCheck,
        Experiment::ThermoScan,
        Experiment::EntangleReport,
        Experiment::OverlapScaling,
        Experiment::VerifyAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::AlgebraCheck => "algebra-check",
            Experiment::BogoliubovCheck => "bogoliubov-check",
            Experiment::VacuumCheck => "vacuum-check",
            Experiment::ThermoScan => "thermo-scan",
            Experiment::EntangleReport => "entangle-report",
            Experiment::OverlapScaling => "overlap-scaling",
            Experiment::VerifyAll => "verify-all",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown experiment {s:?}")))
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
