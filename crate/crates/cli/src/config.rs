use serde::{Deserialize, Serialize};
use std::path::PathBuf;

pub fn golden_omega() -> f64 {
    std::f64::consts::PI * (5f64.sqrt() - 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Reduce,
    Oracle,
    Spectrum,
    Nls,
    Variational,
    Measure,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Reduce => "reduce",
            Experiment::Oracle => "oracle",
            Experiment::Spectrum => "spectrum",
            Experiment::Nls => "nls",
            Experiment::Variational => "variational",
            Experiment::Measure => "measure",
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub strict_gate: bool,
    pub reduce: Option<ReduceSection>,
    pub oracle: Option<OracleSection>,
    pub spectrum: Option<SpectrumSection>,
    pub nls: Option<NlsSection>,
    pub variational: Option<VariationalSection>,
    pub measure: Option<MeasureSection>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Cos,
    DecayingCos,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ReduceSection {
    pub eps: f64,
    pub modes: usize,
    #[serde(default = "default_potential")]
    pub potential: PotentialKind,
    #[serde(default = "one")]
    pub n: usize,
    /// Defaults to the golden frequency when `n = 1`.
    pub omega: Option<Vec<f64>>,
    pub k0: Option<usize>,
    pub max_steps: Option<usize>,
    pub target: Option<f64>,
    pub alpha0: Option<f64>,
    pub tau: Option<f64>,
    #[serde(default)]
    pub dump_map: bool,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "oracle_eps")]
    pub eps: f64,
    #[serde(default = "oracle_modes")]
    pub modes: usize,
    #[serde(default = "golden_omega")]
    pub omega: f64,
    #[serde(default = "oracle_k0")]
    pub k0: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection { eps: oracle_eps(), modes: oracle_modes(), omega: golden_omega(), k0: oracle_k0() }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub nu: f64,
    #[serde(default = "one")]
    pub n: usize,
    #[serde(default = "spectrum_modes")]
    pub modes: usize,
    /// Highest index of the random `g` coefficients.
    #[serde(default = "spectrum_modes")]
    pub k_max: usize,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to all ones.
    pub xi: Option<Vec<f64>>,
    #[serde(default = "scan_kmax")]
    pub scan_kmax: usize,
    #[serde(default = "scan_jmax")]
    pub scan_jmax: usize,
    #[serde(default = "scan_samples")]
    pub samples: usize,
    #[serde(default = "scan_seed")]
    pub scan_seed: u64,
    #[serde(default = "scan_alpha")]
    pub alpha: f64,
    #[serde(default = "two")]
    pub tau: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NlsSection {
    pub nu: f64,
    pub eps: f64,
    #[serde(default = "one")]
    pub n: usize,
    #[serde(default = "one")]
    pub m: usize,
    #[serde(default = "nls_modes")]
    pub modes: usize,
    #[serde(default = "nls_modes")]
    pub k_max: usize,
    #[serde(default)]
    pub seed: u64,
    pub xi: Option<Vec<f64>>,
    /// Actions `I_j`; default all ones.
    pub actions: Option<Vec<f64>>,
    #[serde(default = "four")]
    pub degree: usize,
    #[serde(default = "one")]
    pub max_steps: usize,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct VariationalSection {
    pub mu: f64,
    pub p: f64,
    pub count: usize,
    #[serde(default = "var_modes")]
    pub modes: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "var_tol")]
    pub tol: f64,
    /// Focusing strength; absent means defocusing.
    pub focusing: Option<f64>,
    /// Length of the orbit check; zero skips it.
    #[serde(default)]
    pub orbit_time: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSection {
    pub alphas: Vec<f64>,
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "four_f")]
    pub tau: f64,
    #[serde(default = "measure_k")]
    pub kmax: usize,
    #[serde(default = "measure_j")]
    pub jmax: usize,
    #[serde(default = "one_f")]
    pub omega_min: f64,
    #[serde(default = "two")]
    pub omega_max: f64,
}

fn default_potential() -> PotentialKind {
    PotentialKind::DecayingCos
}
fn one() -> usize {
    1
}
fn four() -> usize {
    4
}
fn four_f() -> f64 {
    4.0
}
fn one_f() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn oracle_eps() -> f64 {
    0.01
}
fn oracle_modes() -> usize {
    32
}
fn oracle_k0() -> usize {
    8
}
fn spectrum_modes() -> usize {
    24
}
fn scan_kmax() -> usize {
    4
}
fn scan_jmax() -> usize {
    8
}
fn scan_samples() -> usize {
    200
}
fn scan_seed() -> u64 {
    1
}
fn scan_alpha() -> f64 {
    1e-3
}
fn nls_modes() -> usize {
    24
}
fn var_modes() -> usize {
    32
}
fn var_tol() -> f64 {
    1e-6
}
fn measure_k() -> usize {
    30
}
fn measure_j() -> usize {
    16
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.message().to_string())
    }
}
