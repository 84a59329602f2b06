//! Scenario configuration files.
//!
//! A config file holds one scenario object or an array of them. Unknown keys
//! are rejected so that a typo cannot silently fall back to a default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clifford_dirac::clifford_fiber::Signature;
use clifford_dirac::graded_modules::StmDims;
use clifford_dirac::linalg::{re, Mat};
use clifford_dirac::scenarios::FieldShape;
use serde::Deserialize;

use crate::checks;

/// Anything that makes a config unusable; maps to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("scenario {scenario}: {reason}")]
    Invalid { scenario: String, reason: String },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureSpec {
    pub p: usize,
    pub q: usize,
}

/// Right/left-handed block sizes of `W = Λ ⊗ (V_R ⊕ V_L ⊕ E_R ⊕ E_L)`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistSpec {
    #[serde(default = "one")]
    pub v_r: usize,
    #[serde(default)]
    pub v_l: usize,
    #[serde(default = "one")]
    pub e_r: usize,
    #[serde(default)]
    pub e_l: usize,
}

fn one() -> usize {
    1
}

impl Default for TwistSpec {
    fn default() -> Self {
        TwistSpec { v_r: 1, v_l: 0, e_r: 1, e_l: 0 }
    }
}

/// Real neutrino mass blocks, inline or in a separate JSON file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MassSpec {
    Inline(MassMatrices),
    File { file: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassMatrices {
    pub m_d: Vec<Vec<f64>>,
    pub m_m: Vec<Vec<f64>>,
    /// Ambient dimension for the `lambda` command; scenarios use their own.
    #[serde(default)]
    pub n: Option<usize>,
}

impl MassMatrices {
    /// Both blocks as square matrices of the same size.
    pub fn matrices(&self) -> Result<(Mat, Mat), String> {
        let d = to_mat(&self.m_d, "m_d")?;
        let m = to_mat(&self.m_m, "m_m")?;
        if d.shape() != m.shape() {
            return Err(format!("m_d is {}x{} but m_m is {}x{}", d.nrows(), d.ncols(), m.nrows(), m.ncols()));
        }
        Ok((d, m))
    }
}

fn to_mat(rows: &[Vec<f64>], name: &str) -> Result<Mat, String> {
    let k = rows.len();
    if k == 0 || rows.iter().any(|r| r.len() != k) {
        return Err(format!("{name} must be a non-empty square matrix"));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(format!("{name} has non-finite entries"));
    }
    Ok(Mat::from_fn(k, k, |i, j| re(rows[i][j])))
}

pub fn read_mass_file(path: &Path) -> Result<MassMatrices, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| ConfigError::Json { path: path.into(), source })
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchSpec {
    /// Hermitian zero-order fields for the generic-operator checks.
    #[serde(default)]
    pub hermitian: bool,
    /// Restricts the real simple-type check to the `γ_S^cc = ±γ_S` branch.
    #[serde(default)]
    pub sign: Option<i8>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub signature: SignatureSpec,
    pub epsilon: i8,
    #[serde(default)]
    pub twist: TwistSpec,
    #[serde(default = "one_i32")]
    pub band: i32,
    #[serde(default = "six")]
    pub capacity: i32,
    pub seed: u64,
    pub checks: Vec<String>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub masses: Option<MassSpec>,
    #[serde(default)]
    pub branch: BranchSpec,
    /// Overrides every check's default sample count.
    #[serde(default)]
    pub samples: Option<usize>,
}

fn one_i32() -> i32 {
    1
}

fn six() -> i32 {
    6
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ConfigFile {
    One(Box<ScenarioConfig>),
    Many(Vec<ScenarioConfig>),
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub sig: Signature,
    pub twist: StmDims,
    pub shape: FieldShape,
    pub seed: u64,
    pub checks: Vec<String>,
    pub tolerances: BTreeMap<String, f64>,
    pub masses: Option<(Mat, Mat)>,
    pub branch: BranchSpec,
    pub samples: Option<usize>,
}

impl Scenario {
    pub fn tolerance(&self, id: &str, default: f64) -> f64 {
        self.tolerances.get(id).copied().unwrap_or(default)
    }

    pub fn samples(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }
}

pub fn load(path: &Path) -> Result<Vec<Scenario>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    let parsed: ConfigFile = serde_json::from_str(&text).map_err(|source| ConfigError::Json { path: path.into(), source })?;
    let configs = match parsed {
        ConfigFile::One(c) => vec![*c],
        ConfigFile::Many(v) => v,
    };
    let base = path.parent().unwrap_or(Path::new("."));
    configs.into_iter().enumerate().map(|(i, c)| validate(c, i, base)).collect()
}

fn validate(c: ScenarioConfig, index: usize, base: &Path) -> Result<Scenario, ConfigError> {
    let name = c.name.clone().unwrap_or_else(|| format!("({},{},{:+})", c.signature.p, c.signature.q, c.epsilon));
    let bad = |reason: String| ConfigError::Invalid { scenario: format!("#{index} {name}"), reason };
    let sig = Signature::new(c.signature.p, c.signature.q, c.epsilon).map_err(|e| bad(e.to_string()))?;
    if sig.n() % 2 != 0 {
        return Err(bad(format!("n = {} must be even", sig.n())));
    }
    if c.band < 1 {
        return Err(bad("band must be at least 1".into()));
    }
    if c.capacity < 4 * c.band + 2 {
        return Err(bad(format!("capacity {} below 4K+2 = {}", c.capacity, 4 * c.band + 2)));
    }
    for id in c.checks.iter().chain(c.tolerances.keys()) {
        if checks::find(id).is_none() {
            return Err(bad(format!("unknown check `{id}`")));
        }
    }
    if let Some((id, t)) = c.tolerances.iter().find(|(_, t)| !(t.is_finite() && **t > 0.0)) {
        return Err(bad(format!("tolerance for `{id}` must be positive, got {t}")));
    }
    if let Some(s) = c.branch.sign {
        if s != 1 && s != -1 {
            return Err(bad(format!("branch sign must be ±1, got {s}")));
        }
    }
    let twist = StmDims { v_r: c.twist.v_r, v_l: c.twist.v_l, e_r: c.twist.e_r, e_l: c.twist.e_l };
    if twist.nu() == 0 {
        return Err(bad("the twist needs a neutrino block".into()));
    }
    let masses = match &c.masses {
        None => None,
        Some(spec) => {
            let m = match spec {
                MassSpec::Inline(m) => m.clone(),
                MassSpec::File { file } => read_mass_file(&base.join(file))?,
            };
            let (d, mm) = m.matrices().map_err(bad)?;
            if d.nrows() != twist.nu() {
                return Err(bad(format!("mass blocks are {}x{} but the neutrino block has dimension {}", d.nrows(), d.nrows(), twist.nu())));
            }
            Some((d, mm))
        }
    };
    if c.samples == Some(0) {
        return Err(bad("samples must be positive".into()));
    }
    Ok(Scenario {
        name,
        sig,
        twist,
        shape: FieldShape { band: c.band, capacity: c.capacity, ..FieldShape::default() },
        seed: c.seed,
        checks: c.checks,
        tolerances: c.tolerances,
        masses,
        branch: c.branch,
        samples: c.samples,
    })
}
