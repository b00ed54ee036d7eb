use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::blockmat::{BlockMatrix, BlockSpec, MatrixFile, PermutationWord};
use crate::cosets::{FamilyKind, GroupFamily, Measure};
use crate::error::{CosetError, Result};
use crate::geometry::DistanceOptions;
use crate::haar::{haar_unitary, uniform_permutation, RandomStream};

/// Where `g` or `h` comes from.
///
/// Written in a config as a string: `"identity"`, `"random_unitary"`,
/// `"random_permutation"`, a permutation in cycle or image-list notation,
/// or a path to a matrix file (optionally prefixed with `file:`).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum MatrixSource {
    #[default]
    Identity,
    /// Haar on `U(α + mk)`; uniform on `S(α + mk)` for the symmetric family.
    RandomUnitary,
    RandomPermutation,
    Permutation(String),
    File(PathBuf),
}

impl MatrixSource {
    pub fn parse(text: &str) -> Self {
        let t = text.trim();
        match t {
            "identity" | "id" => return MatrixSource::Identity,
            "random_unitary" | "random-unitary" => return MatrixSource::RandomUnitary,
            "random_permutation" | "random-permutation" => return MatrixSource::RandomPermutation,
            _ => {}
        }
        if let Some(path) = t.strip_prefix("file:") {
            return MatrixSource::File(PathBuf::from(path));
        }
        let looks_like_perm = t.starts_with('(')
            || (!t.is_empty()
                && t.chars().all(|c| c.is_ascii_digit() || c == ',' || c == '[' || c == ']' || c.is_whitespace()));
        if looks_like_perm {
            MatrixSource::Permutation(t.to_string())
        } else {
            MatrixSource::File(PathBuf::from(t))
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, MatrixSource::RandomUnitary | MatrixSource::RandomPermutation)
    }

    /// Materializes the source as an element of the small group `U(α + mk)`.
    pub fn resolve(&self, kind: FamilyKind, spec: BlockSpec, stream: RandomStream) -> Result<BlockMatrix<f64>> {
        let n = spec.small_dim();
        let m = match self {
            MatrixSource::Identity => BlockMatrix::identity(n, None)?,
            MatrixSource::RandomPermutation => {
                BlockMatrix::from_permutation(uniform_permutation(n, &mut stream.rng()), None)?
            }
            MatrixSource::RandomUnitary if kind == FamilyKind::Symmetric => {
                BlockMatrix::from_permutation(uniform_permutation(n, &mut stream.rng()), None)?
            }
            MatrixSource::RandomUnitary => {
                BlockMatrix::from_entries(haar_unitary::<f64, _>(n, &mut stream.rng()), None)?
            }
            MatrixSource::Permutation(text) => {
                let p = PermutationWord::parse(text, n)?;
                if p.degree() != n {
                    return Err(CosetError::Config(format!(
                        "permutation `{text}` has degree {}, expected {n}",
                        p.degree()
                    )));
                }
                BlockMatrix::from_permutation(p, None)?
            }
            MatrixSource::File(path) => {
                let m = MatrixFile::read(path)?.to_matrix::<f64>(None)?;
                if m.dim() != n {
                    return Err(CosetError::Config(format!(
                        "{}: matrix has dimension {}, expected alpha + m*k = {n}",
                        path.display(),
                        m.dim()
                    )));
                }
                if !m.is_unitary(1e-8) {
                    return Err(CosetError::Config(format!("{}: matrix is not unitary", path.display())));
                }
                m
            }
        };
        if kind == FamilyKind::Symmetric && m.exact_permutation().is_none() {
            return Err(CosetError::Config(
                "the symmetric family needs permutation inputs".into(),
            ));
        }
        Ok(m)
    }
}

impl fmt::Display for MatrixSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixSource::Identity => f.write_str("identity"),
            MatrixSource::RandomUnitary => f.write_str("random_unitary"),
            MatrixSource::RandomPermutation => f.write_str("random_permutation"),
            MatrixSource::Permutation(t) => f.write_str(t),
            MatrixSource::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl Serialize for MatrixSource {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for MatrixSource {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Images(Vec<usize>),
        }
        Ok(match Raw::deserialize(d)? {
            Raw::Text(t) => MatrixSource::parse(&t),
            Raw::Images(v) => MatrixSource::Permutation(
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
            ),
        })
    }
}

/// How a unitary sample's distance to the target is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMethod {
    /// Tail compression to `N = 2k`, then the alternating solver.
    #[default]
    Reduced,
    /// The alternating solver on the assembled full-size sample.
    Direct,
}

fn default_m() -> usize {
    1
}
fn default_restarts() -> usize {
    DistanceOptions::default().restarts
}
fn default_max_iters() -> usize {
    DistanceOptions::default().max_iters
}
fn default_tol() -> f64 {
    DistanceOptions::default().tol
}

/// A concentration sweep, read from JSON with these field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilyKind,
    pub alpha: usize,
    pub k: usize,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    pub epsilon_list: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub g_spec: MatrixSource,
    #[serde(default)]
    pub h_spec: MatrixSource,
    #[serde(default)]
    pub measure: Measure,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub distance_method: DistanceMethod,
    /// Write wall-clock seconds into `runtime_s`; off keeps reports byte-stable.
    #[serde(default)]
    pub record_runtime: bool,
    /// Re-evaluate each hit's witness at full size before counting it.
    #[serde(default)]
    pub verify_witnesses: bool,
}

impl ExperimentConfig {
    /// A config with solver defaults and identity `g`, `h`.
    pub fn new(family: FamilyKind, alpha: usize, k: usize, m: usize) -> Self {
        Self {
            family,
            alpha,
            k,
            m,
            n_list: Vec::new(),
            epsilon_list: Vec::new(),
            samples: 1,
            seed: 0,
            g_spec: MatrixSource::Identity,
            h_spec: MatrixSource::Identity,
            measure: Measure::TauTilde,
            restarts: default_restarts(),
            max_iters: default_max_iters(),
            tol: default_tol(),
            distance_method: DistanceMethod::Reduced,
            record_runtime: false,
            verify_witnesses: false,
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CosetError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CosetError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let family = self.base_family()?;
        if self.n_list.is_empty() {
            return Err(CosetError::Config("N_list is empty".into()));
        }
        for &n in &self.n_list {
            if n < self.k {
                return Err(CosetError::Config(format!("N = {n} is smaller than k = {}", self.k)));
            }
            let dim = family.spec.with_tail(n).dim();
            if dim > 1 << 14 {
                return Err(CosetError::Config(format!("N = {n} gives dimension {dim}, too large")));
            }
        }
        if self.epsilon_list.is_empty() {
            return Err(CosetError::Config("epsilon_list is empty".into()));
        }
        if let Some(e) = self.epsilon_list.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(CosetError::Config(format!("epsilon {e} is not positive")));
        }
        if self.samples == 0 {
            return Err(CosetError::Config("samples must be at least 1".into()));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(CosetError::Config("tol must be a nonnegative number".into()));
        }
        Ok(())
    }

    /// The family at `N = 0`; use [`GroupFamily::with_tail`] for each `N`.
    pub fn base_family(&self) -> Result<GroupFamily> {
        GroupFamily::new(self.family, BlockSpec::new(self.alpha, self.k, 0, self.m)?)
    }

    pub fn options(&self) -> DistanceOptions {
        DistanceOptions {
            max_iters: self.max_iters,
            tol: self.tol,
            restarts: self.restarts,
            seed: self.seed,
        }
    }
}
