//! JSON chain definitions.
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "initial_state": "plus",
//!   "stages": [{ "observable": "Sz", "sigma": 0.5 }, { "observable": "Sx", "sigma": 0.5 }],
//!   "query": { "free_index": 2, "fixed_outcomes": [0.3] },
//!   "sweep": { "parameter": "query.fixed_outcomes[0]", "min": -1, "max": 1, "steps": 21 }
//! }
//! ```
//!
//! `free_index` counts stages from 1. Matrices are arrays of rows whose
//! entries are numbers or `[re, im]` pairs. Sweep parameters are paths into
//! the document with 0-based array indices: `stages[i].sigma` or
//! `query.fixed_outcomes[j]`.

use std::fmt;

use seqmeas::chain::{ChainQuery, MeasurementChain};
use seqmeas::kraus::MeasurementStage;
use seqmeas::linalg::ComplexMatrix;
use seqmeas::{Complex64, DensityMatrix, Observable, PureState};
use serde::Deserialize;

use crate::grid::Grid;

/// A config problem located by its field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn at(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self { path: path.into(), message: message.to_string() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(&self) -> Complex64 {
        match *self {
            Entry::Real(re) => Complex64::new(re, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Spec {
    Preset(String),
    Matrix(Vec<Vec<Entry>>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct StageSpec {
    observable: Spec,
    sigma: f64,
    #[serde(default)]
    label: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuerySpec {
    free_index: usize,
    fixed_outcomes: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSpec {
    parameter: String,
    min: f64,
    max: f64,
    steps: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    dimension: usize,
    initial_state: Spec,
    stages: Vec<StageSpec>,
    query: QuerySpec,
    #[serde(default)]
    sweep: Option<SweepSpec>,
}

/// Which number a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepTarget {
    Sigma(usize),
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub parameter: String,
    pub target: SweepTarget,
    pub grid: Grid,
}

/// A validated chain definition.
#[derive(Debug, Clone)]
pub struct ChainConfig {
    initial: DensityMatrix,
    observables: Vec<Observable>,
    labels: Vec<String>,
    sigmas: Vec<f64>,
    free: usize,
    fixed: Vec<f64>,
    pub sweep: Option<Sweep>,
}

fn matrix(spec: &[Vec<Entry>], dim: usize, path: &str) -> Result<ComplexMatrix, ConfigError> {
    if spec.len() != dim || spec.iter().any(|r| r.len() != dim) {
        return Err(ConfigError::at(path, format!("matrix must be {dim}x{dim}")));
    }
    let rows: Vec<Vec<Complex64>> = spec.iter().map(|r| r.iter().map(Entry::value).collect()).collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| ConfigError::at(path, e))
}

fn initial_state(spec: &Spec, dim: usize) -> Result<DensityMatrix, ConfigError> {
    const PATH: &str = "initial_state";
    match spec {
        Spec::Preset(name) => {
            let psi = match name.as_str() {
                "plus" => PureState::plus(),
                "minus" => PureState::minus(),
                "up" => PureState::up(),
                "down" => PureState::down(),
                other => {
                    return Err(ConfigError::at(
                        PATH,
                        format!("unknown preset {other:?} (expected plus, minus, up, down or a matrix)"),
                    ))
                }
            };
            if dim != 2 {
                return Err(ConfigError::at(PATH, format!("preset {name:?} is a qubit state but dimension is {dim}")));
            }
            Ok(DensityMatrix::from_pure(&psi))
        }
        Spec::Matrix(m) => DensityMatrix::normalized_from(matrix(m, dim, PATH)?).map_err(|e| ConfigError::at(PATH, e)),
    }
}

fn observable(spec: &Spec, dim: usize, path: &str) -> Result<Observable, ConfigError> {
    match spec {
        Spec::Preset(name) => {
            let obs = match name.as_str() {
                "Sx" => Observable::spin_x(),
                "Sy" => Observable::spin_y(),
                "Sz" => Observable::spin_z(),
                other => {
                    return Err(ConfigError::at(
                        path,
                        format!("unknown preset {other:?} (expected Sx, Sy, Sz or a matrix)"),
                    ))
                }
            };
            if dim != 2 {
                return Err(ConfigError::at(path, format!("preset {name:?} is a qubit observable but dimension is {dim}")));
            }
            Ok(obs)
        }
        Spec::Matrix(m) => Observable::from_matrix(&matrix(m, dim, path)?).map_err(|e| ConfigError::at(path, e)),
    }
}

fn sweep_target(parameter: &str) -> Option<SweepTarget> {
    let index = |rest: &str, suffix: &str| -> Option<usize> {
        rest.strip_suffix(suffix)?.strip_suffix(']')?.parse().ok()
    };
    if let Some(rest) = parameter.strip_prefix("stages[") {
        return index(rest, ".sigma").map(SweepTarget::Sigma);
    }
    if let Some(rest) = parameter.strip_prefix("query.fixed_outcomes[") {
        return index(rest, "").map(SweepTarget::Fixed);
    }
    None
}

impl ChainConfig {
    /// Parses and validates; errors carry the offending field path and, for
    /// syntax errors, the line and column.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ConfigFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            ConfigError::at(
                e.path().to_string(),
                format!("{inner} (line {}, column {})", inner.line(), inner.column()),
            )
        })?;
        Self::from_file(file)
    }

    fn from_file(f: ConfigFile) -> Result<Self, ConfigError> {
        let dim = f.dimension;
        if dim < 1 {
            return Err(ConfigError::at("dimension", "must be at least 1"));
        }
        let initial = initial_state(&f.initial_state, dim)?;
        if f.stages.is_empty() {
            return Err(ConfigError::at("stages", "at least one stage is required"));
        }
        let mut observables = Vec::new();
        let mut labels = Vec::new();
        let mut sigmas = Vec::new();
        for (i, s) in f.stages.iter().enumerate() {
            observables.push(observable(&s.observable, dim, &format!("stages[{i}].observable"))?);
            if !(s.sigma > 0.0 && s.sigma.is_finite()) {
                return Err(ConfigError::at(format!("stages[{i}].sigma"), format!("must be positive and finite (got {})", s.sigma)));
            }
            sigmas.push(s.sigma);
            labels.push(s.label.clone().unwrap_or_else(|| format!("stage{}", i + 1)));
        }
        let n = f.stages.len();
        let q = &f.query;
        if q.free_index < 1 || q.free_index > n {
            return Err(ConfigError::at("query.free_index", format!("must be in 1..={n} (got {})", q.free_index)));
        }
        if q.fixed_outcomes.len() != n - 1 {
            return Err(ConfigError::at(
                "query.fixed_outcomes",
                format!("expected {} outcomes (one per stage except the free one), got {}", n - 1, q.fixed_outcomes.len()),
            ));
        }
        if let Some(j) = q.fixed_outcomes.iter().position(|x| !x.is_finite()) {
            return Err(ConfigError::at(format!("query.fixed_outcomes[{j}]"), "must be finite"));
        }
        let sweep = match &f.sweep {
            None => None,
            Some(s) => {
                let target = sweep_target(&s.parameter).ok_or_else(|| {
                    ConfigError::at(
                        "sweep.parameter",
                        format!("{:?} is not stages[i].sigma or query.fixed_outcomes[j]", s.parameter),
                    )
                })?;
                match target {
                    SweepTarget::Sigma(i) if i >= n => {
                        return Err(ConfigError::at("sweep.parameter", format!("stage index {i} out of range (0..{n})")))
                    }
                    SweepTarget::Fixed(j) if j >= n - 1 => {
                        return Err(ConfigError::at("sweep.parameter", format!("outcome index {j} out of range (0..{})", n - 1)))
                    }
                    _ => {}
                }
                let grid = Grid::new(s.min, s.max, s.steps).map_err(|e| ConfigError::at("sweep", e))?;
                if matches!(target, SweepTarget::Sigma(_)) && !(grid.min > 0.0) {
                    return Err(ConfigError::at("sweep.min", "pointer widths must be positive"));
                }
                Some(Sweep { parameter: s.parameter.clone(), target, grid })
            }
        };
        let cfg = Self {
            initial,
            observables,
            labels,
            sigmas,
            free: q.free_index - 1,
            fixed: q.fixed_outcomes.clone(),
            sweep,
        };
        // surface engine-side rejections (e.g. outcomes too far out) now
        cfg.build(None).map_err(|e| ConfigError::at("query", e))?;
        Ok(cfg)
    }

    /// Sweep values in order, or a single unswept point.
    pub fn points(&self) -> Vec<Option<f64>> {
        match &self.sweep {
            None => vec![None],
            Some(s) => s.grid.linear().into_iter().map(Some).collect(),
        }
    }

    /// The chain and query with the sweep parameter set to `value`.
    pub fn build(&self, value: Option<f64>) -> seqmeas::Result<(MeasurementChain, ChainQuery)> {
        let mut sigmas = self.sigmas.clone();
        let mut fixed = self.fixed.clone();
        if let (Some(v), Some(s)) = (value, &self.sweep) {
            match s.target {
                SweepTarget::Sigma(i) => sigmas[i] = v,
                SweepTarget::Fixed(j) => fixed[j] = v,
            }
        }
        let stages = self
            .observables
            .iter()
            .zip(&sigmas)
            .zip(&self.labels)
            .map(|((o, &s), l)| MeasurementStage::new(o.clone(), s, l.clone()))
            .collect::<seqmeas::Result<Vec<_>>>()?;
        let chain = MeasurementChain::new(stages, self.initial.clone())?;
        let query = ChainQuery::new(self.free, fixed)?;
        query.validate(&chain)?;
        Ok((chain, query))
    }
}
