use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("`{name}` = {value} is outside its valid range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("a lattice needs at least 2 sites, got {0}")]
    TooSmall(usize),
    #[error("rings need an even number of sites, got {0}")]
    OddRing(usize),
    #[error("site {site} is outside 1..={n_sites}")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("sites {0} and {1} are not a lattice pair")]
    InvalidPair(usize, usize),
    #[error("state has {state} sites but the lattice has {lattice}")]
    DimensionMismatch { state: usize, lattice: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasurementError {
    #[error("surviving trace {0:e} is below the exhaustion threshold")]
    Exhausted(f64),
    #[error("period must be a positive integer")]
    ZeroPeriod,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("state failed the PSD check at step {step}: min eigenvalue {min_eigenvalue:e}")]
    NotPsd { step: usize, min_eigenvalue: f64 },
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
    #[error("config: {0}")]
    Config(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("sweep has {cells} cells, budget is {budget}")]
    BudgetExceeded { cells: usize, budget: usize },
    #[error("optimisation axis is empty")]
    EmptyAxis,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

impl ExperimentError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}
