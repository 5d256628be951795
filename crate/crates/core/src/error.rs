use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("wire {wire} out of range for a {n_qubits}-qubit register")]
    WireOutOfRange { wire: usize, n_qubits: usize },

    #[error("control and target must differ (both are wire {0})")]
    ControlIsTarget(usize),

    #[error("dimension mismatch: circuit has {circuit} qubits, state has {state}")]
    DimensionMismatch { circuit: usize, state: usize },

    #[error("register size {0} outside the supported range 1..=8")]
    TooManyQubits(usize),

    #[error("partial trace needs at least one kept wire")]
    EmptyKeepSet,

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("value {value} outside the allowed range {range}")]
    OutOfRange { value: f64, range: &'static str },

    #[error("parameter outside its domain: {0}")]
    ParameterDomain(String),

    #[error("splitting function diverges at z = {0}")]
    DivergentEndpoint(f64),

    #[error("arccos argument {0} has magnitude above 1")]
    ArccosDomain(f64),

    #[error("no circuit parameters reproduce z = {z}: {reason}")]
    CalibrationInfeasible { z: f64, reason: String },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("topology {topology} needs {expected} splitting parameter sets, got {got}")]
    TopologyParamMismatch {
        topology: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("clustering input is empty")]
    EmptyInput,

    #[error("non-finite four-momentum component in constituent {0}")]
    NonFiniteMomentum(usize),

    #[error("jet has {leaves} constituents, cannot produce {requested} prongs")]
    InsufficientConstituents { leaves: usize, requested: usize },

    #[error("jet transverse momentum is zero")]
    ZeroJetPt,

    #[error("pair fraction modes need exactly two prongs, got {0}")]
    PairModeArity(usize),

    #[error("histogram binning is degenerate: {0}")]
    DegenerateBins(String),

    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
