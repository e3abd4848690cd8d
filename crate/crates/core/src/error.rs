use thiserror::Error;

/// Errors raised by the grid, Maxwellian, reconstruction and scheme modules.
///
/// Numeric payloads are carried as `f64` regardless of the solver scalar.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("negative or zero temperature {temperature:e} (rho = {rho:e})")]
    NegativeTemperature { temperature: f64, rho: f64 },

    #[error("degenerate velocity grid: {0}")]
    DegenerateGrid(String),

    #[error("discrete Maxwellian solve did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonFailed { iterations: usize, residual: f64 },

    #[error("local grid enlargement exceeded {cap} nodes")]
    RunawayEnlargement { cap: usize },

    #[error("degenerate time step: {0}")]
    DegenerateTimestep(String),

    #[error("degenerate diffuse wall on the {side} side: incoming Maxwellian flux is zero")]
    DegenerateWall { side: &'static str },

    #[error("unknown case `{0}`")]
    UnknownCase(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cell {cell}: {source}")]
    InCell {
        cell: usize,
        #[source]
        source: Box<SolverError>,
    },
}

impl SolverError {
    /// Attaches the index of the space cell where the error happened.
    pub fn in_cell(self, cell: usize) -> Self {
        match self {
            e @ SolverError::InCell { .. } => e,
            e => SolverError::InCell { cell, source: Box::new(e) },
        }
    }

    /// Cell index, if one was attached.
    pub fn cell(&self) -> Option<usize> {
        match self {
            SolverError::InCell { cell, .. } => Some(*cell),
            _ => None,
        }
    }

    /// The error with any cell wrapper removed.
    pub fn root(&self) -> &SolverError {
        match self {
            SolverError::InCell { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T, E = SolverError> = std::result::Result<T, E>;
