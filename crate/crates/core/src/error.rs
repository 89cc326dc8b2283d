use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("length mismatch: expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("radius {radius} outside grid [{r_min}, {r_max}] ({note})")]
    OutsideGrid {
        radius: f64,
        r_min: f64,
        r_max: f64,
        note: String,
    },

    #[error("region not covered by the grid: {0}")]
    Uncovered(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("time step {dt} exceeds CFL limit {limit} (cfl {cfl} × h)")]
    Cfl { dt: f64, limit: f64, cfl: f64 },

    #[error("iteration did not contract after {iterations} steps (last ratio {last_ratio:.3e}): {detail}")]
    NonContraction {
        iterations: usize,
        last_ratio: f64,
        detail: String,
    },

    #[error("precondition refused: {0}")]
    Precondition(String),

    #[error("unattainable target {target}: maximum attainable is {max_attainable}")]
    Unattainable { target: f64, max_attainable: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(LabError::LengthMismatch { expected, got })
    }
}
