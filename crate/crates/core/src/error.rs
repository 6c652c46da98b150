use crate::lattice::Point;

pub type Result<T, E = LppError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum LppError {
    /// A parameter is outside the admissible set of the operation.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A function argument is outside the domain of a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("point {point} lies outside the window {window}")]
    OutOfWindow { point: Point, window: String },

    #[error("window of {cells} cells exceeds the cell budget of {budget}")]
    CellBudget { cells: u64, budget: u64 },

    #[error("brute-force enumeration refused: path length {steps} exceeds {limit}")]
    TooLarge { steps: u64, limit: u64 },

    #[error("point {0} is not reachable from the source")]
    Unreachable(Point),

    /// A realization does not determine the requested quantity.
    #[error("degenerate realization: {0}")]
    Degenerate(String),

    /// The fit window does not hold enough usable rows.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("malformed csv at line {line}: {message}")]
    Csv { line: usize, message: String },
}

impl LppError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        LppError::Parameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        LppError::Domain(msg.into())
    }
}
