use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed channel file: {0}")]
    Parse(String),

    #[error("row {row} is not stochastic (sums to {sum})")]
    NonStochastic { row: usize, sum: f64 },

    #[error("invalid probability {value} at row {row}, column {col}")]
    InvalidEntry { row: usize, col: usize, value: f64 },

    #[error("inputs {0} and {1} induce the same output distribution")]
    DuplicateRows(usize, usize),

    #[error("unknown off symbol `{0}`")]
    UnknownOff(String),

    #[error("channel has no input other than the off symbol")]
    NoNonOffInput,

    #[error(
        "no nontrivial LPD communication possible: every non-off input puts mass outside supp(Q0)"
    )]
    NoCovertInput,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("{0} has a zero entry")]
    ZeroMass(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{solver} did not converge after {iterations} iterations (gap {gap:e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        gap: f64,
    },

    #[error("the off symbol is redundant (Q0 lies in the hull of the other rows)")]
    RedundantOff,

    #[error("the off symbol is not redundant; the constrained feasible set is empty")]
    NotRedundant,

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,
}

impl Error {
    pub fn is_convergence(&self) -> bool {
        matches!(self, Error::NotConverged { .. })
    }
}
