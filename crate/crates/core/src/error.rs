use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{token}` at byte {offset}")]
    UnknownIdentifier { token: String, offset: usize },
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no valid sample found after {attempts} attempts")]
    DomainExhausted { attempts: usize },
    #[error("symbol `{symbol}` has level above the jet order {max_order}")]
    LevelOverflow { symbol: String, max_order: u32 },
    #[error("symbol `{0}` is not a jet coordinate and cannot be differentiated in time")]
    NotJet(String),
    #[error("chart mismatch: expected {expected}, found {found}")]
    ChartMismatch { expected: String, found: String },
    #[error("arity mismatch: expected {expected}, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("not symbolically solvable: {0}")]
    NotSolvable(String),
    #[error("degenerate Lagrangian: Hessian rank {rank} of {dim}")]
    Degenerate { rank: usize, dim: usize },
    #[error("singular constraint Jacobian: rank {rank} of {size}")]
    SingularJacobian { rank: usize, size: usize },
    #[error("incompatible data: {0}")]
    Incompatible(String),
    #[error("one-form is not closed: d{i}/d{j} residual {residual:e}")]
    NotClosed { i: String, j: String, residual: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid step size {0}")]
    StepSize(f64),
    #[error("trajectory too short: {0} samples, need at least 5")]
    TooShort(usize),
    #[error("Newton iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    /// Process exit code for this error class.
    ///
    /// 1 check failed, 2 usage or input error, 3 degenerate point, 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotClosed { .. } | Error::Incompatible(_) => 1,
            Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::Unbound(_)
            | Error::LevelOverflow { .. }
            | Error::NotJet(_)
            | Error::ChartMismatch { .. }
            | Error::Arity { .. }
            | Error::Precondition(_)
            | Error::StepSize(_)
            | Error::TooShort(_) => 2,
            Error::Degenerate { .. } | Error::SingularJacobian { .. } | Error::NotSolvable(_) => 3,
            Error::Domain(_)
            | Error::DomainExhausted { .. }
            | Error::NoConvergence(_)
            | Error::Numeric(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
