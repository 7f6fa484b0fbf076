use thiserror::Error;

/// Failures raised by the numerical core and the run harness.
///
/// Every numerical variant carries the coordinate where the breakdown was
/// detected so that callers can report it next to the grid.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate spectrum at x = {x}: eigenvalue gap {gap:e}")]
    DegenerateSpectrum { x: f64, gap: f64 },

    #[error("unsupported matrix dimension {0}; only N = 2 and N = 3 are solved")]
    UnsupportedDimension(usize),

    #[error("branch index {branch} is not valid here: {reason}")]
    InvalidBranch { branch: usize, reason: &'static str },

    #[error("malformed grid: {0}")]
    MalformedGrid(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("alpha vanishes at x = {x}")]
    AlphaZero { x: f64 },

    #[error("integrator step size underflow at x = {x}")]
    ToleranceNotMet { x: f64 },

    #[error("every grid point is below the WKB singularity floor")]
    AllSingular,

    #[error("cubic roots collide at x = {x}: gap {gap:e}")]
    BranchCollision { x: f64, gap: f64 },

    #[error("grid too coarse to track branches between x = {x0} and x = {x1}")]
    CoarseGrid { x0: f64, x1: f64 },

    #[error("first-order denominator 3*lambda^2 + k^2 vanishes at x = {x}")]
    DenominatorVanishes { x: f64 },

    #[error("far-field subgrid is empty")]
    NoFarField,

    #[error("basis combination is ill-conditioned (condition estimate {cond:e})")]
    SingularCombination { cond: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    /// Stable identifier printed on the diagnostic stream by the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DegenerateSpectrum { .. } => "DegenerateSpectrum",
            Error::UnsupportedDimension(_) => "UnsupportedDimension",
            Error::InvalidBranch { .. } => "InvalidBranch",
            Error::MalformedGrid(_) => "MalformedGrid",
            Error::InvalidInput(_) => "InvalidInput",
            Error::AlphaZero { .. } => "AlphaZero",
            Error::ToleranceNotMet { .. } => "ToleranceNotMet",
            Error::AllSingular => "AllSingular",
            Error::BranchCollision { .. } => "BranchCollision",
            Error::CoarseGrid { .. } => "CoarseGrid",
            Error::DenominatorVanishes { .. } => "DenominatorVanishes",
            Error::NoFarField => "NoFarField",
            Error::SingularCombination { .. } => "SingularCombination",
            Error::Config(_) => "ConfigError",
            Error::Io(_) => "IoError",
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
