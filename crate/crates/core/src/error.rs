use std::path::PathBuf;

/// Errors raised anywhere in the solver stack.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no sign change of the level set between nodes {inside} and {outside}")]
    DegenerateCrossing { inside: usize, outside: usize },

    #[error("level-set gradient vanishes near ({x}, {y})")]
    DegenerateNormal { x: f64, y: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("interpolation denominator vanishes at node {node}")]
    DegenerateDenominator { node: usize },

    #[error("RBF system for node {node} is singular or ill-conditioned (condition {condition:e})")]
    SingularRbf { node: usize, condition: f64 },

    #[error("domain has no computational points")]
    EmptyDomain,

    #[error("incomplete Cholesky breakdown at row {row} (pivot {pivot:e})")]
    PivotBreakdown { row: usize, pivot: f64 },

    #[error("conjugate gradients stopped after {iterations} iterations with relative residual {residual:e}")]
    CgNoConvergence { iterations: usize, residual: f64 },

    #[error("phi-combination tolerance not met: estimated error {estimate:e} exceeds bound {bound:e}")]
    KrylovAccuracy { estimate: f64, bound: f64, best: Vec<f64> },

    #[error("multistep scheme needs {needed} history entries, found {found}")]
    MissingHistory { needed: usize, found: usize },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("level-set time step {dt:e} exceeds CFL limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("solution blew up at t = {time} (norm {norm:e})")]
    Blowup { time: f64, norm: f64 },

    #[error("interface reached the computational box boundary at t = {time}")]
    InterfaceAtRim { time: f64 },

    #[error("{count} of {band} band nodes have a degenerate level-set gradient")]
    TooManyDegenerate { count: usize, band: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Unsupported(_) | Error::Parse { .. } => 1,
            Error::Io { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
