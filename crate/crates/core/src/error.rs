use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // geometry
    #[error("half-space region is unbounded")]
    UnboundedRegion,
    #[error("region has empty interior")]
    EmptyInterior,
    #[error("normal {0:?} is zero or not primitive")]
    NonPrimitiveNormal(Vec<i64>),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    // weights
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("positivity violated: {0}")]
    PositivityViolation(String),
    #[error("expression is not a polynomial")]
    NotPolynomial,

    // quadrature / solves
    #[error("integrand is not finite at node {0:?}")]
    NonFiniteIntegrand(Vec<f64>),
    #[error("weighted Gram matrix is singular")]
    SingularGram,
    #[error("linear system is singular")]
    SingularSystem,

    // abreu
    #[error("point {0:?} lies on the boundary of the polytope")]
    EvaluationOnBoundary(Vec<f64>),
    #[error("point {0:?} is too close to the boundary for the difference stencil")]
    TooCloseToBoundary(Vec<f64>),

    // test configurations
    #[error("piecewise-linear function exceeds the cap R at vertex {0:?}")]
    CapViolation(Vec<f64>),
    #[error("expansion fit needs at least {need} distinct k values, got {got}")]
    InsufficientSamples { need: usize, got: usize },
    #[error("piecewise-linear function has no pieces")]
    EmptyPiecewise,

    // pbundle
    #[error("z0 = {0} is outside (-1, 1)")]
    Z0OutOfRange(f64),

    // configuration
    #[error("schema error at `{path}`: {msg}")]
    Schema { path: String, msg: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn schema(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// Errors caused by invalid input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::UnknownVariable(_)
                | Error::Schema { .. }
                | Error::NonPrimitiveNormal(_)
                | Error::DimensionMismatch { .. }
                | Error::NotPolynomial
                | Error::Unsupported(_)
                | Error::Z0OutOfRange(_)
                | Error::EmptyPiecewise
                | Error::InsufficientSamples { .. }
        )
    }

    /// Name of the module an error originates from, used in CLI reports.
    pub fn module(&self) -> &'static str {
        match self {
            Error::UnboundedRegion
            | Error::EmptyInterior
            | Error::NonPrimitiveNormal(_)
            | Error::DimensionMismatch { .. } => "geometry",
            Error::Syntax { .. }
            | Error::UnknownVariable(_)
            | Error::Domain(_)
            | Error::PositivityViolation(_)
            | Error::NotPolynomial => "weights",
            Error::NonFiniteIntegrand(_) => "quad",
            Error::SingularGram | Error::EmptyPiecewise => "invariants",
            Error::EvaluationOnBoundary(_) | Error::TooCloseToBoundary(_) => "abreu",
            Error::CapViolation(_) | Error::InsufficientSamples { .. } => "testconfig",
            Error::Z0OutOfRange(_) | Error::SingularSystem => "pbundle",
            Error::Schema { .. } | Error::Unsupported(_) => "cli",
        }
    }
}
