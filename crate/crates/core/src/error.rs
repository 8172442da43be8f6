use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("degenerate triangle {index} (signed area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("pole {0:?} is not strictly inside the domain")]
    PoleOnBoundary([f64; 2]),

    #[error("negative singular strength {0}")]
    NegativeStrength(f64),

    #[error("field has {got} values but the mesh has {expected} nodes")]
    FieldSize { expected: usize, got: usize },

    #[error("field value at node {node} is not finite")]
    NonFinite { node: usize },

    #[error("fields are defined on different meshes")]
    MeshMismatch,

    #[error("exponential overflow: scale * u reaches {0:.3} (> 700)")]
    Overflow(f64),

    #[error("plateau at level {0}: a set of positive area sits exactly on the level")]
    PlateauAtLevel(f64),

    #[error("polyline is not closed")]
    OpenPolyline,

    #[error("domain is not symmetric about the axis (node {node} reflects {distance:e} outside)")]
    AsymmetricDomain { node: usize, distance: f64 },

    #[error("degenerate bubble pair: lambda1 * R^2 = 8")]
    DegeneratePair,

    #[error("invalid bubble parameter: {0}")]
    InvalidBubble(String),

    #[error("mass {mass} is not reachable by a ball (must be below 8 pi)")]
    MeasureMismatch { mass: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("total radial mass {0} exceeds 8 pi")]
    MassExceeds8Pi(f64),

    #[error("mass dichotomy violated: mass {mass} lies strictly between {lower} and {upper}")]
    NeitherBranch { mass: f64, lower: f64, upper: f64 },

    #[error("condition violated: {}", .0.join("; "))]
    ConditionViolated(Vec<String>),

    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("the {0} variant has no change of variables (already in standard form)")]
    VariantWithoutTransform(&'static str),

    #[error("Newton did not converge after {iterations} iterations (best residual {best_residual:e})")]
    NoConvergence { iterations: usize, best_residual: f64 },

    #[error("singular Jacobian at parameter {parameter}")]
    JacobianSingular { parameter: f64 },

    #[error("continuation cannot start: {0}")]
    StartUnsolvable(String),

    #[error("experiment hypotheses failed: {0}")]
    HypothesesFail(String),

    #[error("asymmetric setup: {0}")]
    AsymmetricSetup(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
