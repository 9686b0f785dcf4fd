use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("group law violated: {0}")]
    GroupLaw(String),

    #[error("element {element} has order {actual}, expected {expected}")]
    WrongOrder { element: usize, expected: usize, actual: usize },

    #[error("unknown group name `{0}`")]
    UnknownGroup(String),

    #[error("degenerate conformal frame: {0}")]
    DegenerateFrame(String),

    #[error("vector is too far from the null quadric (relative residual {residual:.3e})")]
    NotNearQuadric { residual: f64 },

    #[error("unsupported action: {0}")]
    UnsupportedAction(String),

    #[error("puncture orbits collide: {0}")]
    OrbitCollision(String),

    #[error("basepoint is fixed by the nontrivial element {element}")]
    StabilisedBasepoint { element: String },

    #[error("path comes within {distance:.3e} of a singular point (margin {margin:.1e})")]
    PathMargin { distance: f64, margin: f64 },

    #[error("quadrature did not converge: error estimate {error:.3e} > tolerance {tol:.1e}")]
    QuadratureNonConvergence { error: f64, tol: f64 },

    #[error("residue depends on the radius (discrepancy {discrepancy:.3e}); nearby singularity?")]
    ResidueDiscrepancy { discrepancy: f64 },

    #[error("core map is flat on {0}: all values lie on one null ray")]
    FlatCore(String),

    #[error("spray has {rank} independent directions, at least {required} are needed")]
    InsufficientDirections { rank: usize, required: usize },

    #[error("period Jacobian is singular (largest singular value {sigma:.3e})")]
    SingularJacobian { sigma: f64 },

    #[error("Newton iteration stalled after {iterations} iterations (residual {residual:.3e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("parameter norm {norm:.3e} left the validity ball of radius {radius}")]
    LeftValidityBall { norm: f64, radius: f64 },

    #[error("prescribed values are not equivariant: {0}")]
    InconsistentValues(String),

    #[error("flux targets are not orbit compatible: {0}")]
    IncompatibleFlux(String),

    #[error("weierstrass data check failed: {0}")]
    DataCheck(String),

    #[error("empty grid")]
    EmptyGrid,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
