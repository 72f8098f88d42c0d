use thiserror::Error;

/// Errors raised by the model solvers, the manifold lab and the report runner.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("diameter must be positive, got {0}")]
    NonPositiveDiameter(f64),

    #[error("dimension must be at least 1, got {0}")]
    DimensionBelowOne(i64),

    #[error("p-Laplacian exponent must exceed 1, got {0}")]
    ExponentNotAboveOne(f64),

    #[error("diameter {diameter} exceeds the Bonnet-Myers range pi/sqrt(kappa) = {limit} for kappa = {kappa}")]
    DiameterExceedsMyersRange { kappa: f64, diameter: f64, limit: f64 },

    #[error("non-finite parameter `{0}`")]
    NonFiniteParameter(&'static str),

    #[error("exponent p = {p} outside the supported range [{min}, {max}]")]
    ExponentOutOfSupportedRange { p: f64, min: f64, max: f64 },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("no eigenvalue bracket found (last probe mu = {last_probe})")]
    BracketNotFound { last_probe: f64 },

    #[error("model weight c_kappa(D/2)^(n-1) = {weight:e} is too close to zero for shooting")]
    NearSingularWeight { weight: f64 },

    #[error("shooting did not converge within {max_steps} RK4 steps (last change {last_change:e})")]
    ShootingNotConverged { max_steps: usize, last_change: f64 },

    #[error("finite-difference grid too coarse to separate the first eigenvalue from zero")]
    GridTooCoarse,

    #[error("shooting ({shooting}) and finite differences ({finite_difference}) disagree beyond {tolerance:e}")]
    MethodDisagreement { shooting: f64, finite_difference: f64, tolerance: f64 },

    #[error("OFF parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("mesh is not edge-manifold: edge ({0}, {1}) borders more than two triangles")]
    NonManifoldMesh(usize, usize),

    #[error("mesh is disconnected ({components} components)")]
    DisconnectedMesh { components: usize },

    #[error("degenerate triangle {index} (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("model profile covers [0, {covered}] but a half-distance of {requested} was requested")]
    ModelTooShort { covered: f64, requested: f64 },

    #[error("dimension n and curvature kappa must come from manifold metadata or overrides (missing {0})")]
    MissingCurvatureData(&'static str),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("sweep row {row} ({param} = {value}): {source}")]
    SweepRow {
        row: usize,
        param: &'static str,
        value: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors that reject the inputs before any computation runs.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::NonPositiveDiameter(_)
            | Error::DimensionBelowOne(_)
            | Error::ExponentNotAboveOne(_)
            | Error::DiameterExceedsMyersRange { .. }
            | Error::NonFiniteParameter(_)
            | Error::ExponentOutOfSupportedRange { .. }
            | Error::InvalidConfig(_)
            | Error::MissingCurvatureData(_)
            | Error::InvalidSweep(_) => true,
            Error::SweepRow { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
