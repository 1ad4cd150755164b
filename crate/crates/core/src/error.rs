use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid sublinear function: {0}")]
    InvalidFunction(String),
    #[error("cannot parse function spec `{spec}`: {reason}")]
    FunctionSpec { spec: String, reason: String },
    #[error("no R below r_max = {r_max} satisfies kappa(r) <= r / (2 * {d0})")]
    EstimationRadiusNotFound { d0: f64, r_max: f64 },
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("ladder graphs need n >= 2, got {0}")]
    LadderTooSmall(usize),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("a cycle needs at least 3 vertices, got {0}")]
    CycleTooShort(usize),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph file line {line}: {reason}")]
    GraphFormat { line: usize, reason: String },

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("inverse letter `{0}` in a Coxeter word")]
    InverseInCoxeterWord(String),
    #[error("ball of radius {radius} exceeds the budget of {budget} elements")]
    BallBudgetExceeded { radius: usize, budget: usize },

    #[error("invalid ray: {0}")]
    InvalidRay(String),
    #[error("space has no geodesic oracle")]
    MissingGeodesicOracle,
    #[error("no comparable samples between the two rays")]
    EmptyComparableGrid,
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("ray trace line {line}: {reason}")]
    TraceFormat { line: usize, reason: String },

    #[error("point outside the sampled domain of the map")]
    OutsideDomain,
    #[error("empty image sample")]
    EmptyImage,
    #[error("theta must be >= 1 everywhere on the grid")]
    ThetaBelowOne,

    #[error("quasi-geodesic sampling exhausted its budget of {0} tries")]
    SamplingBudgetExhausted(usize),
    #[error("no stabilizing geodesic prefix beyond length {0}")]
    NoStablePrefix(usize),

    #[error("invalid step measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
