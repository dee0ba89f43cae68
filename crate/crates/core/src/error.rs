use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("index ({m}, {r}) outside the {n}x{sections} measurement grid")]
    IndexOutOfRange {
        m: usize,
        r: usize,
        n: usize,
        sections: usize,
    },

    #[error("duplicate measurement index ({m}, {r})")]
    DuplicateIndex { m: usize, r: usize },

    #[error("need at least {needed} distinct sample points, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("interpolation system is ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("leading coefficient {0:.3e} is below tolerance")]
    DegenerateLeading(f64),

    #[error("cannot flip a root at the origin")]
    ZeroRoot,

    #[error("window length {w} exceeds the enumeration cap {cap}")]
    WindowTooLong { w: usize, cap: usize },

    #[error("no candidate satisfies the intensity samples (best residual {0:.3e})")]
    NoCandidate(f64),

    #[error("{0} well-separated candidates satisfy the intensity samples")]
    AmbiguousCandidates(usize),

    #[error("inconsistent shape: {0}")]
    InconsistentShape(String),

    #[error("pivot {0:.3e} is numerically zero")]
    ZeroPivot(f64),

    #[error("window does not cover signal residue {0}")]
    CoverageViolation(usize),

    #[error("missing measurement ({m}, {r})")]
    MissingMeasurement { m: usize, r: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("zero-norm reference signal")]
    ZeroNorm,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
