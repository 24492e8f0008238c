use thiserror::Error;

/// Every failure the pipeline can report. The `code` strings are part of the
/// CLI's machine-readable error objects and must stay stable.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("exponent p = {p} is not subcritical for n = {n} (need 2 < p < 2n/(n-2))")]
    SubcriticalViolation { n: usize, p: f64 },

    #[error("could not bracket the shooting parameter: {0}")]
    NoBracket(String),

    #[error("tail fits disagree (from U: {from_u}, from U': {from_du}); r_max = {r_max} is too small")]
    TailTooShort { from_u: f64, from_du: f64, r_max: f64 },

    #[error("discretized linear operator is numerically singular at row {row}")]
    SingularSystem { row: usize },

    #[error("ground state built with p = {p_gs}, but (n, m) requires p = {p_nm}")]
    ExponentMismatch { p_gs: f64, p_nm: f64 },

    #[error("direction is not a unit vector (|b| = {norm})")]
    NotUnit { norm: f64 },

    #[error("parameter t = {t} is within tolerance of a pole of the warped sphere")]
    PoleSingularity { t: f64 },

    #[error("no isolated interior critical point: {0}")]
    NoInteriorCritical(String),

    #[error("points are antipodal; the logarithm map is undefined")]
    AntipodalPair,

    #[error("cutoff radius {cutoff_r} exceeds the injectivity radius {injectivity}")]
    InjectivityViolation { cutoff_r: f64, injectivity: f64 },

    #[error("quadrature resolves epsilon with {per_eps} nodes; at least 8 are required")]
    ResolutionTooCoarse { per_eps: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::SubcriticalViolation { .. } => "SubcriticalViolation",
            Error::NoBracket(_) => "NoBracket",
            Error::TailTooShort { .. } => "TailTooShort",
            Error::SingularSystem { .. } => "SingularSystem",
            Error::ExponentMismatch { .. } => "ExponentMismatch",
            Error::NotUnit { .. } => "NotUnit",
            Error::PoleSingularity { .. } => "PoleSingularity",
            Error::NoInteriorCritical(_) => "NoInteriorCritical",
            Error::AntipodalPair => "AntipodalPair",
            Error::InjectivityViolation { .. } => "InjectivityViolation",
            Error::ResolutionTooCoarse { .. } => "ResolutionTooCoarse",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
