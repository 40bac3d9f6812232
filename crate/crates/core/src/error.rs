use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("potential is not confining: leading coefficient {0} must be positive")]
    NonConfining(f64),

    #[error("site is outside the box or on its boundary ring: {0:?}")]
    OutOfBox(Vec<i64>),

    #[error("could not bracket the on-site root (f stayed below 1 up to s = {s_hi:e}); tau is likely above tau1")]
    NoBracket { s_hi: f64 },

    #[error("on-site solve did not converge in {iterations} iterations (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },

    #[error("at site {site:?}, t = {t}: {source}")]
    AtSite {
        site: Vec<i64>,
        t: i64,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate dispersion split: |sin omega| = {0:e} at a dual node")]
    SingularSplit(f64),

    #[error("grid ratio tau/eps = {ratio} differs from 1/sqrt(n) = {expected}")]
    RatioMismatch { ratio: f64, expected: f64 },

    #[error("frequency {0} lies in the continuous spectrum")]
    OnSpectrum(f64),

    #[error("quadrature did not converge: last relative change {change:e} with {nodes} nodes")]
    NoConvergence { change: f64, nodes: usize },

    #[error("frequency {0} is outside the spectral gaps")]
    DomainError(f64),

    #[error("operation requires dimension n = 1, got n = {0}")]
    DimensionError(usize),

    #[error("no admissible amplitude: {0}")]
    NoRoot(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("degenerate frequencies: {0}")]
    DegenerateFrequencies(String),

    #[error("potential design failed: {0}")]
    PotentialDesignFailure(String),

    #[error("window too short: need {needed} samples, series has {available}")]
    WindowTooShort { needed: usize, available: usize },

    #[error("no spectral peak found")]
    NoPeak,

    #[error("atom at an excluded point (+-pi/2 mod pi): angle {0}")]
    OnExcludedPoints(f64),

    #[error("theorem hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("malformed data: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn at_site(self, site: Vec<i64>, t: i64) -> Error {
        Error::AtSite {
            site,
            t,
            source: Box::new(self),
        }
    }

    /// True for errors that come from the numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::AtSite { source, .. } => source.is_numerical(),
            Error::NoBracket { .. }
            | Error::Divergence { .. }
            | Error::SingularSplit(_)
            | Error::NoConvergence { .. }
            | Error::NoRoot(_)
            | Error::NoSolution(_)
            | Error::PotentialDesignFailure(_)
            | Error::NoPeak => true,
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
