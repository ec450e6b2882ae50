use thiserror::Error;

pub type Result<T> = std::result::Result<T, TripodError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TripodError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// A resonance denominator came within tolerance of zero.
    #[error("pole proximity in {what}: |denominator| = {magnitude:e}")]
    PoleProximity { what: &'static str, magnitude: f64 },

    /// Degenerate input (zero Rabi frequencies, Δ13 = 0, non-unique steady state, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NonHermitian(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("SI output requested but gamma_si_rad_per_s is not set")]
    MissingGammaSi,

    #[error("config error: {0}")]
    Config(String),
}

impl TripodError {
    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            TripodError::Config(_) | TripodError::InvalidParams(_) | TripodError::MissingGammaSi => 2,
            TripodError::PoleProximity { .. } | TripodError::Degenerate(_) | TripodError::NonHermitian(_) => 3,
            TripodError::Numerical(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            TripodError::InvalidParams(_) => "invalid_params",
            TripodError::PoleProximity { .. } => "pole_proximity",
            TripodError::Degenerate(_) => "degenerate",
            TripodError::NonHermitian(_) => "non_hermitian",
            TripodError::Numerical(_) => "numerical",
            TripodError::MissingGammaSi => "missing_gamma_si",
            TripodError::Config(_) => "config",
        }
    }
}
