use thiserror::Error;

/// Errors raised by the network, the reference model and the fitting routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected} units, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("{population} membrane potential {value:.3} exceeds the exp overflow bound {bound}")]
    Overflow {
        population: &'static str,
        value: f64,
        bound: f64,
    },

    #[error("{0} modality absent from the event")]
    ModalityAbsent(&'static str),

    #[error("empty stimulus event: at least one modality is required")]
    EmptyEvent,

    #[error("half-maximum crossing falls outside the grid ({0} side)")]
    ProfileClipped(&'static str),

    #[error("profile is degenerate: {0}")]
    DegenerateProfile(String),

    #[error("likelihood mass vanished on the hypothesis grid (x_A = {x_a}, x_V = {x_v})")]
    DegenerateLikelihood { x_a: f64, x_v: f64 },

    #[error("best fit mu = {mu} sits on the search boundary [{lo}, {hi}]")]
    FitOnBoundary { mu: f64, lo: f64, hi: f64 },

    #[error("least-squares design is rank deficient")]
    RankDeficient,

    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;
