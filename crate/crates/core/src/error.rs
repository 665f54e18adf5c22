use thiserror::Error;

pub type Result<T> = std::result::Result<T, PsletError>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PsletError {
    #[error("invalid configuration: {parameter}: {reason}")]
    Config { parameter: String, reason: String },

    #[error("series contract violated: {0}")]
    Contract(String),

    #[error("singular point: {0}")]
    Singular(String),

    #[error("q = {q} is outside the domain of the potential ({reason})")]
    Domain { q: f64, reason: String },

    #[error("no bound state: {0}")]
    NoBoundState(String),

    #[error("oscillator frequency squared {w2} is not positive at q0 = {q0}")]
    InvalidFrequency { q0: f64, w2: f64 },

    #[error("classical point inconsistent: B1 = {b1:e}, B2 = {b2:e}")]
    InconsistentClassicalPoint { b1: f64, b2: f64 },

    #[error("recursion inconsistent at half-order {order}: residual {norm:e} exceeds {limit:e}")]
    RecursionInconsistency { order: usize, norm: f64, limit: f64 },

    #[error("degenerate linear system at half-order {order}")]
    DegenerateOrder { order: usize },

    #[error("need {needed} series terms, have {available}")]
    Arity { needed: usize, available: usize },

    #[error("degenerate Pade table [{denominator},{numerator}] (condition {condition:e}); try a lower-order approximant")]
    DegeneratePade {
        denominator: usize,
        numerator: usize,
        condition: f64,
    },

    #[error("Pade approximant has a pole at z = {z}")]
    Pole { z: f64 },

    #[error("wavefunction truncation unreliable: {0}")]
    TruncationUnreliable(String),

    #[error("state identification failed: expected {expected} nodes, found {found}")]
    StateIdentification { expected: usize, found: usize },

    #[error("finite-difference grid: {0}")]
    Grid(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl PsletError {
    /// Stable, machine-readable name of the error class.
    pub fn class(&self) -> &'static str {
        match self {
            PsletError::Config { .. } => "config",
            PsletError::Contract(_) => "contract",
            PsletError::Singular(_) => "singular_point",
            PsletError::Domain { .. } => "domain",
            PsletError::NoBoundState(_) => "no_bound_state",
            PsletError::InvalidFrequency { .. } => "invalid_frequency",
            PsletError::InconsistentClassicalPoint { .. } => "inconsistent_classical_point",
            PsletError::RecursionInconsistency { .. } => "recursion_inconsistency",
            PsletError::DegenerateOrder { .. } => "degenerate_order",
            PsletError::Arity { .. } => "arity",
            PsletError::DegeneratePade { .. } => "degenerate_pade",
            PsletError::Pole { .. } => "pole",
            PsletError::TruncationUnreliable(_) => "truncation_unreliable",
            PsletError::StateIdentification { .. } => "state_identification",
            PsletError::Grid(_) => "grid",
            PsletError::Io(_) => "io",
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            PsletError::Config { .. } | PsletError::Io(_) => 2,
            PsletError::Domain { .. } | PsletError::Singular(_) | PsletError::Contract(_) => 3,
            PsletError::NoBoundState(_)
            | PsletError::InvalidFrequency { .. }
            | PsletError::InconsistentClassicalPoint { .. } => 4,
            PsletError::RecursionInconsistency { .. } | PsletError::DegenerateOrder { .. } => 5,
            PsletError::Arity { .. } | PsletError::DegeneratePade { .. } | PsletError::Pole { .. } => 6,
            PsletError::TruncationUnreliable(_)
            | PsletError::StateIdentification { .. }
            | PsletError::Grid(_) => 7,
        }
    }

    pub(crate) fn config(parameter: &str, reason: impl Into<String>) -> Self {
        PsletError::Config {
            parameter: parameter.to_string(),
            reason: reason.into(),
        }
    }
}
