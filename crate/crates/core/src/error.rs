use thiserror::Error;

/// Errors raised by the scheme builders, the Liouville engine and the analytics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown scheme kind '{0}' (expected lambda, double_lambda, n_scheme or ladder_lambda)")]
    UnknownScheme(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("unknown state label '{0}'")]
    UnknownState(String),

    #[error("no drive field supplied for slot {0}")]
    MissingField(usize),

    #[error("frequency closure violated on slot {slot}: detuning mismatch {mismatch:e} rad/s")]
    FrequencyClosure { slot: usize, mismatch: f64 },

    #[error("coherence rate for pair {pair} is unrealizable: requested {requested:e} /s, population decay alone gives {minimum:e} /s")]
    UnrealizableCoherence { pair: String, requested: f64, minimum: f64 },

    #[error("dephasing pattern among states {states} cannot be realized by a Lindblad dissipator")]
    UnrealizableDephasing { states: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("steady state is not unique: null space dimension {0}")]
    DegenerateSteadyState(usize),

    #[error("steady-state residual {residual:e} exceeds tolerance {tolerance:e}")]
    SteadyStateResidual { residual: f64, tolerance: f64 },

    #[error("density matrix invariant violated: {0}")]
    InvalidDensityMatrix(String),

    #[error("step size underflow at t = {time:e} s (h = {step:e} s)")]
    StepUnderflow { time: f64, step: f64 },

    #[error("step budget of {max_steps} exhausted at t = {time:e} s")]
    TooManySteps { time: f64, max_steps: usize },

    #[error("formula is singular: {0}")]
    Singular(String),

    #[error("wrong scheme kind: {operation} requires {expected}, got {got}")]
    WrongScheme {
        operation: &'static str,
        expected: String,
        got: String,
    },

    #[error("gain detected: Im chi = {value:e} at probe detuning {detuning:e} rad/s")]
    Gain { detuning: f64, value: f64 },

    #[error("grid point {index} (value {value:e}): {source}")]
    AtGridPoint {
        index: usize,
        value: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.into(),
        reason: reason.into(),
    }
}
