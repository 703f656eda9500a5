use thiserror::Error;

/// A physical or numerical parameter failed validation.
///
/// Every variant carries the name of the offending parameter so front ends
/// can point the user at the right flag.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{name} must be finite, got {value}")]
    NotFinite { name: &'static str, value: f64 },
    #[error("{name} must be positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("{name} must lie in {range}, got {value}")]
    OutOfRange {
        name: &'static str,
        range: &'static str,
        value: f64,
    },
    #[error("{name}: {reason}")]
    Invalid { name: &'static str, reason: String },
}

impl ParamError {
    /// Name of the parameter that was rejected.
    pub fn name(&self) -> &'static str {
        match self {
            ParamError::NotFinite { name, .. }
            | ParamError::NotPositive { name, .. }
            | ParamError::Negative { name, .. }
            | ParamError::OutOfRange { name, .. }
            | ParamError::Invalid { name, .. } => name,
        }
    }
}

/// A Liouville vector that does not describe a physical density matrix.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("trace deviates from 1 by {deviation:e}")]
    Trace { deviation: f64 },
    #[error("rho21 deviates from conj(rho12) by {deviation:e}")]
    Hermiticity { deviation: f64 },
    #[error("Bloch vector norm {norm} exceeds 1")]
    BlochNorm { norm: f64 },
    #[error("diagonal entries must be real, imaginary part {imag:e}")]
    ComplexPopulation { imag: f64 },
    #[error("state is not pure (Bloch norm {norm})")]
    NotPure { norm: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error(transparent)]
    Settings(#[from] ParamError),
    #[error(transparent)]
    InitialState(#[from] StateError),
    #[error("step size underflow at t = {t} ms (h = {step:e} ms)")]
    StepSizeUnderflow { t: f64, step: f64 },
    #[error("{quantity} drifted by {deviation:e} at t = {t} ms")]
    InvariantViolation {
        t: f64,
        quantity: &'static str,
        deviation: f64,
    },
    #[error("the unitary oracle requires tau_c = 0 and disabled relaxation")]
    NotUnitary,
}

/// Contract violations of the phenomenological transfer model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("omega1 must be positive for the phenomenological model")]
    ZeroAmplitude,
    #[error("no interior maximum: tau_c = 0 pushes t_max to infinity")]
    NoInteriorMaximum,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RidgeError {
    #[error("insufficient ridge: {usable} row(s) with an interior maximum, need at least 3")]
    InsufficientRidge { usable: usize },
    #[error("need at least 3 ridge points to fit, got {0}")]
    TooFewPoints(usize),
    #[error("degenerate ridge: all omega1 values are equal")]
    Degenerate,
}
