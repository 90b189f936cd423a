//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the simulation and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |A - A^dagger| element = {residual:.3e}")]
    NonHermitian { residual: f64 },

    #[error("matrix trace {trace:.6} deviates from 1 by {residual:.3e}")]
    WrongTrace { trace: f64, residual: f64 },

    #[error("density matrix is unphysical: minimum eigenvalue {min_eigenvalue:.3e}")]
    Unphysical { min_eigenvalue: f64 },

    #[error("zero-norm state vector cannot be normalized")]
    ZeroNorm,

    #[error(
        "frequency grid span {span_mhz:.3} MHz is too narrow: needs at least \
         {required_span_mhz:.3} MHz (10 window widths)"
    )]
    GridTooNarrow {
        span_mhz: f64,
        required_span_mhz: f64,
    },

    #[error("grid length {len} is not a power of two")]
    GridNotPowerOfTwo { len: usize },

    #[error("waveform has no support (all samples zero)")]
    EmptyWaveform,

    #[error("power-law fit needs at least two distinct positive points")]
    DegeneratePowerLaw,

    #[error("power-law fit requires positive inputs, got ({x}, {y})")]
    NonPositivePowerLawPoint { x: f64, y: f64 },

    #[error("lock ratio of zero cannot be inverted")]
    ZeroLockRatio,

    #[error("time-tag stream is empty")]
    EmptyStream,

    #[error("time-tag stream is not sorted at index {index}")]
    UnsortedStream { index: usize },

    #[error(
        "scenario would generate about {expected_events:.3e} events, above the \
         configured cap of {cap:.3e}"
    )]
    EventBudgetExceeded { expected_events: f64, cap: f64 },

    #[error("sinusoid fit failed: {reason}")]
    FringeFit { reason: String },

    #[error("projection set is rank deficient (rank {rank} < 16)")]
    RankDeficientProjections { rank: usize },

    #[error("singular linear system in {context}")]
    SingularSystem { context: &'static str },

    #[error("unknown density-matrix basis label {label:?}")]
    UnknownBasisLabel { label: String },

    #[error("basis_order must list each of HH, HV, VH, VV exactly once, got {got:?}")]
    InvalidBasisOrder { got: Vec<String> },

    #[error("malformed {what}: {reason}")]
    Format { what: &'static str, reason: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;
