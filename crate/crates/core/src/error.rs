use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown preset `{0}` (expected one of GRW, Adler-A, Adler-B, DP-Diosi)")]
    UnknownPreset(String),

    #[error(
        "kernel `{label}` is not positive semidefinite on this grid: \
         Fourier coefficient {index} = {value:e} is below -{tolerance:e}"
    )]
    NotPositiveSemidefinite {
        label: String,
        index: usize,
        value: f64,
        tolerance: f64,
    },

    /// `step` is the zero-based step index within a trajectory; a bare
    /// single-step call reports 0.
    #[error("numerical blow-up at step {step}: pre-renormalization norm {norm} left [0.5, 2.0]; reduce dt")]
    NumericalBlowup { step: usize, norm: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("kernel `{0}` carries no curvature at zero")]
    KernelNotSmooth(String),

    #[error("record `{label}` is a {found} record, expected {expected}")]
    WrongRecordKind {
        label: String,
        expected: &'static str,
        found: &'static str,
    },

    #[error("record `{label}` excludes nothing on the supplied grid")]
    NoExclusion { label: String },

    #[error("exclusion regions are sampled on different r_C grids")]
    GridMismatch,

    #[error("r_C = {value:e} m lies outside the sampled range [{min:e}, {max:e}] m")]
    OutOfGridRange { value: f64, min: f64, max: f64 },

    #[error("{}", describe_failures(.0))]
    TrajectoryFailures(Vec<(usize, Error)>),

    #[error("{path}: {message}")]
    InvalidRecord { path: String, message: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

fn describe_failures(failures: &[(usize, Error)]) -> String {
    match failures.first() {
        None => "trajectory failures (none recorded)".to_owned(),
        Some((index, err)) => format!(
            "{} trajectories failed; first was trajectory {index}: {err}",
            failures.len()
        ),
    }
}

/// Checks `value > 0` and finite.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive and finite, got {value}")))
    }
}
