use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("steering angle {0} rad is outside (-pi/2, pi/2)")]
    SteeringDomain(f64),

    #[error("longitudinal speed {vx} m/s is below the {min} m/s validity limit")]
    LowSpeed { vx: f64, min: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Divergence { epoch: usize },

    #[error("cannot stratify: label {label} has {count} trajectories (need at least 2)")]
    Stratification { label: &'static str, count: usize },

    #[error("channel `{0}` has zero variance")]
    DegenerateChannel(String),

    #[error("innovation covariance is singular")]
    SingularInnovation,
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Divergence { .. } | Error::SingularInnovation)
    }
}
