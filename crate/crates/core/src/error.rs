use thiserror::Error;

/// Failures of the adaptive integrator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("integration exceeded the step budget at x = {x}")]
    TooManySteps { x: f64 },
    #[error("step size {h:e} underflowed at x = {x}")]
    StepUnderflow { x: f64, h: f64 },
    #[error("integration stopped at x = {x}: {message}")]
    Guard { x: f64, message: String },
}

/// Invalid profile description.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{path}: {message}")]
pub struct ProfileError {
    /// Location of the offending field, e.g. `profile.x_l`.
    pub path: String,
    pub message: String,
}

impl ProfileError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HelmError {
    #[error("invalid profile: {0}")]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("reflection field reached |r| = {modulus} at x = {x}")]
    RiccatiBlowUp { x: f64, modulus: f64 },
    #[error("solver inconsistency at x = {x}: {message}")]
    SolverBug { x: f64, message: String },
    #[error("{quantity} vanishes at x = {x} (|value| = {modulus:e})")]
    Vanishing { quantity: String, x: f64, modulus: f64 },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("at grid index {index} (k = {k}): {source}")]
    GridPoint {
        index: usize,
        k: f64,
        #[source]
        source: Box<HelmError>,
    },
}

pub type Result<T, E = HelmError> = std::result::Result<T, E>;
