use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented domain (range, sign, finiteness).
    #[error("input domain: {0}")]
    InputDomain(String),

    /// A quantity required to be nonzero was zero (division hazard).
    #[error("singular input: {0}")]
    SingularInput(String),

    /// Shape or dimension mismatch.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Newton iteration failed to reach the residual tolerance.
    #[error("newton did not converge after {iterations} iterations (residual {residual:.3e}) in {context}")]
    NewtonFailure {
        residual: f64,
        iterations: usize,
        context: String,
    },

    /// Integration produced a state outside the physical envelope.
    #[error("trajectory diverged at sample {sample}: {detail}")]
    Diverged { sample: usize, detail: String },

    /// A simulation step failed; carries the failing sample index.
    #[error("step failed at sample {sample}: {source}")]
    StepFailed {
        sample: usize,
        #[source]
        source: Box<Error>,
    },

    /// Training loss became non-finite.
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    TrainingDiverged { epoch: usize, loss: f64 },

    /// Capture rate is undefined because no CO2 enters the plant.
    #[error("capture rate undefined: inlet CO2 rate is zero")]
    UndefinedRate,

    /// Steady-state search failed.
    #[error("steady state not reached: {0}")]
    SteadyState(String),

    /// No feasible steady set-point found.
    #[error("set-point search failed: {0}")]
    SetpointNotFound(String),

    /// Empty input where at least one element is required.
    #[error("empty input: {0}")]
    Empty(String),

    /// Configuration file or value problem.
    #[error("config: {0}")]
    Config(String),

    /// Refusing to overwrite an existing artifact with different bytes.
    #[error("artifact conflict: {path} exists with different contents")]
    ArtifactConflict { path: String },

    /// Malformed serialized artifact.
    #[error("format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
