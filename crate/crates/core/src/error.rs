use thiserror::Error;

/// Coarse failure category, used by front ends to pick an exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: parameters, grids or initial conditions outside their domain.
    Config,
    /// A numerical routine (integrator, eigensolver, fixed point) failed.
    Numerical,
    /// A post-processing step could not draw its conclusion from valid data.
    Analysis,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid grid `{name}`: {reason}")]
    InvalidGrid { name: &'static str, reason: String },

    #[error("assisted tunneling vanishes (J~ = 0), interaction ratio is undefined")]
    ZeroTunneling,

    #[error("cavity detuning vanishes, photon steady state is undefined")]
    ZeroDetuning,

    #[error("equations of motion are singular at {what} (z = {z}, xi = {xi})")]
    Pole { what: &'static str, z: f64, xi: f64 },

    #[error("step size underflow at t = {t}: h = {h:e} below minimum {h_min:e}")]
    StepUnderflow { t: f64, h: f64, h_min: f64 },

    #[error("integrator exceeded {max_steps} steps at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("no small oscillations about z = 0: radicand 2J~(2J~ + UN) = {radicand} is not positive")]
    NoSmallOscillations { radicand: f64 },

    #[error("trajectory too short for classification: {periods} full periods found, need at least {required}")]
    TooShortTrajectory { periods: usize, required: usize },

    #[error("eigensolver did not converge: residual {residual:e} after {iterations} iterations")]
    EigenConvergence { residual: f64, iterations: usize },

    #[error("photon self-consistency did not converge after {iterations} iterations (last |alpha|^2 = {last}, previous = {previous}); bistability suspected")]
    SelfConsistency {
        last: f64,
        previous: f64,
        iterations: usize,
    },

    #[error("solver failed at U = {u}: {source}")]
    AtInteraction {
        u: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("entropy maximum at grid boundary (index {index} of {len}); the grid does not bracket the crossover")]
    MaximumAtBoundary { index: usize, len: usize },

    #[error("crossover search needs at least {required} records, got {got}")]
    TooFewRecords { got: usize, required: usize },

    #[error("crossover search needs a sorted, sign-definite interaction grid: {0}")]
    InvalidSweep(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParams { .. }
            | Error::InvalidState(_)
            | Error::InvalidGrid { .. }
            | Error::NoSmallOscillations { .. } => ErrorKind::Config,
            Error::ZeroTunneling
            | Error::ZeroDetuning
            | Error::Pole { .. }
            | Error::StepUnderflow { .. }
            | Error::TooManySteps { .. }
            | Error::EigenConvergence { .. }
            | Error::SelfConsistency { .. } => ErrorKind::Numerical,
            Error::AtInteraction { source, .. } => source.kind(),
            Error::TooShortTrajectory { .. }
            | Error::MaximumAtBoundary { .. }
            | Error::TooFewRecords { .. }
            | Error::InvalidSweep(_) => ErrorKind::Analysis,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
