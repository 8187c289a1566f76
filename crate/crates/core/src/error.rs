use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input: bad dimensions, non-finite entries, broken invariants.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("crossing arcs between blocks {from} -> {to} carry both signs")]
    MixedSignCrossing { from: usize, to: usize },

    #[error("invalid mixture proportions: {0}")]
    InvalidProportions(String),

    #[error("row {0} has no in-neighbours; cannot normalize")]
    ZeroRow(usize),

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("outlier prediction requires a nonzero mean weight")]
    DegenerateMean,

    #[error("system is not convergent: spectral radius {0} >= 1")]
    NotConvergent(f64),

    #[error("step size {dt} too large (limit {limit})")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("decay fit too poor (R^2 = {0:.3}); extend the horizon")]
    PoorFit(f64),

    #[error("eigenvalue {re}+{im}i is not in the open left half-plane")]
    PositiveRealPart { re: f64, im: f64 },

    #[error("delay {tau} is outside [0, {tau_star})")]
    DelayOutOfRange { tau: f64, tau_star: f64 },

    #[error("no crossover delay found below the delay margin")]
    NoCrossover,
}
