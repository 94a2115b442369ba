use thiserror::Error;

/// Errors raised by the elliptic, solver, SUSY and spectral layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("modulus k^2 = {0} outside (0, 1)")]
    Domain(f64),

    #[error("argument {re}+{im}i within {distance:e} of a pole")]
    PoleProximity { re: f64, im: f64, distance: f64 },

    #[error("no convergence after {iterations} iterations: {what}")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("unsupported model (m, l) = ({m}, {ell}); supported: {supported}")]
    UnsupportedModel { m: u32, ell: u32, supported: &'static str },

    #[error("reference normalization failed at x = {0}")]
    Normalization(f64),

    #[error("singular transformation: seed vanishes near x = {0}")]
    SingularTransformation(f64),

    #[error("seed has a node at x = {0}")]
    NodalSeed(f64),

    #[error("factorization energy {epsilon} exceeds the lowest band edge {e0}")]
    AboveGroundState { epsilon: f64, e0: f64 },

    #[error("invalid seed: {0}")]
    InvalidSeed(String),

    #[error("bound state not normalizable within {0} periods")]
    NonNormalizable(usize),

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("potential not periodic with period {period}: |V(x) - V(x+T)| = {deviation:e}")]
    NotPeriodic { period: f64, deviation: f64 },

    #[error("value at x = {x} has imaginary residue {residue:e}")]
    ComplexValued { x: f64, residue: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
