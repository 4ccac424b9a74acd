use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("quadrature did not reach tolerance {target:e} (achieved {achieved:e})")]
    Quadrature { achieved: f64, target: f64 },

    #[error("no sign change for the shooting map on [{lo}, {hi}]")]
    Bracketing { lo: f64, hi: f64 },

    #[error("boundary derivative of the base stream function vanishes ({0:e})")]
    DegenerateBoundaryDerivative(f64),

    #[error("vorticity profile is not non-decreasing near u = {0}")]
    NonMonotone(f64),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("resonant mode n = {n} (omega = {omega:e})")]
    Resonance { n: usize, omega: f64 },

    #[error("tail certificate not found up to N = {0}")]
    Certificate(usize),

    #[error("iteration diverged; residual history {history:?}")]
    Divergence { history: Vec<f64> },

    #[error("shape is not certified injective (margin {margin:e})")]
    NonInjective { margin: f64 },

    #[error("{what} did not converge after {iterations} iterations (last {last:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        last: f64,
    },

    #[error("particle at distance {distance} is too close to the body")]
    Proximity { distance: f64 },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
