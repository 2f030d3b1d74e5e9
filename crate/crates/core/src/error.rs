use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("temperature {temperature} K outside table `{table}` range [{min}, {max}] K")]
    OutOfRange { table: String, temperature: f64, min: f64, max: f64 },

    #[error("degenerate Fresnel interface (eps_a = {eps_a}, eps_b = {eps_b}, u = {u})")]
    Degenerate { eps_a: Complex64, eps_b: Complex64, u: f64 },

    #[error("quadrature did not converge: estimate {estimate:e}, error {abs_error:e} after {evaluations} evaluations")]
    Quadrature { estimate: f64, abs_error: f64, evaluations: usize },

    #[error("fit failed after {iterations} iterations: {reason}")]
    Fit { iterations: usize, reason: String },

    #[error("{patches} patches exceed the direct-summation budget of {budget}; use hierarchical mode")]
    PatchBudget { patches: u64, budget: u64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("config error in {file} at line {line}, column {column}: {message}")]
    Config { file: String, line: usize, column: usize, message: String },

    #[error("data error at row {row}: {message}")]
    Data { row: usize, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn config(file: &str, line: usize, column: usize, msg: impl Into<String>) -> Self {
        Error::Config { file: file.to_string(), line, column, message: msg.into() }
    }
}
