use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The eavesdropper dispersion vanishes at zero SNR, so the leakage has no
    /// well-defined value there.
    #[error("instantaneous leakage is singular at gamma_e = 0")]
    SingularEavesdropperSnr,

    #[error(
        "quadrature did not converge: best value {value}, error bound {abs_err:e} exceeds {tol:e} \
         after {evaluations} integrand evaluations"
    )]
    QuadratureNonconvergence {
        value: f64,
        abs_err: f64,
        tol: f64,
        evaluations: usize,
    },

    #[error("n_max = {n_max} exceeds the enumeration budget of {limit}")]
    BudgetExceeded { n_max: u32, limit: u32 },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }
}
