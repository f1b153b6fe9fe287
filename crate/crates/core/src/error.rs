use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// The entropy target `H(δ) − ε` is not positive, so the bound is vacuous.
    #[error("vacuous target: epsilon {epsilon} >= H(delta) = {entropy}")]
    DegenerateTarget { epsilon: f64, entropy: f64 },

    #[error("no delta in (0, 0.5] reaches the individual-testing cap at epsilon = {epsilon}")]
    NotFound { epsilon: f64 },

    #[error("adaptivity gap is empty: [{lo}, {hi})")]
    EmptyInterval { lo: f64, hi: f64 },

    #[error("{what} = {got} exceeds the enumeration limit {limit}")]
    Size {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("malformed instance: {0}")]
    Structure(String),
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
