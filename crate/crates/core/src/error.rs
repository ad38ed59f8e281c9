use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    /// The requested maturity or discount factor lies past the curve's
    /// representable range.
    #[error("beyond curve horizon: {0}")]
    Horizon(String),

    #[error("quadrature did not converge (last two estimates {previous:e}, {last:e})")]
    Quadrature { previous: f64, last: f64 },

    #[error("no sign change found in [{lo:e}, {hi:e}] after bracket expansion")]
    Bracketing { lo: f64, hi: f64 },

    /// Pricing was requested on a state where the crisis time has already
    /// been revealed (X < t).
    #[error("state at t={t} is not on the survival set")]
    NotAlive { t: f64 },

    #[error("unsupported model: {0}")]
    UnsupportedModel(&'static str),

    #[error("integrability violated: {0}")]
    Integrability(String),

    #[error("price {price:e} is outside the attainable range [{lo:e}, {hi:e}]")]
    PriceRange { price: f64, lo: f64, hi: f64 },

    /// Option value failed to be monotone in the information flow rate
    /// while bracketing an implied rate.
    #[error("option value is not monotone in sigma near sigma={sigma}")]
    NonMonotoneVega { sigma: f64 },

    #[error("insufficient surviving paths: {alive} < {required}")]
    InsufficientPaths { alive: usize, required: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
