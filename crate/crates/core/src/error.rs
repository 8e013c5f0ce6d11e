use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("branch cut: s = {re}{im:+}i lies on [1, inf), outside the image of the strip")]
    BranchCut { re: f64, im: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("not integrable: {0}")]
    NotIntegrable(String),

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("unsupported dimension {dim}: {reason}")]
    Dimension { dim: usize, reason: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
