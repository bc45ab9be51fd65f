use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("NonPositiveLambda: the quadratic coefficient must be > 0 (got {0})")]
    NonPositiveLambda(String),
    #[error("NonFinite: parameter `{0}` is NaN or infinite")]
    NonFinite(&'static str),
    #[error("NonPositiveAlpha: the Gaussian rate of the factor function must be > 0 (got {0})")]
    NonPositiveAlpha(String),
    #[error("invalid precision: {0} bits (need 64..=65536)")]
    InvalidPrecision(u32),
    #[error("cannot parse `{0}` as a real number")]
    ParseReal(String),

    #[error("NonPositiveCenter: jet center must be > 0")]
    NonPositiveCenter,
    #[error("CenterMismatch: jets expanded about different points")]
    CenterMismatch,
    #[error("OrderUnderflow: cannot differentiate an order-0 jet")]
    OrderUnderflow,

    #[error("InsufficientJetOrder: iteration {n} exceeds the run budget n_max = {budget}")]
    InsufficientJetOrder { n: usize, budget: usize },
    #[error("invalid AIM run: {0}")]
    InvalidRun(String),
    #[error("NoRootInWindow: no sign change of delta_{n} in [{lo}, {hi}]")]
    NoRootInWindow { n: usize, lo: String, hi: String },
    #[error("DegenerateDelta: delta_{n} vanishes identically but no closed-form energy applies")]
    DegenerateDelta { n: usize },
    #[error("AllCandidatesFailed: no alpha on the grid produced a root sequence")]
    AllCandidatesFailed,

    #[error("IntegrationOverflow: radial solution left the representable range")]
    IntegrationOverflow,
    #[error("BadWindow: {0}")]
    BadWindow(String),
    #[error("invalid shooting configuration: {0}")]
    InvalidShootConfig(String),
    #[error("NoSignChange: shooting mismatch keeps its sign on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error(
        "WrongNodeCount: expected {expected} interior nodes, eigenvalue candidates had {found:?}"
    )]
    WrongNodeCount { expected: u32, found: Vec<u32> },
}

impl Error {
    /// Numerical failures map to exit status 2 in the CLI, everything else
    /// raised while checking inputs maps to 1.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoRootInWindow { .. }
                | Error::DegenerateDelta { .. }
                | Error::AllCandidatesFailed
                | Error::IntegrationOverflow
                | Error::NoSignChange { .. }
                | Error::WrongNodeCount { .. }
                | Error::InsufficientJetOrder { .. }
                | Error::OrderUnderflow
                | Error::CenterMismatch
        )
    }
}
