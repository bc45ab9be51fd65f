//! Eigenvalues of the perturbed Coulomb model `V(r) = -Z/r + g r + lambda r^2`
//! by the asymptotic iteration method, evaluated in multiple precision on
//! truncated Taylor series, with a shooting-method cross-check.

pub mod aim;
pub mod cli;
pub mod error;
pub mod jets;
pub mod laurent;
pub mod model;
pub mod oracle;
pub mod precision;
pub mod roots;
pub mod sweep;

pub use error::{Error, Result};
pub use jets::Jet;
pub use laurent::Laurent;
pub use model::{
    FactorParams, PotentialParams, QuantumNumbers, QuasiExactSolution, SturmLiouvilleForm,
};
pub use precision::Precision;
