//! Matrix product operator approximations of Gibbs states `e^{-βH}` and
//! real-time evolutions `e^{-iHt}` for long-range interacting chains, with
//! an exact dense oracle for checking every error bound on small systems.

pub mod error;
pub mod merge;
pub mod expsum;
pub mod gibbs;
pub mod lemmas;
pub mod model;
pub mod mpo;
pub mod oracle;
pub mod special;

pub use error::{Error, Result};
pub use expsum::{approximate_hamiltonian, fit_kernel, ExpSumApprox};
pub use gibbs::{build_gibbs_mpo, build_real_time_mpo, plan_budget, ErrorBudget, ErrorReport, PipelineOptions};
pub use model::{
    config::ModelConfig, BoundaryBound, Coupling, ExpTerm, HamiltonianSpec, Interval, LocalTerm,
    SiteOp, Structure,
};
pub use mpo::{CompressionPolicy, Mpo};
pub use oracle::DenseOperator;

/// Scalar type of every operator entry.
pub type C64 = num_complex::Complex64;
