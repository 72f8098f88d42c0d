//! Sharp lower bounds `mu(n, kappa, D)` and `mu_p(n, kappa, D)` for the first
//! non-trivial Neumann eigenvalue of a compact manifold with
//! `Ric >= (n-1) kappa` and diameter `D`, and their numerical verification on
//! discretized model manifolds.
//!
//! * [`model`]: the curvature coefficient `c_kappa` and the model problems.
//! * [`sl`]: `mu` for the linear problem (shooting and finite differences).
//! * [`plap`]: `mu_p` for the p-Laplacian problem (flux shooting).
//! * [`manifold`]: meshes, discrete Laplacians, diameters, oscillation quotient.
//! * [`report`]: end-to-end verification reports and sweeps.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod manifold;
pub mod model;
pub mod numfmt;
pub mod plap;
pub mod report;
pub mod sl;
pub mod tridiag;

pub use error::{Error, Result};
pub use manifold::{Graph1D, Manifold, SpectralEstimate, TriangleMesh};
pub use model::{
    c_kappa, c_kappa_prime, ModelCoefficient, ModelEigenSolution, PslProblem, SlProblem,
    SolveMethod,
};
pub use plap::{first_flux_zero, solve_mu_p};
pub use report::{sweep, verify_bound, BoundReport, SweepSpec, Verdict};
pub use sl::{
    limit_identity_residual, mu, mu_with, solve_mu_fd, solve_mu_shooting, FdConfig, Method,
    MuOptions, ShootingConfig,
};
