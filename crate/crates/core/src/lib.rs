//! Recovery of the cross-section area of a longitudinally vibrating rod from
//! its amplitude-frequency response at the loaded end.
//!
//! The rod equation `(E F u')' + omega^2 r F u = 0` is mapped to the
//! Schrodinger form `-y'' + q y = rho^2 y` with `a = sqrt(F)`, `q = a''/a`.
//! Solutions are expanded in Neumann series of spherical Bessel functions,
//! and the inversion reduces to linear least-squares problems for the series
//! coefficients. The first coefficient `g_0(x)` gives `F(x) = F(0) (g_0 + 1)^2`.
//!
//! Modules, bottom-up:
//! - [`special`]: spherical Bessel functions `j_n` for real arguments.
//! - [`lstsq`]: truncated-SVD least squares and rank counting.
//! - [`profile`]: rod constants and cross-section profiles.
//! - [`forward`]: ODE solver and synthetic response data.
//! - [`nsbf`]: evaluation of the truncated series and profile recovery.
//! - [`inverse`]: the full inversion pipeline.

pub mod forward;
pub mod inverse;
pub mod lstsq;
pub mod nsbf;
pub mod profile;
pub mod special;

mod spline;

pub use forward::{ResponseSample, add_noise, integrate_phi_s, integrate_t, response, synthesize_dataset};
pub use inverse::{InverseOptions, OrderRule, PipelineError, RecoveredProfile, Step, run_inverse};
pub use profile::{Profile, ProfileSpec, ProblemB, RodParams};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("profile is not positive: a({x}) = {value}")]
    NonPositiveProfile { x: f64, value: f64 },
    #[error("ODE integration failed: {0}")]
    IntegrationFailure(String),
    #[error("SVD did not converge")]
    SvdFailure,
    #[error("dataset has no regular (non-resonant) samples")]
    NoRegularData,
    #[error("{unknowns} s-coefficients requested but only {equations} regular equations available")]
    UnderdeterminedS { unknowns: usize, equations: usize },
    #[error("found {found} eigenvalues, {wanted} requested")]
    MissingRoots { found: usize, wanted: usize },
    #[error("recovered g0({x}) = {g0} makes the cross section vanish")]
    PhysicalityViolation { x: f64, g0: f64 },
}
