//! Forward and inverse solvers for the time-fractional diffusion equation
//! ∂ₜᵅu + Au = F on an interval with Dirichlet boundary conditions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod forward;
pub mod grid;
pub mod inverse;
pub mod io;
pub mod l1;
pub mod linalg;
pub mod mittag_leffler;
pub mod principle;
pub mod quadrature;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use forward::{
    duhamel_mu, green_function, recover_rho, solve_homogeneous, solve_source_duhamel,
    solve_source_spectral, FractionalOrder, Rho, SourceSpec, SpaceTimeSolution, TraceOperator,
};
pub use grid::{Domain1D, Field, TimeGrid, TimeSeries};
pub use inverse::{
    generate_data, recover_mu, run_inversion, InverseProblem, InverseSetup, RecoveryResult,
    Regularization,
};
pub use l1::{l1_solve, l1_weights, L1Source};
pub use linalg::SymTridiagonal;
pub use mittag_leffler::{
    ml_asymptotic, ml_eval, ml_integral, ml_series, ml_time_derivative, mittag_leffler,
    series_radius, MlParams,
};
pub use principle::{
    check_green_nonneg, check_strict_positivity, check_weak_mp, zero_set_estimate,
    PrincipleReport, ZeroSet,
};
pub use spectral::{
    analytic_eigensystem, assemble_operator, discrete_eigensystem, fractional_norm, project,
    EigenSystem, EllipticCoeffs,
};
