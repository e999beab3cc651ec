//! Distance distributions of the Thomas cluster process.
//!
//! The Thomas cluster process scatters Poisson-many Gaussian offspring
//! around the points of a homogeneous Poisson parent process. This crate
//! computes, exactly and by simulation:
//!
//! - the contact distance CDF (distance from an external location to the
//!   nearest process point) and its closed-form PPP upper bound,
//! - the nearest-neighbor distance CDF for two reference-point sampling
//!   schemes (uniform over offspring; uniform over non-empty clusters)
//!   with a closed-form bound for the first,
//! - the probability generating functions of the ball counts behind
//!   those CDFs, usable as an independent consistency route via
//!   `F(r) = 1 - G(0)`,
//! - reproducible Monte Carlo samplers (Palm and naive constructions)
//!   plus the empirical-CDF / KS / DKW / chi-square machinery to compare
//!   simulation against the analytic curves.
//!
//! The analytic core is generic over the scalar type through [`Real`]
//! (instantiable at `f32` or `f64`); all default type parameters and the
//! simulation side use `f64`.

pub mod error;
pub mod model;
pub mod pgf;
pub mod quad;
pub mod real;
pub mod sim;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use model::{
    analytic_curves, contact_cdf, contact_cdf_bound, default_grid, default_r_max, nn_case1_bound,
    nn_case1_cdf, nn_case2_cdf, radius_grid, size_biased_pmf, truncated_pmf, CdfCurve,
    CurveFamily, CurveKind, TcpParams,
};
pub use pgf::{pgf_contact, pgf_nn_case1, pgf_nn_case2, rho, PgfArgument};
pub use quad::{integrate, integrate_semi_infinite, QuadResult, QuadratureConfig};
pub use real::Real;
pub use sim::{
    contact_distance_sample, mc_pgf_estimate, nn_distance_naive, nn_distance_sample_case1,
    nn_distance_sample_case2, sample_distances, sample_naive, sample_tcp, DistanceKind, NnCase,
    PointPattern, SampleSet, SimWindow,
};
pub use special::{bessel_i0, bessel_i0e, marcum_q1, rayleigh_pdf, rician_pdf, Probability};
pub use stats::{
    chi_square_pmf_test, dkw_epsilon, empirical_cdf, ks_distance, two_sample_ks,
    two_sample_ks_critical, ChiSquareOutcome, EmpiricalCdf,
};
