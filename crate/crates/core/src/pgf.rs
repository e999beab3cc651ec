//! Probability generating functions of the point count inside a ball
//! around the reference point, for the stationary process and both Palm
//! (nearest-neighbor) constructions.
//!
//! These give an independent route to the distance CDFs through
//! `F(r) = 1 - G(0)`, and `G(theta)` can be estimated directly by Monte
//! Carlo as `E[theta^N]`, which is how the analytic expressions are
//! cross-checked end to end.

use crate::error::{Error, Result};
use crate::model::{case2_size_factor, TcpParams};
use crate::quad::{integrate_semi_infinite, QuadratureConfig};
use crate::real::Real;
use crate::special::{marcum_q1, rayleigh_pdf, Probability};

/// PGF evaluation point, restricted to the unit interval where
/// `E[theta^N]` is guaranteed to converge.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct PgfArgument<T = f64>(T);

impl<T: Real> PgfArgument<T> {
    pub fn new(theta: T) -> Result<Self> {
        if !(theta >= T::zero() && theta <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in [0, 1], got {theta}"
            )));
        }
        Ok(Self(theta))
    }

    #[inline]
    pub fn get(self) -> T {
        self.0
    }
}

/// Per-point retention factor of the Palm cluster expectation:
/// `rho = Q1(v0/s, r/s) + theta (1 - Q1(v0/s, r/s))`, the probability
/// that one sibling either falls outside the ball or is kept by the
/// theta-thinning. Affine in theta, in [0, 1].
pub fn rho<T: Real>(theta: PgfArgument<T>, v0: T, r: T, sigma: T) -> Probability<T> {
    let q1 = marcum_q1(v0 / sigma, r / sigma).get();
    Probability::new(q1 + theta.get() * (T::one() - q1))
}

/// PGF of the number of process points within distance `r` of an
/// external reference location:
/// `exp(-2 pi lambda Int (1 - e^{-m (1-theta)(1 - Q1(v/s, r/s))}) v dv)`.
pub fn pgf_contact<T: Real>(
    p: &TcpParams<T>,
    r: T,
    theta: PgfArgument<T>,
    q: &QuadratureConfig<T>,
) -> Result<Probability<T>> {
    assert!(r >= T::zero(), "radius must be nonnegative");
    let sigma = p.sigma;
    let m_bar = p.m_bar;
    let b = r / sigma;
    let one_minus_theta = T::one() - theta.get();
    let integral = integrate_semi_infinite(
        |v| {
            let q1 = marcum_q1(v / sigma, b).get();
            -(-(m_bar * (one_minus_theta * (T::one() - q1)))).exp_m1() * v
        },
        r,
        sigma,
        q,
    )?;
    Ok(Probability::new(
        (-T::two() * T::PI() * p.lambda_p * integral.value).exp(),
    ))
}

/// Case-1 Palm PGF: the contact PGF times the expectation over the
/// reference point's own cluster, whose sibling count is Poisson(m), so
/// the inner factor is `exp(-m (1 - rho)) = exp(-m (1-theta)(1 - Q1))`.
pub fn pgf_nn_case1<T: Real>(
    p: &TcpParams<T>,
    r: T,
    theta: PgfArgument<T>,
    q: &QuadratureConfig<T>,
) -> Result<Probability<T>> {
    let contact = pgf_contact(p, r, theta, q)?;
    let sigma = p.sigma;
    let m_bar = p.m_bar;
    let b = r / sigma;
    let one_minus_theta = T::one() - theta.get();
    let inner = integrate_semi_infinite(
        |v0| {
            let q1 = marcum_q1(v0 / sigma, b).get();
            (-(m_bar * (one_minus_theta * (T::one() - q1)))).exp() * rayleigh_pdf(v0, sigma)
        },
        r,
        sigma,
        q,
    )?;
    Ok(Probability::new(contact.get() * inner.value))
}

/// Case-2 Palm PGF: sibling count follows the zero-truncated Poisson, so
/// the inner factor is `(e^{m rho} - 1) / (rho (e^m - 1))` with the
/// removable singularity at rho -> 0 continued by its limit.
pub fn pgf_nn_case2<T: Real>(
    p: &TcpParams<T>,
    r: T,
    theta: PgfArgument<T>,
    q: &QuadratureConfig<T>,
) -> Result<Probability<T>> {
    let contact = pgf_contact(p, r, theta, q)?;
    let sigma = p.sigma;
    let m_bar = p.m_bar;
    let inner = integrate_semi_infinite(
        |v0| {
            let rho = rho(theta, v0, r, sigma).get();
            case2_size_factor(rho, m_bar) * rayleigh_pdf(v0, sigma)
        },
        r,
        sigma,
        q,
    )?;
    Ok(Probability::new(contact.get() * inner.value))
}
