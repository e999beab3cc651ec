//! Analytic distance distributions of the Thomas cluster process: the
//! exact contact-distance CDF, the two nearest-neighbor CDFs (reference
//! point picked uniformly among offspring, or picked inside a uniformly
//! chosen non-empty cluster), their closed-form upper bounds, and the
//! cluster-size PMFs the two sampling schemes induce.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::{integrate_semi_infinite, QuadratureConfig};
use crate::real::Real;
use crate::special::{ln_gamma, marcum_q1, rayleigh_pdf, Probability};

/// The process triple: parent density, mean cluster size, and the
/// per-axis standard deviation of the Gaussian offspring displacement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TcpParams<T = f64> {
    /// Parent points per unit area.
    pub lambda_p: T,
    /// Mean number of offspring per cluster.
    pub m_bar: T,
    /// Offspring scattering standard deviation, in distance units.
    pub sigma: T,
}

impl<T: Real> TcpParams<T> {
    pub fn new(lambda_p: T, m_bar: T, sigma: T) -> Result<Self> {
        for (name, v) in [("lambda_p", lambda_p), ("m_bar", m_bar), ("sigma", sigma)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(Self {
            lambda_p,
            m_bar,
            sigma,
        })
    }

    /// Stationary intensity of the offspring process.
    pub fn intensity(&self) -> T {
        self.lambda_p * self.m_bar
    }
}

/// Which distribution a sampled curve represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CurveKind {
    Contact,
    ContactBound,
    NnCase1,
    NnCase1Bound,
    NnCase2,
    EmpiricalContact,
    EmpiricalNn1,
    EmpiricalNn2,
}

/// A CDF sampled on a radius grid. Construction checks that the grid is
/// strictly increasing and the values are non-decreasing up to a small
/// numerical slack.
#[derive(Clone, Debug)]
pub struct CdfCurve<T = f64> {
    radii: Vec<T>,
    values: Vec<Probability<T>>,
    kind: CurveKind,
}

impl<T: Real> CdfCurve<T> {
    pub fn new(radii: Vec<T>, values: Vec<Probability<T>>, kind: CurveKind) -> Result<Self> {
        if radii.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "grid/value length mismatch: {} vs {}",
                radii.len(),
                values.len()
            )));
        }
        if radii.first().map_or(false, |r| *r < T::zero()) {
            return Err(Error::InvalidParameter("negative radius".into()));
        }
        for (i, pair) in radii.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidParameter(format!(
                    "radius grid not strictly increasing at index {}",
                    i + 1
                )));
            }
        }
        let slack = T::of(1e-12).max(T::epsilon() * T::of(100.0));
        for (i, pair) in values.windows(2).enumerate() {
            if pair[1].get() < pair[0].get() - slack {
                return Err(Error::NonMonotoneCurve { index: i + 1 });
            }
        }
        Ok(Self {
            radii,
            values,
            kind,
        })
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn values(&self) -> &[Probability<T>] {
        &self.values
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// Largest pointwise gap `self - other` over the common grid.
    pub fn sup_gap(&self, other: &CdfCurve<T>) -> T {
        assert_eq!(self.len(), other.len(), "curves on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |acc, (a, b)| acc.max(a.get() - b.get()))
    }
}

/// Survival probability of the contact distance,
/// `exp(-2 pi lambda_p Integral_0^inf (1 - e^{-m (1 - Q1(v/s, r/s))}) v dv)`.
fn contact_survival<T: Real>(p: &TcpParams<T>, r: T, q: &QuadratureConfig<T>) -> Result<T> {
    assert!(r >= T::zero(), "radius must be nonnegative");
    let sigma = p.sigma;
    let m_bar = p.m_bar;
    let b = r / sigma;
    let integral = integrate_semi_infinite(
        |v| {
            let q1 = marcum_q1(v / sigma, b).get();
            -(-(m_bar * (T::one() - q1))).exp_m1() * v
        },
        r,
        sigma,
        q,
    )?;
    Ok((-T::two() * T::PI() * p.lambda_p * integral.value).exp())
}

/// Exact contact distance CDF (distance from an external reference
/// location to the nearest point of the process).
pub fn contact_cdf<T: Real>(
    p: &TcpParams<T>,
    r: T,
    q: &QuadratureConfig<T>,
) -> Result<Probability<T>> {
    Ok(Probability::new(T::one() - contact_survival(p, r, q)?))
}

/// Closed-form upper bound on the contact CDF: the contact CDF of a
/// homogeneous PPP with the same intensity, `1 - exp(-pi lambda m r^2)`.
pub fn contact_cdf_bound<T: Real>(p: &TcpParams<T>, r: T) -> Probability<T> {
    assert!(r >= T::zero(), "radius must be nonnegative");
    Probability::new(-(-T::PI() * p.intensity() * r * r).exp_m1())
}

/// Inner integral of the Case-1 nearest-neighbor CDF: expectation over
/// the reference point's distance to its own cluster center.
fn nn1_inner<T: Real>(p: &TcpParams<T>, r: T, q: &QuadratureConfig<T>) -> Result<T> {
    let sigma = p.sigma;
    let m_bar = p.m_bar;
    let b = r / sigma;
    let integral = integrate_semi_infinite(
        |v0| {
            let q1 = marcum_q1(v0 / sigma, b).get();
            (-(m_bar * (T::one() - q1))).exp() * rayleigh_pdf(v0, sigma)
        },
        r,
        sigma,
        q,
    )?;
    Ok(integral.value)
}

/// Case-2 cluster-size factor `(e^{m q} - 1) / (q (e^{m} - 1))`,
/// continued by its limit `m / (e^m - 1)` when `q` underflows. Lies in
/// (0, 1] for q in (0, 1].
pub(crate) fn case2_size_factor<T: Real>(q1: T, m_bar: T) -> T {
    let denom = m_bar.exp_m1();
    if q1 < T::of(1e-12) {
        m_bar / denom
    } else {
        (m_bar * q1).exp_m1() / (q1 * denom)
    }
}

/// Inner integral of the Case-2 nearest-neighbor CDF.
fn nn2_inner<T: Real>(p: &TcpParams<T>, r: T, q: &QuadratureConfig<T>) -> Result<T> {
    let sigma = p.sigma;
    let m_bar = p.m_bar;
    let b = r / sigma;
    let integral = integrate_semi_infinite(
        |v0| {
            let q1 = marcum_q1(v0 / sigma, b).get();
            case2_size_factor(q1, m_bar) * rayleigh_pdf(v0, sigma)
        },
        r,
        sigma,
        q,
    )?;
    Ok(integral.value)
}

/// Nearest-neighbor distance CDF when the reference point is chosen
/// uniformly at random among all offspring points (size-biased cluster).
pub fn nn_case1_cdf<T: Real>(
    p: &TcpParams<T>,
    r: T,
    q: &QuadratureConfig<T>,
) -> Result<Probability<T>> {
    let survival = contact_survival(p, r, q)?;
    Ok(Probability::new(T::one() - survival * nn1_inner(p, r, q)?))
}

/// Closed-form upper bound on the Case-1 nearest-neighbor CDF:
/// `1 - exp(-pi lambda m r^2) exp(-m (1 - e^{-r^2/(4 sigma^2)}))`.
pub fn nn_case1_bound<T: Real>(p: &TcpParams<T>, r: T) -> Probability<T> {
    assert!(r >= T::zero(), "radius must be nonnegative");
    let ppp_term = (-T::PI() * p.intensity() * r * r).exp();
    let own = (-p.m_bar * -(-r * r / (T::of(4.0) * p.sigma * p.sigma)).exp_m1()).exp();
    Probability::new(T::one() - ppp_term * own)
}

/// Nearest-neighbor distance CDF when a non-empty cluster is chosen
/// uniformly at random first (zero-truncated cluster size).
pub fn nn_case2_cdf<T: Real>(
    p: &TcpParams<T>,
    r: T,
    q: &QuadratureConfig<T>,
) -> Result<Probability<T>> {
    let survival = contact_survival(p, r, q)?;
    Ok(Probability::new(T::one() - survival * nn2_inner(p, r, q)?))
}

/// Number-weighted Poisson PMF: size of the reference point's own
/// cluster under Case-1 (uniform over offspring) sampling,
/// `(l / m) m^l e^{-m} / l!` for l >= 1.
pub fn size_biased_pmf<T: Real>(ell: u64, m_bar: T) -> Probability<T> {
    assert!(ell >= 1, "size-biased PMF supported on positive integers");
    // Equals the plain Poisson(m) pmf at l - 1.
    let k = T::of_usize((ell - 1) as usize);
    Probability::new((-m_bar + k * m_bar.ln() - ln_gamma(k + T::one())).exp())
}

/// Zero-truncated Poisson PMF: size of the representative cluster under
/// Case-2 (uniform over non-empty clusters) sampling,
/// `m^l e^{-m} / (l! (1 - e^{-m}))` for l >= 1.
pub fn truncated_pmf<T: Real>(ell: u64, m_bar: T) -> Probability<T> {
    assert!(ell >= 1, "truncated PMF supported on positive integers");
    let l = T::of_usize(ell as usize);
    let log_pois = -m_bar + l * m_bar.ln() - ln_gamma(l + T::one());
    Probability::new(log_pois.exp() / -(-m_bar).exp_m1())
}

/// Radius where the PPP bound saturates at `1 - e^{-16}`; the default
/// grid endpoint covering the full rise of every curve.
pub fn default_r_max<T: Real>(p: &TcpParams<T>) -> T {
    T::of(4.0) / (T::PI() * p.intensity()).sqrt()
}

/// Uniform radius grid on [0, r_max]. A zero `r_max` collapses to the
/// single point 0.
pub fn radius_grid<T: Real>(r_max: T, points: usize) -> Vec<T> {
    assert!(r_max >= T::zero() && points > 0, "bad grid request");
    if r_max == T::zero() || points == 1 {
        return vec![T::zero()];
    }
    let step = r_max / T::of_usize(points - 1);
    (0..points)
        .map(|i| {
            if i == points - 1 {
                r_max
            } else {
                step * T::of_usize(i)
            }
        })
        .collect()
}

/// Default 200-point grid to [`default_r_max`].
pub fn default_grid<T: Real>(p: &TcpParams<T>) -> Vec<T> {
    radius_grid(default_r_max(p), 200)
}

/// The five analytic curves evaluated on a common grid.
#[derive(Clone, Debug)]
pub struct CurveFamily<T = f64> {
    pub contact: CdfCurve<T>,
    pub contact_bound: CdfCurve<T>,
    pub nn1: CdfCurve<T>,
    pub nn1_bound: CdfCurve<T>,
    pub nn2: CdfCurve<T>,
}

/// Evaluate all five curves on `radii`, computing the contact survival
/// once per radius and reusing it in both nearest-neighbor CDFs. Grid
/// points are independent and evaluated in parallel.
pub fn analytic_curves<T: Real>(
    p: &TcpParams<T>,
    radii: &[T],
    q: &QuadratureConfig<T>,
) -> Result<CurveFamily<T>> {
    let rows: Vec<[Probability<T>; 5]> = radii
        .par_iter()
        .map(|&r| {
            let survival = contact_survival(p, r, q)?;
            let i1 = nn1_inner(p, r, q)?;
            let i2 = nn2_inner(p, r, q)?;
            Ok([
                Probability::new(T::one() - survival),
                contact_cdf_bound(p, r),
                Probability::new(T::one() - survival * i1),
                nn_case1_bound(p, r),
                Probability::new(T::one() - survival * i2),
            ])
        })
        .collect::<Result<_>>()?;

    let column = |i: usize| rows.iter().map(|row| row[i]).collect::<Vec<_>>();
    Ok(CurveFamily {
        contact: CdfCurve::new(radii.to_vec(), column(0), CurveKind::Contact)?,
        contact_bound: CdfCurve::new(radii.to_vec(), column(1), CurveKind::ContactBound)?,
        nn1: CdfCurve::new(radii.to_vec(), column(2), CurveKind::NnCase1)?,
        nn1_bound: CdfCurve::new(radii.to_vec(), column(3), CurveKind::NnCase1Bound)?,
        nn2: CdfCurve::new(radii.to_vec(), column(4), CurveKind::NnCase2)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn params() -> TcpParams {
        TcpParams::new(5e-5, 3.0, 60.0).unwrap()
    }

    #[test]
    fn rejects_non_positive_parameters() {
        assert!(TcpParams::new(0.0, 3.0, 60.0).is_err());
        assert!(TcpParams::new(5e-5, -1.0, 60.0).is_err());
        assert!(TcpParams::new(5e-5, 3.0, f64::NAN).is_err());
    }

    #[test]
    fn contact_cdf_zero_at_origin() {
        let q = QuadratureConfig::default();
        assert_eq!(contact_cdf(&params(), 0.0, &q).unwrap().get(), 0.0);
    }

    #[test]
    fn contact_bound_closed_form() {
        let p = params();
        assert_eq!(contact_cdf_bound(&p, 0.0).get(), 0.0);
        let v = contact_cdf_bound(&p, 50.0).get();
        let direct = 1.0 - (-PI * 5e-5 * 3.0 * 2500.0).exp();
        assert_relative_eq!(v, direct, max_relative = 1e-14);
        assert!((v - 0.692).abs() < 1e-3);
    }

    #[test]
    fn nn1_bound_closed_form() {
        let p = params();
        assert_eq!(nn_case1_bound(&p, 0.0).get(), 0.0);
        let v = nn_case1_bound(&p, 50.0).get();
        let direct =
            1.0 - (-PI * 5e-5 * 3.0 * 2500.0).exp() * (-3.0 * (1.0 - (-2500.0f64 / 14400.0).exp())).exp();
        assert_relative_eq!(v, direct, max_relative = 1e-14);
        assert!((v - 0.809).abs() < 1e-3);
    }

    #[test]
    fn bound_dominates_exact_contact() {
        let p = params();
        let q = QuadratureConfig::default();
        for r in radius_grid(default_r_max(&p), 100) {
            let exact = contact_cdf(&p, r, &q).unwrap().get();
            let bound = contact_cdf_bound(&p, r).get();
            assert!(bound >= exact - 1e-12, "bound below exact at r = {r}");
        }
        // Strict at a representative interior radius.
        assert!(contact_cdf_bound(&p, 100.0).get() > contact_cdf(&p, 100.0, &q).unwrap().get());
    }

    #[test]
    fn nn_cdfs_dominate_contact_and_order() {
        let p = params();
        let q = QuadratureConfig::default();
        for r in radius_grid(default_r_max(&p), 25) {
            let contact = contact_cdf(&p, r, &q).unwrap().get();
            let nn1 = nn_case1_cdf(&p, r, &q).unwrap().get();
            let nn2 = nn_case2_cdf(&p, r, &q).unwrap().get();
            let bound1 = nn_case1_bound(&p, r).get();
            assert!(contact <= nn2 + 1e-12);
            assert!(nn2 <= nn1 + 1e-12);
            assert!(nn1 <= bound1 + 1e-12);
        }
    }

    #[test]
    fn nn_cdfs_vanish_at_origin() {
        let p = params();
        let q = QuadratureConfig::default();
        assert!(nn_case1_cdf(&p, 0.0, &q).unwrap().get() < 1e-12);
        assert!(nn_case2_cdf(&p, 0.0, &q).unwrap().get() < 1e-12);
    }

    #[test]
    fn sigma_to_zero_limit_matches_thinned_ppp() {
        let q = QuadratureConfig::default();
        let r = 100.0;
        let p = TcpParams::new(5e-5, 3.0, 1e-3 * r).unwrap();
        let exact = contact_cdf(&p, r, &q).unwrap().get();
        let limit = 1.0 - (-PI * 5e-5 * (1.0 - (-3.0f64).exp()) * r * r).exp();
        assert!(
            (exact - limit).abs() < 1e-3,
            "sigma->0: {exact} vs limit {limit}"
        );
    }

    #[test]
    fn truncation_is_stable_under_longer_tails() {
        let p = params();
        let q12 = QuadratureConfig::default();
        let q24 = QuadratureConfig {
            tail_sigmas: 24.0,
            ..q12
        };
        let a = contact_cdf(&p, 100.0, &q12).unwrap().get();
        let b = contact_cdf(&p, 100.0, &q24).unwrap().get();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn size_biased_pmf_values_and_moments() {
        assert_relative_eq!(
            size_biased_pmf(1u64, 1.0f64).get(),
            (-1.0f64).exp(),
            max_relative = 1e-13
        );
        let total: f64 = (1..=200).map(|l| size_biased_pmf(l, 3.0f64).get()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let mean: f64 = (1..=200)
            .map(|l| l as f64 * size_biased_pmf(l, 3.0f64).get())
            .sum();
        assert!((mean - 4.0).abs() < 1e-9);
    }

    #[test]
    fn truncated_pmf_values_and_moments() {
        let m = 3.0f64;
        assert_relative_eq!(
            truncated_pmf(1u64, m).get(),
            m * (-m).exp() / (1.0 - (-m).exp()),
            max_relative = 1e-13
        );
        let total: f64 = (1..=200).map(|l| truncated_pmf(l, m).get()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let mean: f64 = (1..=200).map(|l| l as f64 * truncated_pmf(l, m).get()).sum();
        assert!((mean - m / (1.0 - (-m).exp())).abs() < 1e-9);
    }

    #[test]
    #[should_panic]
    fn pmf_rejects_zero() {
        size_biased_pmf(0u64, 3.0f64);
    }

    #[test]
    fn case2_factor_in_unit_interval() {
        for &m in &[0.5f64, 1.0, 3.0, 10.0] {
            for i in 1..=40 {
                let x = i as f64 / 40.0;
                let f = case2_size_factor(x, m);
                assert!(f > 0.0 && f <= 1.0 + 1e-12, "factor({x}, {m}) = {f}");
            }
            assert_relative_eq!(case2_size_factor(1.0, m), 1.0, max_relative = 1e-12);
            // Limit continuation agrees with a tiny-but-nonzero argument.
            assert_relative_eq!(
                case2_size_factor(1e-13, m),
                case2_size_factor(1.1e-12, m),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn default_grid_shape() {
        let p = params();
        let grid = default_grid(&p);
        assert_eq!(grid.len(), 200);
        assert_eq!(grid[0], 0.0);
        assert_relative_eq!(
            *grid.last().unwrap(),
            4.0 / (PI * 5e-5 * 3.0).sqrt(),
            max_relative = 1e-14
        );
        assert_eq!(radius_grid(0.0f64, 200), vec![0.0]);
    }

    #[test]
    fn curve_family_is_monotone_and_ordered() {
        let p = params();
        let q = QuadratureConfig::default();
        let grid = radius_grid(default_r_max(&p), 20);
        let fam = analytic_curves(&p, &grid, &q).unwrap();
        // CdfCurve::new already rejects non-monotone data; check ordering.
        for i in 0..grid.len() {
            let c = fam.contact.values()[i].get();
            let n2 = fam.nn2.values()[i].get();
            let n1 = fam.nn1.values()[i].get();
            assert!(c <= n2 + 1e-12 && n2 <= n1 + 1e-12);
            assert!(c <= fam.contact_bound.values()[i].get() + 1e-12);
            assert!(n1 <= fam.nn1_bound.values()[i].get() + 1e-12);
        }
    }

    #[test]
    fn curve_rejects_decreasing_values() {
        let values = vec![
            Probability::new(0.5f64),
            Probability::new(0.4),
        ];
        let err = CdfCurve::new(vec![0.0, 1.0], values, CurveKind::Contact).unwrap_err();
        assert!(matches!(err, Error::NonMonotoneCurve { index: 1 }));
    }

    #[test]
    fn generic_scalar_bound_in_f32() {
        let p = TcpParams::<f32>::new(5e-5, 3.0, 60.0).unwrap();
        let v = contact_cdf_bound(&p, 50.0f32).get();
        assert!((v - 0.692).abs() < 1e-3);
    }
}
