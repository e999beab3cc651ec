//! Scalar special functions: modified Bessel I0, the first-order Marcum Q
//! function, and the Rician / Rayleigh densities built on them.
//!
//! Everything here is overflow-safe for the argument ranges the distance
//! CDFs produce during quadrature (Marcum arguments up to ~10^3): large
//! Bessel arguments go through the exponentially scaled variant and the
//! Marcum series is seeded in the log domain.

use crate::real::Real;

/// A value asserted to lie in [0, 1].
///
/// Constructed by every routine that returns a probability; the
/// constructor tolerates a few ulps of numerical overshoot and clamps,
/// anything worse is a bug and panics.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Probability<T = f64>(T);

impl<T: Real> Probability<T> {
    pub fn new(value: T) -> Self {
        let slack = T::of(1e-9).max(T::epsilon() * T::of(100.0));
        assert!(
            value >= -slack && value <= T::one() + slack,
            "probability out of range: {value}"
        );
        Self(value.max(T::zero()).min(T::one()))
    }

    #[inline]
    pub fn get(self) -> T {
        self.0
    }
}

impl<T: Real> core::fmt::Display for Probability<T> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Crossover between the I0 power series and the asymptotic expansion.
const I0_SERIES_LIMIT: f64 = 15.0;

/// Modified Bessel function of the first kind, order zero.
///
/// Power series for x <= 15, asymptotic expansion beyond; saturates to
/// +inf once `exp(x)` leaves the representable range (x ~ 709 in f64).
pub fn bessel_i0<T: Real>(x: T) -> T {
    let x = x.abs();
    if x <= T::of(I0_SERIES_LIMIT) {
        i0_series(x)
    } else {
        i0e_asymptotic(x) * x.exp()
    }
}

/// Exponentially scaled modified Bessel function, `I0(x) * exp(-x)`.
///
/// Stays in (0, 1] for all x >= 0 and is the form every density in this
/// crate uses internally.
pub fn bessel_i0e<T: Real>(x: T) -> T {
    let x = x.abs();
    if x <= T::of(I0_SERIES_LIMIT) {
        i0_series(x) * (-x).exp()
    } else {
        i0e_asymptotic(x)
    }
}

/// Ascending series sum_k (x^2/4)^k / (k!)^2; all terms positive, no
/// cancellation in this regime.
fn i0_series<T: Real>(x: T) -> T {
    let q = x * x / T::of(4.0);
    let mut sum = T::one();
    let mut term = T::one();
    let mut k = T::one();
    for _ in 0..200 {
        term = term * q / (k * k);
        sum = sum + term;
        if term <= sum * T::epsilon() {
            break;
        }
        k = k + T::one();
    }
    sum
}

/// Large-argument expansion of I0(x)*exp(-x). The series is asymptotic:
/// terms are added while they keep shrinking, which bottoms out around
/// 1.5e-14 relative at the x = 15 crossover.
fn i0e_asymptotic<T: Real>(x: T) -> T {
    let eight_x = T::of(8.0) * x;
    let mut sum = T::one();
    let mut term = T::one();
    let mut k = T::one();
    loop {
        let odd = T::two() * k - T::one();
        let next = term * odd * odd / (k * eight_x);
        if next >= term || next <= sum * T::epsilon() {
            sum = sum + next.min(term);
            break;
        }
        term = next;
        sum = sum + term;
        k = k + T::one();
    }
    sum / (T::two() * T::PI() * x).sqrt()
}

/// Arguments (as x = a^2/2, y = b^2/2) below this use the plain ascending
/// series; above it exp(-x) or exp(-y) loses precision and the summation
/// is re-centered on the Poisson mode with log-domain seeds.
const MARCUM_DIRECT_LIMIT: f64 = 600.0;

/// Relative stopping rule for the Marcum series.
const MARCUM_REL_TOL: f64 = 1e-13;

/// Absolute floor that lets the series terminate when the result itself
/// underflows.
const MARCUM_TINY: f64 = 1e-300;

/// First-order Marcum Q function `Q1(a, b)`.
///
/// Survival function of a Rician variate with parameters (nu = a,
/// sigma = 1): the canonical series of Poisson(a^2/2)-weighted Poisson
/// CDF terms,
///
/// ```text
/// Q1(a,b) = sum_k  e^{-a^2/2} (a^2/2)^k / k!  *  P(Pois(b^2/2) <= k)
/// ```
///
/// Non-increasing in `b`, non-decreasing in `a`; finite and in [0, 1] for
/// arguments well beyond 10^3.
pub fn marcum_q1<T: Real>(a: T, b: T) -> Probability<T> {
    assert!(a >= T::zero() && a.is_finite(), "marcum_q1: a = {a}");
    assert!(b >= T::zero() && b.is_finite(), "marcum_q1: b = {b}");
    if b == T::zero() {
        return Probability::new(T::one());
    }
    if a == T::zero() {
        return Probability::new((-b * b / T::two()).exp());
    }
    let x = a * a / T::two();
    let y = b * b / T::two();
    let q = if x < T::of(MARCUM_DIRECT_LIMIT) && y < T::of(MARCUM_DIRECT_LIMIT) {
        marcum_series_from_zero(x, y)
    } else {
        marcum_series_from_mode(x, y)
    };
    Probability::new(q)
}

/// Plain ascending series from k = 0. Valid while exp(-x) and exp(-y)
/// are normal floats.
fn marcum_series_from_zero<T: Real>(x: T, y: T) -> T {
    let rel = T::of(MARCUM_REL_TOL);
    let tiny = T::of(MARCUM_TINY);
    let mut w = (-x).exp(); // Poisson(x) pmf at k
    let mut c = (-y).exp(); // Poisson(y) pmf at k
    let mut cdf = c; // P(Pois(y) <= k)
    let mut sum = w * cdf;
    let mut k = T::zero();
    for _ in 0..100_000 {
        k = k + T::one();
        w = w * x / k;
        c = c * y / k;
        cdf = (cdf + c).min(T::one());
        sum = sum + w * cdf;
        if k > x {
            // Poisson weight ratios shrink past the mode; a geometric tail
            // bound (times max CDF = 1) caps the remaining contribution.
            let r = x / (k + T::one());
            let tail = w * r / (T::one() - r);
            if tail <= rel * sum + tiny {
                break;
            }
        }
    }
    sum.min(T::one())
}

/// Mode-centered two-sided sweep for large arguments. Seeds the Poisson
/// weight, pmf and CDF at k0 = floor(x) in the log domain and recurs
/// outward in both directions.
fn marcum_series_from_mode<T: Real>(x: T, y: T) -> T {
    let rel = T::of(MARCUM_REL_TOL);
    let tiny = T::of(MARCUM_TINY);
    let k0 = x.floor();
    let w0 = poisson_pmf(x, k0);
    let c0 = poisson_pmf(y, k0);
    let cdf0 = poisson_cdf(y, k0);
    let mut sum = w0 * cdf0;

    // Downward sweep: k0-1, k0-2, ...
    let mut w = w0;
    let mut c = c0;
    let mut cdf = cdf0;
    let mut k = k0;
    while k > T::zero() {
        cdf = (cdf - c).max(T::zero());
        c = c * k / y;
        w = w * k / x;
        k = k - T::one();
        sum = sum + w * cdf;
        let r = k / x; // < 1 below the mode
        let tail = w * cdf * r / (T::one() - r);
        if tail <= rel * sum + tiny {
            break;
        }
    }

    // Upward sweep: k0+1, k0+2, ...
    let mut w = w0;
    let mut c = c0;
    let mut cdf = cdf0;
    let mut k = k0;
    for _ in 0..100_000_000u64 {
        k = k + T::one();
        w = w * x / k;
        c = c * y / k;
        cdf = (cdf + c).min(T::one());
        sum = sum + w * cdf;
        if k > x {
            let r = x / (k + T::one());
            let tail = w * r / (T::one() - r);
            if tail <= rel * sum + tiny {
                break;
            }
        }
    }
    sum.min(T::one())
}

/// Poisson(mean) pmf at integer k (passed as a float), in the log domain;
/// underflows cleanly to zero.
fn poisson_pmf<T: Real>(mean: T, k: T) -> T {
    if k == T::zero() {
        return (-mean).exp();
    }
    (-mean + k * mean.ln() - ln_gamma(k + T::one())).exp()
}

/// P(Pois(mean) <= k) by summing pmf terms from k toward the nearer tail.
fn poisson_cdf<T: Real>(mean: T, k: T) -> T {
    let tol = T::of(1e-17);
    let tiny = T::of(MARCUM_TINY);
    if k >= mean {
        // Complement of the upper tail, summed upward from k+1.
        let mut j = k + T::one();
        let mut c = poisson_pmf(mean, j);
        let mut tail = T::zero();
        while c > T::zero() {
            tail = tail + c;
            j = j + T::one();
            c = c * mean / j;
            if c <= tail * tol + tiny {
                tail = tail + c;
                break;
            }
        }
        (T::one() - tail).max(T::zero())
    } else {
        // Direct lower sum, downward from k.
        let mut j = k;
        let mut c = poisson_pmf(mean, k);
        let mut sum = T::zero();
        loop {
            sum = sum + c;
            if j == T::zero() || c <= sum * tol + tiny {
                break;
            }
            c = c * j / mean;
            j = j - T::one();
        }
        sum.min(T::one())
    }
}

/// Rician density with noncentrality `nu` and scale `sigma`:
/// `(u/sigma^2) exp(-(u^2+nu^2)/(2 sigma^2)) I0(u nu / sigma^2)`,
/// evaluated in the scaled form `(u/sigma^2) i0e(u nu/sigma^2)
/// exp(-(u-nu)^2/(2 sigma^2))` so large `u nu / sigma^2` cannot overflow.
pub fn rician_pdf<T: Real>(u: T, nu: T, sigma: T) -> T {
    assert!(u >= T::zero(), "rician_pdf: u = {u}");
    assert!(nu >= T::zero(), "rician_pdf: nu = {nu}");
    assert!(sigma > T::zero(), "rician_pdf: sigma = {sigma}");
    let s2 = sigma * sigma;
    let d = u - nu;
    (u / s2) * bessel_i0e(u * nu / s2) * (-d * d / (T::two() * s2)).exp()
}

/// Rayleigh density `(v/sigma^2) exp(-v^2/(2 sigma^2))`; the distance of
/// a point from its own cluster center under an isotropic Gaussian
/// displacement with per-axis deviation `sigma`.
pub fn rayleigh_pdf<T: Real>(v: T, sigma: T) -> T {
    assert!(v >= T::zero(), "rayleigh_pdf: v = {v}");
    assert!(sigma > T::zero(), "rayleigh_pdf: sigma = {sigma}");
    let s2 = sigma * sigma;
    (v / s2) * (-v * v / (T::two() * s2)).exp()
}

/// log Gamma for z > 0: Stirling series after shifting the argument
/// above 10. Accurate to ~1e-15 absolute over the ranges used here.
pub(crate) fn ln_gamma<T: Real>(z: T) -> T {
    assert!(z > T::zero(), "ln_gamma: z = {z}");
    let threshold = T::of(10.0);
    let mut shift = T::zero();
    let mut zz = z;
    while zz < threshold {
        shift = shift + zz.ln();
        zz = zz + T::one();
    }
    // Bernoulli-number correction terms in 1/z^2.
    const STIRLING: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
    ];
    let w = (zz * zz).recip();
    let mut corr = T::of(STIRLING[5]);
    for &coeff in STIRLING[..5].iter().rev() {
        corr = corr * w + T::of(coeff);
    }
    corr = corr / zz;
    let half_ln_two_pi = T::of(0.918_938_533_204_672_74); // ln(2*pi)/2
    (zz - T::half()) * zz.ln() - zz + half_ln_two_pi + corr - shift
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadratureConfig};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Independent oracle: explicit 50-term power series with literal
    /// factorials.
    fn i0_series_oracle(x: f64) -> f64 {
        let mut sum = 0.0;
        for k in 0..50 {
            let mut fact = 1.0;
            for i in 1..=k {
                fact *= i as f64;
            }
            sum += (x / 2.0).powi(2 * k as i32) / (fact * fact);
        }
        sum
    }

    /// Independent oracle: adaptive quadrature of the defining integral
    /// of Q1, with the integrand in its overflow-safe scaled form
    /// `y * i0e(a y) * exp(-(y-a)^2 / 2)`.
    fn marcum_oracle(a: f64, b: f64) -> f64 {
        let q = QuadratureConfig {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            ..QuadratureConfig::default()
        };
        let upper = a.max(b) + 45.0;
        if upper <= b {
            return 0.0;
        }
        let f = |y: f64| y * bessel_i0e(a * y) * (-0.5 * (y - a) * (y - a)).exp();
        integrate(f, b, upper, &q).unwrap().value
    }

    #[test]
    fn i0_at_zero_is_one() {
        assert_eq!(bessel_i0(0.0), 1.0);
        assert_eq!(bessel_i0e(0.0), 1.0);
    }

    #[test]
    fn i0_matches_power_series_oracle() {
        for &x in &[0.25, 1.0, 2.0, 7.5, 14.0] {
            assert_relative_eq!(bessel_i0(x), i0_series_oracle(x), max_relative = 1e-12);
        }
    }

    #[test]
    fn i0_monotone_increasing() {
        let mut prev = bessel_i0(0.0f64);
        for i in 1..200 {
            let x = i as f64 * 0.35;
            let v = bessel_i0(x);
            assert!(v > prev, "I0 not increasing at x = {x}");
            prev = v;
        }
    }

    #[test]
    fn i0e_large_argument_matches_asymptotic_oracle() {
        let x = 500.0;
        let v = bessel_i0e(x);
        assert!(v > 0.0 && v < 1.0);
        // Leading asymptotic behaviour 1/sqrt(2 pi x), within 1%.
        let lead = 1.0 / (2.0 * std::f64::consts::PI * x).sqrt();
        assert!((v - lead).abs() / lead < 0.01);
    }

    #[test]
    fn scaled_and_unscaled_bessel_agree() {
        for &x in &[0.1f64, 1.0, 5.0, 14.9, 15.1, 40.0, 200.0, 500.0, 700.0] {
            assert_relative_eq!(
                bessel_i0e(x) * x.exp(),
                bessel_i0(x),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn i0_continuous_across_series_asymptotic_switch() {
        let lo = bessel_i0e(15.0 - 1e-9);
        let hi = bessel_i0e(15.0 + 1e-9);
        assert_relative_eq!(lo, hi, max_relative = 1e-12);
    }

    #[test]
    fn marcum_b_zero_is_one() {
        for &a in &[0.0f64, 0.3, 1.0, 10.0, 100.0, 1000.0] {
            assert_eq!(marcum_q1(a, 0.0).get(), 1.0);
        }
    }

    #[test]
    fn marcum_a_zero_is_rayleigh_survival() {
        for &b in &[0.1f64, 1.0, 2.5, 10.0] {
            assert_relative_eq!(
                marcum_q1(0.0, b).get(),
                (-b * b / 2.0).exp(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn marcum_matches_quadrature_oracle_at_1_2() {
        let q = marcum_q1(1.0, 2.0).get();
        assert!((q - marcum_oracle(1.0, 2.0)).abs() < 1e-10);
    }

    #[test]
    fn marcum_matches_oracle_across_path_switch() {
        // x = a^2/2 straddles the direct/mode-centered boundary near a ~ 34.6.
        for &(a, b) in &[(30.0, 31.0), (34.0, 34.5), (35.5, 35.0), (40.0, 38.0)] {
            let q = marcum_q1(a, b).get();
            let o = marcum_oracle(a, b);
            assert!(
                (q - o).abs() < 1e-10,
                "Q1({a},{b}) = {q} vs oracle {o}"
            );
        }
    }

    #[test]
    fn marcum_monotone_on_grid() {
        let grid: Vec<f64> = (0..20).map(|i| i as f64 * 0.45).collect();
        for &a in &grid {
            for w in grid.windows(2) {
                let lo = marcum_q1(a, w[1]).get();
                let hi = marcum_q1(a, w[0]).get();
                assert!(hi >= lo - 1e-14, "not decreasing in b at a={a}");
            }
        }
        for &b in &grid {
            for w in grid.windows(2) {
                let lo = marcum_q1(w[0], b).get();
                let hi = marcum_q1(w[1], b).get();
                assert!(hi >= lo - 1e-14, "not increasing in a at b={b}");
            }
        }
    }

    #[test]
    fn marcum_finite_for_huge_arguments() {
        for &(a, b) in &[(1000.0f64, 1.0), (1.0, 1000.0), (1000.0, 1000.0), (900.0, 950.0)] {
            let q = marcum_q1(a, b).get();
            assert!(q.is_finite() && (0.0..=1.0).contains(&q), "Q1({a},{b}) = {q}");
        }
        // Far above / far below the transition the value saturates.
        assert!(marcum_q1(1000.0, 1.0).get() > 1.0 - 1e-12);
        assert!(marcum_q1(1.0, 1000.0).get() < 1e-12);
    }

    #[test]
    fn rician_reduces_to_rayleigh_at_zero_nu() {
        for &u in &[0.0, 0.5, 1.0, 3.0] {
            assert_relative_eq!(
                rician_pdf(u, 0.0, 2.0),
                rayleigh_pdf(u, 2.0),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn rician_normalizes() {
        let q = QuadratureConfig::default();
        for &(nu, sigma) in &[(0.0f64, 1.0), (1.0, 1.0), (5.0, 1.0), (20.0, 1.0), (3.0, 60.0)] {
            let upper = nu + 14.0 * sigma;
            let total = integrate(|u| rician_pdf(u, nu, sigma), 0.0, upper, &q)
                .unwrap()
                .value;
            assert!((total - 1.0).abs() < 1e-9, "nu={nu} sigma={sigma}: {total}");
        }
    }

    #[test]
    fn rician_tail_integral_matches_marcum() {
        let q = QuadratureConfig::default();
        let (a, b) = (2.0, 1.0);
        let tail = integrate(|u| rician_pdf(u, a, 1.0), b, a + 14.0, &q)
            .unwrap()
            .value;
        assert!((tail - marcum_q1(a, b).get()).abs() < 1e-9);
    }

    #[test]
    fn rayleigh_basics() {
        assert_eq!(rayleigh_pdf(0.0, 60.0), 0.0);
        let q = QuadratureConfig::default();
        let total = integrate(|v| rayleigh_pdf(v, 60.0), 0.0, 14.0 * 60.0, &q)
            .unwrap()
            .value;
        assert!((total - 1.0).abs() < 1e-9);
        // Mode at v = sigma.
        let peak = rayleigh_pdf(60.0, 60.0);
        assert!(rayleigh_pdf(59.0, 60.0) < peak && rayleigh_pdf(61.0, 60.0) < peak);
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0f64).abs() < 1e-13);
        assert!(ln_gamma(2.0f64).abs() < 1e-13);
        // ln(6!) = ln 720
        assert_relative_eq!(ln_gamma(7.0f64), 720.0f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(
            ln_gamma(0.5f64),
            std::f64::consts::PI.sqrt().ln(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn generic_scalar_compiles_in_f32() {
        let v = bessel_i0(1.0f32);
        assert!((v - 1.266_065_9).abs() < 1e-5);
        let q = marcum_q1(1.0f32, 2.0f32).get();
        assert!((f64::from(q) - marcum_oracle(1.0, 2.0)).abs() < 1e-5);
    }

    #[test]
    #[should_panic]
    fn probability_rejects_garbage() {
        Probability::new(1.5f64);
    }

    proptest! {
        #[test]
        fn marcum_in_unit_interval_and_monotone(a in 0.0f64..60.0, b in 0.0f64..60.0) {
            let q = marcum_q1(a, b).get();
            prop_assert!((0.0..=1.0).contains(&q));
            let q_bigger_b = marcum_q1(a, b + 0.7).get();
            prop_assert!(q_bigger_b <= q + 1e-13);
            let q_bigger_a = marcum_q1(a + 0.7, b).get();
            prop_assert!(q_bigger_a >= q - 1e-13);
        }
    }
}
