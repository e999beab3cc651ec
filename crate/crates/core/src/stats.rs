//! Empirical-distribution machinery used to validate the analytic CDFs:
//! empirical CDF, Kolmogorov-Smirnov distances, the
//! Dvoretzky-Kiefer-Wolfowitz confidence band, and a Pearson chi-square
//! PMF test with tail pooling.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::sim::SampleSet;

/// Right-continuous empirical CDF over a sorted sample.
#[derive(Clone, Debug)]
pub struct EmpiricalCdf<T = f64> {
    sorted: Vec<T>,
}

impl<T: Real> EmpiricalCdf<T> {
    pub fn new(mut samples: Vec<T>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        if samples.iter().any(|x| !x.is_finite() || *x < T::zero()) {
            return Err(Error::InvalidParameter(
                "samples must be finite and nonnegative".into(),
            ));
        }
        samples.sort_by(|a, b| a.partial_cmp(b).expect("no NaN after check"));
        Ok(Self { sorted: samples })
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted(&self) -> &[T] {
        &self.sorted
    }

    /// `#(samples <= r) / n`.
    pub fn eval(&self, r: T) -> T {
        let count = self.sorted.partition_point(|x| *x <= r);
        T::of_usize(count) / T::of_usize(self.n())
    }
}

/// Empirical CDF of a Monte Carlo distance sample set.
pub fn empirical_cdf(s: &SampleSet) -> Result<EmpiricalCdf<f64>> {
    EmpiricalCdf::new(s.distances.clone())
}

/// Kolmogorov-Smirnov distance between an empirical CDF and a continuous
/// CDF, evaluated exactly at the sample points (where the sup over a
/// step-vs-continuous comparison is attained).
pub fn ks_distance<T: Real, F: Fn(T) -> T>(e: &EmpiricalCdf<T>, cdf: F) -> T {
    let n = T::of_usize(e.n());
    let mut sup = T::zero();
    for (i, &x) in e.sorted().iter().enumerate() {
        let f = cdf(x);
        let hi = T::of_usize(i + 1) / n - f;
        let lo = f - T::of_usize(i) / n;
        sup = sup.max(hi.abs()).max(lo.abs());
    }
    sup
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn two_sample_ks<T: Real>(a: &EmpiricalCdf<T>, b: &EmpiricalCdf<T>) -> T {
    let (xs, ys) = (a.sorted(), b.sorted());
    let (n, m) = (T::of_usize(xs.len()), T::of_usize(ys.len()));
    let mut sup = T::zero();
    let (mut i, mut j) = (0usize, 0usize);
    while i < xs.len() && j < ys.len() {
        if xs[i] <= ys[j] {
            i += 1;
        } else {
            j += 1;
        }
        let diff = T::of_usize(i) / n - T::of_usize(j) / m;
        sup = sup.max(diff.abs());
    }
    sup
}

/// Critical value for the two-sample KS test at level `alpha`:
/// `sqrt(ln(2/alpha)/2) * sqrt((n + m) / (n m))`.
pub fn two_sample_ks_critical(n: usize, m: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    if n == 0 || m == 0 {
        return Err(Error::EmptySampleSet);
    }
    let c = ((2.0 / alpha).ln() / 2.0).sqrt();
    Ok(c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt())
}

/// Dvoretzky-Kiefer-Wolfowitz band half-width
/// `sqrt(ln(2/alpha) / (2n))`: with probability at least `1 - alpha` the
/// empirical CDF stays within this distance of the true CDF everywhere.
pub fn dkw_epsilon(n: usize, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptySampleSet);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    Ok(((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt())
}

/// Outcome of a Pearson chi-square goodness-of-fit test.
#[derive(Clone, Copy, Debug)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub dof: usize,
    pub critical: f64,
    pub pass: bool,
    /// Bins retained after pooling the tail to expected counts >= 5.
    pub bins: usize,
}

/// Pearson chi-square test of observed counts against a PMF on the
/// positive integers. `observed[i]` is the count of value `i + 1`; the
/// tail is pooled until every bin has expected count at least 5.
pub fn chi_square_pmf_test(
    observed: &[u64],
    pmf: impl Fn(u64) -> f64,
    alpha: f64,
) -> Result<ChiSquareOutcome> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(Error::EmptySampleSet);
    }
    let n_f = n as f64;

    // Individual bins while both the bin and the remaining tail carry
    // expected count >= 5; everything from the cut onward is one bin.
    let mut bins: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let mut cum_p = 0.0;
    let mut cut = observed.len(); // first value index pooled into the tail
    for ell in 1..=observed.len() as u64 {
        let p = pmf(ell);
        let expected = n_f * p;
        let tail_expected = n_f * (1.0 - cum_p - p);
        if expected < 5.0 || tail_expected < 5.0 {
            cut = (ell - 1) as usize;
            break;
        }
        bins.push((observed[(ell - 1) as usize] as f64, expected));
        cum_p += p;
    }
    let tail_observed: u64 = observed[cut.min(observed.len())..].iter().sum();
    let mut tail = (tail_observed as f64, n_f * (1.0 - cum_p));
    // Make sure the pooled tail itself is usable.
    while tail.1 < 5.0 {
        match bins.pop() {
            Some((o, e)) => {
                tail.0 += o;
                tail.1 += e;
            }
            None => return Err(Error::InsufficientBins),
        }
    }
    bins.push(tail);
    if bins.len() < 2 {
        return Err(Error::InsufficientBins);
    }

    let statistic: f64 = bins
        .iter()
        .map(|(o, e)| {
            let d = o - e;
            d * d / e
        })
        .sum();
    let dof = bins.len() - 1;
    let critical = ChiSquared::new(dof as f64)
        .expect("dof >= 1")
        .inverse_cdf(1.0 - alpha);
    Ok(ChiSquareOutcome {
        statistic,
        dof,
        critical,
        pass: statistic <= critical,
        bins: bins.len(),
    })
}

/// Convenience: histogram of positive-integer samples, indexed by value
/// minus one.
pub fn count_histogram(samples: &[u64]) -> Vec<u64> {
    let max = samples.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0u64; max as usize];
    for &s in samples {
        assert!(s >= 1, "histogram over positive integers");
        counts[(s - 1) as usize] += 1;
    }
    counts
}
