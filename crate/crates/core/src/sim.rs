//! Monte Carlo sampling of the Thomas cluster process and of the three
//! distance random variables.
//!
//! Two independent constructions exist for the nearest-neighbor
//! distances: the Palm construction (reference cluster added explicitly,
//! an independent copy of the process superposed) and a naive one that
//! generates a whole pattern and picks the reference point literally as
//! defined. The naive sampler exists to validate the Palm construction
//! empirically.
//!
//! Reproducibility: every sample index gets its own counter-derived
//! ChaCha stream from `(seed, kind, index)`, so results are bit-identical
//! for a given `(seed, params, n, kind)` regardless of how many worker
//! threads run the sampling loop. Parent points are generated in order
//! of increasing radius via exponential increments in the r^2 coordinate,
//! which also makes a window enlargement append clusters to the stream
//! instead of reshuffling it.

use std::f64::consts::{PI, TAU};
use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::TcpParams;

/// Disk window (centered at the origin) within which parent points are
/// generated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimWindow {
    pub radius: f64,
}

impl SimWindow {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "window radius must be finite and positive, got {radius}"
            )));
        }
        Ok(Self { radius })
    }

    /// Window for experiments observing distances up to `r_max`:
    /// `r_max + margin_sigmas * sigma`. A cluster whose parent lies
    /// beyond that margin contributes a point within `r_max` with
    /// probability below 1e-14 at the default margin of 8.
    pub fn with_margin(p: &TcpParams, r_max: f64, margin_sigmas: f64) -> Self {
        assert!(r_max >= 0.0 && margin_sigmas > 0.0);
        let w = Self {
            radius: r_max + margin_sigmas * p.sigma,
        };
        assert!(w.radius > r_max);
        w
    }

    /// Default margin of 8 sigma.
    pub fn for_experiment(p: &TcpParams, r_max: f64) -> Self {
        Self::with_margin(p, r_max, 8.0)
    }

    /// Large window for the naive nearest-neighbor sampler: reference
    /// points are restricted to clusters whose parents lie in the inner
    /// half-radius, and the window is sized so they stay at least
    /// `r_max + 6 sigma` away from the edge.
    pub fn for_naive(p: &TcpParams, r_max: f64) -> Self {
        Self {
            radius: 2.0 * (r_max + 12.0 * p.sigma),
        }
    }
}

/// Which distance law a sample set contains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DistanceKind {
    Contact,
    NnCase1,
    NnCase2,
}

impl DistanceKind {
    pub fn label(self) -> &'static str {
        match self {
            DistanceKind::Contact => "contact",
            DistanceKind::NnCase1 => "nn_case1",
            DistanceKind::NnCase2 => "nn_case2",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "contact" => Ok(DistanceKind::Contact),
            "nn_case1" => Ok(DistanceKind::NnCase1),
            "nn_case2" => Ok(DistanceKind::NnCase2),
            other => Err(Error::Format(format!("unknown sample kind {other:?}"))),
        }
    }

    fn stream_tag(self) -> u64 {
        match self {
            DistanceKind::Contact => 1,
            DistanceKind::NnCase1 => 2,
            DistanceKind::NnCase2 => 3,
        }
    }
}

/// The two nearest-neighbor reference-point sampling schemes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NnCase {
    Case1,
    Case2,
}

impl NnCase {
    fn kind(self) -> DistanceKind {
        match self {
            NnCase::Case1 => DistanceKind::NnCase1,
            NnCase::Case2 => DistanceKind::NnCase2,
        }
    }
}

/// One cluster: parent location and its offspring (absolute positions).
#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    pub parent: [f64; 2],
    pub offspring: Vec<[f64; 2]>,
}

/// A realization of the process inside a window. Only offspring belong
/// to the process; parents are kept for cluster-level diagnostics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointPattern {
    pub clusters: Vec<Cluster>,
}

impl PointPattern {
    pub fn total_points(&self) -> usize {
        self.clusters.iter().map(|c| c.offspring.len()).sum()
    }

    /// Number of offspring points within distance `r` of the origin.
    pub fn count_in_ball(&self, r: f64) -> usize {
        let r2 = r * r;
        self.clusters
            .iter()
            .flat_map(|c| &c.offspring)
            .filter(|pt| norm_sq(**pt) <= r2)
            .count()
    }

    /// Distance from the origin to the nearest offspring point.
    pub fn nearest_to_origin(&self) -> Option<f64> {
        self.clusters
            .iter()
            .flat_map(|c| &c.offspring)
            .map(|pt| norm_sq(*pt))
            .fold(None, |best: Option<f64>, d| {
                Some(best.map_or(d, |b| b.min(d)))
            })
            .map(f64::sqrt)
    }
}

#[inline]
fn norm_sq(p: [f64; 2]) -> f64 {
    p[0] * p[0] + p[1] * p[1]
}

#[inline]
fn dist_sq(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

#[inline]
fn gauss_around<R: Rng>(center: [f64; 2], sigma: f64, rng: &mut R) -> [f64; 2] {
    let dx: f64 = StandardNormal.sample(rng);
    let dy: f64 = StandardNormal.sample(rng);
    [center[0] + sigma * dx, center[1] + sigma * dy]
}

/// Per-sample RNG stream. `index` must stay below 2^48.
fn stream_rng(seed: u64, tag: u64, index: u64) -> ChaCha12Rng {
    debug_assert!(index < 1 << 48);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream((tag << 48) | index);
    rng
}

/// Generate the clusters of one realization, parents in order of
/// increasing radius, calling `visit` once per cluster with a reused
/// offspring buffer.
fn visit_clusters<R: Rng>(
    p: &TcpParams,
    w: &SimWindow,
    rng: &mut R,
    mut visit: impl FnMut(&[f64; 2], &[[f64; 2]]),
) {
    // Squared parent radii form a 1-D Poisson process of rate
    // lambda_p * pi, generated by exponential increments: exact counts,
    // and a window enlargement only appends clusters.
    let rate = p.lambda_p * PI;
    let r2_max = w.radius * w.radius;
    let cluster_size = Poisson::new(p.m_bar).expect("validated mean");
    let mut t = 0.0;
    let mut offspring: Vec<[f64; 2]> = Vec::new();
    loop {
        let step: f64 = Exp1.sample(rng);
        t += step / rate;
        if t > r2_max {
            return;
        }
        let radius = t.sqrt();
        let angle = TAU * rng.gen::<f64>();
        let parent = [radius * angle.cos(), radius * angle.sin()];
        let n = cluster_size.sample(rng) as usize;
        offspring.clear();
        for _ in 0..n {
            offspring.push(gauss_around(parent, p.sigma, rng));
        }
        visit(&parent, &offspring);
    }
}

/// Draw one realization of the process inside the window.
pub fn sample_tcp<R: Rng>(p: &TcpParams, w: &SimWindow, rng: &mut R) -> PointPattern {
    let mut pattern = PointPattern::default();
    visit_clusters(p, w, rng, |parent, offspring| {
        pattern.clusters.push(Cluster {
            parent: *parent,
            offspring: offspring.to_vec(),
        });
    });
    pattern
}

fn zero_truncated_poisson<R: Rng>(mean: f64, rng: &mut R) -> u64 {
    let pois = Poisson::new(mean).expect("validated mean");
    loop {
        let k = pois.sample(rng) as u64;
        if k >= 1 {
            return k;
        }
    }
}

/// Contact distance: minimum over all points of the distance to the
/// origin; empty realizations are redrawn and counted.
fn contact_sample_counting<R: Rng>(p: &TcpParams, w: &SimWindow, rng: &mut R) -> (f64, u64) {
    let mut redraws = 0;
    loop {
        let mut best = f64::INFINITY;
        visit_clusters(p, w, rng, |_, offspring| {
            for pt in offspring {
                best = best.min(norm_sq(*pt));
            }
        });
        if best.is_finite() {
            return (best.sqrt(), redraws);
        }
        redraws += 1;
    }
}

/// Distance from an external reference location (the origin) to the
/// nearest point of the process.
pub fn contact_distance_sample<R: Rng>(p: &TcpParams, w: &SimWindow, rng: &mut R) -> f64 {
    contact_sample_counting(p, w, rng).0
}

/// Stream all points of one Palm realization (siblings of the reference
/// point, then an independent copy of the process) as squared distances
/// to the origin. Returns the size of the reference point's own cluster
/// including the reference point itself.
fn palm_visit<R: Rng>(
    case: NnCase,
    p: &TcpParams,
    w: &SimWindow,
    rng: &mut R,
    mut on_point: impl FnMut(f64),
) -> u64 {
    // The reference point sits at the origin; its cluster center is a
    // Gaussian displacement away, so the center distance is Rayleigh.
    let center = gauss_around([0.0, 0.0], p.sigma, rng);
    let n0 = match case {
        // Number-weighted cluster size: 1 + Poisson(m).
        NnCase::Case1 => 1 + Poisson::new(p.m_bar).expect("validated mean").sample(rng) as u64,
        // Uniformly chosen non-empty cluster: zero-truncated Poisson(m).
        NnCase::Case2 => zero_truncated_poisson(p.m_bar, rng),
    };
    for _ in 0..n0 - 1 {
        on_point(norm_sq(gauss_around(center, p.sigma, rng)));
    }
    visit_clusters(p, w, rng, |_, offspring| {
        for pt in offspring {
            on_point(norm_sq(*pt));
        }
    });
    n0
}

/// One Palm-construction nearest-neighbor sample with its diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct PalmSample {
    /// Distance from the reference point to its nearest neighbor.
    pub distance: f64,
    /// Size of the reference point's own cluster, reference included.
    pub own_cluster_size: u64,
    /// Realizations discarded because no other point existed anywhere.
    pub redraws: u64,
}

pub fn palm_nn_sample<R: Rng>(case: NnCase, p: &TcpParams, w: &SimWindow, rng: &mut R) -> PalmSample {
    let mut redraws = 0;
    loop {
        let mut best = f64::INFINITY;
        let n0 = palm_visit(case, p, w, rng, |d2| best = best.min(d2));
        if best.is_finite() {
            return PalmSample {
                distance: best.sqrt(),
                own_cluster_size: n0,
                redraws,
            };
        }
        redraws += 1;
    }
}

/// Case-1 nearest-neighbor distance (reference point uniform over all
/// offspring), via the Palm construction.
pub fn nn_distance_sample_case1<R: Rng>(p: &TcpParams, w: &SimWindow, rng: &mut R) -> f64 {
    palm_nn_sample(NnCase::Case1, p, w, rng).distance
}

/// Case-2 nearest-neighbor distance (reference point inside a uniformly
/// chosen non-empty cluster), via the Palm construction.
pub fn nn_distance_sample_case2<R: Rng>(p: &TcpParams, w: &SimWindow, rng: &mut R) -> f64 {
    palm_nn_sample(NnCase::Case2, p, w, rng).distance
}

/// Number of Palm-realization points within distance `r` of the
/// reference point (the reference itself excluded), plus the reference
/// cluster size. Used by the Monte Carlo PGF estimator.
pub fn palm_count_in_ball<R: Rng>(
    case: NnCase,
    p: &TcpParams,
    w: &SimWindow,
    r: f64,
    rng: &mut R,
) -> u64 {
    let r2 = r * r;
    let mut count = 0;
    palm_visit(case, p, w, rng, |d2| {
        if d2 <= r2 {
            count += 1;
        }
    });
    count
}

/// One naive nearest-neighbor sample: a full pattern is generated, the
/// reference point is picked literally per the case definition among
/// clusters in the inner half-radius, and the distance to the nearest
/// other point of the whole pattern is returned.
#[derive(Clone, Copy, Debug)]
pub struct NaiveSample {
    pub distance: f64,
    pub own_cluster_size: u64,
    pub redraws: u64,
}

pub fn naive_nn_sample<R: Rng>(case: NnCase, p: &TcpParams, w: &SimWindow, rng: &mut R) -> NaiveSample {
    let inner_r2 = (w.radius / 2.0) * (w.radius / 2.0);
    let mut redraws = 0;
    loop {
        let pattern = sample_tcp(p, w, rng);
        let inner: Vec<usize> = pattern
            .clusters
            .iter()
            .enumerate()
            .filter(|(_, c)| norm_sq(c.parent) <= inner_r2 && !c.offspring.is_empty())
            .map(|(i, _)| i)
            .collect();
        if inner.is_empty() {
            redraws += 1;
            continue;
        }
        let (ci, oi) = match case {
            NnCase::Case1 => {
                // Uniform over all inner offspring: cluster pick rates end
                // up proportional to cluster size.
                let total: usize = inner.iter().map(|&i| pattern.clusters[i].offspring.len()).sum();
                let mut k = rng.gen_range(0..total);
                let mut choice = (inner[0], 0);
                for &i in &inner {
                    let len = pattern.clusters[i].offspring.len();
                    if k < len {
                        choice = (i, k);
                        break;
                    }
                    k -= len;
                }
                choice
            }
            NnCase::Case2 => {
                // Uniform over non-empty clusters, then uniform within.
                let i = inner[rng.gen_range(0..inner.len())];
                let j = rng.gen_range(0..pattern.clusters[i].offspring.len());
                (i, j)
            }
        };
        let reference = pattern.clusters[ci].offspring[oi];
        let mut best = f64::INFINITY;
        for (i, c) in pattern.clusters.iter().enumerate() {
            for (j, pt) in c.offspring.iter().enumerate() {
                if i == ci && j == oi {
                    continue;
                }
                best = best.min(dist_sq(reference, *pt));
            }
        }
        if best.is_finite() {
            return NaiveSample {
                distance: best.sqrt(),
                own_cluster_size: pattern.clusters[ci].offspring.len() as u64,
                redraws,
            };
        }
        redraws += 1;
    }
}

/// Naive-construction nearest-neighbor distance.
pub fn nn_distance_naive<R: Rng>(case: NnCase, p: &TcpParams, w: &SimWindow, rng: &mut R) -> f64 {
    naive_nn_sample(case, p, w, rng).distance
}

/// Tags for the per-sampler stream families that are not plain
/// `DistanceKind` samplers.
const NAIVE_TAG_BASE: u64 = 4; // 4 = naive case 1, 5 = naive case 2
const PGF_TAG_BASE: u64 = 6; // 6..=8 = pgf contact / case 1 / case 2

/// I.i.d. Monte Carlo distance samples plus their provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub distances: Vec<f64>,
    pub kind: DistanceKind,
    pub seed: u64,
    pub params: TcpParams,
    /// Total conditioning redraws across all samples (diagnostic).
    pub redraws: u64,
}

impl SampleSet {
    pub fn n(&self) -> usize {
        self.distances.len()
    }

    /// CSV layout: a header row naming the provenance fields, the
    /// provenance row, then one distance per line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "kind,seed,n,lambda_p,m_bar,sigma")?;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            self.kind.label(),
            self.seed,
            self.n(),
            self.params.lambda_p,
            self.params.m_bar,
            self.params.sigma
        )?;
        writeln!(out, "distance")?;
        for d in &self.distances {
            writeln!(out, "{d}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Format("unexpected end of file".into()))?
                .map_err(|e| Error::Format(e.to_string()))
        };
        let header = next()?;
        if header.trim() != "kind,seed,n,lambda_p,m_bar,sigma" {
            return Err(Error::Format(format!("unexpected header {header:?}")));
        }
        let meta = next()?;
        let fields: Vec<&str> = meta.trim().split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Format(format!("bad provenance row {meta:?}")));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::Format(format!("{s:?}: {e}")))
        };
        let kind = DistanceKind::parse(fields[0])?;
        let seed: u64 = fields[1]
            .parse()
            .map_err(|e| Error::Format(format!("seed: {e}")))?;
        let n: usize = fields[2]
            .parse()
            .map_err(|e| Error::Format(format!("n: {e}")))?;
        let params = TcpParams::new(parse_f(fields[3])?, parse_f(fields[4])?, parse_f(fields[5])?)?;
        let data_header = next()?;
        if data_header.trim() != "distance" {
            return Err(Error::Format(format!("unexpected data header {data_header:?}")));
        }
        let mut distances = Vec::with_capacity(n);
        for line in lines {
            let line = line.map_err(|e| Error::Format(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            distances.push(parse_f(line.trim())?);
        }
        if distances.len() != n {
            return Err(Error::Format(format!(
                "expected {n} distances, found {}",
                distances.len()
            )));
        }
        Ok(SampleSet {
            distances,
            kind,
            seed,
            params,
            redraws: 0,
        })
    }
}

/// Draw `n` i.i.d. distance samples. Samples are independent across
/// indices and are generated in parallel; the result depends only on
/// `(kind, params, window, n, seed)`.
pub fn sample_distances(
    kind: DistanceKind,
    p: &TcpParams,
    w: &SimWindow,
    n: usize,
    seed: u64,
) -> SampleSet {
    let tag = kind.stream_tag();
    let results: Vec<(f64, u64)> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, tag, i);
            match kind {
                DistanceKind::Contact => contact_sample_counting(p, w, &mut rng),
                DistanceKind::NnCase1 => {
                    let s = palm_nn_sample(NnCase::Case1, p, w, &mut rng);
                    (s.distance, s.redraws)
                }
                DistanceKind::NnCase2 => {
                    let s = palm_nn_sample(NnCase::Case2, p, w, &mut rng);
                    (s.distance, s.redraws)
                }
            }
        })
        .collect();
    SampleSet {
        distances: results.iter().map(|r| r.0).collect(),
        kind,
        seed,
        params: *p,
        redraws: results.iter().map(|r| r.1).sum(),
    }
}

/// Naive-construction samples together with the chosen cluster sizes.
pub fn sample_naive(
    case: NnCase,
    p: &TcpParams,
    w: &SimWindow,
    n: usize,
    seed: u64,
) -> Vec<NaiveSample> {
    let tag = NAIVE_TAG_BASE
        + match case {
            NnCase::Case1 => 0,
            NnCase::Case2 => 1,
        };
    (0..n as u64)
        .into_par_iter()
        .map(|i| naive_nn_sample(case, p, w, &mut stream_rng(seed, tag, i)))
        .collect()
}

/// Reference-cluster sizes produced by the Palm sampler (for PMF
/// goodness-of-fit checks).
pub fn sample_palm_cluster_sizes(
    case: NnCase,
    p: &TcpParams,
    w: &SimWindow,
    n: usize,
    seed: u64,
) -> Vec<u64> {
    let tag = case.kind().stream_tag();
    (0..n as u64)
        .into_par_iter()
        .map(|i| palm_nn_sample(case, p, w, &mut stream_rng(seed, tag, i)).own_cluster_size)
        .collect()
}

/// Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

/// Estimate `E[theta^N]` where `N` counts points within distance `r` of
/// the reference point: plain process points for `Contact`, all other
/// points for the two Palm constructions.
pub fn mc_pgf_estimate(
    kind: DistanceKind,
    p: &TcpParams,
    w: &SimWindow,
    r: f64,
    theta: f64,
    n: usize,
    seed: u64,
) -> McEstimate {
    assert!((0.0..=1.0).contains(&theta), "theta in [0,1]");
    let tag = PGF_TAG_BASE + kind.stream_tag() - 1;
    let values: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, tag, i);
            let count = match kind {
                DistanceKind::Contact => {
                    let r2 = r * r;
                    let mut count = 0u64;
                    visit_clusters(p, w, &mut rng, |_, offspring| {
                        for pt in offspring {
                            if norm_sq(*pt) <= r2 {
                                count += 1;
                            }
                        }
                    });
                    count
                }
                DistanceKind::NnCase1 => palm_count_in_ball(NnCase::Case1, p, w, r, &mut rng),
                DistanceKind::NnCase2 => palm_count_in_ball(NnCase::Case2, p, w, r, &mut rng),
            };
            theta.powi(count as i32)
        })
        .collect();
    let n_f = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n_f;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n_f - 1.0);
    McEstimate {
        mean,
        std_err: (var / n_f).sqrt(),
        n: values.len(),
    }
}
