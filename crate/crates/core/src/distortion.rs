//! Empirical distortion bracketing for set maps.
//!
//! [`estimate_distortion`] samples pairs stratified by kind, cardinality and
//! scale, and records the extreme ratios `d_Y(f A, f B) / d_H(A, B)`.
//! [`adversarial_search`] then pushes both witnesses with annealed Gaussian
//! moves, keeping only moves that make the ratio worse.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{canonicalize, euclidean, hausdorff_distance, FinitePointSet};
use crate::pipeline::{circle_map, EmbeddingPipeline, PinnedSet, RdEmbedding};
use crate::retraction::{lipschitz_bound, retract_once};
use crate::sampler::{MetricSampler, SampleStream};
use crate::tomography::{component_distances, project_family, SeparationCertificate};

/// Pairs closer than this in the domain are skipped.
pub const MIN_DOMAIN_DISTANCE: f64 = 1e-12;

/// Number of independent sampling streams; fixed so that results do not
/// depend on the thread count.
pub const WORKER_STREAMS: u64 = 8;

/// Relative slack when comparing observed ratios with certified constants.
pub const CERTIFIED_SLACK: f64 = 1e-9;

const RESTART_AFTER: usize = 1000;
const ANNEAL: f64 = 0.995;

/// A map defined on sets of at most `capacity()` points of `R^domain_dim()`.
pub trait SetMap: Sync {
    fn id(&self) -> String;
    fn domain_dim(&self) -> usize;
    fn capacity(&self) -> usize;

    /// `d_Y(f(a), f(b))`.
    fn image_distance(&self, a: &FinitePointSet, b: &FinitePointSet) -> Result<f64>;

    /// `U` with `d_Y <= U d_H`, if known.
    fn certified_upper(&self) -> Option<f64>;

    /// `l` with `l d_H <= d_Y`, if known.
    fn certified_lower(&self) -> Option<f64> {
        None
    }

    /// Brings a raw sampled set into the domain, or rejects it.
    fn admit(&self, raw: FinitePointSet) -> Option<FinitePointSet> {
        (raw.cardinality() <= self.capacity()).then_some(raw)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityMap {
    pub dim: usize,
    pub capacity: usize,
}

impl SetMap for IdentityMap {
    fn id(&self) -> String {
        format!("identity-n{}-d{}", self.capacity, self.dim)
    }
    fn domain_dim(&self) -> usize {
        self.dim
    }
    fn capacity(&self) -> usize {
        self.capacity
    }
    fn image_distance(&self, a: &FinitePointSet, b: &FinitePointSet) -> Result<f64> {
        hausdorff_distance(a, b)
    }
    fn certified_upper(&self) -> Option<f64> {
        Some(1.0)
    }
    fn certified_lower(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// `A ↦ factor · A`.
#[derive(Debug, Clone, Copy)]
pub struct ScalingMap {
    pub dim: usize,
    pub capacity: usize,
    pub factor: f64,
}

impl SetMap for ScalingMap {
    fn id(&self) -> String {
        format!("scale-{}-n{}-d{}", self.factor, self.capacity, self.dim)
    }
    fn domain_dim(&self) -> usize {
        self.dim
    }
    fn capacity(&self) -> usize {
        self.capacity
    }
    fn image_distance(&self, a: &FinitePointSet, b: &FinitePointSet) -> Result<f64> {
        hausdorff_distance(&a.scale(self.factor)?, &b.scale(self.factor)?)
    }
    fn certified_upper(&self) -> Option<f64> {
        Some(self.factor.abs())
    }
    fn certified_lower(&self) -> Option<f64> {
        Some(self.factor.abs())
    }
}

/// The embedding `R^(n) -> R^{m(n)}` with the Euclidean metric on the target.
#[derive(Debug, Clone)]
pub struct EmbeddingMap {
    pub pipeline: EmbeddingPipeline,
}

impl SetMap for EmbeddingMap {
    fn id(&self) -> String {
        format!("embed-n{}", self.pipeline.n())
    }
    fn domain_dim(&self) -> usize {
        1
    }
    fn capacity(&self) -> usize {
        self.pipeline.n()
    }
    fn image_distance(&self, a: &FinitePointSet, b: &FinitePointSet) -> Result<f64> {
        Ok(euclidean(&self.pipeline.embed(a)?, &self.pipeline.embed(b)?))
    }
    fn certified_upper(&self) -> Option<f64> {
        Some(self.pipeline.certified_constants().upper)
    }
    fn certified_lower(&self) -> Option<f64> {
        self.pipeline.certified_constants().lower
    }
}

/// The embedding of `(R^d)^(n)` through projections to the line.
#[derive(Debug, Clone)]
pub struct RdEmbeddingMap {
    pub embedding: RdEmbedding,
    pub dim: usize,
}

impl SetMap for RdEmbeddingMap {
    fn id(&self) -> String {
        format!("embed-rd-n{}-d{}", self.embedding.pipeline().n(), self.dim)
    }
    fn domain_dim(&self) -> usize {
        self.dim
    }
    fn capacity(&self) -> usize {
        self.embedding.pipeline().n()
    }
    fn image_distance(&self, a: &FinitePointSet, b: &FinitePointSet) -> Result<f64> {
        Ok(euclidean(&self.embedding.embed(a)?, &self.embedding.embed(b)?))
    }
    fn certified_upper(&self) -> Option<f64> {
        Some(self.embedding.certified_constants().upper)
    }
    fn certified_lower(&self) -> Option<f64> {
        self.embedding.certified_constants().lower
    }
}

/// One retraction step `R^(n) -> R^(n-1)`.
#[derive(Debug, Clone, Copy)]
pub struct RetractionMap {
    pub n: usize,
}

impl SetMap for RetractionMap {
    fn id(&self) -> String {
        format!("retract-n{}", self.n)
    }
    fn domain_dim(&self) -> usize {
        1
    }
    fn capacity(&self) -> usize {
        self.n
    }
    fn image_distance(&self, a: &FinitePointSet, b: &FinitePointSet) -> Result<f64> {
        hausdorff_distance(&retract_once(a, self.n)?, &retract_once(b, self.n)?)
    }
    fn certified_upper(&self) -> Option<f64> {
        Some(lipschitz_bound(self.n))
    }
}

/// Projection tuple of a line family, measured by the largest component
/// distance.
#[derive(Debug, Clone)]
pub struct TomographyMap {
    pub certificate: SeparationCertificate,
}

impl SetMap for TomographyMap {
    fn id(&self) -> String {
        format!(
            "tomo-q{}-d{}",
            self.certificate.family.capacity(),
            self.certificate.family.dim()
        )
    }
    fn domain_dim(&self) -> usize {
        self.certificate.family.dim()
    }
    fn capacity(&self) -> usize {
        self.certificate.family.capacity()
    }
    fn image_distance(&self, a: &FinitePointSet, b: &FinitePointSet) -> Result<f64> {
        let family = &self.certificate.family;
        let d = component_distances(&project_family(a, family)?, &project_family(b, family)?)?;
        Ok(d.into_iter().fold(0.0, f64::max))
    }
    fn certified_upper(&self) -> Option<f64> {
        Some(1.0)
    }
    fn certified_lower(&self) -> Option<f64> {
        Some(1.0 / self.certificate.m)
    }
}

/// `E ↦ exp(2πi E)` on pinned sets of at most `n` points.
#[derive(Debug, Clone, Copy)]
pub struct CircleMap {
    pub n: usize,
}

impl SetMap for CircleMap {
    fn id(&self) -> String {
        format!("circle-n{}", self.n)
    }
    fn domain_dim(&self) -> usize {
        1
    }
    fn capacity(&self) -> usize {
        self.n
    }
    fn image_distance(&self, a: &FinitePointSet, b: &FinitePointSet) -> Result<f64> {
        let ca = circle_map(&PinnedSet::new(a.clone())?);
        let cb = circle_map(&PinnedSet::new(b.clone())?);
        hausdorff_distance(&ca, &cb)
    }
    fn certified_upper(&self) -> Option<f64> {
        Some(2.0 * std::f64::consts::PI)
    }
    fn certified_lower(&self) -> Option<f64> {
        Some(4.0)
    }
    /// Rescales the hull of the set onto `[0, 1]`; singletons are rejected.
    fn admit(&self, raw: FinitePointSet) -> Option<FinitePointSet> {
        if raw.cardinality() < 2 || raw.cardinality() > self.n || raw.dim() != 1 {
            return None;
        }
        let (lo, hi) = (raw.min_real(), raw.max_real());
        let w = hi - lo;
        let pinned = raw
            .map_points(1, |p| {
                // Endpoints are pinned exactly.
                let x = if p[0] == lo {
                    0.0
                } else if p[0] == hi {
                    1.0
                } else {
                    (p[0] - lo) / w
                };
                vec![x]
            })
            .ok()?;
        PinnedSet::new(pinned.clone()).ok().map(|_| pinned)
    }
}

/// An extremal pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub a: FinitePointSet,
    pub b: FinitePointSet,
    pub domain_distance: f64,
    pub image_distance: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub map_id: String,
    pub samples: usize,
    pub search_iterations: usize,
    pub lower_ratio: f64,
    pub upper_ratio: f64,
    pub witness_low: Witness,
    pub witness_high: Witness,
    pub certified_upper: Option<f64>,
    pub certified_lower: Option<f64>,
    /// Observed ratios lie inside the certified bracket.
    pub within_certified: bool,
    pub seed: u64,
}

impl DistortionReport {
    fn refresh(&mut self) {
        let up_ok = self
            .certified_upper
            .map_or(true, |u| self.upper_ratio <= u * (1.0 + CERTIFIED_SLACK));
        let low_ok = self
            .certified_lower
            .map_or(true, |l| self.lower_ratio >= l * (1.0 - CERTIFIED_SLACK));
        self.within_certified = up_ok && low_ok;
    }
}

/// One sampled pair, for CSV export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub domain_distance: f64,
    pub image_distance: f64,
}

/// Writes `domain_distance,image_distance` rows with a header line.
pub fn pairs_to_csv(pairs: &[PairRecord]) -> String {
    let mut out = String::from("domain_distance,image_distance\n");
    for p in pairs {
        out.push_str(&format!("{:e},{:e}\n", p.domain_distance, p.image_distance));
    }
    out
}

fn evaluate<M: SetMap + ?Sized>(map: &M, a: FinitePointSet, b: FinitePointSet) -> Option<Witness> {
    let dx = hausdorff_distance(&a, &b).ok()?;
    if dx <= MIN_DOMAIN_DISTANCE {
        return None;
    }
    let dy = map.image_distance(&a, &b).ok()?;
    if !dy.is_finite() {
        return None;
    }
    Some(Witness {
        a,
        b,
        domain_distance: dx,
        image_distance: dy,
        ratio: dy / dx,
    })
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Draws pair `index` of a worker stream. The kind cycles through
/// independent, near and translated pairs; cardinalities cycle through all
/// combinations; the scale is log-uniform in `[1e-2, 1e2]`.
fn draw_pair(stream: &mut SampleStream, index: usize) -> (FinitePointSet, FinitePointSet) {
    let cap = stream.capacity();
    let kind = index % 3;
    let slot = index / 3;
    let ka = 1 + slot % cap;
    let kb = 1 + (slot / cap) % cap;
    let scale = stream.log_scale(-2.0, 2.0);
    let a = stream.set_with_cardinality(ka).scale(scale).expect("finite");
    let dim = stream.dim();
    let b = match kind {
        0 => stream.set_with_cardinality(kb).scale(scale).expect("finite"),
        1 => {
            let eps = scale * stream.log_scale(-6.0, -1.0);
            let rng = stream.rng();
            let mut rows: Vec<Vec<f64>> = a
                .points()
                .map(|p| p.iter().map(|x| x + eps * gaussian(rng)).collect())
                .collect();
            if rows.len() < cap && rng.random::<bool>() {
                let src = rows[rng.random_range(0..rows.len())].clone();
                rows.push(src.iter().map(|x| x + eps * gaussian(rng)).collect());
            }
            canonicalize(&rows, dim).expect("finite")
        }
        _ => {
            let len = scale * stream.log_scale(-3.0, 0.0);
            let rng = stream.rng();
            let v: Vec<f64> = (0..dim).map(|_| len * gaussian(rng)).collect();
            a.translate(&v).expect("finite")
        }
    };
    (a, b)
}

#[derive(Debug, Clone)]
struct Extremes {
    low: Option<Witness>,
    high: Option<Witness>,
    count: usize,
}

impl Extremes {
    fn push(&mut self, w: Witness) {
        self.count += 1;
        if self.low.as_ref().map_or(true, |l| w.ratio < l.ratio) {
            self.low = Some(w.clone());
        }
        if self.high.as_ref().map_or(true, |h| w.ratio > h.ratio) {
            self.high = Some(w);
        }
    }

    fn merge(mut self, other: Extremes) -> Extremes {
        self.count += other.count;
        if let Some(l) = other.low {
            if self.low.as_ref().map_or(true, |s| l.ratio < s.ratio) {
                self.low = Some(l);
            }
        }
        if let Some(h) = other.high {
            if self.high.as_ref().map_or(true, |s| h.ratio > s.ratio) {
                self.high = Some(h);
            }
        }
        self
    }
}

/// Samples `count` pairs and brackets the distortion of `map`.
pub fn estimate_distortion<M: SetMap + ?Sized>(
    map: &M,
    sampler: &MetricSampler,
    count: usize,
) -> Result<DistortionReport> {
    estimate_distortion_with_pairs(map, sampler, count).map(|(r, _)| r)
}

/// As [`estimate_distortion`], also returning every evaluated pair in a
/// fixed order.
pub fn estimate_distortion_with_pairs<M: SetMap + ?Sized>(
    map: &M,
    sampler: &MetricSampler,
    count: usize,
) -> Result<(DistortionReport, Vec<PairRecord>)> {
    if count < 2 {
        return Err(Error::BadRange(format!("need at least 2 samples, got {count}")));
    }
    if sampler.dim() != map.domain_dim() {
        return Err(Error::DimensionMismatch {
            expected: map.domain_dim(),
            found: sampler.dim(),
        });
    }
    let per_worker: Vec<(Extremes, Vec<PairRecord>)> = (0..WORKER_STREAMS)
        .into_par_iter()
        .map(|w| {
            let mut stream = sampler.worker_stream(w);
            let mut ext = Extremes {
                low: None,
                high: None,
                count: 0,
            };
            let mut records = Vec::new();
            let mine = (w as usize..count).step_by(WORKER_STREAMS as usize);
            for (local, _) in mine.enumerate() {
                let (a, b) = draw_pair(&mut stream, local);
                let (Some(a), Some(b)) = (map.admit(a), map.admit(b)) else {
                    continue;
                };
                if let Some(wit) = evaluate(map, a, b) {
                    records.push(PairRecord {
                        domain_distance: wit.domain_distance,
                        image_distance: wit.image_distance,
                    });
                    ext.push(wit);
                }
            }
            (ext, records)
        })
        .collect();
    let mut records = Vec::new();
    let mut total = Extremes {
        low: None,
        high: None,
        count: 0,
    };
    for (ext, rec) in per_worker {
        total = total.merge(ext);
        records.extend(rec);
    }
    let (Some(low), Some(high)) = (total.low, total.high) else {
        return Err(Error::DegenerateSample);
    };
    let mut report = DistortionReport {
        map_id: map.id(),
        samples: total.count,
        search_iterations: 0,
        lower_ratio: low.ratio,
        upper_ratio: high.ratio,
        witness_low: low,
        witness_high: high,
        certified_upper: map.certified_upper(),
        certified_lower: map.certified_lower(),
        within_certified: false,
        seed: sampler.seed,
    };
    report.refresh();
    Ok((report, records))
}

fn mutate_set(set: &FinitePointSet, cap: usize, sigma: f64, rng: &mut ChaCha8Rng) -> Option<FinitePointSet> {
    let mut rows: Vec<Vec<f64>> = set.points().map(<[f64]>::to_vec).collect();
    match rng.random_range(0..10) {
        0 if rows.len() < cap => {
            let src = rows[rng.random_range(0..rows.len())].clone();
            rows.push(src.iter().map(|x| x + sigma * gaussian(rng)).collect());
        }
        1 if rows.len() > 1 => {
            rows.remove(rng.random_range(0..rows.len()));
        }
        2..=5 => {
            for row in &mut rows {
                row.iter_mut().for_each(|x| *x += sigma * gaussian(rng));
            }
        }
        _ => {
            let i = rng.random_range(0..rows.len());
            rows[i].iter_mut().for_each(|x| *x += sigma * gaussian(rng));
        }
    }
    canonicalize(&rows, set.dim()).ok()
}

/// Anneals from `start` towards a pair with a smaller (`lower = true`) or
/// larger ratio.
fn search_one<M: SetMap + ?Sized>(
    map: &M,
    start: &Witness,
    lower: bool,
    iterations: usize,
    step: f64,
    rng: &mut ChaCha8Rng,
) -> Witness {
    let mut best = start.clone();
    let mut sigma_rel = step;
    let mut rejections = 0;
    for _ in 0..iterations {
        let sigma = sigma_rel * best.domain_distance.max(1e-9);
        let move_a = rng.random::<bool>();
        let (a, b) = if move_a {
            (mutate_set(&best.a, map.capacity(), sigma, rng), Some(best.b.clone()))
        } else {
            (Some(best.a.clone()), mutate_set(&best.b, map.capacity(), sigma, rng))
        };
        let candidate = a
            .and_then(|a| map.admit(a))
            .zip(b.and_then(|b| map.admit(b)))
            .and_then(|(a, b)| evaluate(map, a, b));
        match candidate {
            Some(c) if (lower && c.ratio < best.ratio) || (!lower && c.ratio > best.ratio) => {
                best = c;
                sigma_rel *= ANNEAL;
                rejections = 0;
            }
            _ => {
                rejections += 1;
                if rejections >= RESTART_AFTER {
                    sigma_rel = step;
                    rejections = 0;
                }
            }
        }
    }
    best
}

/// Runs `iterations` annealing moves on each witness of `start`.
///
/// `step` is the initial perturbation size relative to the witness's domain
/// distance. The low witness only moves to lower ratios and the high witness
/// to higher ones, so the bracket never shrinks.
pub fn adversarial_search<M: SetMap + ?Sized>(
    map: &M,
    start: &DistortionReport,
    iterations: usize,
    step: f64,
    seed: u64,
) -> DistortionReport {
    let mut report = start.clone();
    if iterations == 0 {
        return report;
    }
    let mut rng_low = ChaCha8Rng::seed_from_u64(seed);
    rng_low.set_stream(1);
    let mut rng_high = ChaCha8Rng::seed_from_u64(seed);
    rng_high.set_stream(2);
    let low = search_one(map, &start.witness_low, true, iterations, step, &mut rng_low);
    let high = search_one(map, &start.witness_high, false, iterations, step, &mut rng_high);
    report.lower_ratio = low.ratio;
    report.upper_ratio = high.ratio;
    report.witness_low = low;
    report.witness_high = high;
    report.search_iterations += iterations;
    report.refresh();
    report
}

/// Certified `(lower, upper)` of a pipeline; `lower` is `None` when a stage
/// lacks a certified lower constant.
pub fn certified_bounds(pipeline: &EmbeddingPipeline) -> (Option<f64>, f64) {
    let c = pipeline.certified_constants();
    (if c.certified { c.lower } else { None }, c.upper)
}
