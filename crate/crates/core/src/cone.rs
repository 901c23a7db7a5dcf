//! Cones over bounded metric spaces.
//!
//! `Cone(X)` is `X × [0, ∞)` with `X × {0}` collapsed to an apex. Two metrics
//! are provided: the additive cone metric
//!
//! ```text
//! d_c(t1 x1, t2 x2) = |t1 - t2| + min(t1, t2) d(x1, x2)
//! ```
//!
//! and the classical law-of-cosines metric. When `X` sits in `R^m` with
//! `0 ∈ X` and `diam X <= 2`, the lift `t x ↦ (t x, 1 - t)` into `R^{m+1}`
//! induces a third metric that is bi-Lipschitz to `d_c` with constants 10
//! and 12; [`check_cone_comparison`] measures this on samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{euclidean, norm};

/// Largest underlying distance accepted by the cone constructions.
pub const DIAMETER_BOUND: f64 = 2.0;

/// Parameters at or below this are treated as the apex.
pub const APEX_EPS: f64 = 1e-15;

/// Upper comparison constant `ρ <= 10 d_c`.
pub const UPPER_COMPARISON: f64 = 10.0;

/// Lower comparison constant `d_c <= 12 ρ`.
pub const LOWER_COMPARISON: f64 = 12.0;

/// The point `t x` of a cone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConePoint<X> {
    pub t: f64,
    pub x: X,
}

impl<X> ConePoint<X> {
    pub fn new(t: f64, x: X) -> Result<Self> {
        check_parameter(t)?;
        Ok(ConePoint { t, x })
    }

    pub fn is_apex(&self) -> bool {
        self.t <= APEX_EPS
    }
}

fn check_parameter(t: f64) -> Result<()> {
    if t < 0.0 || t.is_nan() {
        Err(Error::NegativeParameter(t))
    } else {
        Ok(())
    }
}

/// `|t1 - t2| + min(t1, t2) d(x1, x2)`.
pub fn cone_distance<X, D>(p: &ConePoint<X>, q: &ConePoint<X>, dist: D) -> Result<f64>
where
    D: Fn(&X, &X) -> f64,
{
    check_parameter(p.t)?;
    check_parameter(q.t)?;
    if p.is_apex() && q.is_apex() {
        return Ok(0.0);
    }
    let m = p.t.min(q.t);
    let spread = if m <= APEX_EPS { 0.0 } else { m * dist(&p.x, &q.x) };
    Ok((p.t - q.t).abs() + spread)
}

/// `sqrt(t1^2 + t2^2 - 2 t1 t2 cos d(x1, x2))`.
pub fn cone_distance_classic<X, D>(p: &ConePoint<X>, q: &ConePoint<X>, dist: D) -> Result<f64>
where
    D: Fn(&X, &X) -> f64,
{
    check_parameter(p.t)?;
    check_parameter(q.t)?;
    let d = dist(&p.x, &q.x);
    if d > DIAMETER_BOUND + 1e-9 {
        return Err(Error::DiameterViolation(d));
    }
    let sq = p.t * p.t + q.t * q.t - 2.0 * p.t * q.t * d.cos();
    Ok(sq.max(0.0).sqrt())
}

/// Lifts `t x` to `t·x + (1 - t)·e0` in `R^{m+1}`; `e0` is the last
/// coordinate.
pub fn euclidean_cone_lift(t: f64, embedded_x: &[f64]) -> Result<Vec<f64>> {
    check_parameter(t)?;
    let mut out = Vec::with_capacity(embedded_x.len() + 1);
    if t <= APEX_EPS {
        out.resize(embedded_x.len(), 0.0);
        out.push(1.0);
    } else {
        out.extend(embedded_x.iter().map(|v| t * v));
        out.push(1.0 - t);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeComparisonReport {
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub pairs_tested: usize,
    pub bound_10_ok: bool,
    pub bound_12_ok: bool,
    pub seed: u64,
}

impl ConeComparisonReport {
    pub fn passed(&self) -> bool {
        self.bound_10_ok && self.bound_12_ok
    }
}

/// Samples cone-point pairs over `space` and compares the lift metric `ρ`
/// against `d_c`.
///
/// `origin` designates the sample point that is moved to 0 before lifting.
/// Records `ρ / d_c` for every pair with `d_c > 1e-12`.
pub fn check_cone_comparison(
    space: &[Vec<f64>],
    origin: usize,
    pair_count: usize,
    seed: u64,
) -> Result<ConeComparisonReport> {
    if space.is_empty() {
        return Err(Error::EmptyInput);
    }
    if origin >= space.len() {
        return Err(Error::BadRange(format!(
            "origin index {origin} outside a sample of {} points",
            space.len()
        )));
    }
    let dim = space[0].len();
    if let Some(bad) = space.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    let o = &space[origin];
    let centered: Vec<Vec<f64>> = space
        .iter()
        .map(|p| p.iter().zip(o).map(|(a, b)| a - b).collect())
        .collect();
    for (i, p) in centered.iter().enumerate() {
        for q in &centered[i + 1..] {
            let d = euclidean(p, q);
            if d > DIAMETER_BOUND + 1e-9 {
                return Err(Error::DiameterViolation(d));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConeComparisonReport {
        max_ratio: f64::NEG_INFINITY,
        min_ratio: f64::INFINITY,
        pairs_tested: 0,
        bound_10_ok: true,
        bound_12_ok: true,
        seed,
    };
    let draw_t = |rng: &mut ChaCha8Rng| -> f64 {
        match rng.random_range(0..8) {
            0 => 0.0,
            1 => rng.random::<f64>(),
            _ => 10f64.powf(rng.random_range(-3.0..2.0)),
        }
    };
    let dist = |a: &usize, b: &usize| euclidean(&centered[*a], &centered[*b]);
    for k in 0..pair_count {
        let i = rng.random_range(0..centered.len());
        // Every fourth pair shares its base point, every fifth its parameter.
        let j = if k % 4 == 0 {
            i
        } else {
            rng.random_range(0..centered.len())
        };
        let t1 = draw_t(&mut rng);
        let t2 = if k % 5 == 0 { t1 } else { draw_t(&mut rng) };
        let p = ConePoint { t: t1, x: i };
        let q = ConePoint { t: t2, x: j };
        let dc = cone_distance(&p, &q, dist)?;
        if dc <= 1e-12 {
            continue;
        }
        let rho = euclidean(
            &euclidean_cone_lift(t1, &centered[i])?,
            &euclidean_cone_lift(t2, &centered[j])?,
        );
        let ratio = rho / dc;
        report.pairs_tested += 1;
        report.max_ratio = report.max_ratio.max(ratio);
        report.min_ratio = report.min_ratio.min(ratio);
        report.bound_10_ok &= rho <= UPPER_COMPARISON * dc;
        report.bound_12_ok &= dc <= LOWER_COMPARISON * rho;
    }
    if report.pairs_tested == 0 {
        return Err(Error::DegenerateSample);
    }
    Ok(report)
}

/// Deterministic sample of the closed unit disk containing the origin
/// (index 0), suitable as the underlying space of a cone check.
pub fn disk_sample(points: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![vec![0.0, 0.0]];
    while out.len() < points.max(1) {
        let p = vec![rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
        if norm(&p) <= 1.0 {
            out.push(p);
        }
    }
    out
}
