//! Projection of point sets onto hyperplanes orthogonal to a family of lines.
//!
//! For `q + 1` pairwise distinct lines `L_j` through the origin of `R^d`, let
//! `g_j` be the orthogonal projection onto `L_j^⊥ ≅ R^{d-1}`. Each induced
//! map on point sets is 1-Lipschitz for the Hausdorff metric, and for sets
//! of cardinality at most `q`
//!
//! ```text
//! max_j d_H(g_j A, g_j B) >= d_H(A, B) / M
//! ```
//!
//! where `M` bounds the norm of points lying within distance `r` of two
//! different lines by `M r`. [`separation_constant`] certifies such an `M`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{hausdorff_distance, norm, FinitePointSet};
use crate::sampler::MetricSampler;

/// Tolerance on `|u| = 1` for projection directions.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Two directions with `1 - |<u, v>| <= PARALLEL_TOLERANCE` are parallel.
pub const PARALLEL_TOLERANCE: f64 = 1e-12;

/// Relative margin added on top of the oracle value.
pub const CERTIFICATE_MARGIN: f64 = 0.01;

/// Oracle resolution in the plane: directions per half-turn.
pub const PLANAR_GRID: usize = 4096;

/// Oracle resolution in higher dimensions: quasi-random unit vectors.
pub const SPATIAL_GRID: usize = 100_000;

/// `q + 1` pairwise non-parallel lines through the origin of `R^d`,
/// separating sets of cardinality at most `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LineFamilyDoc", into = "LineFamilyDoc")]
pub struct LineFamily {
    dim: usize,
    capacity: usize,
    directions: Vec<Vec<f64>>,
    // Orthonormal bases of the complements, one per direction.
    bases: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LineFamilyDoc {
    dim: usize,
    capacity: usize,
    directions: Vec<Vec<f64>>,
}

impl TryFrom<LineFamilyDoc> for LineFamily {
    type Error = Error;
    fn try_from(doc: LineFamilyDoc) -> Result<Self> {
        let family = LineFamily::new(doc.directions, doc.capacity)?;
        family.check_dim(doc.dim)?;
        Ok(family)
    }
}

impl From<LineFamily> for LineFamilyDoc {
    fn from(f: LineFamily) -> Self {
        LineFamilyDoc {
            dim: f.dim,
            capacity: f.capacity,
            directions: f.directions,
        }
    }
}

impl LineFamily {
    /// Validates and wraps a list of unit directions.
    pub fn new(directions: Vec<Vec<f64>>, capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::BadRange("line family capacity must be at least 1".into()));
        }
        if directions.len() != capacity + 1 {
            return Err(Error::BadRange(format!(
                "capacity {capacity} needs {} lines, got {}",
                capacity + 1,
                directions.len()
            )));
        }
        let dim = directions[0].len();
        if dim < 2 {
            return Err(Error::BadRange("line families need dimension at least 2".into()));
        }
        for u in &directions {
            if u.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: u.len(),
                });
            }
            check_unit(u)?;
        }
        for i in 0..directions.len() {
            for j in i + 1..directions.len() {
                if 1.0 - dot(&directions[i], &directions[j]).abs() <= PARALLEL_TOLERANCE {
                    return Err(Error::DegenerateFamily(i, j));
                }
            }
        }
        let bases = directions.iter().map(|u| complement_basis(u)).collect();
        Ok(LineFamily {
            dim,
            capacity,
            directions,
            bases,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim,
            });
        }
        Ok(())
    }

    /// Smallest angle in `(0, π/2]` between two lines of the family.
    pub fn min_angle(&self) -> f64 {
        let mut best = PI / 2.0;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                best = best.min(line_angle(&self.directions[i], &self.directions[j]));
            }
        }
        best
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_unit(u: &[f64]) -> Result<()> {
    let n = norm(u);
    if (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NonUnitDirection(n));
    }
    Ok(())
}

/// Acute angle between the lines spanned by unit vectors `u` and `v`.
fn line_angle(u: &[f64], v: &[f64]) -> f64 {
    dot(u, v).abs().min(1.0).acos()
}

fn snap(mut v: Vec<f64>) -> Vec<f64> {
    for x in &mut v {
        if x.abs() < 1e-15 {
            *x = 0.0;
        }
    }
    let n = norm(&v);
    v.iter_mut().for_each(|x| *x /= n);
    v
}

/// Orthonormal basis of `u^⊥`. In the plane this is the quarter turn
/// `(-u_1, u_0)`; otherwise Gram-Schmidt over the standard basis with the
/// axis most aligned to `u` left out.
fn complement_basis(u: &[f64]) -> Vec<Vec<f64>> {
    let d = u.len();
    if d == 2 {
        return vec![vec![-u[1], u[0]]];
    }
    let skip = (0..d)
        .max_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()))
        .expect("d >= 2");
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    for i in (0..d).filter(|&i| i != skip) {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        for b in std::iter::once(u).chain(basis.iter().map(Vec::as_slice)) {
            let c = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let n = norm(&v);
        v.iter_mut().for_each(|x| *x /= n);
        basis.push(v);
    }
    basis
}

/// Deterministic family of `q + 1` lines in `R^d`.
///
/// In the plane the lines sit at angles `jπ/(q+1)`. In `R^3` the directions
/// are a Fibonacci lattice on the upper hemisphere; in higher dimensions a
/// Kronecker sequence normalised onto the sphere, skipping candidates that
/// come within `acos(0.95)` of an accepted line.
pub fn make_line_family(q: usize, d: usize) -> Result<LineFamily> {
    if q < 1 || d < 2 {
        return Err(Error::BadRange(format!(
            "line family needs q >= 1 and d >= 2, got q = {q}, d = {d}"
        )));
    }
    let count = q + 1;
    let directions: Vec<Vec<f64>> = match d {
        2 => (0..count)
            .map(|j| {
                let theta = j as f64 * PI / count as f64;
                snap(vec![theta.cos(), theta.sin()])
            })
            .collect(),
        3 => fibonacci_hemisphere(count),
        _ => kronecker_directions(count, d),
    };
    LineFamily::new(directions, q)
}

fn fibonacci_hemisphere(count: usize) -> Vec<Vec<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            snap(vec![r * phi.cos(), r * phi.sin(), z])
        })
        .collect()
}

fn kronecker_directions(count: usize, d: usize) -> Vec<Vec<f64>> {
    // Generalised golden ratio: the positive root of x^(d+1) = x + 1.
    let mut phi = 2.0_f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=d).map(|i| phi.powi(-(i as i32))).collect();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut k = 1usize;
    while out.len() < count {
        let mut v: Vec<f64> = alpha
            .iter()
            .map(|a| 2.0 * (0.5 + a * k as f64).fract() - 1.0)
            .collect();
        k += 1;
        if norm(&v) < 0.25 {
            continue;
        }
        if v[d - 1] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let v = snap(v);
        if out.iter().all(|w| dot(w, &v).abs() < 0.95) {
            out.push(v);
        }
    }
    out
}

/// Orthogonal projection of `a` onto the complement of the line through
/// `direction`, in coordinates of a fixed orthonormal basis of that
/// complement.
pub fn project_set(a: &FinitePointSet, direction: &[f64]) -> Result<FinitePointSet> {
    a.check_dim(direction.len())?;
    if direction.len() < 2 {
        return Err(Error::BadRange("projection needs dimension at least 2".into()));
    }
    check_unit(direction)?;
    project_with_basis(a, &complement_basis(direction))
}

fn project_with_basis(a: &FinitePointSet, basis: &[Vec<f64>]) -> Result<FinitePointSet> {
    a.map_points(basis.len(), |p| basis.iter().map(|b| dot(p, b)).collect())
}

/// `(g_1(A), ..., g_{q+1}(A))`.
pub fn project_family(a: &FinitePointSet, family: &LineFamily) -> Result<Vec<FinitePointSet>> {
    a.check_dim(family.dim)?;
    a.check_capacity(family.capacity)?;
    family
        .bases
        .iter()
        .map(|basis| project_with_basis(a, basis))
        .collect()
}

/// Per-line Hausdorff distances between two projection tuples.
pub fn component_distances(ga: &[FinitePointSet], gb: &[FinitePointSet]) -> Result<Vec<f64>> {
    if ga.len() != gb.len() {
        return Err(Error::DimensionMismatch {
            expected: ga.len(),
            found: gb.len(),
        });
    }
    ga.iter()
        .zip(gb)
        .map(|(a, b)| hausdorff_distance(a, b))
        .collect()
}

/// Euclidean product distance of two projection tuples.
pub fn tuple_distance(ga: &[FinitePointSet], gb: &[FinitePointSet]) -> Result<f64> {
    Ok(crate::metric::product_distance(&component_distances(ga, gb)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeparationMethod {
    Analytic,
    GridOracle,
}

/// A constant `M` such that any point within distance `r` of two distinct
/// lines of `family` has norm below `M r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CertificateDoc", into = "CertificateDoc")]
pub struct SeparationCertificate {
    pub family: LineFamily,
    pub m: f64,
    pub method: SeparationMethod,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CertificateDoc {
    dim: usize,
    capacity: usize,
    directions: Vec<Vec<f64>>,
    #[serde(rename = "M")]
    m: f64,
    method: SeparationMethod,
}

impl TryFrom<CertificateDoc> for SeparationCertificate {
    type Error = Error;
    fn try_from(doc: CertificateDoc) -> Result<Self> {
        let family = LineFamily::try_from(LineFamilyDoc {
            dim: doc.dim,
            capacity: doc.capacity,
            directions: doc.directions,
        })?;
        if !(doc.m.is_finite() && doc.m >= 1.0) {
            return Err(Error::BadRange(format!("invalid separation constant {}", doc.m)));
        }
        Ok(SeparationCertificate {
            family,
            m: doc.m,
            method: doc.method,
        })
    }
}

impl From<SeparationCertificate> for CertificateDoc {
    fn from(c: SeparationCertificate) -> Self {
        CertificateDoc {
            dim: c.family.dim,
            capacity: c.family.capacity,
            directions: c.family.directions,
            m: c.m,
            method: c.method,
        }
    }
}

/// Closed form `1 / sin(θ_min / 2)`: the farthest vertex of the rhombus cut
/// out by two unit strips at angle `θ`. Points off the plane of the two
/// lines only shrink the bound, so this holds in every dimension.
pub fn separation_closed_form(family: &LineFamily) -> f64 {
    1.0 / (family.min_angle() / 2.0).sin()
}

/// Norm of the farthest point along unit direction `w` that lies within
/// distance 1 of both lines.
fn reach(w: &[f64], u: &[f64], v: &[f64]) -> f64 {
    let inv_sin = |line: &[f64]| {
        let c = dot(w, line);
        let s2 = (1.0 - c * c).max(0.0);
        if s2 == 0.0 {
            f64::INFINITY
        } else {
            1.0 / s2.sqrt()
        }
    };
    inv_sin(u).min(inv_sin(v))
}

fn refine_planar(u: &[f64], v: &[f64], angle: f64, half_width: f64) -> f64 {
    let f = |phi: f64| reach(&[phi.cos(), phi.sin()], u, v);
    let (mut lo, mut hi) = (angle - half_width, angle + half_width);
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    f(0.5 * (lo + hi)).max(f(angle))
}

fn refine_spatial(u: &[f64], v: &[f64], start: &[f64], value: f64) -> f64 {
    let d = start.len();
    let mut best = start.to_vec();
    let mut best_val = value;
    let mut step = 0.05;
    while step > 1e-10 {
        let mut improved = false;
        for axis in 0..d {
            for sign in [1.0, -1.0] {
                let mut cand = best.clone();
                cand[axis] += sign * step;
                let n = norm(&cand);
                cand.iter_mut().for_each(|x| *x /= n);
                let val = reach(&cand, u, v);
                if val > best_val {
                    best_val = val;
                    best = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best_val
}

/// Searches the two great circles `w ⊥ u ∓ v` of the 2-sphere, where the two
/// terms of [`reach`] coincide and the sup sits.
fn ridge_search(u: &[f64], v: &[f64]) -> f64 {
    let mut best = 0.0_f64;
    for sign in [1.0, -1.0] {
        let mut nrm: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - sign * b).collect();
        let len = norm(&nrm);
        if len < 1e-12 {
            continue;
        }
        nrm.iter_mut().for_each(|x| *x /= len);
        let seed = if nrm[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let c = dot(&seed, &nrm);
        let mut a: Vec<f64> = seed.iter().zip(&nrm).map(|(s, n)| s - c * n).collect();
        let la = norm(&a);
        a.iter_mut().for_each(|x| *x /= la);
        let b = [
            nrm[1] * a[2] - nrm[2] * a[1],
            nrm[2] * a[0] - nrm[0] * a[2],
            nrm[0] * a[1] - nrm[1] * a[0],
        ];
        let f = |phi: f64| {
            let w: Vec<f64> = a.iter().zip(&b).map(|(x, y)| phi.cos() * x + phi.sin() * y).collect();
            reach(&w, u, v)
        };
        let step = PI / PLANAR_GRID as f64;
        let (angle, _) = (0..PLANAR_GRID)
            .map(|k| (k as f64 * step, f(k as f64 * step)))
            .fold((0.0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let (mut lo, mut hi) = (angle - step, angle + step);
        for _ in 0..100 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if f(m1) < f(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        best = best.max(f(0.5 * (lo + hi))).max(f(angle));
    }
    best
}

fn fibonacci_sphere(count: usize) -> impl Iterator<Item = [f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count).map(move |i| {
        let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
        let r = (1.0 - z * z).sqrt();
        let phi = golden * i as f64;
        [r * phi.cos(), r * phi.sin(), z]
    })
}

/// Grid-oracle estimate of the least admissible `M` (before margin), with
/// local refinement around the best grid direction of each pair.
pub fn separation_oracle(family: &LineFamily) -> Result<f64> {
    let dirs = &family.directions;
    let mut best = 1.0_f64;
    for i in 0..dirs.len() {
        for j in i + 1..dirs.len() {
            let (u, v) = (&dirs[i], &dirs[j]);
            let value = match family.dim {
                2 => {
                    let step = PI / PLANAR_GRID as f64;
                    let (angle, _) = (0..PLANAR_GRID)
                        .map(|k| {
                            let phi = k as f64 * step;
                            (phi, reach(&[phi.cos(), phi.sin()], u, v))
                        })
                        .fold((0.0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
                    refine_planar(u, v, angle, step)
                }
                3 => {
                    let (w, val) = fibonacci_sphere(SPATIAL_GRID)
                        .map(|w| (w, reach(&w, u, v)))
                        .fold(([0.0, 0.0, 1.0], 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
                    refine_spatial(u, v, &w, val).max(ridge_search(u, v))
                }
                _ => {
                    // Beyond R^3 the sup is attained in span(u, v); search the
                    // great circle through both directions.
                    let c = dot(u, v);
                    let mut e: Vec<f64> = v.iter().zip(u.iter()).map(|(a, b)| a - c * b).collect();
                    let n = norm(&e);
                    e.iter_mut().for_each(|x| *x /= n);
                    let point = |phi: f64| -> Vec<f64> {
                        u.iter().zip(&e).map(|(a, b)| phi.cos() * a + phi.sin() * b).collect()
                    };
                    let step = PI / PLANAR_GRID as f64;
                    let (angle, val) = (0..PLANAR_GRID)
                        .map(|k| (k as f64 * step, reach(&point(k as f64 * step), u, v)))
                        .fold((0.0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
                    refine_spatial(u, v, &point(angle), val)
                }
            };
            if !value.is_finite() {
                return Err(Error::DegenerateFamily(i, j));
            }
            best = best.max(value);
        }
    }
    Ok(best)
}

/// Certifies a separation constant: refined grid oracle inflated by
/// [`CERTIFICATE_MARGIN`], cross-checked against the closed form.
pub fn separation_constant(family: &LineFamily) -> Result<SeparationCertificate> {
    let oracle = separation_oracle(family)?;
    let analytic = separation_closed_form(family);
    if ((oracle - analytic) / analytic).abs() > CERTIFICATE_MARGIN {
        return Err(Error::CertificateMismatch { oracle, analytic });
    }
    Ok(SeparationCertificate {
        family: family.clone(),
        m: oracle.max(analytic) * (1.0 + CERTIFICATE_MARGIN),
        method: SeparationMethod::GridOracle,
    })
}

/// Certificate from the closed form alone, without margin.
pub fn separation_constant_analytic(family: &LineFamily) -> SeparationCertificate {
    SeparationCertificate {
        family: family.clone(),
        m: separation_closed_form(family),
        method: SeparationMethod::Analytic,
    }
}

/// Outcome of checking one pair of sets against a certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCheck {
    pub distance: f64,
    /// `max_j d_H(g_j A, g_j B) / d_H(A, B)`.
    pub max_component_ratio: f64,
    pub lower_ok: bool,
    pub lipschitz_ok: bool,
}

/// Checks the lower bound and the per-line 1-Lipschitz bound on one pair.
/// Returns `None` for coincident sets.
pub fn check_pair(
    cert: &SeparationCertificate,
    a: &FinitePointSet,
    b: &FinitePointSet,
) -> Result<Option<PairCheck>> {
    let distance = hausdorff_distance(a, b)?;
    if distance <= 1e-12 {
        return Ok(None);
    }
    let comps = component_distances(
        &project_family(a, &cert.family)?,
        &project_family(b, &cert.family)?,
    )?;
    let max_comp = comps.iter().copied().fold(0.0, f64::max);
    let slack = 1e-9 * distance + 1e-12;
    Ok(Some(PairCheck {
        distance,
        max_component_ratio: max_comp / distance,
        lower_ok: max_comp * cert.m >= distance - slack,
        lipschitz_ok: comps.iter().all(|&c| c <= distance + slack),
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub dim: usize,
    pub capacity: usize,
    #[serde(rename = "M")]
    pub m: f64,
    pub pairs_tested: usize,
    pub pairs_skipped: usize,
    /// Smallest `max_j d_H(g_j A, g_j B) / d_H(A, B)` seen.
    pub worst_ratio: f64,
    /// Largest single-component ratio seen (at most 1).
    pub max_component_ratio: f64,
    pub lower_violations: usize,
    pub lipschitz_violations: usize,
    pub witness: Option<(FinitePointSet, FinitePointSet)>,
    pub seed: u64,
}

impl SeparationReport {
    pub fn passed(&self) -> bool {
        self.lower_violations == 0 && self.lipschitz_violations == 0
    }
}

/// Samples pairs of sets of cardinality at most `q` and checks both bounds.
///
/// Pairs rotate through independent draws, translates `B = A + v`, small
/// perturbations and single-point moves, at scales from `1e-2` to `1e2`.
pub fn verify_separation(
    cert: &SeparationCertificate,
    pair_count: usize,
    seed: u64,
) -> Result<SeparationReport> {
    let family = &cert.family;
    let sampler = MetricSampler::cube(seed, family.dim, 1.0, family.capacity)?;
    let mut stream = sampler.stream();
    let mut report = SeparationReport {
        dim: family.dim,
        capacity: family.capacity,
        m: cert.m,
        pairs_tested: 0,
        pairs_skipped: 0,
        worst_ratio: f64::INFINITY,
        max_component_ratio: 0.0,
        lower_violations: 0,
        lipschitz_violations: 0,
        witness: None,
        seed,
    };
    for k in 0..pair_count {
        let scale = stream.log_scale(-2.0, 2.0);
        let a = stream.set().scale(scale)?;
        let b = match k % 4 {
            0 => stream.set().scale(scale)?,
            1 => {
                let v: Vec<f64> = stream.point().iter().map(|x| x * scale).collect();
                a.translate(&v)?
            }
            2 => {
                let eps = scale * stream.log_scale(-4.0, 0.0);
                let rows: Vec<Vec<f64>> = a
                    .points()
                    .map(|p| {
                        p.iter()
                            .map(|x| x + eps * (2.0 * stream.rng().random::<f64>() - 1.0))
                            .collect()
                    })
                    .collect();
                crate::metric::canonicalize(&rows, family.dim)?
            }
            _ => {
                let moved = stream.rng().random_range(0..a.cardinality());
                let rows: Vec<Vec<f64>> = a
                    .points()
                    .enumerate()
                    .map(|(i, p)| {
                        if i == moved {
                            stream.point().iter().map(|x| x * scale).collect()
                        } else {
                            p.to_vec()
                        }
                    })
                    .collect();
                crate::metric::canonicalize(&rows, family.dim)?
            }
        };
        match check_pair(cert, &a, &b)? {
            None => report.pairs_skipped += 1,
            Some(check) => {
                report.pairs_tested += 1;
                if check.max_component_ratio < report.worst_ratio {
                    report.worst_ratio = check.max_component_ratio;
                    report.witness = Some((a.clone(), b.clone()));
                }
                let comps = component_distances(
                    &project_family(&a, family)?,
                    &project_family(&b, family)?,
                )?;
                let top = comps.iter().copied().fold(0.0, f64::max) / check.distance;
                report.max_component_ratio = report.max_component_ratio.max(top);
                report.lower_violations += usize::from(!check.lower_ok);
                report.lipschitz_violations += usize::from(!check.lipschitz_ok);
            }
        }
    }
    Ok(report)
}
