//! Lipschitz decomposition and sphere-to-ball extension of set-valued maps.
//!
//! A [`SampledMap`] is a finite table `x_i ↦ f(x_i)` of point sets with a
//! declared Lipschitz constant `L`, validated on every pair of samples.
//!
//! * [`decompose_map`]: if some image `f(x_0)` has diameter above
//!   `3 L D (n - 1)` (`D` the domain diameter), `f` splits as `g ∪ h` with
//!   both halves `L`-Lipschitz and of cardinality at most `n - 1`.
//! * [`radial_extension`]: for a map on the unit sphere whose anchor image is
//!   small, `f̃(r x) = v + r (f(x) - v)` with `v ∈ f(x_0)`.
//! * [`ball_extension`]: recursion on `n`, decomposing large images,
//!   extending both halves, taking unions and retracting from capacity
//!   `2n - 2` back to `n`.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{euclidean, hausdorff_distance, norm, FinitePointSet};
use crate::retraction::retract_to;

/// Relative slack used when validating Lipschitz bounds on samples.
pub const LIPSCHITZ_SLACK: f64 = 1e-9;

/// A finite sample of a set-valued map with a declared Lipschitz constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampledMapDoc", into = "SampledMapDoc")]
pub struct SampledMap {
    domain: Vec<Vec<f64>>,
    images: Vec<FinitePointSet>,
    lipschitz: f64,
    diameter: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledMapDoc {
    pub domain: Vec<Vec<f64>>,
    pub images: Vec<FinitePointSet>,
    #[serde(rename = "L")]
    pub lipschitz: f64,
    #[serde(rename = "D")]
    pub diameter: f64,
}

impl TryFrom<SampledMapDoc> for SampledMap {
    type Error = Error;
    fn try_from(doc: SampledMapDoc) -> Result<Self> {
        let map = SampledMap::new(doc.domain, doc.images, doc.lipschitz)?;
        let tol = LIPSCHITZ_SLACK * map.diameter.max(1.0);
        if (map.diameter - doc.diameter).abs() > tol {
            return Err(Error::PreconditionViolated(format!(
                "declared domain diameter {} differs from the sampled diameter {}",
                doc.diameter, map.diameter
            )));
        }
        Ok(map)
    }
}

impl From<SampledMap> for SampledMapDoc {
    fn from(m: SampledMap) -> Self {
        SampledMapDoc {
            domain: m.domain,
            images: m.images,
            lipschitz: m.lipschitz,
            diameter: m.diameter,
        }
    }
}

fn pairwise_diameter(points: &[Vec<f64>]) -> f64 {
    let mut d = 0.0_f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            d = d.max(euclidean(p, q));
        }
    }
    d
}

fn within_bound(image_distance: f64, bound: f64) -> bool {
    image_distance <= bound * (1.0 + LIPSCHITZ_SLACK) + 1e-12
}

impl SampledMap {
    /// Validates shapes and the Lipschitz bound on every pair of samples.
    pub fn new(domain: Vec<Vec<f64>>, images: Vec<FinitePointSet>, lipschitz: f64) -> Result<Self> {
        let map = Self::new_unchecked(domain, images, lipschitz)?;
        for i in 0..map.len() {
            for j in i + 1..map.len() {
                let dx = euclidean(&map.domain[i], &map.domain[j]);
                let dy = hausdorff_distance(&map.images[i], &map.images[j])?;
                if !within_bound(dy, lipschitz * dx) {
                    return Err(Error::NotLipschitz {
                        bound: lipschitz,
                        ratio: dy / dx,
                        i,
                        j,
                    });
                }
            }
        }
        Ok(map)
    }

    /// Checks shapes only; the caller vouches for the Lipschitz constant.
    fn new_unchecked(domain: Vec<Vec<f64>>, images: Vec<FinitePointSet>, lipschitz: f64) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::EmptyInput);
        }
        if domain.len() != images.len() {
            return Err(Error::DimensionMismatch {
                expected: domain.len(),
                found: images.len(),
            });
        }
        let k = domain[0].len();
        if let Some(p) = domain.iter().find(|p| p.len() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: p.len(),
            });
        }
        let d = images[0].dim();
        for img in &images {
            img.check_dim(d)?;
        }
        if !(lipschitz.is_finite() && lipschitz >= 0.0) {
            return Err(Error::BadRange(format!("invalid Lipschitz constant {lipschitz}")));
        }
        let diameter = pairwise_diameter(&domain);
        Ok(SampledMap {
            domain,
            images,
            lipschitz,
            diameter,
        })
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn domain(&self) -> &[Vec<f64>] {
        &self.domain
    }

    pub fn images(&self) -> &[FinitePointSet] {
        &self.images
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn image_dim(&self) -> usize {
        self.images[0].dim()
    }

    pub fn max_cardinality(&self) -> usize {
        self.images.iter().map(FinitePointSet::cardinality).max().unwrap_or(0)
    }

    /// Largest observed `d_H(f(x_i), f(x_j)) / |x_i - x_j|` over all pairs.
    pub fn observed_lipschitz(&self) -> Result<f64> {
        let mut best = 0.0_f64;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let dx = euclidean(&self.domain[i], &self.domain[j]);
                if dx > 1e-12 {
                    best = best.max(hausdorff_distance(&self.images[i], &self.images[j])? / dx);
                }
            }
        }
        Ok(best)
    }
}

/// Output of [`decompose_map`].
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub g: SampledMap,
    pub h: SampledMap,
    /// The maximal cluster `E ⊂ f(x_0)` that seeds `g`.
    pub cluster: FinitePointSet,
    /// Lower bound on the distance between the two neighbourhoods,
    /// `dist(E, f(x_0) \ E) - 2 L D`.
    pub neighbourhood_gap: f64,
}

/// Grows a maximal `E ⊂ points` with `diam E < 3LD(|E| - 1)`, singletons
/// admitted, starting from the point nearest the origin.
fn maximal_cluster(points: &FinitePointSet, threshold_unit: f64) -> Vec<usize> {
    let start = (0..points.cardinality())
        .min_by(|&a, &b| norm(points.point(a)).total_cmp(&norm(points.point(b))))
        .expect("nonempty");
    let mut cluster = vec![start];
    loop {
        let next = (0..points.cardinality()).filter(|i| !cluster.contains(i)).find(|&i| {
            let grown = cluster.len() + 1;
            let diam = cluster
                .iter()
                .flat_map(|&a| cluster.iter().chain(std::iter::once(&i)).map(move |&b| (a, b)))
                .map(|(a, b)| euclidean(points.point(a), points.point(b)))
                .fold(0.0, f64::max);
            diam < threshold_unit * (grown - 1) as f64
        });
        match next {
            Some(i) => cluster.push(i),
            None => return cluster,
        }
    }
}

/// Splits `f` into two `L`-Lipschitz maps of cardinality at most `n - 1`
/// whose pointwise union is `f`.
pub fn decompose_map(f: &SampledMap, n: usize, x0_index: usize) -> Result<Decomposition> {
    if n < 2 {
        return Err(Error::BadRange(format!("decomposition needs n >= 2, got {n}")));
    }
    if x0_index >= f.len() {
        return Err(Error::BadRange(format!("anchor index {x0_index} out of range")));
    }
    if f.max_cardinality() > n {
        return Err(Error::CapacityExceeded {
            capacity: n,
            found: f.max_cardinality(),
        });
    }
    let ld = f.lipschitz * f.diameter;
    let anchor = &f.images[x0_index];
    let threshold = 3.0 * ld * (n - 1) as f64;
    if anchor.diameter() <= threshold {
        return Err(Error::PreconditionViolated(format!(
            "diam f(x0) = {} does not exceed 3LD(n-1) = {threshold}",
            anchor.diameter()
        )));
    }

    let cluster_idx = maximal_cluster(anchor, 3.0 * ld);
    let dim = anchor.dim();
    let cluster_rows: Vec<&[f64]> = cluster_idx.iter().map(|&i| anchor.point(i)).collect();
    let rest_rows: Vec<&[f64]> = (0..anchor.cardinality())
        .filter(|i| !cluster_idx.contains(i))
        .map(|i| anchor.point(i))
        .collect();
    let cluster = crate::metric::canonicalize(&cluster_rows, dim)?;
    let rest = crate::metric::canonicalize(&rest_rows, dim)
        .map_err(|_| Error::DecompositionFailed("cluster swallowed the whole anchor image".into()))?;

    let separation = cluster
        .points()
        .map(|p| rest.distance_to_point(p))
        .fold(f64::INFINITY, f64::min);
    let neighbourhood_gap = separation - 2.0 * ld;
    if neighbourhood_gap <= ld {
        return Err(Error::DecompositionFailed(format!(
            "neighbourhoods are {neighbourhood_gap} apart, need more than LD = {ld}"
        )));
    }

    let mut g_images = Vec::with_capacity(f.len());
    let mut h_images = Vec::with_capacity(f.len());
    for (i, image) in f.images.iter().enumerate() {
        let mut in_g = Vec::new();
        let mut in_h = Vec::new();
        for p in image.points() {
            let near = |set: &FinitePointSet| within_bound(set.distance_to_point(p), ld);
            match (near(&cluster), near(&rest)) {
                (true, false) => in_g.push(p),
                (false, true) => in_h.push(p),
                _ => {
                    return Err(Error::DecompositionFailed(format!(
                        "point {p:?} of sample {i} is not in exactly one neighbourhood"
                    )))
                }
            }
        }
        let g = crate::metric::canonicalize(&in_g, dim)
            .map_err(|_| Error::DecompositionFailed(format!("g is empty at sample {i}")))?;
        let h = crate::metric::canonicalize(&in_h, dim)
            .map_err(|_| Error::DecompositionFailed(format!("h is empty at sample {i}")))?;
        if g.cardinality() > n - 1 || h.cardinality() > n - 1 {
            return Err(Error::DecompositionFailed(format!(
                "a half exceeds capacity {} at sample {i}",
                n - 1
            )));
        }
        if &g.union(&h)? != image {
            return Err(Error::DecompositionFailed(format!("union differs from f at sample {i}")));
        }
        g_images.push(g);
        h_images.push(h);
    }
    let wrap = |e: Error| Error::DecompositionFailed(format!("half is not L-Lipschitz: {e}"));
    let g = SampledMap::new(f.domain.clone(), g_images, f.lipschitz).map_err(wrap)?;
    let h = SampledMap::new(f.domain.clone(), h_images, f.lipschitz).map_err(wrap)?;
    Ok(Decomposition {
        g,
        h,
        cluster,
        neighbourhood_gap,
    })
}

/// Grid on the unit sphere of `R^k` with the given angular spacing.
///
/// `k = 2` gives `round(2π / step)` equally spaced points on the circle,
/// `k = 3` latitude rings `step` apart with longitudes spaced about `step`.
pub fn sphere_grid(k: usize, angular_step: f64) -> Result<Vec<Vec<f64>>> {
    if !(angular_step > 0.0 && angular_step <= PI / 2.0) {
        return Err(Error::BadRange(format!("angular step {angular_step} out of (0, π/2]")));
    }
    match k {
        1 => Ok(vec![vec![-1.0], vec![1.0]]),
        2 => {
            let count = (2.0 * PI / angular_step).round() as usize;
            Ok((0..count)
                .map(|i| {
                    let (s, c) = (2.0 * PI * i as f64 / count as f64).sin_cos();
                    vec![c, s]
                })
                .collect())
        }
        3 => {
            let rings = (PI / angular_step).round() as usize;
            let mut out = vec![vec![0.0, 0.0, 1.0]];
            for i in 1..rings {
                let theta = PI * i as f64 / rings as f64;
                let (st, ct) = theta.sin_cos();
                let count = ((2.0 * PI * st / angular_step).round() as usize).max(3);
                for j in 0..count {
                    let (sp, cp) = (2.0 * PI * j as f64 / count as f64).sin_cos();
                    out.push(vec![st * cp, st * sp, ct]);
                }
            }
            out.push(vec![0.0, 0.0, -1.0]);
            Ok(out)
        }
        _ => Err(Error::BadRange(format!("sphere grids are provided for k in 1..=3, got {k}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionOptions {
    /// Number of radial steps `R`; radii are `0, 1/R, ..., 1`.
    pub radial_steps: usize,
    /// Pairs of ball-grid points closer than this enter the grid Lipschitz
    /// estimate.
    pub neighbourhood: f64,
}

impl Default for ExtensionOptions {
    fn default() -> Self {
        ExtensionOptions {
            radial_steps: 64,
            neighbourhood: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Radial,
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereConstant {
    pub radius: f64,
    /// `sup d_H(f̃(r x1), f̃(r x2)) / |x1 - x2|` over sphere-grid pairs.
    pub lipschitz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub branch: Branch,
    pub n: usize,
    pub input_lipschitz: f64,
    /// Lipschitz constant measured on neighbouring ball-grid pairs.
    pub grid_lipschitz: f64,
    /// `grid_lipschitz / input_lipschitz` (0 when the input is constant).
    pub factor: f64,
    pub per_sphere: Vec<SphereConstant>,
    /// `sup d_H(f̃(r1 x), f̃(r2 x)) / |r1 - r2|` over grid radii.
    pub radial_lipschitz: f64,
    pub boundary_agrees: bool,
}

/// Radii `0, 1/R, ..., 1` times a sphere grid; index 0 is the centre and
/// the last `sphere.len()` indices are the boundary, in sphere order.
#[derive(Debug, Clone, PartialEq)]
pub struct BallGrid {
    sphere: Vec<Vec<f64>>,
    radial_steps: usize,
}

impl BallGrid {
    pub fn new(sphere: Vec<Vec<f64>>, radial_steps: usize) -> Result<Self> {
        if radial_steps == 0 {
            return Err(Error::BadRange("need at least one radial step".into()));
        }
        if sphere.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(p) = sphere.iter().find(|p| (norm(p) - 1.0).abs() > 1e-9) {
            return Err(Error::PreconditionViolated(format!(
                "domain point {p:?} is not on the unit sphere"
            )));
        }
        Ok(BallGrid {
            sphere,
            radial_steps,
        })
    }

    pub fn len(&self) -> usize {
        1 + self.radial_steps * self.sphere.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn radius(&self, ring: usize) -> f64 {
        ring as f64 / self.radial_steps as f64
    }

    /// Index of `ring * sphere[j]` for `ring >= 1`.
    pub fn index(&self, ring: usize, j: usize) -> usize {
        1 + (ring - 1) * self.sphere.len() + j
    }

    pub fn boundary(&self) -> std::ops::Range<usize> {
        let s = self.sphere.len();
        self.len() - s..self.len()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let k = self.sphere[0].len();
        let mut out = Vec::with_capacity(self.len());
        out.push(vec![0.0; k]);
        for ring in 1..=self.radial_steps {
            let r = self.radius(ring);
            for p in &self.sphere {
                out.push(p.iter().map(|x| r * x).collect());
            }
        }
        out
    }
}

/// Result of an extension: the map on the ball grid and its measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct Extension {
    pub grid: BallGrid,
    pub map: SampledMap,
    pub report: ExtensionReport,
}

fn radial_images(f: &SampledMap, grid: &BallGrid) -> Result<Vec<FinitePointSet>> {
    let anchor = &f.images[0];
    let v = anchor.point(0).to_vec();
    let mut out = Vec::with_capacity(grid.len());
    out.push(FinitePointSet::singleton(&v)?);
    for ring in 1..=grid.radial_steps {
        let r = grid.radius(ring);
        for image in &f.images {
            if ring == grid.radial_steps {
                out.push(image.clone());
            } else {
                out.push(image.map_points(image.dim(), |p| {
                    p.iter().zip(&v).map(|(x, c)| c + r * (x - c)).collect()
                })?);
            }
        }
    }
    Ok(out)
}

fn check_radial_precondition(f: &SampledMap, n: usize) -> Result<()> {
    let diam = f.images[0].diameter();
    let bound = 6.0 * f.lipschitz * (n - 1) as f64;
    if diam > bound * (1.0 + LIPSCHITZ_SLACK) + 1e-12 {
        return Err(Error::PreconditionViolated(format!(
            "diam f(x0) = {diam} exceeds 6L(n-1) = {bound}"
        )));
    }
    Ok(())
}

/// `f̃(r x) = v + r (f(x) - v)` where `v` is the first point of `f(x_0)`,
/// `x_0` the first domain sample. `f̃ = f` on the boundary.
pub fn radial_extension(f: &SampledMap, n: usize, options: ExtensionOptions) -> Result<Extension> {
    if n == 0 {
        return Err(Error::BadRange("capacity must be at least 1".into()));
    }
    if f.max_cardinality() > n {
        return Err(Error::CapacityExceeded {
            capacity: n,
            found: f.max_cardinality(),
        });
    }
    let grid = BallGrid::new(f.domain.clone(), options.radial_steps)?;
    check_radial_precondition(f, n)?;
    let images = radial_images(f, &grid)?;
    finish(f, n, grid, images, Branch::Radial, options)
}

/// Extension of `f` from the sphere to the ball.
///
/// Images of diameter above `6L(n - 1)` at `x_0` are split with
/// [`decompose_map`], both halves are extended at capacity `n - 1`, and the
/// pointwise union is retracted from capacity `2n - 2` to `n`. Otherwise the
/// radial extension is used.
pub fn ball_extension(f: &SampledMap, n: usize, options: ExtensionOptions) -> Result<Extension> {
    if n == 0 {
        return Err(Error::BadRange("capacity must be at least 1".into()));
    }
    if f.max_cardinality() > n {
        return Err(Error::CapacityExceeded {
            capacity: n,
            found: f.max_cardinality(),
        });
    }
    let grid = BallGrid::new(f.domain.clone(), options.radial_steps)?;
    let (images, branch) = extend_images(f, n, &grid)?;
    finish(f, n, grid, images, branch, options)
}

fn extend_images(f: &SampledMap, n: usize, grid: &BallGrid) -> Result<(Vec<FinitePointSet>, Branch)> {
    let threshold = 6.0 * f.lipschitz * (n as f64 - 1.0);
    if n >= 2 && f.images[0].diameter() > threshold {
        let parts = decompose_map(f, n, 0)?;
        let (g, _) = extend_images(&parts.g, n - 1, grid)?;
        let (h, _) = extend_images(&parts.h, n - 1, grid)?;
        let images = g
            .iter()
            .zip(&h)
            .map(|(a, b)| {
                let u = a.union(b)?;
                if 2 * n - 2 > n {
                    if u.dim() != 1 {
                        return Err(Error::PreconditionViolated(
                            "the union step retracts onto R^(n) and needs images on the line".into(),
                        ));
                    }
                    retract_to(&u, 2 * n - 2, n)
                } else {
                    Ok(u)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((images, Branch::Split))
    } else {
        check_radial_precondition(f, n)?;
        Ok((radial_images(f, grid)?, Branch::Radial))
    }
}

fn finish(
    f: &SampledMap,
    n: usize,
    grid: BallGrid,
    images: Vec<FinitePointSet>,
    branch: Branch,
    options: ExtensionOptions,
) -> Result<Extension> {
    let boundary_agrees = grid
        .boundary()
        .zip(&f.images)
        .all(|(i, img)| &images[i] == img);
    let points = grid.points();
    let grid_lipschitz = local_lipschitz(&points, &images, options.neighbourhood)?;

    let s = grid.sphere.len();
    let mut per_sphere = Vec::with_capacity(grid.radial_steps);
    for ring in 1..=grid.radial_steps {
        let mut best = 0.0_f64;
        for a in 0..s {
            for b in a + 1..s {
                let dx = euclidean(&grid.sphere[a], &grid.sphere[b]);
                let dy = hausdorff_distance(&images[grid.index(ring, a)], &images[grid.index(ring, b)])?;
                best = best.max(dy / dx);
            }
        }
        per_sphere.push(SphereConstant {
            radius: grid.radius(ring),
            lipschitz: best,
        });
    }

    let mut radial_lipschitz = 0.0_f64;
    let at = |ring: usize, j: usize| if ring == 0 { 0 } else { grid.index(ring, j) };
    for j in 0..s {
        for r1 in 0..=grid.radial_steps {
            for r2 in r1 + 1..=grid.radial_steps {
                let dy = hausdorff_distance(&images[at(r1, j)], &images[at(r2, j)])?;
                radial_lipschitz = radial_lipschitz.max(dy / (grid.radius(r2) - grid.radius(r1)));
            }
        }
    }

    let factor = if f.lipschitz > 0.0 {
        grid_lipschitz / f.lipschitz
    } else {
        0.0
    };
    let map = SampledMap::new_unchecked(points, images, grid_lipschitz)?;
    Ok(Extension {
        grid,
        map,
        report: ExtensionReport {
            branch,
            n,
            input_lipschitz: f.lipschitz,
            grid_lipschitz,
            factor,
            per_sphere,
            radial_lipschitz,
            boundary_agrees,
        },
    })
}

/// Largest `d_H / |Δx|` over pairs of samples closer than `radius`, using a
/// cell hash on the domain.
pub fn local_lipschitz(points: &[Vec<f64>], images: &[FinitePointSet], radius: f64) -> Result<f64> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::BadRange(format!("neighbourhood radius {radius} must be positive")));
    }
    let cell = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x / radius).floor() as i64).collect() };
    let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        cells.entry(cell(p)).or_default().push(i);
    }
    let k = points.first().map_or(0, Vec::len);
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(k as u32))
        .map(|mut code| {
            (0..k)
                .map(|_| {
                    let o = (code % 3) as i64 - 1;
                    code /= 3;
                    o
                })
                .collect()
        })
        .collect();
    let mut best = 0.0_f64;
    for (i, p) in points.iter().enumerate() {
        let home = cell(p);
        for off in &offsets {
            let key: Vec<i64> = home.iter().zip(off).map(|(a, b)| a + b).collect();
            let Some(bucket) = cells.get(&key) else { continue };
            for &j in bucket.iter().filter(|&&j| j > i) {
                let dx = euclidean(p, &points[j]);
                if dx > 1e-12 && dx <= radius {
                    best = best.max(hausdorff_distance(&images[i], &images[j])? / dx);
                }
            }
        }
    }
    Ok(best)
}
