//! Finite point sets in `R^d` and the Hausdorff and product metrics on them.
//!
//! A [`FinitePointSet`] is an element of the symmetric product `(R^d)^(n)`:
//! a nonempty, multiplicity-blind set of points. Points are stored sorted
//! (numerically for `d = 1`, lexicographically otherwise) with exact
//! duplicates removed, so two sets are equal exactly when their stored
//! coordinate lists are equal.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A nonempty finite subset of `R^d` in canonical form.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointSetDoc", into = "PointSetDoc")]
pub struct FinitePointSet {
    dim: usize,
    // Row-major, `len() == dim * cardinality`.
    coords: Vec<f64>,
}

/// Wire form of a point set: `{"dim": d, "points": [[x1, ..., xd], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointSetDoc {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
}

impl TryFrom<PointSetDoc> for FinitePointSet {
    type Error = Error;

    fn try_from(doc: PointSetDoc) -> Result<Self> {
        canonicalize(&doc.points, doc.dim)
    }
}

impl From<FinitePointSet> for PointSetDoc {
    fn from(set: FinitePointSet) -> Self {
        PointSetDoc {
            dim: set.dim,
            points: set.points().map(<[f64]>::to_vec).collect(),
        }
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Builds the canonical set from a raw list of points.
///
/// Exact duplicates are merged; nearby points are kept distinct.
pub fn canonicalize<P: AsRef<[f64]>>(raw_points: &[P], dim: usize) -> Result<FinitePointSet> {
    if raw_points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if dim == 0 {
        return Err(Error::BadRange("ambient dimension must be positive".into()));
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(raw_points.len());
    for (index, p) in raw_points.iter().enumerate() {
        let p = p.as_ref();
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        if let Some(&value) = p.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCoordinate { index, value });
        }
        // `+ 0.0` maps -0.0 to 0.0 so that total_cmp agrees with `==`.
        rows.push(p.iter().map(|v| v + 0.0).collect());
    }
    rows.sort_by(|a, b| lex_cmp(a, b));
    rows.dedup();
    Ok(FinitePointSet {
        dim,
        coords: rows.concat(),
    })
}

impl FinitePointSet {
    /// Canonical set of real numbers (`d = 1`).
    pub fn from_reals(values: &[f64]) -> Result<Self> {
        let rows: Vec<[f64; 1]> = values.iter().map(|&v| [v]).collect();
        canonicalize(&rows, 1)
    }

    pub fn singleton(point: &[f64]) -> Result<Self> {
        canonicalize(&[point], point.len())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cardinality(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Sorted coordinates of a set on the line.
    ///
    /// # Panics
    ///
    /// Panics if `dim != 1`.
    pub fn reals(&self) -> &[f64] {
        assert_eq!(self.dim, 1, "reals() requires a set on the line");
        &self.coords
    }

    pub fn min_real(&self) -> f64 {
        self.reals()[0]
    }

    pub fn max_real(&self) -> f64 {
        *self.reals().last().expect("nonempty")
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.points().any(|q| q == p)
    }

    pub fn check_capacity(&self, capacity: usize) -> Result<()> {
        if self.cardinality() > capacity {
            return Err(Error::CapacityExceeded {
                capacity,
                found: self.cardinality(),
            });
        }
        Ok(())
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim,
            });
        }
        Ok(())
    }

    /// Applies `f` to every point and re-canonicalizes.
    pub fn map_points<F>(&self, out_dim: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Vec<f64>,
    {
        let rows: Vec<Vec<f64>> = self.points().map(&mut f).collect();
        canonicalize(&rows, out_dim)
    }

    pub fn translate(&self, v: &[f64]) -> Result<Self> {
        self.check_dim(v.len())?;
        self.map_points(self.dim, |p| p.iter().zip(v).map(|(x, y)| x + y).collect())
    }

    pub fn scale(&self, t: f64) -> Result<Self> {
        self.map_points(self.dim, |p| p.iter().map(|x| t * x).collect())
    }

    /// Set union; both sets must share the ambient dimension.
    pub fn union(&self, other: &Self) -> Result<Self> {
        other.check_dim(self.dim)?;
        let rows: Vec<&[f64]> = self.points().chain(other.points()).collect();
        canonicalize(&rows, self.dim)
    }

    /// Largest pairwise Euclidean distance.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0_f64;
        for (i, p) in self.points().enumerate() {
            for q in self.points().skip(i + 1) {
                best = best.max(euclidean(p, q));
            }
        }
        best
    }

    /// Euclidean distance from `p` to the nearest point of the set.
    pub fn distance_to_point(&self, p: &[f64]) -> f64 {
        self.points()
            .map(|q| euclidean(p, q))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_doc(&self) -> PointSetDoc {
        self.clone().into()
    }
}

impl fmt::Debug for FinitePointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim == 1 {
            f.debug_set().entries(self.coords.iter()).finish()
        } else {
            f.debug_set().entries(self.points()).finish()
        }
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn directed_hausdorff(a: &FinitePointSet, b: &FinitePointSet) -> f64 {
    a.points()
        .map(|p| b.distance_to_point(p))
        .fold(0.0, f64::max)
}

/// Hausdorff distance between two finite sets under the Euclidean norm.
pub fn hausdorff_distance(a: &FinitePointSet, b: &FinitePointSet) -> Result<f64> {
    b.check_dim(a.dim)?;
    Ok(directed_hausdorff(a, b).max(directed_hausdorff(b, a)))
}

/// Distance in a Euclidean product of metric spaces, given the per-factor
/// distances.
pub fn product_distance(factor_distances: &[f64]) -> f64 {
    factor_distances.iter().map(|d| d * d).sum::<f64>().sqrt()
}

/// Product distance of two factors, `sqrt(d_X^2 + d_Y^2)`.
pub fn product_distance2(dx: f64, dy: f64) -> f64 {
    dx.hypot(dy)
}
