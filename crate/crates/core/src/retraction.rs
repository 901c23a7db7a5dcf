//! Lipschitz retraction of `R^(n)` onto `R^(k)`.
//!
//! For a set `a_1 < ... < a_n` of full cardinality with minimal gap `δ`, each
//! point is pushed toward 0:
//!
//! ```text
//! a_j' = min(0, a_j + (n - j) δ)   if a_j <= 0
//! a_j' = max(0, a_j - j δ)         if a_j > 0
//! ```
//!
//! The pair realising `δ` collapses, so the image has at most `n - 1`
//! points. Sets with fewer than `n` points are fixed. The map is
//! `(6n + 1)`-Lipschitz for the Hausdorff metric.
//!
//! The construction is centred at 0. To retract inside a proper interval
//! `X`, translate so that `0 ∈ X` first; every image point lies between 0 and
//! the point it came from, so the result stays in `X`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::FinitePointSet;

/// Minimal consecutive gap of a set at a given capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapProfile {
    pub delta: f64,
    /// 1-based index `j` of the first gap `a_j - a_{j-1}` equal to `delta`;
    /// `None` when the set is below capacity.
    pub argmin_index: Option<usize>,
}

/// Lipschitz constant of [`retract_once`] at capacity `n`.
pub fn lipschitz_bound(n: usize) -> f64 {
    (6 * n + 1) as f64
}

pub fn min_gap(a: &FinitePointSet, n: usize) -> Result<GapProfile> {
    a.check_dim(1)?;
    a.check_capacity(n)?;
    let xs = a.reals();
    if xs.len() < n || xs.len() < 2 {
        return Ok(GapProfile {
            delta: 0.0,
            argmin_index: None,
        });
    }
    let mut best = (f64::INFINITY, 0);
    for (i, w) in xs.windows(2).enumerate() {
        let gap = w[1] - w[0];
        if gap < best.0 {
            best = (gap, i + 2);
        }
    }
    Ok(GapProfile {
        delta: best.0,
        argmin_index: Some(best.1),
    })
}

/// The per-point images `a_1' <= ... <= a_n'` before set canonicalization.
/// Returns the input unchanged when `|A| < n`.
pub fn retract_values(a: &FinitePointSet, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::BadRange(format!(
            "retraction needs capacity at least 2, got {n}"
        )));
    }
    let gap = min_gap(a, n)?;
    let xs = a.reals();
    if gap.argmin_index.is_none() {
        return Ok(xs.to_vec());
    }
    let delta = gap.delta;
    let mut out: Vec<f64> = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let j = (i + 1) as f64;
            if x <= 0.0 {
                (x + (n as f64 - j) * delta).min(0.0)
            } else {
                (x - j * delta).max(0.0)
            }
        })
        .collect();
    // Neighbours on the same side at gap exactly δ coincide in exact
    // arithmetic; rounding can leave them an ulp apart.
    for i in 1..xs.len() {
        if xs[i] - xs[i - 1] == delta && (xs[i - 1] <= 0.0) == (xs[i] <= 0.0) {
            out[i] = out[i - 1];
        }
    }
    Ok(out)
}

/// One retraction step `R^(n) -> R^(n-1)`.
pub fn retract_once(a: &FinitePointSet, n: usize) -> Result<FinitePointSet> {
    let values = retract_values(a, n)?;
    FinitePointSet::from_reals(&values)
}

/// Retraction `R^(n) -> R^(k)`, composing single steps at capacities
/// `n, n-1, ..., k+1`.
pub fn retract_to(a: &FinitePointSet, n: usize, k: usize) -> Result<FinitePointSet> {
    if k < 1 || k >= n {
        return Err(Error::BadRange(format!(
            "retraction target must satisfy 1 <= k < n, got n = {n}, k = {k}"
        )));
    }
    a.check_dim(1)?;
    a.check_capacity(n)?;
    let mut current = a.clone();
    for cap in (k + 1..=n).rev() {
        current = retract_once(&current, cap)?;
    }
    Ok(current)
}
