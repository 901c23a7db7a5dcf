//! Seeded sampling of point sets.
//!
//! Every stream is a ChaCha8 generator keyed by the sampler seed (and, for
//! worker streams, the worker index), so a fixed seed always reproduces the
//! same sequence of sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{canonicalize, FinitePointSet};

/// Axis-aligned sampling box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SampleBox {
    pub fn cube(dim: usize, half_width: f64) -> Self {
        SampleBox {
            lo: vec![-half_width; dim],
            hi: vec![half_width; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSampler {
    pub seed: u64,
    pub bounds: SampleBox,
    pub capacity: usize,
}

impl MetricSampler {
    pub fn new(seed: u64, bounds: SampleBox, capacity: usize) -> Result<Self> {
        if bounds.dim() == 0 || bounds.lo.len() != bounds.hi.len() {
            return Err(Error::BadRange("sampling box is malformed".into()));
        }
        if bounds.lo.iter().zip(&bounds.hi).any(|(l, h)| l.partial_cmp(h).map_or(true, |o| o.is_gt())) {
            return Err(Error::BadRange("sampling box has lo > hi".into()));
        }
        if capacity == 0 {
            return Err(Error::BadRange("capacity must be at least 1".into()));
        }
        Ok(MetricSampler {
            seed,
            bounds,
            capacity,
        })
    }

    /// Sampler over the cube `[-half_width, half_width]^dim`.
    pub fn cube(seed: u64, dim: usize, half_width: f64, capacity: usize) -> Result<Self> {
        Self::new(seed, SampleBox::cube(dim, half_width), capacity)
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn stream(&self) -> SampleStream {
        SampleStream {
            rng: ChaCha8Rng::seed_from_u64(self.seed),
            bounds: self.bounds.clone(),
            capacity: self.capacity,
        }
    }

    /// Independent stream for worker `worker`, derived from the seed.
    pub fn worker_stream(&self, worker: u64) -> SampleStream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(worker + 1);
        SampleStream {
            rng,
            bounds: self.bounds.clone(),
            capacity: self.capacity,
        }
    }
}

pub struct SampleStream {
    rng: ChaCha8Rng,
    bounds: SampleBox,
    capacity: usize,
}

impl SampleStream {
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn point(&mut self) -> Vec<f64> {
        self.bounds
            .lo
            .iter()
            .zip(&self.bounds.hi)
            .map(|(&l, &h)| l + (h - l) * self.rng.random::<f64>())
            .collect()
    }

    /// Set with cardinality uniform in `1..=capacity`.
    pub fn set(&mut self) -> FinitePointSet {
        let k = self.rng.random_range(1..=self.capacity);
        self.set_with_cardinality(k)
    }

    /// Set of `k` uniformly drawn points (fewer only if two draws coincide).
    pub fn set_with_cardinality(&mut self, k: usize) -> FinitePointSet {
        let rows: Vec<Vec<f64>> = (0..k.max(1)).map(|_| self.point()).collect();
        canonicalize(&rows, self.dim()).expect("sampled coordinates are finite")
    }

    /// Subset of `[0, 1]` containing both endpoints, with cardinality uniform
    /// in `2..=capacity` (or `{0, 1}` when the capacity is below 2).
    pub fn pinned(&mut self) -> FinitePointSet {
        let k = if self.capacity <= 2 {
            2
        } else {
            self.rng.random_range(2..=self.capacity)
        };
        let mut values = vec![0.0, 1.0];
        values.extend((2..k).map(|_| self.rng.random::<f64>()));
        FinitePointSet::from_reals(&values).expect("finite")
    }

    /// Log-uniform scale in `[10^lo_exp, 10^hi_exp]`.
    pub fn log_scale(&mut self, lo_exp: f64, hi_exp: f64) -> f64 {
        10f64.powf(lo_exp + (hi_exp - lo_exp) * self.rng.random::<f64>())
    }
}
