//! Recursive bi-Lipschitz embedding of `R^(n)` into `R^{m(n)}`,
//! `m(n) = 2⌊(e-1) n!⌋`.
//!
//! For `n >= 2` a set `A` is processed as
//!
//! 1. split: `A ↦ (min A, B)` with `B = A - min A`;
//! 2. pinned normalisation: `B = t E` with `t = max B` and `E ⊂ [0, 1]`
//!    containing 0 and 1 (the apex when `t = 0`);
//! 3. circle map: `E ↦ exp(2πi E)`, a set of at most `n - 1` points of the
//!    plane since 0 and 1 collide;
//! 4. projection onto the complements of `n` lines of the plane, giving `n`
//!    sets in `R^(n-1)`;
//! 5. recursion: each of those goes through the `n - 1` pipeline;
//! 6. affine normalisation `ψ = s (v - c)` so that the image of the pinned
//!    sets contains 0 and has diameter at most 2;
//! 7. cone lift `(t ψ, 1 - t)`, and finally `min A` is prepended.
//!
//! Each stage carries a certified pair of bi-Lipschitz constants; their
//! product bounds the distortion of the whole map.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::Serialize;

use crate::cone::{self, euclidean_cone_lift};
use crate::error::{Error, Result};
use crate::metric::FinitePointSet;
use crate::tomography::{
    make_line_family, project_family, separation_constant, SeparationCertificate,
};

/// Largest capacity accepted by [`build_pipeline`].
pub const MAX_PIPELINE_N: usize = 6;

/// Largest `n` for which [`dimension`] is evaluated.
pub const MAX_DIMENSION_N: usize = 12;

/// `m(n) = 2 n! Σ_{k=1..n} 1/k!`, evaluated as the integer sum
/// `2 Σ n!/k!`.
pub fn dimension(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::BadRange("dimension is defined for n >= 1".into()));
    }
    if n > MAX_DIMENSION_N {
        return Err(Error::Overflow(n));
    }
    // n!/k! = (k+1)(k+2)...n, accumulated from k = n downwards.
    let mut sum: u64 = 0;
    let mut falling: u64 = 1;
    for k in (1..=n as u64).rev() {
        sum += falling;
        falling *= k;
    }
    usize::try_from(2 * sum).map_err(|_| Error::Overflow(n))
}

/// `(min A, A - min A)` for a set on the line.
pub fn split_min(a: &FinitePointSet) -> Result<(f64, FinitePointSet)> {
    a.check_dim(1)?;
    let m = a.min_real();
    Ok((m, a.translate(&[-m])?))
}

/// A subset of `[0, 1]` containing both 0 and 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PinnedSet(FinitePointSet);

impl PinnedSet {
    pub fn new(set: FinitePointSet) -> Result<Self> {
        set.check_dim(1)?;
        if set.min_real() != 0.0 || set.max_real() != 1.0 {
            return Err(Error::PreconditionViolated(format!(
                "pinned sets span exactly [0, 1], got {set:?}"
            )));
        }
        Ok(PinnedSet(set))
    }

    pub fn as_set(&self) -> &FinitePointSet {
        &self.0
    }

    pub fn into_set(self) -> FinitePointSet {
        self.0
    }
}

/// Writes `B` (with `min B = 0`) as `t E`. Returns `None` for the apex `t = 0`.
pub fn pinned_normalize(b: &FinitePointSet) -> Result<(f64, Option<PinnedSet>)> {
    b.check_dim(1)?;
    if b.min_real() != 0.0 {
        return Err(Error::PreconditionViolated(format!(
            "pinned normalisation needs min B = 0, got {}",
            b.min_real()
        )));
    }
    let t = b.max_real();
    if t <= cone::APEX_EPS {
        return Ok((t, None));
    }
    // x / t lands exactly on 0 and 1 at the endpoints.
    let e = b.map_points(1, |p| vec![p[0] / t])?;
    Ok((t, Some(PinnedSet::new(e)?)))
}

/// `E ↦ {exp(2πi e)}` as points of the plane, with 0 and 1 identified.
pub fn circle_map(e: &PinnedSet) -> FinitePointSet {
    e.0.map_points(2, |p| {
        // Reduce to (-1/2, 1/2] so that e = 1 and e = 0 give the same point.
        let x = if p[0] > 0.5 { p[0] - 1.0 } else { p[0] };
        let (s, c) = (2.0 * PI * x).sin_cos();
        vec![c, s]
    })
    .expect("unit circle points are finite")
}

/// Bi-Lipschitz constants of one stage: `lower d <= d' <= upper d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageConstants {
    pub lower: Option<f64>,
    pub upper: f64,
    /// False when `lower` is an empirical estimate or missing.
    pub certified: bool,
}

impl StageConstants {
    fn exact(lower: f64, upper: f64) -> Self {
        StageConstants {
            lower: Some(lower),
            upper,
            certified: true,
        }
    }

    fn chain(stages: &[StageConstants]) -> StageConstants {
        let certified = stages.iter().all(|s| s.certified && s.lower.is_some());
        let lower = if certified {
            Some(stages.iter().map(|s| s.lower.unwrap_or(0.0)).product())
        } else {
            None
        };
        StageConstants {
            lower,
            upper: stages.iter().map(|s| s.upper).product(),
            certified,
        }
    }
}

#[derive(Debug, Clone)]
struct Recursion {
    certificate: SeparationCertificate,
    sub: EmbeddingPipeline,
    center: Vec<f64>,
    scale: f64,
    diameter_bound: f64,
    circle: StageConstants,
    project: StageConstants,
    recurse: StageConstants,
    affine: StageConstants,
    lift: StageConstants,
}

/// An immutable, fully built embedding `R^(n) -> R^{m(n)}`.
#[derive(Debug, Clone)]
pub struct EmbeddingPipeline {
    n: usize,
    output_dim: usize,
    recursion: Option<Box<Recursion>>,
}

const SPLIT: StageConstants = StageConstants {
    lower: Some(1.0 / SQRT_2),
    upper: 2.236_067_977_499_79, // sqrt(5)
    certified: true,
};

const PINNED_NORMALIZE: StageConstants = StageConstants {
    lower: Some(1.0 / cone::UPPER_COMPARISON),
    upper: cone::LOWER_COMPARISON,
    certified: true,
};

const ASSEMBLE: StageConstants = StageConstants {
    lower: Some(1.0),
    upper: 1.0,
    certified: true,
};

const PAD: StageConstants = ASSEMBLE;

/// Builds the pipeline for capacity `n`, `1 <= n <= 6`.
pub fn build_pipeline(n: usize) -> Result<EmbeddingPipeline> {
    if n == 0 || n > MAX_PIPELINE_N {
        return Err(Error::BadRange(format!(
            "pipeline capacity must be in 1..={MAX_PIPELINE_N}, got {n}"
        )));
    }
    let output_dim = dimension(n)?;
    if n == 1 {
        return Ok(EmbeddingPipeline {
            n,
            output_dim,
            recursion: None,
        });
    }

    let sub = build_pipeline(n - 1)?;
    let certificate = separation_constant(&make_line_family(n - 1, 2)?)?;
    let sub_bounds = sub.certified_constants();

    let circle = StageConstants::exact(4.0, 2.0 * PI);
    let project = StageConstants::exact(1.0 / certificate.m, (n as f64).sqrt());
    let recurse = sub_bounds;

    // Pinned sets are within Hausdorff distance 1/2 of {0, 1}, so the
    // diameter of their image is at most half the Lipschitz constant.
    let pre_affine = StageConstants::chain(&[circle, project, recurse]);
    let diameter_bound = 0.5 * pre_affine.upper;
    let scale = 2.0 / diameter_bound;
    let affine = StageConstants::exact(scale, scale);
    let psi = StageConstants::chain(&[circle, project, recurse, affine]);

    // |ψ(E)| <= upper(ψ) d_H(E, {0, 1}) <= upper(ψ) / 2.
    let radius = 0.5 * psi.upper;
    let lift = StageConstants {
        lower: psi.lower.map(|l| l.min(1.0) / cone::LOWER_COMPARISON),
        upper: (1.0 + radius * radius).sqrt().max(psi.upper),
        certified: psi.certified,
    };

    let mut recursion = Recursion {
        certificate,
        sub,
        center: Vec::new(),
        scale,
        diameter_bound,
        circle,
        project,
        recurse,
        affine,
        lift,
    };
    let unit_pair = PinnedSet::new(FinitePointSet::from_reals(&[0.0, 1.0])?)?;
    recursion.center = recursion.concat_projections(&unit_pair)?;
    Ok(EmbeddingPipeline {
        n,
        output_dim,
        recursion: Some(Box::new(recursion)),
    })
}

impl Recursion {
    fn concat_projections(&self, e: &PinnedSet) -> Result<Vec<f64>> {
        let on_circle = circle_map(e);
        let parts = project_family(&on_circle, &self.certificate.family)?;
        let mut out = Vec::with_capacity(parts.len() * self.sub.output_dim);
        for part in &parts {
            out.extend(self.sub.embed(part)?);
        }
        Ok(out)
    }

    fn normalized(&self, e: &PinnedSet) -> Result<Vec<f64>> {
        let mut v = self.concat_projections(e)?;
        for (x, c) in v.iter_mut().zip(&self.center) {
            *x = self.scale * (*x - c);
        }
        Ok(v)
    }
}

impl EmbeddingPipeline {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    /// Pipeline for capacity `n - 1`, if any.
    pub fn sub_pipeline(&self) -> Option<&EmbeddingPipeline> {
        self.recursion.as_ref().map(|r| &r.sub)
    }

    /// Constant `c_n` subtracted before scaling.
    pub fn center(&self) -> Option<&[f64]> {
        self.recursion.as_ref().map(|r| r.center.as_slice())
    }

    /// Scale `s_n` applied after centring.
    pub fn scale(&self) -> Option<f64> {
        self.recursion.as_ref().map(|r| r.scale)
    }

    pub fn separation(&self) -> Option<&SeparationCertificate> {
        self.recursion.as_ref().map(|r| &r.certificate)
    }

    /// Top-level stage constants, in application order.
    pub fn outer_stages(&self) -> Vec<(&'static str, StageConstants)> {
        match &self.recursion {
            None => vec![("pad", PAD)],
            Some(r) => vec![
                ("split", SPLIT),
                ("pinned-normalize", PINNED_NORMALIZE),
                ("cone-lift", r.lift),
                ("assemble", ASSEMBLE),
            ],
        }
    }

    /// Product of the top-level stage constants.
    pub fn certified_constants(&self) -> StageConstants {
        let stages: Vec<StageConstants> = self.outer_stages().into_iter().map(|(_, s)| s).collect();
        StageConstants::chain(&stages)
    }

    /// Maps a set of at most `n` reals to `R^{m(n)}`.
    pub fn embed(&self, a: &FinitePointSet) -> Result<Vec<f64>> {
        a.check_dim(1)?;
        a.check_capacity(self.n)?;
        let Some(rec) = &self.recursion else {
            return Ok(vec![a.min_real(), 0.0]);
        };
        let (shift, b) = split_min(a)?;
        let (t, pinned) = pinned_normalize(&b)?;
        let mut out = Vec::with_capacity(self.output_dim);
        out.push(shift);
        match pinned {
            None => {
                out.resize(self.output_dim - 1, 0.0);
                out.push(1.0);
            }
            Some(e) => out.extend(euclidean_cone_lift(t, &rec.normalized(&e)?)?),
        }
        debug_assert_eq!(out.len(), self.output_dim);
        Ok(out)
    }

    /// Embeds a batch in parallel, preserving order.
    pub fn embed_batch(&self, sets: &[FinitePointSet]) -> Result<Vec<Vec<f64>>> {
        sets.par_iter().map(|a| self.embed(a)).collect()
    }

    /// Serializable stage tree.
    pub fn describe(&self) -> PipelineDescription {
        let constants = self.certified_constants();
        let stages = match &self.recursion {
            None => vec![StageNode {
                stage: StageKind::Pad,
                constants: PAD,
            }],
            Some(r) => vec![
                StageNode {
                    stage: StageKind::Split,
                    constants: SPLIT,
                },
                StageNode {
                    stage: StageKind::PinnedNormalize,
                    constants: PINNED_NORMALIZE,
                },
                StageNode {
                    stage: StageKind::ConeLift {
                        inner: vec![
                            StageNode {
                                stage: StageKind::CircleMap,
                                constants: r.circle,
                            },
                            StageNode {
                                stage: StageKind::Project {
                                    certificate: r.certificate.clone(),
                                },
                                constants: r.project,
                            },
                            StageNode {
                                stage: StageKind::Recurse {
                                    copies: self.n,
                                    pipeline: Box::new(r.sub.describe()),
                                },
                                constants: r.recurse,
                            },
                            StageNode {
                                stage: StageKind::AffineNormalize {
                                    center: r.center.clone(),
                                    scale: r.scale,
                                    diameter_bound: r.diameter_bound,
                                },
                                constants: r.affine,
                            },
                        ],
                    },
                    constants: r.lift,
                },
                StageNode {
                    stage: StageKind::Assemble,
                    constants: ASSEMBLE,
                },
            ],
        };
        PipelineDescription {
            n: self.n,
            output_dim: self.output_dim,
            certified_lower: constants.lower,
            certified_upper: constants.upper,
            stages,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineDescription {
    pub n: usize,
    pub output_dim: usize,
    pub certified_lower: Option<f64>,
    pub certified_upper: f64,
    pub stages: Vec<StageNode>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageNode {
    #[serde(flatten)]
    pub stage: StageKind,
    #[serde(flatten)]
    pub constants: StageConstants,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "stage", rename_all = "kebab-case")]
pub enum StageKind {
    Pad,
    Split,
    PinnedNormalize,
    CircleMap,
    Project {
        certificate: SeparationCertificate,
    },
    Recurse {
        copies: usize,
        pipeline: Box<PipelineDescription>,
    },
    AffineNormalize {
        center: Vec<f64>,
        scale: f64,
        diameter_bound: f64,
    },
    ConeLift {
        inner: Vec<StageNode>,
    },
    Assemble,
}

/// Embedding of `(R^d)^(n)` through `d - 1` rounds of projection onto
/// `n + 1` hyperplanes, followed by the line pipeline on each of the
/// `(n + 1)^(d-1)` resulting sets.
#[derive(Debug, Clone)]
pub struct RdEmbedding {
    n: usize,
    d: usize,
    // One certificate per projection round, ambient dimension d, d-1, ..., 2.
    rounds: Vec<SeparationCertificate>,
    pipeline: EmbeddingPipeline,
}

pub fn build_rd(n: usize, d: usize) -> Result<RdEmbedding> {
    if !(2..=3).contains(&d) {
        return Err(Error::BadRange(format!("embed-rd supports d in 2..=3, got {d}")));
    }
    if n == 0 || n > 4 {
        return Err(Error::BadRange(format!("embed-rd supports n in 1..=4, got {n}")));
    }
    let rounds = (2..=d)
        .rev()
        .map(|dim| separation_constant(&make_line_family(n, dim)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(RdEmbedding {
        n,
        d,
        rounds,
        pipeline: build_pipeline(n)?,
    })
}

impl RdEmbedding {
    pub fn output_dim(&self) -> usize {
        (self.n + 1).pow(self.d as u32 - 1) * self.pipeline.output_dim
    }

    pub fn pipeline(&self) -> &EmbeddingPipeline {
        &self.pipeline
    }

    /// The `(n + 1)^(d-1)` sets on the line, in projection order.
    pub fn project_to_line(&self, a: &FinitePointSet) -> Result<Vec<FinitePointSet>> {
        a.check_dim(self.d)?;
        a.check_capacity(self.n)?;
        let mut level = vec![a.clone()];
        for cert in &self.rounds {
            let mut next = Vec::with_capacity(level.len() * (self.n + 1));
            for set in &level {
                next.extend(project_family(set, &cert.family)?);
            }
            level = next;
        }
        Ok(level)
    }

    pub fn embed(&self, a: &FinitePointSet) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.output_dim());
        for set in self.project_to_line(a)? {
            out.extend(self.pipeline.embed(&set)?);
        }
        Ok(out)
    }

    pub fn certified_constants(&self) -> StageConstants {
        let mut stages: Vec<StageConstants> = self
            .rounds
            .iter()
            .map(|c| StageConstants::exact(1.0 / c.m, ((self.n + 1) as f64).sqrt()))
            .collect();
        stages.push(self.pipeline.certified_constants());
        StageConstants::chain(&stages)
    }
}

/// One-shot form of [`build_rd`] followed by [`RdEmbedding::embed`].
pub fn embed_rd(a: &FinitePointSet, n: usize, d: usize) -> Result<Vec<f64>> {
    build_rd(n, d)?.embed(a)
}
