//! Finite subsets of the line and of `R^d` under the Hausdorff metric.
//!
//! The crate provides
//!
//! * canonical finite point sets with Hausdorff and product metrics
//!   ([`metric`], [`sampler`]);
//! * cone metrics and the Euclidean cone lift ([`cone`]);
//! * the explicit Lipschitz retraction `R^(n) -> R^(k)` ([`retraction`]);
//! * projections onto hyperplanes that separate sets of bounded cardinality
//!   ([`tomography`]);
//! * the recursive bi-Lipschitz embedding `R^(n) -> R^{2⌊(e-1) n!⌋}` and its
//!   extension to `(R^d)^(n)` ([`pipeline`]);
//! * Lipschitz decomposition and sphere-to-ball extension of set-valued maps
//!   ([`extension`]);
//! * empirical distortion bracketing with adversarial search
//!   ([`distortion`]).

pub mod cone;
pub mod distortion;
pub mod error;
pub mod extension;
pub mod metric;
pub mod pipeline;
pub mod retraction;
pub mod sampler;
pub mod tomography;

pub use cone::{cone_distance, cone_distance_classic, euclidean_cone_lift, ConePoint};
pub use error::{Error, Result};
pub use metric::{canonicalize, hausdorff_distance, product_distance, FinitePointSet, PointSetDoc};
pub use pipeline::{build_pipeline, build_rd, dimension, EmbeddingPipeline, RdEmbedding};
pub use retraction::{min_gap, retract_once, retract_to, GapProfile};
pub use sampler::{MetricSampler, SampleBox};
pub use tomography::{make_line_family, LineFamily, SeparationCertificate};
pub use distortion::{adversarial_search, certified_bounds, estimate_distortion, DistortionReport, SetMap};
pub use extension::{ball_extension, decompose_map, radial_extension, SampledMap};
