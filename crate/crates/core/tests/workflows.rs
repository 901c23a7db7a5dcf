use std::f64::consts::PI;

use symprod_core::distortion::{adversarial_search, estimate_distortion, RetractionMap, TomographyMap};
use symprod_core::extension::{ball_extension, sphere_grid, ExtensionOptions, SampledMap};
use symprod_core::pipeline::build_rd;
use symprod_core::tomography::{make_line_family, separation_constant, verify_separation};
use symprod_core::{build_pipeline, dimension, retract_to, FinitePointSet, MetricSampler};

fn reals(v: &[f64]) -> FinitePointSet {
    FinitePointSet::from_reals(v).unwrap()
}

#[test]
fn pipeline_roundtrip_through_json() {
    let p = build_pipeline(3).unwrap();
    let text = serde_json::to_string(&p.describe()).unwrap();
    assert!(text.contains("cone-lift") || text.contains("cone_lift"), "{text}");
    assert_eq!(p.output_dim(), dimension(3).unwrap());
}

#[test]
fn embedding_of_point_sets_in_the_plane() {
    let rd = build_rd(2, 2).unwrap();
    let a = symprod_core::canonicalize(&[[0.0, 0.0], [1.0, 0.5]], 2).unwrap();
    let b = symprod_core::canonicalize(&[[0.0, 0.0], [1.0, 0.6]], 2).unwrap();
    let (ea, eb) = (rd.embed(&a).unwrap(), rd.embed(&b).unwrap());
    assert_eq!(ea.len(), rd.output_dim());
    assert_ne!(ea, eb);
}

#[test]
fn retraction_chain_lands_in_target() {
    let a = reals(&[-3.0, -1.0, 0.5, 2.0, 7.0]);
    for k in 1..5 {
        assert!(retract_to(&a, 5, k).unwrap().cardinality() <= k);
    }
}

#[test]
fn separation_verified_and_searched() {
    let cert = separation_constant(&make_line_family(2, 3).unwrap()).unwrap();
    let report = verify_separation(&cert, 2000, 4).unwrap();
    assert!(report.passed());
    let map = TomographyMap { certificate: cert };
    let sampler = MetricSampler::cube(4, 3, 1.0, 2).unwrap();
    let r = estimate_distortion(&map, &sampler, 1000).unwrap();
    let s = adversarial_search(&map, &r, 1000, 0.2, 4);
    assert!(s.within_certified, "{s:?}");
}

#[test]
fn retraction_search_respects_bound() {
    for n in 2..=4 {
        let map = RetractionMap { n };
        let sampler = MetricSampler::cube(n as u64, 1, 1.0, n).unwrap();
        let r = estimate_distortion(&map, &sampler, 1000).unwrap();
        let s = adversarial_search(&map, &r, 1000, 0.2, 1);
        assert!(s.upper_ratio <= (6 * n + 1) as f64, "{s:?}");
    }
}

#[test]
fn ball_extension_of_three_point_map() {
    let circle = sphere_grid(2, PI / 16.0).unwrap();
    let images: Vec<_> = circle
        .iter()
        .map(|p| reals(&[0.1 * p[0], 50.0 + 0.1 * p[1], 100.0]))
        .collect();
    let f = SampledMap::new(circle, images, 0.1).unwrap();
    let ext = ball_extension(
        &f,
        3,
        ExtensionOptions {
            radial_steps: 8,
            neighbourhood: 0.3,
        },
    )
    .unwrap();
    assert!(ext.report.boundary_agrees);
    assert!(ext.map.images().iter().all(|s| s.cardinality() <= 3));
}
