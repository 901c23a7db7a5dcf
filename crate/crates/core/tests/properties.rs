use proptest::prelude::*;
use symprod_core::cone::{cone_distance, ConePoint};
use symprod_core::extension::{decompose_map, SampledMap};
use symprod_core::retraction::{lipschitz_bound, min_gap, retract_once};
use symprod_core::tomography::{check_pair, make_line_family, separation_constant};
use symprod_core::{build_pipeline, hausdorff_distance, FinitePointSet};

fn real_set(cap: usize) -> impl Strategy<Value = FinitePointSet> {
    prop::collection::vec(-10.0..10.0f64, 1..=cap).prop_map(|v| FinitePointSet::from_reals(&v).unwrap())
}

fn plane_set(cap: usize) -> impl Strategy<Value = FinitePointSet> {
    prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..=cap).prop_map(|v| {
        let rows: Vec<[f64; 2]> = v.into_iter().map(|(x, y)| [x, y]).collect();
        symprod_core::canonicalize(&rows, 2).unwrap()
    })
}

fn rel(a: f64, b: f64) -> f64 {
    1e-9 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #[test]
    fn hausdorff_symmetric_and_triangle(a in plane_set(4), b in plane_set(4), c in plane_set(4)) {
        let ab = hausdorff_distance(&a, &b).unwrap();
        let ba = hausdorff_distance(&b, &a).unwrap();
        let bc = hausdorff_distance(&b, &c).unwrap();
        let ac = hausdorff_distance(&a, &c).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!(ac <= ab + bc + rel(ac, ab + bc));
        prop_assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn hausdorff_translation_and_scaling(a in real_set(5), b in real_set(5), v in -3.0..3.0f64, t in 0.01..100.0f64) {
        let d = hausdorff_distance(&a, &b).unwrap();
        let dt = hausdorff_distance(&a.translate(&[v]).unwrap(), &b.translate(&[v]).unwrap()).unwrap();
        let ds = hausdorff_distance(&a.scale(t).unwrap(), &b.scale(t).unwrap()).unwrap();
        prop_assert!((d - dt).abs() <= 1e-9 * (1.0 + d));
        prop_assert!((ds - t * d).abs() <= 1e-9 * (1.0 + t * d));
    }

    #[test]
    fn cone_triangle(t in prop::array::uniform3(0.0..10.0f64), x in prop::array::uniform3(-1.0..1.0f64)) {
        let p: Vec<_> = (0..3).map(|i| ConePoint { t: t[i], x: x[i] }).collect();
        let d = |a: &ConePoint<f64>, b: &ConePoint<f64>| cone_distance(a, b, |u: &f64, v: &f64| (u - v).abs()).unwrap();
        prop_assert!(d(&p[0], &p[2]) <= d(&p[0], &p[1]) + d(&p[1], &p[2]) + 1e-12);
        prop_assert_eq!(d(&p[0], &p[1]), d(&p[1], &p[0]));
    }

    #[test]
    fn retraction_invariants(n in 2usize..=6, a in real_set(6), b in real_set(6)) {
        prop_assume!(a.cardinality() <= n && b.cardinality() <= n);
        let ra = retract_once(&a, n).unwrap();
        let rb = retract_once(&b, n).unwrap();
        if a.cardinality() < n {
            prop_assert_eq!(&ra, &a);
        } else {
            prop_assert!(ra.cardinality() < n);
        }
        let delta = min_gap(&a, n).unwrap().delta;
        prop_assert!(hausdorff_distance(&a, &ra).unwrap() <= n as f64 * delta + 1e-9);
        let d = hausdorff_distance(&a, &b).unwrap();
        let dr = hausdorff_distance(&ra, &rb).unwrap();
        prop_assert!(dr <= lipschitz_bound(n) * d + 1e-9);
    }

    #[test]
    fn tomography_bounds(a in plane_set(3), b in plane_set(3)) {
        let cert = separation_constant(&make_line_family(3, 2).unwrap()).unwrap();
        if let Some(check) = check_pair(&cert, &a, &b).unwrap() {
            prop_assert!(check.lower_ok && check.lipschitz_ok, "{:?}", check);
        }
    }

    #[test]
    fn tomography_scale_equivariant(a in plane_set(2), b in plane_set(2), t in 0.1..10.0f64) {
        let cert = separation_constant(&make_line_family(2, 2).unwrap()).unwrap();
        let c1 = check_pair(&cert, &a, &b).unwrap();
        let c2 = check_pair(&cert, &a.scale(t).unwrap(), &b.scale(t).unwrap()).unwrap();
        if let (Some(c1), Some(c2)) = (c1, c2) {
            prop_assert!((c1.max_component_ratio - c2.max_component_ratio).abs() < 1e-8);
        }
    }

    #[test]
    fn embedding_injective_and_bounded(n in 2usize..=3, a in real_set(3), b in real_set(3)) {
        prop_assume!(a.cardinality() <= n && b.cardinality() <= n && a != b);
        let p = build_pipeline(n).unwrap();
        let (ea, eb) = (p.embed(&a).unwrap(), p.embed(&b).unwrap());
        prop_assert_eq!(ea.len(), p.output_dim());
        prop_assert_ne!(&ea, &eb);
        let dy = symprod_core::metric::euclidean(&ea, &eb);
        let dx = hausdorff_distance(&a, &b).unwrap();
        prop_assert!(dy <= p.certified_constants().upper * dx * (1.0 + 1e-9));
    }

    #[test]
    fn decomposition_recovers_union(slope in 0.0..0.5f64, gap in 20.0..200.0f64, offset in -5.0..5.0f64) {
        let domain: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 * 0.2]).collect();
        let images: Vec<_> = domain
            .iter()
            .map(|x| FinitePointSet::from_reals(&[offset + slope * x[0], offset + gap - slope * x[0]]).unwrap())
            .collect();
        let f = SampledMap::new(domain, images, slope.max(1e-3)).unwrap();
        let d = decompose_map(&f, 2, 0).unwrap();
        for i in 0..f.len() {
            prop_assert_eq!(&d.g.images()[i].union(&d.h.images()[i]).unwrap(), &f.images()[i]);
        }
    }
}
