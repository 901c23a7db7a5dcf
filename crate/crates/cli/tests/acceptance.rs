//! Acceptance suite. Each test prints one `criterion NN ... PASS|FAIL` line
//! to stderr (outside libtest capture) and then asserts.

use std::f64::consts::{E, PI, SQRT_2};
use std::io::Write;
use std::process::Command;

use rand::Rng;
use symprod_core::cone::{check_cone_comparison, disk_sample};
use symprod_core::distortion::{
    adversarial_search, estimate_distortion, estimate_distortion_with_pairs, EmbeddingMap, RetractionMap,
    TomographyMap,
};
use symprod_core::extension::{ball_extension, decompose_map, sphere_grid, ExtensionOptions, SampledMap};
use symprod_core::retraction::{lipschitz_bound, min_gap, retract_once};
use symprod_core::sampler::SampleStream;
use symprod_core::tomography::{make_line_family, separation_constant, verify_separation};
use symprod_core::{build_pipeline, dimension, hausdorff_distance, FinitePointSet, MetricSampler};

// Tolerances fixed by the acceptance criteria.
const TRIANGLE_REL: f64 = 1e-9;
const CONE_TRIANGLE_ABS: f64 = 1e-12;
const SCALING_ABS: f64 = 1e-12;
const PER_SPHERE_REL: f64 = 1e-9;
const REFINEMENT_REL: f64 = 0.10;
const PERPENDICULAR_REL: f64 = 0.01;
// Float slack for exact inequalities evaluated in floating point.
const INEQ_REL: f64 = 1e-9;

const PAIRS: usize = 10_000;
const SEARCH: usize = 10_000;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {id:02} [{name}]: {verdict} ({detail})");
}

fn rows(a: &FinitePointSet) -> Vec<Vec<f64>> {
    a.points().map(<[f64]>::to_vec).collect()
}

/// Brute-force Hausdorff distance on raw coordinates.
fn hausdorff_oracle(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let dist = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let directed = |a: &[Vec<f64>], b: &[Vec<f64>]| {
        a.iter()
            .map(|p| b.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

fn leq(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + INEQ_REL * rhs.abs().max(lhs.abs()) + 1e-300
}

#[test]
fn criterion_01_dimension_identity() {
    let mut pass = true;
    let mut m_prev = 0u64;
    let mut factorial = 1u64;
    for n in 1..=8u64 {
        factorial *= n;
        let recursion = if n == 1 { 2 } else { n * m_prev + 2 };
        // floor((e - 1) n!) = sum_{k=1}^{n} n!/k!, the tail being below 1.
        let exact: u64 = (1..=n).map(|k| factorial / (1..=k).product::<u64>()).sum();
        let float = ((E - 1.0) * factorial as f64).floor() as u64;
        let got = dimension(n as usize).unwrap() as u64;
        pass &= got == 2 * exact && got == 2 * float && got == recursion;
        m_prev = recursion;
    }
    let table: Vec<usize> = (1..=4).map(|n| dimension(n).unwrap()).collect();
    pass &= table == [2, 6, 20, 82];
    report(1, "dimension identity", pass, &format!("n<=4 table {table:?}"));
    assert!(pass);
}

fn metric_triples(stream: &mut SampleStream) -> (usize, usize) {
    let mut violations = 0;
    let mut mismatches = 0;
    for _ in 0..PAIRS {
        let scale = stream.log_scale(-2.0, 2.0);
        let a = stream.set().scale(scale).unwrap();
        let b = stream.set().scale(scale).unwrap();
        let c = stream.set().scale(scale).unwrap();
        let ab = hausdorff_distance(&a, &b).unwrap();
        let ba = hausdorff_distance(&b, &a).unwrap();
        let bc = hausdorff_distance(&b, &c).unwrap();
        let ac = hausdorff_distance(&a, &c).unwrap();
        let oracle = hausdorff_oracle(&rows(&a), &rows(&b));
        if (oracle - ab).abs() > 1e-12 * oracle.max(1.0) {
            mismatches += 1;
        }
        if ab != ba || ac > (ab + bc) * (1.0 + TRIANGLE_REL) {
            violations += 1;
        }
    }
    (violations, mismatches)
}

#[test]
fn criterion_02_hausdorff_axioms() {
    let line = MetricSampler::cube(2, 1, 1.0, 5).unwrap();
    let plane = MetricSampler::cube(2, 2, 1.0, 4).unwrap();
    let (v1, m1) = metric_triples(&mut line.stream());
    let (v2, m2) = metric_triples(&mut plane.stream());
    let pass = v1 + v2 + m1 + m2 == 0;
    report(
        2,
        "hausdorff axioms",
        pass,
        &format!("violations {} / {}, oracle mismatches {}", v1 + v2, 2 * PAIRS, m1 + m2),
    );
    assert!(pass);
}

/// `|t1 - t2| + min(t1, t2) |x1 - x2|`, recomputed here.
fn cone_oracle(t1: f64, x1: &[f64], t2: f64, x2: &[f64]) -> f64 {
    let d: f64 = x1.iter().zip(x2).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    (t1 - t2).abs() + t1.min(t2) * d
}

fn lift_oracle(t: f64, x: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = x.iter().map(|c| t * c).collect();
    v.push(1.0 - t);
    v
}

#[test]
fn criterion_03_cone_metric() {
    let space = disk_sample(128, 3);
    let mut stream = MetricSampler::cube(3, 1, 1.0, 1).unwrap().stream();
    let draw = |s: &mut SampleStream| -> (f64, usize) {
        let t = match s.rng().random_range(0..6) {
            0 => 0.0,
            _ => s.log_scale(-3.0, 2.0),
        };
        (t, s.rng().random_range(0..space.len()))
    };
    let dc = |p: (f64, usize), q: (f64, usize)| {
        symprod_core::cone_distance(
            &symprod_core::ConePoint { t: p.0, x: p.1 },
            &symprod_core::ConePoint { t: q.0, x: q.1 },
            |a: &usize, b: &usize| symprod_core::metric::euclidean(&space[*a], &space[*b]),
        )
        .unwrap()
    };
    let mut triangle_violations = 0;
    let mut oracle_mismatches = 0;
    for _ in 0..PAIRS {
        let (p, q, r) = (draw(&mut stream), draw(&mut stream), draw(&mut stream));
        if dc(p, r) > dc(p, q) + dc(q, r) + CONE_TRIANGLE_ABS {
            triangle_violations += 1;
        }
        let o = cone_oracle(p.0, &space[p.1], q.0, &space[q.1]);
        if (o - dc(p, q)).abs() > 1e-12 * o.max(1.0) {
            oracle_mismatches += 1;
        }
    }
    let mut lift_violations = 0;
    for _ in 0..PAIRS {
        let (p, q) = (draw(&mut stream), draw(&mut stream));
        let d = cone_oracle(p.0, &space[p.1], q.0, &space[q.1]);
        if d <= 1e-12 {
            continue;
        }
        let rho = hausdorff_oracle(&[lift_oracle(p.0, &space[p.1])], &[lift_oracle(q.0, &space[q.1])]);
        if rho > 10.0 * d || d > 12.0 * rho {
            lift_violations += 1;
        }
    }
    let lib = check_cone_comparison(&space, 0, PAIRS, 3).unwrap();
    let pass = triangle_violations + oracle_mismatches + lift_violations == 0 && lib.passed();
    report(
        3,
        "cone metric",
        pass,
        &format!(
            "triangle violations {triangle_violations}, lift violations {lift_violations}, \
             library ratios [{:.4}, {:.4}]",
            lib.min_ratio, lib.max_ratio
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_04_cone_scaling() {
    let mut stream = MetricSampler::cube(4, 1, 1.0, 5).unwrap().stream();
    let mut violations = 0;
    for _ in 0..PAIRS {
        let e1 = stream.pinned();
        let e2 = stream.pinned();
        let (t, t1, t2) = (stream.log_scale(-2.0, 2.0), stream.log_scale(-2.0, 2.0), stream.log_scale(-2.0, 2.0));
        let d = hausdorff_distance(&e1, &e2).unwrap();
        let dt = hausdorff_distance(&e1.scale(t).unwrap(), &e2.scale(t).unwrap()).unwrap();
        if (dt - t * d).abs() > SCALING_ABS * (1.0 + t * d) {
            violations += 1;
        }
        let mixed = hausdorff_distance(&e1.scale(t1).unwrap(), &e2.scale(t2).unwrap()).unwrap();
        if !leq((t1 - t2).abs(), mixed) {
            violations += 1;
        }
        let same = hausdorff_distance(&e1.scale(t1).unwrap(), &e1.scale(t2).unwrap()).unwrap();
        if !leq(same, (t1 - t2).abs()) {
            violations += 1;
        }
    }
    report(4, "cone scaling identities", violations == 0, &format!("violations {violations}"));
    assert_eq!(violations, 0);
}

/// Minimal consecutive gap of a sorted full-capacity set, recomputed here.
fn gap_oracle(xs: &[f64]) -> f64 {
    xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

fn retraction_checks(n: usize, a: &FinitePointSet, b: &FinitePointSet) -> usize {
    let mut bad = 0;
    let (ra, rb) = (retract_once(a, n).unwrap(), retract_once(b, n).unwrap());
    let delta = |s: &FinitePointSet| if s.cardinality() == n { gap_oracle(s.reals()) } else { 0.0 };
    for (s, r) in [(a, &ra), (b, &rb)] {
        if s.cardinality() < n && r != s {
            bad += 1;
        }
        if s.cardinality() == n && r.cardinality() > n - 1 {
            bad += 1;
        }
        if min_gap(s, n).unwrap().delta != delta(s) {
            bad += 1;
        }
        let disp = hausdorff_oracle(&rows(s), &rows(r));
        if !leq(disp, n as f64 * delta(s)) {
            bad += 1;
        }
    }
    let d = hausdorff_oracle(&rows(a), &rows(b));
    if !leq((delta(a) - delta(b)).abs(), 2.0 * d) {
        bad += 1;
    }
    if !leq(hausdorff_oracle(&rows(&ra), &rows(&rb)), (6 * n + 1) as f64 * d) {
        bad += 1;
    }
    bad
}

#[test]
fn criterion_05_retraction() {
    let mut total = 0;
    let mut worst = Vec::new();
    for n in 2..=6 {
        let sampler = MetricSampler::cube(50 + n as u64, 1, 1.0, n).unwrap();
        let mut stream = sampler.stream();
        for i in 0..PAIRS {
            let scale = stream.log_scale(-2.0, 2.0);
            let a = stream.set().scale(scale).unwrap();
            let b = if i % 2 == 0 {
                stream.set().scale(scale).unwrap()
            } else {
                let eps = scale * stream.log_scale(-4.0, -1.0);
                let rng = stream.rng();
                let moved: Vec<f64> = a.reals().iter().map(|x| x + eps * (rng.random::<f64>() - 0.5)).collect();
                FinitePointSet::from_reals(&moved).unwrap()
            };
            total += retraction_checks(n, &a, &b);
        }
        let map = RetractionMap { n };
        let start = estimate_distortion(&map, &sampler, PAIRS).unwrap();
        let searched = adversarial_search(&map, &start, SEARCH, 0.2, n as u64);
        for w in [&searched.witness_low, &searched.witness_high] {
            total += retraction_checks(n, &w.a, &w.b);
        }
        if !leq(searched.upper_ratio, lipschitz_bound(n)) {
            total += 1;
        }
        worst.push(format!("n={n}: {:.3}", searched.upper_ratio));
    }
    report(
        5,
        "retraction",
        total == 0,
        &format!("violations {total}; worst Lipschitz ratios {}", worst.join(", ")),
    );
    assert_eq!(total, 0);
}

#[test]
fn criterion_06_tomography() {
    let mut pass = true;
    let mut details = Vec::new();
    for (q, d) in [(2, 2), (3, 2), (2, 3)] {
        let cert = separation_constant(&make_line_family(q, d).unwrap()).unwrap();
        let verified = verify_separation(&cert, PAIRS, 6).unwrap();
        let map = TomographyMap { certificate: cert.clone() };
        let sampler = MetricSampler::cube(6, d, 1.0, q).unwrap();
        let start = estimate_distortion(&map, &sampler, PAIRS).unwrap();
        let searched = adversarial_search(&map, &start, SEARCH, 0.2, 6);
        let lower_ok = leq(1.0 / cert.m, searched.lower_ratio);
        let upper_ok = leq(searched.upper_ratio, 1.0);
        pass &= verified.passed() && lower_ok && upper_ok;
        details.push(format!(
            "(q={q},d={d}) M={:.4} min ratio {:.4}",
            cert.m, searched.lower_ratio
        ));
    }
    let perpendicular = separation_constant(&make_line_family(1, 2).unwrap()).unwrap();
    let exact = 1.0 / (PI / 4.0).sin();
    assert!((exact - SQRT_2).abs() < 1e-15);
    let rel = perpendicular.m / exact - 1.0;
    let sqrt2_ok = perpendicular.m >= exact && rel <= PERPENDICULAR_REL + 1e-12;
    pass &= sqrt2_ok;
    details.push(format!("perpendicular M={:.6} (rel {rel:.2e})", perpendicular.m));
    report(6, "tomography", pass, &details.join("; "));
    assert!(pass);
}

#[test]
fn criterion_07_embedding() {
    let mut pass = true;
    let mut details = Vec::new();
    let expected_dims = [(2, 6), (3, 20), (4, 82)];
    for (n, dim) in expected_dims {
        let pipeline = build_pipeline(n).unwrap();
        let dims_ok = pipeline.output_dim() == dim && dim == dimension(n).unwrap();
        let map = EmbeddingMap { pipeline };
        let sampler = MetricSampler::cube(70 + n as u64, 1, 1.0, n).unwrap();
        let (start, pairs) = estimate_distortion_with_pairs(&map, &sampler, PAIRS).unwrap();
        let distinct = pairs.iter().all(|p| p.image_distance > 0.0);
        let searched = adversarial_search(&map, &start, SEARCH, 0.1, n as u64);
        let upper = searched.certified_upper.unwrap();
        let upper_ok = leq(searched.upper_ratio, upper) && leq(start.upper_ratio, upper);
        let positive = searched.lower_ratio > 0.0;
        pass &= dims_ok && distinct && upper_ok && positive;
        details.push(format!(
            "n={n}: dim {dim}, ratios [{:.3e}, {:.4}] <= {upper:.2}, low witness {:?} / {:?}",
            searched.lower_ratio, searched.upper_ratio, searched.witness_low.a, searched.witness_low.b
        ));
    }
    report(7, "embedding", pass, &details.join("; "));
    assert!(pass);
}

/// Point `k` of the image moves linearly with slope vector `w_k`, |w_k| <= L.
fn decomposition_instance(stream: &mut SampleStream, n: usize, k: usize) -> SampledMap {
    let l = stream.log_scale(-1.0, 0.5);
    let domain: Vec<Vec<f64>> = (0..8)
        .map(|_| (0..k).map(|_| stream.rng().random_range(-0.5..0.5)).collect())
        .collect();
    let d = {
        let mut d: f64 = 0.0;
        for p in &domain {
            for q in &domain {
                d = d.max(symprod_core::metric::euclidean(p, q));
            }
        }
        d
    };
    let ld = l * d;
    let card = stream.rng().random_range(2..=n);
    let mut centres = vec![0.0];
    for i in 1..card {
        let wide = i == 1 || stream.rng().random::<bool>();
        let gap = if wide {
            ld * (3.0 * n as f64 + 1.0) + stream.rng().random_range(0.1..10.0)
        } else {
            stream.rng().random_range(0.0..ld.max(1e-6))
        };
        centres.push(centres[i - 1] + gap);
    }
    let slopes: Vec<Vec<f64>> = (0..card)
        .map(|_| {
            let v: Vec<f64> = (0..k).map(|_| stream.rng().random_range(-1.0..1.0)).collect();
            let nv = symprod_core::metric::norm(&v).max(1e-12);
            let s = stream.rng().random_range(0.0..=1.0) * l / nv;
            v.into_iter().map(|c| c * s).collect()
        })
        .collect();
    let images = domain
        .iter()
        .map(|x| {
            let pts: Vec<f64> = centres
                .iter()
                .zip(&slopes)
                .map(|(c, w)| c + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
                .collect();
            FinitePointSet::from_reals(&pts).unwrap()
        })
        .collect();
    SampledMap::new(domain, images, l).unwrap()
}

fn lipschitz_oracle(f: &SampledMap) -> bool {
    let dom = f.domain();
    let img = f.images();
    for i in 0..dom.len() {
        for j in i + 1..dom.len() {
            let dx = hausdorff_oracle(&[dom[i].clone()], &[dom[j].clone()]);
            let dy = hausdorff_oracle(&rows(&img[i]), &rows(&img[j]));
            if !leq(dy, f.lipschitz() * dx) {
                return false;
            }
        }
    }
    true
}

#[test]
fn criterion_08_decomposition() {
    let mut stream = MetricSampler::cube(8, 1, 1.0, 1).unwrap().stream();
    let mut failures = Vec::new();
    for instance in 0..100 {
        let n = 2 + instance % 3;
        let k = 1 + instance % 2;
        let f = decomposition_instance(&mut stream, n, k);
        let threshold = 3.0 * f.lipschitz() * f.diameter() * (n - 1) as f64;
        assert!(f.images()[0].diameter() > threshold);
        match decompose_map(&f, n, 0) {
            Ok(parts) => {
                let union_ok = (0..f.len()).all(|i| parts.g.images()[i].union(&parts.h.images()[i]).unwrap() == f.images()[i]);
                let caps_ok = parts.g.max_cardinality() < n && parts.h.max_cardinality() < n;
                if !(union_ok && caps_ok && lipschitz_oracle(&parts.g) && lipschitz_oracle(&parts.h)) {
                    failures.push(instance);
                }
            }
            Err(_) => failures.push(instance),
        }
    }
    let r = |v: &[f64]| FinitePointSet::from_reals(v).unwrap();
    let worked = SampledMap::new(vec![vec![0.0], vec![1.0]], vec![r(&[0.0, 100.0]), r(&[0.5, 100.2])], 0.5).unwrap();
    let parts = decompose_map(&worked, 2, 0).unwrap();
    let worked_ok = parts.g.images() == [r(&[0.0]), r(&[0.5])] && parts.h.images() == [r(&[100.0]), r(&[100.2])];
    let pass = failures.is_empty() && worked_ok;
    report(
        8,
        "decomposition",
        pass,
        &format!("{} of 100 instances failed {failures:?}; worked instance ok: {worked_ok}", failures.len()),
    );
    assert!(pass);
}

fn extension_case(f: &SampledMap, n: usize, refine: usize) -> symprod_core::extension::Extension {
    ball_extension(
        f,
        n,
        ExtensionOptions {
            radial_steps: 64 * refine,
            neighbourhood: 0.1,
        },
    )
    .unwrap()
}

fn circle_map_case(step: f64, constant: bool) -> SampledMap {
    let circle = sphere_grid(2, step).unwrap();
    let r = |v: &[f64]| FinitePointSet::from_reals(v).unwrap();
    if constant {
        let images = vec![r(&[0.0, 0.7]); circle.len()];
        SampledMap::new(circle, images, 1.0).unwrap()
    } else {
        let images = circle.iter().map(|p| r(&[0.1 * p[0], 0.5 + 0.1 * p[1]])).collect();
        SampledMap::new(circle, images, 0.1).unwrap()
    }
}

#[test]
fn criterion_09_extension() {
    let mut pass = true;
    let mut details = Vec::new();
    for constant in [true, false] {
        let f = circle_map_case(PI / 64.0, constant);
        let ext = extension_case(&f, 2, 1);
        let boundary = ext.grid.boundary().zip(f.images()).all(|(i, img)| &ext.map.images()[i] == img);
        let top = ext.report.per_sphere.last().unwrap().lipschitz;
        let scaling = ext
            .report
            .per_sphere
            .iter()
            .all(|s| (s.lipschitz - s.radius * top).abs() <= PER_SPHERE_REL * top.max(f64::MIN_POSITIVE));
        let fine = extension_case(&circle_map_case(PI / 128.0, constant), 2, 2);
        let coarse_l = ext.report.grid_lipschitz;
        let fine_l = fine.report.grid_lipschitz;
        let change = (fine_l - coarse_l).abs() / coarse_l.max(f64::MIN_POSITIVE);
        let refine_ok = change < REFINEMENT_REL;
        pass &= boundary && ext.report.boundary_agrees && scaling && refine_ok;
        details.push(format!(
            "{}: boundary {boundary}, r-scaling {scaling}, constant {coarse_l:.4} -> {fine_l:.4} ({:.2}%)",
            if constant { "constant f" } else { "small f" },
            100.0 * change
        ));
    }
    report(9, "radial/ball extension", pass, &details.join("; "));
    assert!(pass);
}

fn run_twice(args: &[&str], name: &str) -> bool {
    let dir = tempfile::tempdir().unwrap();
    let outputs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let path = dir.path().join(format!("{name}-{i}.json"));
            let status = Command::new(env!("CARGO_BIN_EXE_symprod"))
                .args(args)
                .arg("--out")
                .arg(&path)
                .status()
                .unwrap();
            assert_eq!(status.code(), Some(0), "{args:?}");
            std::fs::read(&path).unwrap()
        })
        .collect();
    !outputs[0].is_empty() && outputs[0] == outputs[1]
}

#[test]
fn criterion_10_reproducibility() {
    let runs: [(&[&str], &str); 4] = [
        (&["cone-check", "--samples", "5000", "--seed", "10"], "cone"),
        (&["tomo", "--q", "2", "--d", "3", "--certify", "--samples", "2000", "--seed", "10"], "tomo"),
        (
            &["distortion", "--map", "embed", "--n", "3", "--samples", "2000", "--search", "500", "--seed", "10"],
            "embed",
        ),
        (
            &["distortion", "--map", "retract", "--n", "4", "--samples", "2000", "--search", "500", "--seed", "10"],
            "retract",
        ),
    ];
    let results: Vec<(String, bool)> = runs.iter().map(|(a, n)| (n.to_string(), run_twice(a, n))).collect();
    let pass = results.iter().all(|(_, ok)| *ok);
    report(10, "reproducibility", pass, &format!("{results:?}"));
    assert!(pass);
}
