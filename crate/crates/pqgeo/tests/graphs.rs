use nalgebra::{DMatrix, DVector};
use pqgeo::crowns::{orbit_point, maximality_test, AdaptedBasis};
use pqgeo::forms::QuadraticSpace;
use pqgeo::graphs::{
    graph_points, kernel_sphere, lipschitz_check, split_spacetime, timelike_distance, GraphDomain, GraphMap,
    LipschitzGraph, SplitFactor,
};
use pqgeo::model::{lift_nonpositive, omega_membership, pair_class, HalfspaceDomain, MembershipStatus, PairClass, Point, TimelikeFrame};
use pqgeo::sampling::{hemisphere, unit_sphere};
use pqgeo::{Error, Signature};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn e(n: usize, i: usize) -> DVector<f64> {
    DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 })
}

/// Boundary points over the rim `y0 = 0` of a hemisphere graph.
fn rim(g: &LipschitzGraph<f64>, n: usize, r: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    (0..n)
        .map(|_| {
            let s: DVector<f64> = unit_sphere(r, g.p());
            let mut u = DVector::zeros(g.p() + 1);
            u.rows_mut(1, g.p()).copy_from(&s);
            match g.lift(&u).unwrap() {
                Point::Boundary(b) => b.lift(),
                Point::Interior(_) => panic!("rim point lifted to the interior"),
            }
        })
        .collect()
}

#[test]
fn constant_graph_is_strict() {
    let g = LipschitzGraph::constant(2, 2, e(3, 1)).unwrap();
    let rep = lipschitz_check(&g, 500, &mut rng(1)).unwrap();
    assert_eq!(rep.max_ratio, 0.0);
    assert!(rep.strict);
    assert_eq!(rep.nonspacelike_pairs, 0);
}

#[test]
fn sqrt_family_is_strict() {
    for (p, q) in [(1, 1), (2, 1), (2, 2), (3, 2)] {
        let g = LipschitzGraph::<f64>::sqrt_family(p, q).unwrap();
        let rep = lipschitz_check(&g, 2000, &mut rng(2)).unwrap();
        assert!(rep.strict && rep.max_ratio < 1.0, "({p},{q}): {rep:?}");
        assert_eq!(rep.violating, 0);
        assert_eq!(rep.nonspacelike_pairs, 0);
        assert_eq!(rep.disagreements, 0);
    }
}

#[test]
fn isometric_embedding_is_weak() {
    let g = LipschitzGraph::<f64>::isometric_hemisphere(2, 3).unwrap();
    let rep = lipschitz_check(&g, 500, &mut rng(3)).unwrap();
    assert!((rep.max_ratio - 1.0).abs() < 1e-9);
    assert!(!rep.strict);
    assert_eq!(rep.violating, 0);
    assert_eq!(rep.timelike_pairs, 0);
    assert_eq!(rep.disagreements, 0);
}

#[test]
fn ratio_and_classification_agree() {
    let graphs = vec![
        LipschitzGraph::constant(2, 2, e(3, 0)).unwrap(),
        LipschitzGraph::sqrt_family(2, 2).unwrap(),
        LipschitzGraph::isometric_hemisphere(2, 2).unwrap(),
        LipschitzGraph::isometric_sphere(2, 2).unwrap(),
        LipschitzGraph::abs_sphere(3, 2).unwrap(),
        LipschitzGraph::constant_sphere(3, 1, e(2, 1)).unwrap(),
    ];
    for g in &graphs {
        let rep = lipschitz_check(g, 600, &mut rng(4)).unwrap();
        assert_eq!(rep.disagreements, 0, "{:?}", g.map());
        assert_eq!(rep.violating == 0, rep.timelike_pairs == 0);
    }
}

#[test]
fn lifted_points_are_on_the_quadric() {
    let g = LipschitzGraph::constant(2, 1, e(2, 0)).unwrap();
    let mut r = rng(5);
    let us = g.sample_domain(&mut r, 40);
    let pts = graph_points(&g, &us).unwrap();
    let hp: Vec<_> = pts
        .iter()
        .map(|p| match p {
            Point::Interior(h) => h.clone(),
            Point::Boundary(_) => panic!(),
        })
        .collect();
    for (i, x) in hp.iter().enumerate() {
        assert!((g.space().apply(&x.vec, &x.vec) + 1.0).abs() < 1e-12);
        for y in &hp[i + 1..] {
            assert_eq!(pair_class(g.space(), x, y), PairClass::Spacelike);
        }
    }
    let s = LipschitzGraph::<f64>::abs_sphere(2, 2).unwrap();
    for p in graph_points(&s, &s.sample_domain(&mut r, 20)).unwrap() {
        let v = p.vector();
        assert!(s.space().apply(&v, &v).abs() < 1e-12 * v.norm_squared());
    }
}

#[test]
fn sphere_graphs_lift_coherently() {
    let mut r = rng(6);
    for g in [
        LipschitzGraph::<f64>::isometric_sphere(3, 2).unwrap(),
        LipschitzGraph::abs_sphere(3, 3).unwrap(),
        LipschitzGraph::constant_sphere(2, 2, e(3, 2)).unwrap(),
    ] {
        let pts: Vec<DVector<f64>> =
            graph_points(&g, &g.sample_domain(&mut r, 30)).unwrap().iter().map(|p| p.vector()).collect();
        assert!(lift_nonpositive(g.space(), &pts).unwrap().vectors().is_some());
    }
}

#[test]
fn sqrt_family_lies_in_omega() {
    let mut r = rng(7);
    let g = LipschitzGraph::<f64>::sqrt_family(2, 2).unwrap();
    let lam = rim(&g, 60, &mut r);
    let lifted = lift_nonpositive(g.space(), &lam).unwrap().vectors().unwrap().to_vec();
    let interior: Vec<DVector<f64>> = (0..200).map(|_| g.lift(&hemisphere(&mut r, 2)).unwrap().vector()).collect();
    // the coherent lift is fixed up to a global sign
    let mut dom = HalfspaceDomain::new(lifted.clone()).unwrap();
    if omega_membership(g.space(), &dom, &interior[0]).unwrap().status == MembershipStatus::Outside {
        dom = HalfspaceDomain::new(lifted.iter().map(|v| -v).collect()).unwrap();
    }
    for x in &interior {
        assert_eq!(omega_membership(g.space(), &dom, x).unwrap().status, MembershipStatus::Interior);
    }
}

fn antipodal(mut pts: Vec<DVector<f64>>) -> Vec<DVector<f64>> {
    let neg: Vec<_> = pts.iter().map(|u| -u).collect();
    pts.extend(neg);
    pts
}

#[test]
fn kernel_sphere_examples() {
    let mut r = rng(8);
    let iso = LipschitzGraph::<f64>::isometric_sphere(3, 3).unwrap();
    let ks = kernel_sphere(&iso, &iso.sample_domain(&mut r, 30)).unwrap();
    assert_eq!(ks.k, 3);
    assert_eq!(ks.samples.len(), 60);
    assert!(ks.consistent());

    let abs = LipschitzGraph::<f64>::abs_sphere(3, 3).unwrap();
    let ks = kernel_sphere(&abs, &abs.sample_domain(&mut r, 30)).unwrap();
    assert_eq!(ks.k, 0);
    assert_eq!(ks.span_signature, Signature::new(3, 3, 0));

    let c = LipschitzGraph::constant_sphere(3, 2, e(3, 0)).unwrap();
    let ks = kernel_sphere(&c, &c.sample_domain(&mut r, 30)).unwrap();
    assert_eq!(ks.k, 0);
    assert!(ks.consistent());

    let one_sided = vec![e(3, 0), e(3, 1)];
    assert!(matches!(kernel_sphere(&iso, &one_sided), Err(Error::NotAntipodal)));
}

/// Random orthogonal matrix from QR of a Gaussian matrix.
fn rotation(r: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let cols: Vec<DVector<f64>> = (0..n).map(|_| unit_sphere(r, n)).collect();
    DMatrix::from_columns(&cols).qr().q()
}

#[test]
fn kernel_dimension_matches_null_count() {
    let mut r = rng(9);
    for _ in 0..20 {
        let p = r.random_range(2..5);
        let q = r.random_range(p - 1..p + 2);
        let k = r.random_range(0..=p);
        let rot = rotation(&mut r, q + 1);
        // identity on the first k coordinates, absolute value on the rest
        let f = |u: &DVector<f64>| {
            let mut out = DVector::zeros(q + 1);
            for i in 0..p {
                out[i] = if i < k { u[i] } else { u[i].abs() };
            }
            &rot * out
        };
        let mut us: Vec<DVector<f64>> = (0..25).map(|_| unit_sphere(&mut r, p)).collect();
        for _ in 0..10 {
            if k > 0 {
                let s: DVector<f64> = unit_sphere(&mut r, k);
                let mut u = DVector::zeros(p);
                u.rows_mut(0, k).copy_from(&s);
                us.push(u);
            }
        }
        let us = antipodal(us);
        let table = us.iter().map(|u| (u.clone(), f(u))).collect();
        let space = QuadraticSpace::standard(p, q + 1);
        let frame = TimelikeFrame::for_space(&space).unwrap();
        let g = LipschitzGraph::new(space, frame, GraphDomain::Sphere, GraphMap::Table(table)).unwrap();
        let ks = kernel_sphere(&g, &us).unwrap();
        assert_eq!(ks.k, k, "p={p} q={q}");
        assert!(ks.consistent(), "k={k} span {}", ks.span_signature);
    }
}

fn geodesic_factor(n: usize, pos: usize, neg: usize, m: usize) -> SplitFactor<f64> {
    let points = (0..m)
        .map(|i| {
            let s = -2.0 + 4.0 * i as f64 / (m - 1) as f64;
            e(n, pos) * s.sinh() + e(n, neg) * s.cosh()
        })
        .collect();
    SplitFactor { basis: vec![e(n, pos), e(n, neg)], points }
}

#[test]
fn split_single_factor_is_identity() {
    let space = QuadraticSpace::<f64>::standard(1, 1);
    let f = geodesic_factor(2, 0, 1, 7);
    let s = split_spacetime(&space, std::slice::from_ref(&f)).unwrap();
    assert_eq!(s.points, f.points);
}

#[test]
fn split_geodesic_factors_are_spacelike() {
    let space = QuadraticSpace::<f64>::standard(2, 2);
    let s = split_spacetime(&space, &[geodesic_factor(4, 0, 2, 9), geodesic_factor(4, 1, 3, 9)]).unwrap();
    assert_eq!(s.points.len(), 81);
    assert_eq!(s.factor_signatures, vec![Signature::new(1, 1, 0); 2]);
    for v in &s.points {
        assert!((space.apply(v, v) + 1.0).abs() < 1e-12);
    }
    let rep = lipschitz_check(&s.graph, 10_000, &mut rng(10)).unwrap();
    assert_eq!(rep.timelike_pairs, 0);
    assert_eq!(rep.violating, 0);
}

#[test]
fn split_of_lines_is_a_maximal_crown_orbit() {
    let p = 3;
    let n = 2 * p;
    let space = QuadraticSpace::<f64>::standard(p, p);
    let factors: Vec<_> = (0..p).map(|i| geodesic_factor(n, i, p + i, 4)).collect();
    let s = split_spacetime(&space, &factors).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut vecs: Vec<DVector<f64>> = (0..p).map(|i| (e(n, p + i) + e(n, i)) * h).collect();
    vecs.extend((0..p).map(|i| (e(n, p + i) - e(n, i)) * h));
    let basis = AdaptedBasis::new(&space, vecs.clone()).unwrap();
    let m = DMatrix::from_columns(&vecs);
    for v in &s.points {
        let c = m.clone().lu().solve(v).unwrap();
        assert!(c.iter().all(|&x| x > 0.0));
        let op = orbit_point(&basis, c.as_slice(), &vec![0.0; p], false).unwrap();
        assert!(maximality_test(&op));
    }
}

#[test]
fn split_rejects_bad_factors() {
    let space = QuadraticSpace::<f64>::standard(2, 2);
    let mut skew = geodesic_factor(4, 1, 3, 3);
    skew.basis[0] = e(4, 1) + e(4, 0) * 0.5;
    let r = split_spacetime(&space, &[geodesic_factor(4, 0, 2, 3), skew]);
    assert!(matches!(r, Err(Error::Precondition(_))));
    let positive = SplitFactor { basis: vec![e(4, 0), e(4, 1)], points: vec![e(4, 0)] };
    let r = split_spacetime(&space, &[positive, SplitFactor { basis: vec![e(4, 2), e(4, 3)], points: vec![e(4, 2)] }]);
    assert!(matches!(r, Err(Error::Precondition(_))));
}

#[test]
fn timelike_distance_of_geodesic_copy() {
    let mut r = rng(11);
    let g = LipschitzGraph::constant(2, 1, e(2, 0)).unwrap();
    let lam = rim(&g, 30, &mut r);
    let base: Vec<_> = (0..10).map(|_| hemisphere(&mut r, 2)).collect();
    let d = timelike_distance(&g, &base, &lam, 16).unwrap();
    assert!((d.d - std::f64::consts::FRAC_PI_2).abs() < 1e-6, "{}", d.d);
}

#[test]
fn timelike_distance_is_a_minimum() {
    let mut r = rng(12);
    let g = LipschitzGraph::<f64>::sqrt_family(2, 1).unwrap();
    let lam = rim(&g, 20, &mut r);
    let base: Vec<_> = (0..5).map(|_| hemisphere(&mut r, 2)).collect();
    let d = timelike_distance(&g, &base, &lam, 8).unwrap();
    assert!(d.d > 0.0);
    for b in &base {
        for l in &lam {
            let one = timelike_distance(&g, std::slice::from_ref(b), std::slice::from_ref(l), 8).unwrap();
            assert!(d.d <= one.d);
        }
    }
}
