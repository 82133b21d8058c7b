use nalgebra::{DMatrix, DVector};
use pqgeo::forms::{signature, QuadraticSpace};
use pqgeo::groups::bending::{
    bend_all, bend_amalgam, bend_hnn, boost, toy_amalgam, toy_hnn, BendDatum, Edge, Factor,
};
use pqgeo::groups::coxeter::{
    cartan_matrix, det_roots, reflection_rep, signature_scan, leaf_cycle_diagram, CoxeterDiagram,
};
use pqgeo::groups::lie::{ad_image, bracket, canonical_x, diagonal_form, embed, lie_closure_dim, lie_residual, so_basis, so_dim};
use pqgeo::groups::polygon::{gt_polygon, polygon_alpha, polygon_deform};
use pqgeo::groups::words::word_ball;
use pqgeo::{Error, Signature};

fn id(n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n)
}

#[test]
fn cartan_entries() {
    let d = CoxeterDiagram::from_edges(5, &[(0, 1, Some(2)), (1, 2, Some(3)), (2, 3, Some(4)), (3, 4, None)]).unwrap();
    let a = cartan_matrix::<f64>(&d, 0.5);
    for i in 0..5 {
        assert_eq!(a[(i, i)], 2.0);
    }
    assert_eq!(a[(0, 1)], 0.0);
    assert!((a[(1, 2)] + 1.0).abs() < 1e-15);
    assert!((a[(2, 3)] + 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(a[(3, 4)], -2.5);
    assert_eq!(a, a.transpose());
}

#[test]
fn diagram_json() {
    let d = CoxeterDiagram::from_json(r#"{"N":3,"m":[[1,3,"inf"],[3,1,2],["inf",2,1]]}"#).unwrap();
    assert_eq!(d.m(0, 1), Some(3));
    assert_eq!(d.m(0, 2), None);
    assert_eq!(d.infinite_pairs(), vec![(0, 2)]);
    let back = CoxeterDiagram::from_json(&d.to_json().to_string()).unwrap();
    assert_eq!(back, d);
    assert!(matches!(CoxeterDiagram::from_json(r#"{"N":2,"m":[[1,3],[2,1]]}"#), Err(Error::UnsupportedDiagram(_))));
    assert!(matches!(CoxeterDiagram::from_json(r#"{"N":3,"m":[[1,3],[3,1]]}"#), Err(Error::Parse { .. })));
    assert!(CoxeterDiagram::from_json(r#"{"N":2,"m":[[1,1],[1,1]]}"#).is_err());
    assert!(CoxeterDiagram::from_json("not json").is_err());
}

#[test]
fn reflections_are_involutions() {
    let d = leaf_cycle_diagram(10, 11).unwrap();
    for t in [0.0, 0.5, 1.0, 3.0] {
        let rep = reflection_rep::<f64>(&d, t).unwrap();
        for g in &rep.generators {
            assert!((g * g - id(7)).amax() < 1e-10);
            assert!((g.transpose() * &rep.cartan * g - &rep.cartan).amax() < 1e-9);
        }
        assert!(rep.form_residual() < 1e-9);
    }
    let rep = reflection_rep::<f64>(&d, 1.0).unwrap();
    assert!(rep.relation_residual() < 1e-8);
    for i in 0..7 {
        for j in 0..7 {
            if d.m(i, j) == Some(2) {
                let (a, b) = (&rep.generators[i], &rep.generators[j]);
                assert!((a * b - b * a).amax() < 1e-12);
            }
        }
    }
}

#[test]
fn column_convention_preserves_the_transposed_form() {
    let d = leaf_cycle_diagram(10, 11).unwrap();
    let rep = reflection_rep::<f64>(&d, 1.0).unwrap();
    for g in rep.vinberg_generators() {
        assert!((&g * &rep.cartan * g.transpose() - &rep.cartan).amax() < 1e-9);
        assert!((&g * &g - id(7)).amax() < 1e-10);
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
fn det_oracle(mut m: DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&a, &b| m[(a, c)].abs().partial_cmp(&m[(b, c)].abs()).unwrap()).unwrap();
        if m[(p, c)] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap_rows(p, c);
            det = -det;
        }
        det *= m[(c, c)];
        for r in c + 1..n {
            let f = m[(r, c)] / m[(c, c)];
            for k in c..n {
                m[(r, k)] -= f * m[(c, k)];
            }
        }
    }
    det
}

/// Sign changes of `det(A_t)` on a fine grid, refined by bisection.
fn root_oracle(d: &CoxeterDiagram) -> Vec<f64> {
    let f = |t: f64| det_oracle(cartan_matrix(d, t));
    let mut roots = Vec::new();
    let steps = 20_000;
    for i in 0..steps {
        let (mut lo, mut hi) = (i as f64 * 10.0 / steps as f64, (i + 1) as f64 * 10.0 / steps as f64);
        if f(lo).signum() == f(hi).signum() {
            continue;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == f(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots
}

#[test]
fn det_roots_match_oracle() {
    for (k, l, frozen) in [(10, 11, (1.2360679775, 1.6821037985)), (12, 13, (1.1436474886, 4.0379673960))] {
        let d = leaf_cycle_diagram(k, l).unwrap();
        let oracle = root_oracle(&d);
        assert_eq!(oracle.len(), 2);
        assert!((oracle[0] - frozen.0).abs() < 1e-9 && (oracle[1] - frozen.1).abs() < 1e-9);
        let r = det_roots::<f64>(&d).unwrap();
        assert!(r.positive && r.coeffs[0] > 0.0);
        let (t1, t2) = r.roots.unwrap();
        assert!((t1 - frozen.0).abs() < 1e-9 && (t2 - frozen.1).abs() < 1e-9);
        for t in [t1, t2] {
            let a = cartan_matrix(&d, t);
            let scale = a.amax().powi(7);
            assert!(det_oracle(a.clone()).abs() <= 1e-9 * scale);
            assert_eq!(signature(&a, 1e-9).unwrap(), Signature::new(4, 2, 1));
        }
    }
}

#[test]
fn two_by_two_diagram() {
    let d = CoxeterDiagram::from_edges(2, &[(0, 1, None)]).unwrap();
    let r = det_roots::<f64>(&d).unwrap();
    let (lo, hi) = r.roots.unwrap();
    assert!((lo + 4.0).abs() < 1e-12 && hi.abs() < 1e-12);
    assert!(!r.positive);
    let none = CoxeterDiagram::from_edges(2, &[(0, 1, Some(3))]).unwrap();
    assert!(matches!(det_roots::<f64>(&none), Err(Error::UnsupportedDiagram(_))));
}

#[test]
fn signature_transitions() {
    let d = leaf_cycle_diagram(10, 11).unwrap();
    let (t1, t2) = det_roots::<f64>(&d).unwrap().roots.unwrap();
    let rows = signature_scan(&d, &[t1 / 2.0, t1, (t1 + t2) / 2.0, t2, t2 + 1.0]).unwrap();
    let sigs: Vec<Signature> = rows.iter().map(|r| r.signature).collect();
    assert_eq!(
        sigs,
        vec![
            Signature::new(5, 2, 0),
            Signature::new(4, 2, 1),
            Signature::new(4, 3, 0),
            Signature::new(4, 2, 1),
            Signature::new(5, 2, 0)
        ]
    );
    assert!(rows.iter().all(|r| r.relation_residual < 1e-8));
}

#[test]
fn canonical_x_examples() {
    let x = canonical_x::<f64>(2, 1, 2).unwrap();
    let mut want = DMatrix::zeros(5, 5);
    want[(0, 3)] = 1.0;
    want[(3, 0)] = 1.0;
    assert_eq!(x, want);
    assert_eq!(lie_residual(&x, &diagonal_form(2, 3)), 0.0);
    // centralizes the o(1,1) block on coordinates 1..=2
    let y = {
        let mut y = DMatrix::zeros(5, 5);
        y[(1, 2)] = 1.0;
        y[(2, 1)] = 1.0;
        y
    };
    assert_eq!(lie_residual(&y, &diagonal_form(2, 3)), 0.0);
    assert_eq!(bracket(&x, &y), DMatrix::zeros(5, 5));
    assert!(canonical_x::<f64>(2, 0, 2).is_err());
    assert!(canonical_x::<f64>(2, 3, 2).is_err());
}

#[test]
fn closure_dimensions() {
    let o21: Vec<DMatrix<f64>> = so_basis(2, 1).iter().map(|m| embed(m, 4).unwrap()).collect();
    let x = canonical_x(2, 1, 1).unwrap();
    let mut seeds = o21.clone();
    seeds.extend(ad_image(&x, &o21));
    assert_eq!(lie_closure_dim(&seeds).unwrap(), 6);
    assert_eq!(so_dim(2, 2), 6);
    for p in 1..4 {
        assert_eq!(lie_closure_dim(&so_basis::<f64>(p, 1)).unwrap(), (p + 1) * p / 2);
    }
    let mut n = DMatrix::zeros(3, 3);
    n[(0, 1)] = 1.0;
    assert_eq!(lie_closure_dim(&[n]).unwrap(), 1);
    // monotone in the seeds
    assert!(lie_closure_dim(&o21).unwrap() <= lie_closure_dim(&seeds).unwrap());
}

#[test]
fn closure_reaches_the_larger_algebra() {
    for (p, q) in [(2, 1), (2, 2), (3, 1), (3, 2)] {
        let n = p + q + 1;
        let base: Vec<DMatrix<f64>> = so_basis(p, q).iter().map(|m| embed(m, n).unwrap()).collect();
        let x = canonical_x(p, q, q).unwrap();
        let mut seeds = base.clone();
        seeds.extend(ad_image(&x, &base));
        assert_eq!(lie_closure_dim(&seeds).unwrap(), so_dim(p, q + 1), "({p},{q})");
    }
}

#[test]
fn polygon_examples() {
    let p = gt_polygon::<f64>(3, 2, 1).unwrap();
    assert_eq!(p.alpha, 2.0);
    assert_eq!(p.vertices.len(), 6);
    let v0 = p.vertex(0);
    assert!((v0 - DVector::from_vec(vec![2f64.sqrt(), 0.0, 1.0])).norm() < 1e-15);
    assert_eq!(p.pairing(0, 1), 0.0);
    assert_eq!(p.pairing(0, 0), 1.0);
    let p4 = gt_polygon::<f64>(4, 2, 2).unwrap();
    assert!((p4.alpha - (2.0 + 2f64.sqrt())).abs() < 1e-12);
    assert!(p4.identity_residual() < 1e-12);
    assert_eq!(p4.vertex(8), p4.vertex(0));
    assert!(matches!(gt_polygon::<f64>(3, 3, 1), Err(Error::Precondition(_))));
}

#[test]
fn polygon_scan() {
    for k in 3..=12u32 {
        for n in 2..k {
            let p = gt_polygon::<f64>(k, n, 2).unwrap();
            assert!(p.identity_residual() <= 1e-12, "({k},{n})");
            assert!(p.triples_independent());
            assert!((p.alpha - polygon_alpha::<f64>(k, n)).abs() == 0.0);
        }
    }
}

fn solve_base(space: &QuadraticSpace<f64>, v0: &DVector<f64>, v2: &DVector<f64>, alpha: f64) -> DVector<f64> {
    let g = nalgebra::Matrix2::new(space.apply(v0, v0), space.apply(v0, v2), space.apply(v2, v0), space.apply(v2, v2));
    let c = g.try_inverse().unwrap() * nalgebra::Vector2::new(alpha, alpha);
    v0 * c[0] + v2 * c[1]
}

#[test]
fn deformation_contains_the_polygon_vertex() {
    let p = gt_polygon::<f64>(5, 3, 3).unwrap();
    let s = &p.space;
    let (v0, v1, v2) = (p.vertex(0), p.vertex(1), p.vertex(2));
    let alpha = 0.5;
    let base = solve_base(s, &v0, &v2, alpha);
    let off = &v1 - &base;
    let e = &off / (-s.apply(&off, &off)).sqrt();
    let fam = polygon_deform(s, &v0, &v2, alpha, &e).unwrap();
    assert!((fam.member(0.0).unwrap() - &v1).norm() < 1e-12);
    for t in [0.3, 1.0, 2.5] {
        let m = fam.member(t).unwrap();
        assert!((s.apply(&m, &m) - 1.0).abs() < 1e-12);
        assert!((s.apply(&m, &v0) - alpha).abs() < 1e-12 && (s.apply(&m, &v2) - alpha).abs() < 1e-12);
    }
    // transitivity
    let j = s.gram();
    for (s1, s2) in [(0.0, 1.0), (0.7, -2.0)] {
        let g = fam.transport(s1, s2).unwrap();
        assert!((g.transpose() * j * &g - j).amax() < 1e-10);
        assert!((&g * &v0 - &v0).norm() < 1e-10 && (&g * &v2 - &v2).norm() < 1e-10);
        assert!((&g * fam.member(s1).unwrap() - fam.member(s2).unwrap()).norm() < 1e-10);
    }
}

#[test]
fn deformation_boundary_and_deficit() {
    let p = gt_polygon::<f64>(5, 3, 2).unwrap();
    let s = &p.space;
    let (v0, v2) = (p.vertex(0), p.vertex(2));
    let beta = s.apply(&v0, &v2);
    // b(v1', v1') = 1 exactly when alpha = sqrt((1 + beta)/2)
    let alpha = ((1.0 + beta) / 2.0).sqrt();
    let base = solve_base(s, &v0, &v2, alpha);
    let rest = s.orthogonal_complement(&[v0.clone(), v2.clone()]).unwrap();
    let (_, neg) = s.orthonormal_basis(&rest).unwrap();
    let fam = polygon_deform(s, &v0, &v2, alpha, &neg[0]).unwrap();
    assert!(fam.radius < 1e-6);
    assert!((fam.member(1.0).unwrap() - &base).norm() < 1e-6);
    match polygon_deform(s, &v0, &v2, 0.5 * alpha, &neg[0]) {
        Err(Error::NoSolution { deficit }) => assert!(deficit > 0.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn word_ball_counts() {
    let g = boost::<f64>(3, 0, 2, 1.0);
    assert_eq!(word_ball(&[g], 4).unwrap().len(), 9);
    let d = CoxeterDiagram::from_edges(2, &[(0, 1, Some(3))]).unwrap();
    let rep = reflection_rep::<f64>(&d, 0.0).unwrap();
    let ball = word_ball(&rep.generators, 6).unwrap();
    assert_eq!(ball.len(), 6);
    let a = boost::<f64>(4, 0, 2, 2.0);
    let shift = boost::<f64>(4, 1, 2, 2.0);
    let b = &shift * &a * shift.clone().try_inverse().unwrap();
    let ball = word_ball(&[a, b], 3).unwrap();
    assert_eq!(ball.len(), 53);
    assert_eq!(ball.sphere(3).count(), 36);
    for el in &ball.elements {
        assert!((ball.evaluate(&el.word) - &el.matrix).amax() < 1e-9 * el.matrix.amax());
    }
    assert!(matches!(word_ball(&[DMatrix::<f64>::zeros(2, 2)], 2), Err(Error::Singular)));
}

#[test]
fn bending_amalgam() {
    let d = toy_amalgam::<f64>();
    assert_eq!(bend_amalgam(&d, &d.generators, 1, 0.0).unwrap(), d.generators);
    for s in [0.1, 0.5, 1.0, 2.0] {
        let g = bend_all(&d, s).unwrap();
        assert!((&g[3] - &d.generators[3]).amax() < 1e-12);
        assert!(d.relation_residual(&g).unwrap() < 1e-8);
        assert!(d.form_residual(&g) < 1e-9);
    }
    assert!((&bend_all(&d, 0.5).unwrap()[2] - &d.generators[2]).amax() > 1e-3);
}

#[test]
fn bending_hnn() {
    let d = toy_hnn::<f64>();
    assert_eq!(bend_hnn(&d, &d.generators, 0, 0.0).unwrap(), d.generators);
    let before = d.relation_residual(&d.generators).unwrap();
    for s in [0.1, 1.0, 3.0] {
        let g = bend_hnn(&d, &d.generators, 0, s).unwrap();
        assert!((d.relation_residual(&g).unwrap() - before).abs() < 1e-10 * g[2].amax().powi(2));
        assert!(d.form_residual(&g) < 1e-9);
    }
}

#[test]
fn chain_product_order() {
    let j = diagonal_form::<f64>(2, 2);
    let x0 = canonical_x::<f64>(2, 1, 1).unwrap();
    let mut x1 = DMatrix::zeros(4, 4);
    x1[(1, 3)] = 1.0;
    x1[(3, 1)] = 1.0;
    let a = boost(4, 0, 2, 1.0);
    let d = BendDatum::new(
        j,
        vec![a.clone()],
        vec![Edge { direction: x0.clone(), group: vec![] }, Edge { direction: x1.clone(), group: vec![] }],
        vec![Factor { generators: vec![0], chain: vec![0, 1] }],
        vec![],
        vec![],
    )
    .unwrap();
    let s = 0.3;
    let h = (&x0 * s).exp() * (&x1 * s).exp();
    let want = &h * &a * h.clone().try_inverse().unwrap();
    let got = bend_amalgam(&d, &d.generators, 0, s).unwrap();
    assert!((&got[0] - want).amax() < 1e-12);
}

#[test]
fn bending_errors() {
    let d = toy_amalgam::<f64>();
    let bad = Edge { direction: canonical_x(2, 1, 1).unwrap(), group: vec![0] };
    let r = BendDatum::new(d.form.clone(), d.generators.clone(), vec![bad], vec![], vec![], vec![]);
    assert!(matches!(r, Err(Error::NotCentralizing(_))));
    let mut gens = d.generators.clone();
    gens[0][(0, 0)] += 0.1;
    let r = BendDatum::new(d.form.clone(), gens, vec![], vec![], vec![], vec![]);
    assert!(matches!(r, Err(Error::NotFormPreserving(_))));
    assert!(matches!(bend_amalgam(&d, &d.generators, 9, 0.1), Err(Error::OutOfRange { .. })));
    let json = d.to_json().to_string();
    let back = BendDatum::<f64>::from_json(&json).unwrap();
    assert_eq!(back.generators, d.generators);
}
