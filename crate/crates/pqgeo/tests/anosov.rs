use nalgebra::{DMatrix, DVector};
use pqgeo::anosov::{
    gap_series, jordan_projection, limit_cone_sample, negativity_test, proximality_class, sample_limit_set,
    NegativityVerdict,
};
use pqgeo::forms::QuadraticSpace;
use pqgeo::groups::bending::boost;
use pqgeo::groups::words::word_ball;
use pqgeo::Error;

fn diag(x: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(x))
}

fn rotation(n: usize, i: usize, k: usize, t: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(n, n);
    m[(i, i)] = t.cos();
    m[(k, k)] = t.cos();
    m[(i, k)] = -t.sin();
    m[(k, i)] = t.sin();
    m
}

#[test]
fn jordan_examples() {
    let g = diag(&[2f64.exp(), 1f64.exp(), 1.0, (-1f64).exp(), (-2f64).exp()]);
    let j = jordan_projection(&g, 2).unwrap();
    assert!((j[0] - 2.0).abs() < 1e-12 && (j[1] - 1.0).abs() < 1e-12);
    assert_eq!(jordan_projection(&DMatrix::<f64>::identity(4, 4), 3).unwrap(), vec![0.0; 3]);
    let mut m = rotation(4, 0, 1, 0.7);
    m[(2, 2)] = 3.0;
    m[(3, 3)] = 1.0 / 3.0;
    let j = jordan_projection(&m, 2).unwrap();
    assert!((j[0] - 3f64.ln()).abs() < 1e-12 && j[1].abs() < 1e-12);
    assert!(matches!(jordan_projection(&diag(&[1.0, 0.0]), 1), Err(Error::Singular)));
}

#[test]
fn proximality_examples() {
    let c = proximality_class(&diag(&[2.0, 1.0, 0.5])).unwrap();
    assert!(c.proximal && c.positively_proximal && c.semi_proximal && c.positively_semi_proximal);
    let c = proximality_class(&diag(&[-2.0, 1.0, 0.5])).unwrap();
    assert!(c.proximal && c.semi_proximal && !c.positively_semi_proximal && !c.positively_proximal);
    let mut m = rotation(3, 0, 1, 1.0);
    m[(2, 2)] = 1.0;
    let c = proximality_class(&m).unwrap();
    assert!(!c.proximal && c.positively_semi_proximal);
    let c = proximality_class(&diag(&[2.0, 2.0 * (1.0 - 5e-7), 1.0])).unwrap();
    assert!(c.undecided);
    assert!(!proximality_class(&diag(&[2.0, 1.0, 0.5])).unwrap().undecided);
}

#[test]
fn gap_grows_linearly_on_powers() {
    let ball = word_ball(&[boost::<f64>(3, 0, 2, 2.0)], 4).unwrap();
    let gs = gap_series(&ball).unwrap();
    assert_eq!(gs.max_len(), 4);
    for l in 1..=4 {
        // the class of g^l and of g^-l
        assert_eq!(gs.count[l - 1], 2);
        assert!((gs.min[l - 1].unwrap() - 2.0 * l as f64).abs() < 1e-9);
    }
}

#[test]
fn elliptic_generator_has_zero_gap() {
    let ball = word_ball(&[rotation(4, 0, 1, 0.9), boost::<f64>(4, 0, 2, 1.0)], 2).unwrap();
    let gs = gap_series(&ball).unwrap();
    assert!(gs.min[0].unwrap().abs() < 1e-9);
}

fn schottky() -> Vec<DMatrix<f64>> {
    let a = boost::<f64>(4, 0, 2, 2.0);
    let shift = boost::<f64>(4, 1, 2, 2.0);
    let b = &shift * &a * shift.clone().try_inverse().unwrap();
    vec![a, b]
}

#[test]
fn schottky_gaps_are_monotone() {
    let ball = word_ball(&schottky(), 5).unwrap();
    let gs = gap_series(&ball).unwrap();
    let mins: Vec<f64> = gs.min.iter().map(|m| m.unwrap()).collect();
    assert!(mins.windows(2).all(|w| w[1] >= w[0]), "{mins:?}");
}

#[test]
fn proximal_element_has_two_limit_points() {
    let space = QuadraticSpace::<f64>::standard(1, 2);
    let ball = word_ball(&[boost::<f64>(3, 0, 1, 1.0)], 3).unwrap();
    let ls = sample_limit_set(&space, &ball, 0.5).unwrap();
    assert_eq!(ls.points.len(), 2);
    for (x, &src) in ls.points.iter().zip(&ls.sources) {
        assert!(space.apply(x, x).abs() < 1e-8);
        let g = &ball.elements[src].matrix;
        let gx = g * x;
        let mu = gx.dot(x);
        assert!((gx - x * mu).norm() <= 1e-6 * x.norm() * mu.abs());
    }
}

#[test]
fn identity_ball_has_no_limit_points() {
    let space = QuadraticSpace::<f64>::standard(2, 2);
    let ball = word_ball(&[DMatrix::identity(4, 4)], 3).unwrap();
    assert_eq!(ball.len(), 1);
    assert!(sample_limit_set(&space, &ball, 0.1).unwrap().points.is_empty());
    let bad = word_ball(&[diag(&[2.0, 1.0, 1.0, 1.0])], 1).unwrap();
    assert!(matches!(sample_limit_set(&space, &bad, 0.1), Err(Error::NotFormPreserving(_))));
}

#[test]
fn schottky_limit_set_grows() {
    let space = QuadraticSpace::<f64>::standard(2, 2);
    let mut prev = 0;
    for l in 2..=5 {
        let ball = word_ball(&schottky(), l).unwrap();
        let ls = sample_limit_set(&space, &ball, 1.0).unwrap();
        assert!(ls.points.len() > prev);
        prev = ls.points.len();
        for x in &ls.points {
            assert!(space.apply(x, x).abs() < 1e-8);
            // the Fuchsian group fixes the last coordinate
            assert!(x[3].abs() < 1e-8);
        }
    }
}

#[test]
fn negativity_examples() {
    let s = QuadraticSpace::<f64>::diagonal(&[1.0, -1.0, -1.0]);
    let pts = [DVector::from_vec(vec![1.0, 0.0, 1.0]), DVector::from_vec(vec![-1.0, 0.0, 1.0])];
    let r = negativity_test(&s, &pts).unwrap();
    assert_eq!(r.verdict, NegativityVerdict::Negative);
    assert_eq!(r.margin, 2.0);

    let s4 = QuadraticSpace::<f64>::standard(2, 2);
    let crown: Vec<DVector<f64>> = [[1., 0., 1., 0.], [1., 0., -1., 0.], [0., 1., 0., 1.], [0., 1., 0., -1.]]
        .iter()
        .map(|x| DVector::from_column_slice(x))
        .collect();
    assert_eq!(negativity_test(&s4, &crown).unwrap().verdict, NegativityVerdict::NonPositiveOnly);

    // three points with pairwise positive pairings
    let t = [[1., 0., 1., 0.], [1., 0., -0.5, 0.8660254037844386], [1., 0., -0.5, -0.8660254037844386]];
    let tri: Vec<DVector<f64>> = t.iter().map(|x| DVector::from_column_slice(x)).collect();
    for i in 0..3 {
        for j in i + 1..3 {
            assert!(s4.apply(&tri[i], &tri[j]) > 0.0);
        }
    }
    let r = negativity_test(&s4, &tri).unwrap();
    assert_eq!(r.verdict, NegativityVerdict::Inconsistent);
    assert_eq!(r.cycle.unwrap().len(), 3);
    assert!(negativity_test(&s4, &tri[..1]).is_err());
}

#[test]
fn cone_examples() {
    let ball = word_ball(&[boost::<f64>(4, 0, 2, 1.5)], 4).unwrap();
    assert_eq!(limit_cone_sample(&ball, 2).unwrap().len(), 1);

    let gens = vec![boost::<f64>(4, 0, 2, 1.0), boost::<f64>(4, 1, 3, 0.5)];
    let ball = word_ball(&gens, 4).unwrap();
    let rays = limit_cone_sample(&ball, 2).unwrap();
    assert!(rays.len() > 1);
    let spread = rays.iter().flat_map(|a| rays.iter().map(move |b| (a - b).norm())).fold(0.0, f64::max);
    assert!(spread > 0.1);

    let h = boost::<f64>(4, 0, 3, 0.4) * boost::<f64>(4, 1, 2, -0.8);
    let hinv = h.clone().try_inverse().unwrap();
    let conj: Vec<_> = gens.iter().map(|g| &h * g * &hinv).collect();
    let rays2 = limit_cone_sample(&word_ball(&conj, 4).unwrap(), 2).unwrap();
    assert_eq!(rays.len(), rays2.len());
    for r in &rays {
        assert!(rays2.iter().any(|s| (r - s).norm() < 1e-6));
    }
}

#[test]
fn stalling_schur_input_terminates() {
    // isometry of diag(1,1,-1,-1,-1) with two decoupled unit eigenvalues
    let v = [
        8.213764199374216, 0.0, 0.0, 7.277820730124681, -3.6741322435493533, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0,
        0.0, 5.406919858738031, 0.0, 0.0, 5.20018463224618, -1.7868581783024498, -6.101732537903137, 0.0, 0.0,
        -5.188906856977026, 3.3624969284331923,
    ];
    let h = DMatrix::<f64>::from_column_slice(5, 5, &v);
    let j = jordan_projection(&h, 2).unwrap();
    assert!((j[0] - 2.7544758827554077).abs() < 1e-9 && j[1].abs() < 1e-9);
}
