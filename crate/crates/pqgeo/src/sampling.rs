//! Random and quasi-random point generators.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::model::{HPoint, TimelikeFrame};
use crate::scalar::{lit, Real};

/// Uniform point on the unit sphere of `R^n`.
pub fn unit_sphere<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<T> {
    loop {
        let v: DVector<f64> = DVector::from_fn(n, |_, _| rng.sample(StandardNormal));
        let norm = v.norm();
        if norm > 1e-12 {
            return v.map(|x| lit(x / norm));
        }
    }
}

/// Uniform point of the open upper hemisphere of `S^p` (first coordinate positive).
pub fn hemisphere<T: Real, R: Rng + ?Sized>(rng: &mut R, p: usize) -> DVector<T> {
    loop {
        let mut u: DVector<T> = unit_sphere(rng, p + 1);
        u[0] = u[0].abs();
        if u[0] > T::zero() {
            return u;
        }
    }
}

/// Random point of the quadric: Gaussian spacelike frame coordinates with
/// standard deviation `spread`, timelike part on a uniform direction.
pub fn random_hpoint<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    frame: &TimelikeFrame<T>,
    spread: f64,
) -> HPoint<T> {
    let p = frame.p();
    let q = frame.q();
    let s: Vec<f64> = (0..p).map(|_| spread * rng.sample::<f64, _>(StandardNormal)).collect();
    let r = (1.0 + s.iter().map(|x| x * x).sum::<f64>()).sqrt();
    let dir: DVector<T> = unit_sphere(rng, q + 1);
    let mut c = DVector::zeros(p + q + 1);
    for i in 0..p {
        c[i] = lit(s[i]);
    }
    for i in 0..=q {
        c[p + i] = dir[i] * lit(r);
    }
    HPoint { vec: frame.from_coords(&c), projective: false }
}

/// `n` quasi-uniform unit vectors in `R^dim`.
///
/// Dimension 1 gives `+-1`, dimension 2 equally spaced angles, dimension 3 a
/// Fibonacci spiral; higher dimensions push an additive golden-ratio sequence
/// through Box-Muller.
pub fn quasi_uniform_directions<T: Real>(dim: usize, n: usize) -> Vec<DVector<T>> {
    let tau = std::f64::consts::TAU;
    match dim {
        0 => Vec::new(),
        1 => (0..n.clamp(1, 2))
            .map(|k| DVector::from_element(1, lit(if k == 0 { 1.0 } else { -1.0 })))
            .collect(),
        2 => (0..n)
            .map(|k| {
                let a = tau * k as f64 / n as f64;
                DVector::from_vec(vec![lit(a.cos()), lit(a.sin())])
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    DVector::from_vec(vec![lit(rho * a.cos()), lit(rho * a.sin()), lit(z)])
                })
                .collect()
        }
        _ => {
            // R_d sequence: generalized golden ratio phi_d with phi^(d+1) = phi + 1
            let m = dim.div_ceil(2) * 2;
            let mut phi = 2.0f64;
            for _ in 0..64 {
                phi = (1.0 + phi).powf(1.0 / (m as f64 + 1.0));
            }
            let alpha: Vec<f64> = (1..=m).map(|i| (1.0 / phi.powi(i as i32)).fract()).collect();
            (0..n)
                .map(|k| {
                    let uni: Vec<f64> =
                        alpha.iter().map(|a| (0.5 + a * (k + 1) as f64).fract()).collect();
                    let mut g = Vec::with_capacity(m);
                    for pair in uni.chunks(2) {
                        let r = (-2.0 * (1.0 - pair[0]).ln()).sqrt();
                        g.push(r * (tau * pair[1]).cos());
                        g.push(r * (tau * pair[1]).sin());
                    }
                    let v = DVector::from_fn(dim, |i, _| g[i]);
                    let nv = v.norm();
                    v.map(|x| lit(x / nv))
                })
                .collect()
        }
    }
}
