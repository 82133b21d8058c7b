//! Equilateral spacelike `2k`-gons in `R^(2,q)` and the one-parameter
//! families of vertices with prescribed neighbours.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::forms::QuadraticSpace;
use crate::linalg::{hstack, rank};
use crate::scalar::{cos_pi_frac, lit, sin_pi_frac, to_f64, Real};

#[derive(Debug, Clone)]
pub struct Polygon2k<T: Real> {
    pub k: u32,
    pub n: u32,
    pub alpha: T,
    pub space: QuadraticSpace<T>,
    pub vertices: Vec<DVector<T>>,
}

/// `alpha = (1 - cos(pi/n)) / (1 - cos(pi/k))`.
pub fn polygon_alpha<T: Real>(k: u32, n: u32) -> T {
    (T::one() - cos_pi_frac::<T>(1, i64::from(n))) / (T::one() - cos_pi_frac::<T>(1, i64::from(k)))
}

/// Vertices `sqrt(alpha) (cos(j pi/k), sin(j pi/k)) + sqrt(alpha - 1) e3`, `j = 0..2k`, in `R^(2,q)`.
pub fn gt_polygon<T: Real>(k: u32, n: u32, q: usize) -> Result<Polygon2k<T>> {
    if n < 2 || k <= n {
        return Err(Error::Precondition(format!("need k > n >= 2, got k = {k}, n = {n}")));
    }
    if q == 0 {
        return Err(Error::Precondition("need q >= 1".into()));
    }
    let alpha = polygon_alpha::<T>(k, n);
    let space = QuadraticSpace::standard(2, q);
    let mut poly = Polygon2k { k, n, alpha, space, vertices: Vec::new() };
    poly.vertices = (0..2 * i64::from(k)).map(|j| poly.vertex(j)).collect();
    Ok(poly)
}

impl<T: Real> Polygon2k<T> {
    /// The vertex formula at any integer index.
    pub fn vertex(&self, j: i64) -> DVector<T> {
        let k = i64::from(self.k);
        let s = self.alpha.sqrt();
        let mut v = DVector::zeros(self.space.dim());
        v[0] = s * cos_pi_frac::<T>(j, k);
        v[1] = s * sin_pi_frac::<T>(j, k);
        v[2] = (self.alpha - T::one()).sqrt();
        v
    }

    /// `b(v_i, v_j) = alpha cos((i-j) pi/k) - (alpha - 1)`, evaluated in closed form.
    pub fn pairing(&self, i: i64, j: i64) -> T {
        self.alpha * cos_pi_frac::<T>(i - j, i64::from(self.k)) - (self.alpha - T::one())
    }

    /// Largest deviation of `b(v_j,v_j)` from 1 and of `b(v_j,v_(j+1))` from `cos(pi/n)`.
    pub fn identity_residual(&self) -> T {
        let c = cos_pi_frac::<T>(1, i64::from(self.n));
        let m = self.vertices.len();
        let mut worst = T::zero();
        for j in 0..m {
            let v = &self.vertices[j];
            let w = &self.vertices[(j + 1) % m];
            worst = worst.max((self.space.apply(v, v) - T::one()).abs());
            worst = worst.max((self.space.apply(v, w) - c).abs());
        }
        worst
    }

    /// Whether every consecutive triple is linearly independent.
    pub fn triples_independent(&self) -> bool {
        let m = self.vertices.len();
        (0..m).all(|j| {
            let cols = [self.vertices[(j + m - 1) % m].clone(), self.vertices[j].clone(), self.vertices[(j + 1) % m].clone()];
            rank(&hstack(&cols), lit(1e-10)) == 3
        })
    }
}

/// Vertices `v1(s) = v1' + c (cos(s) e + sin(s) f)` with `b(v1,v1) = 1` and
/// `b(v0,v1) = b(v1,v2) = alpha`.
#[derive(Debug, Clone)]
pub struct PolygonFamily<T: Real> {
    pub space: QuadraticSpace<T>,
    pub v0: DVector<T>,
    pub v2: DVector<T>,
    pub base: DVector<T>,
    pub radius: T,
    pub e: DVector<T>,
    /// Second direction of the circle; absent when the complement is a line.
    pub f: Option<DVector<T>>,
    /// Condition number of the Gram matrix of `(v0, v2)`.
    pub conditioning: T,
}

/// Tolerance for the checks on `e`.
pub const DIRECTION_TOL: f64 = 1e-9;

pub fn polygon_deform<T: Real>(
    space: &QuadraticSpace<T>,
    v0: &DVector<T>,
    v2: &DVector<T>,
    alpha: T,
    e: &DVector<T>,
) -> Result<PolygonFamily<T>> {
    let g = Matrix2::new(space.eval(v0, v0)?, space.apply(v0, v2), space.apply(v2, v0), space.apply(v2, v2));
    let eig = g.symmetric_eigen().eigenvalues;
    let (lo, hi) = (eig[0].min(eig[1]), eig[0].max(eig[1]));
    if lo <= lit::<T>(1e-12) * hi.abs().max(T::one()) {
        return Err(Error::Precondition("form is not positive definite on span(v0, v2)".into()));
    }
    let conditioning = hi / lo;
    let c = g.lu().solve(&Vector2::new(alpha, alpha)).ok_or(Error::Singular)?;
    let base = v0 * c[0] + v2 * c[1];
    let m = space.apply(&base, &base);
    let one = T::one();
    if m < one - lit::<T>(1e-12) {
        return Err(Error::NoSolution { deficit: to_f64(one - m) });
    }
    let radius = (m - one).max(T::zero()).sqrt();
    let tol = lit::<T>(DIRECTION_TOL);
    if (space.eval(e, e)? + one).abs() > tol
        || space.apply(e, v0).abs() > tol * v0.norm()
        || space.apply(e, v2).abs() > tol * v2.norm()
    {
        return Err(Error::Precondition("e must be a b-unit negative vector orthogonal to v0 and v2".into()));
    }
    let rest = space.orthogonal_complement(&[v0.clone(), v2.clone(), e.clone()])?;
    let (pos, neg) = space.orthonormal_basis(&rest)?;
    if !pos.is_empty() {
        return Err(Error::Precondition("complement of span(v0, v2) is not negative definite".into()));
    }
    Ok(PolygonFamily {
        space: space.clone(),
        v0: v0.clone(),
        v2: v2.clone(),
        base,
        radius,
        e: e.clone(),
        f: neg.into_iter().next(),
        conditioning,
    })
}

impl<T: Real> PolygonFamily<T> {
    pub fn member(&self, s: T) -> Result<DVector<T>> {
        let (c, sn) = (s.cos(), s.sin());
        match &self.f {
            Some(f) => Ok(&self.base + (&self.e * c + f * sn) * self.radius),
            None if sn.abs() <= lit(1e-12) => Ok(&self.base + &self.e * (c.signum() * self.radius)),
            None => Err(Error::Precondition("the family has two members only (s = 0 or pi)".into())),
        }
    }

    /// Form-preserving map fixing `v0`, `v2` and sending `member(s1)` to `member(s2)`.
    pub fn transport(&self, s1: T, s2: T) -> Result<DMatrix<T>> {
        let theta = s2 - s1;
        let mut cols = vec![self.v0.clone(), self.v2.clone(), self.e.clone()];
        let mut rot_dim = 1;
        if let Some(f) = &self.f {
            cols.push(f.clone());
            rot_dim = 2;
        } else if theta.sin().abs() > lit(1e-12) {
            return Err(Error::Precondition("the family has two members only (s = 0 or pi)".into()));
        }
        let rest = self.space.orthogonal_complement(&cols)?;
        cols.extend(rest);
        let b = hstack(&cols);
        let n = b.nrows();
        let mut r = DMatrix::identity(n, n);
        if rot_dim == 2 {
            let (c, s) = (theta.cos(), theta.sin());
            r[(2, 2)] = c;
            r[(3, 2)] = s;
            r[(2, 3)] = -s;
            r[(3, 3)] = c;
        } else {
            r[(2, 2)] = theta.cos().signum();
        }
        let binv = b.clone().try_inverse().ok_or(Error::Singular)?;
        Ok(b * r * binv)
    }
}
