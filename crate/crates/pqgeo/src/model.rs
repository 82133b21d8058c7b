//! The quadric `b(v,v) = -1`, its boundary at infinity, the conformal
//! product splitting, pair classification, the domains `Omega` cut out by
//! half-spaces and their Hilbert metric.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::QuadraticSpace;
use crate::linalg::{hstack, sphere_dist, unit};
use crate::scalar::{lit, to_f64, Real};

/// A point of the quadric `b(v,v) = -1`.
///
/// `projective` marks points standing for their class `[v] = [-v]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HPoint<T: Real> {
    pub vec: DVector<T>,
    pub projective: bool,
}

impl<T: Real> HPoint<T> {
    /// Checks `b(v,v) = -1` up to tolerance.
    pub fn new(space: &QuadraticSpace<T>, vec: DVector<T>) -> Result<Self> {
        let q = space.eval(&vec, &vec)?;
        let band = space.zero_band(&vec, &vec).max(space.tol());
        if (q + T::one()).abs() > band {
            return Err(Error::Precondition(format!("b(v,v) = {:e}, expected -1", to_f64(q))));
        }
        Ok(HPoint { vec, projective: false })
    }

    /// Rescales a negative vector onto the quadric.
    pub fn normalize(space: &QuadraticSpace<T>, vec: DVector<T>) -> Result<Self> {
        let q = space.eval(&vec, &vec)?;
        if q >= -space.zero_band(&vec, &vec) || q >= T::zero() {
            return Err(Error::Precondition(format!(
                "vector is not negative (b(v,v) = {:e})",
                to_f64(q)
            )));
        }
        Ok(HPoint { vec: vec / (-q).sqrt(), projective: false })
    }

    pub fn projective(mut self) -> Self {
        self.projective = true;
        self
    }
}

/// A point of the boundary at infinity: a nonzero isotropic ray.
///
/// The stored vector has unit Euclidean norm; `flipped` selects the opposite lift.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPoint<T: Real> {
    vec: DVector<T>,
    pub flipped: bool,
}

impl<T: Real> BoundaryPoint<T> {
    pub fn new(space: &QuadraticSpace<T>, vec: DVector<T>) -> Result<Self> {
        let n = vec.norm();
        if n.is_zero() {
            return Err(Error::ZeroVector);
        }
        let q = space.eval(&vec, &vec)?;
        if q.abs() > space.zero_band(&vec, &vec) {
            return Err(Error::Precondition(format!(
                "vector is not isotropic (b(v,v)/|v|^2 = {:e})",
                to_f64(q / (n * n))
            )));
        }
        Ok(BoundaryPoint { vec: vec / n, flipped: false })
    }

    /// Unit representative without the orientation flag applied.
    pub fn vec(&self) -> &DVector<T> {
        &self.vec
    }

    /// The chosen lift.
    pub fn lift(&self) -> DVector<T> {
        if self.flipped {
            -&self.vec
        } else {
            self.vec.clone()
        }
    }

    pub fn flip(mut self) -> Self {
        self.flipped = !self.flipped;
        self
    }
}

/// Interior or ideal point.
#[derive(Debug, Clone, PartialEq)]
pub enum Point<T: Real> {
    Interior(HPoint<T>),
    Boundary(BoundaryPoint<T>),
}

impl<T: Real> Point<T> {
    pub fn vector(&self) -> DVector<T> {
        match self {
            Point::Interior(h) => h.vec.clone(),
            Point::Boundary(b) => b.lift(),
        }
    }
}

/// Basis `(e_1..e_{p+q+1})` with `b(e_i,e_i) = +1` for `i <= p` and `-1` after.
#[derive(Debug, Clone, PartialEq)]
pub struct TimelikeFrame<T: Real> {
    basis: DMatrix<T>,
    inverse: DMatrix<T>,
    p: usize,
    q: usize,
    tol: T,
}

impl<T: Real> TimelikeFrame<T> {
    /// Validates the columns of `basis` against `space`; the first `p` must be
    /// positive unit vectors and the rest negative unit vectors, pairwise orthogonal.
    pub fn new(space: &QuadraticSpace<T>, basis: DMatrix<T>, p: usize) -> Result<Self> {
        let d = space.dim();
        if basis.nrows() != d || basis.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: basis.ncols() });
        }
        if p >= d {
            return Err(Error::Precondition("frame needs at least one negative vector".into()));
        }
        let g = basis.transpose() * space.gram() * &basis;
        let scale = space.tol() * space.spectral_radius() * basis.norm_squared().max(T::one());
        for i in 0..d {
            for j in 0..d {
                let want = if i != j {
                    T::zero()
                } else if i < p {
                    T::one()
                } else {
                    -T::one()
                };
                if (g[(i, j)] - want).abs() > scale {
                    return Err(Error::Precondition(format!(
                        "frame Gram entry ({i},{j}) = {:e}, expected {:e}",
                        to_f64(g[(i, j)]),
                        to_f64(want)
                    )));
                }
            }
        }
        // basis^-1 = J basis^T G
        let mut j = DMatrix::identity(d, d);
        for i in p..d {
            j[(i, i)] = -T::one();
        }
        let inverse = j * basis.transpose() * space.gram();
        Ok(TimelikeFrame { basis, inverse, p, q: d - p - 1, tol: space.tol() })
    }

    /// A frame diagonalizing `space` (positive eigendirections first).
    pub fn for_space(space: &QuadraticSpace<T>) -> Result<Self> {
        let d = space.dim();
        let ids: Vec<DVector<T>> = (0..d).map(|i| unit(d, i)).collect();
        let (pos, neg) = space.orthonormal_basis(&ids)?;
        let p = pos.len();
        let mut cols = pos;
        cols.extend(neg);
        Self::new(space, hstack(&cols), p)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<T> {
        &self.basis
    }

    /// Coordinates of `v` in the frame.
    pub fn coords(&self, v: &DVector<T>) -> DVector<T> {
        &self.inverse * v
    }

    /// Vector with frame coordinates `c`.
    pub fn from_coords(&self, c: &DVector<T>) -> DVector<T> {
        &self.basis * c
    }
}

/// Coordinates in the product `B^p x S^q`: `u` in the closed upper
/// hemisphere of `S^p`, `u_prime` in `S^q`, and the radial weight `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalCoords<T: Real> {
    pub u: DVector<T>,
    pub u_prime: DVector<T>,
    pub r: T,
}

/// Splits a point into hemisphere and sphere coordinates.
pub fn conformal_split<T: Real>(frame: &TimelikeFrame<T>, x: &Point<T>) -> Result<ConformalCoords<T>> {
    let v = x.vector();
    if v.len() != frame.dim() {
        return Err(Error::DimensionMismatch { expected: frame.dim(), got: v.len() });
    }
    let c = frame.coords(&v);
    let p = frame.p;
    let time = c.rows(p, frame.q + 1).into_owned();
    let r = time.norm();
    if r.is_zero() {
        return Err(Error::ZeroVector);
    }
    let space = c.rows(0, p).into_owned();
    let mut u = DVector::zeros(p + 1);
    match x {
        Point::Interior(_) => {
            u[0] = T::one() / r;
            for i in 0..p {
                u[i + 1] = space[i] / r;
            }
        }
        Point::Boundary(_) => {
            let s = space.norm();
            if s.is_zero() {
                return Err(Error::ZeroVector);
            }
            for i in 0..p {
                u[i + 1] = space[i] / s;
            }
        }
    }
    Ok(ConformalCoords { u, u_prime: time / r, r })
}

/// Inverse of [`conformal_split`]; equator points give boundary points.
pub fn conformal_unsplit<T: Real>(frame: &TimelikeFrame<T>, c: &ConformalCoords<T>) -> Result<Point<T>> {
    let p = frame.p;
    if c.u.len() != p + 1 {
        return Err(Error::DimensionMismatch { expected: p + 1, got: c.u.len() });
    }
    if c.u_prime.len() != frame.q + 1 {
        return Err(Error::DimensionMismatch { expected: frame.q + 1, got: c.u_prime.len() });
    }
    let unit_tol = lit::<T>(1e-8);
    if (c.u.norm() - T::one()).abs() > unit_tol || (c.u_prime.norm() - T::one()).abs() > unit_tol {
        return Err(Error::Precondition("conformal coordinates must be unit vectors".into()));
    }
    let u0 = c.u[0];
    if u0 < -frame.tol {
        return Err(Error::Precondition("u0 < 0: point below the equator".into()));
    }
    let mut coords = DVector::zeros(frame.dim());
    if u0 <= frame.tol {
        for i in 0..p {
            coords[i] = c.u[i + 1];
        }
        for i in 0..=frame.q {
            coords[p + i] = c.u_prime[i];
        }
        let v = frame.from_coords(&coords);
        let n = v.norm();
        return Ok(Point::Boundary(BoundaryPoint { vec: v / n, flipped: false }));
    }
    let r = T::one() / u0;
    for i in 0..p {
        coords[i] = c.u[i + 1] * r;
    }
    for i in 0..=frame.q {
        coords[p + i] = c.u_prime[i] * r;
    }
    Ok(Point::Interior(HPoint { vec: frame.from_coords(&coords), projective: false }))
}

/// Relative position of two points of the quadric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairClass {
    Spacelike,
    Lightlike,
    Timelike,
    Coincident,
}

fn projectively_equal<T: Real>(space: &QuadraticSpace<T>, x: &DVector<T>, y: &DVector<T>) -> bool {
    let t = space.tol() * x.norm().max(y.norm());
    (x - y).norm() <= t || (x + y).norm() <= t
}

/// Classifies a pair by `|b(x,y)|` against 1.
pub fn pair_class<T: Real>(space: &QuadraticSpace<T>, x: &HPoint<T>, y: &HPoint<T>) -> PairClass {
    if projectively_equal(space, &x.vec, &y.vec) {
        return PairClass::Coincident;
    }
    let b = space.apply(&x.vec, &y.vec).abs();
    let band = space.zero_band(&x.vec, &y.vec);
    if b - T::one() > band {
        PairClass::Spacelike
    } else if T::one() - b > band {
        PairClass::Timelike
    } else {
        PairClass::Lightlike
    }
}

/// Classifies a same-sheet pair by comparing hemisphere and sphere distances.
pub fn pair_class_conformal<T: Real>(
    space: &QuadraticSpace<T>,
    frame: &TimelikeFrame<T>,
    x: &HPoint<T>,
    y: &HPoint<T>,
) -> Result<PairClass> {
    let b = space.eval(&x.vec, &y.vec)?;
    let band = space.zero_band(&x.vec, &y.vec);
    if b > band {
        return Err(Error::WrongSheet(to_f64(b)));
    }
    if projectively_equal(space, &x.vec, &y.vec) {
        return Ok(PairClass::Coincident);
    }
    let c1 = conformal_split(frame, &Point::Interior(x.clone()))?;
    let c2 = conformal_split(frame, &Point::Interior(y.clone()))?;
    let db = sphere_dist(&c1.u, &c2.u);
    let ds = sphere_dist(&c1.u_prime, &c2.u_prime);
    // b + 1 = r1 r2 (cos db - cos ds) = -2 r1 r2 sin((db+ds)/2) sin((db-ds)/2)
    let half = lit::<T>(0.5);
    let gap = lit::<T>(2.0) * c1.r * c2.r * ((db + ds) * half).sin() * ((db - ds) * half).sin();
    Ok(if gap.abs() <= band {
        PairClass::Lightlike
    } else if db > ds {
        PairClass::Spacelike
    } else {
        PairClass::Timelike
    })
}

/// Open cone `{v : b(v, x_i) < 0 for all i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfspaceDomain<T: Real> {
    constraints: Vec<DVector<T>>,
}

impl<T: Real> HalfspaceDomain<T> {
    pub fn new(constraints: Vec<DVector<T>>) -> Result<Self> {
        if constraints.is_empty() {
            return Err(Error::Empty("constraint list"));
        }
        let d = constraints[0].len();
        for c in &constraints {
            if c.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: c.len() });
            }
            if c.iter().all(|x| x.is_zero()) {
                return Err(Error::ZeroVector);
            }
        }
        Ok(HalfspaceDomain { constraints })
    }

    pub fn constraints(&self) -> &[DVector<T>] {
        &self.constraints
    }

    pub fn contains(&self, space: &QuadraticSpace<T>, v: &DVector<T>) -> bool {
        self.constraints
            .iter()
            .all(|x| space.apply(v, x) < -space.zero_band(v, x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MembershipStatus {
    Interior,
    Boundary,
    Outside,
}

/// Membership verdict with the index of the least negative constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership<T: Real> {
    pub status: MembershipStatus,
    pub worst: usize,
    pub value: T,
}

/// Locates `v` relative to the domain.
pub fn omega_membership<T: Real>(
    space: &QuadraticSpace<T>,
    domain: &HalfspaceDomain<T>,
    v: &DVector<T>,
) -> Result<Membership<T>> {
    let mut worst = 0;
    let mut worst_rel = T::min_value().unwrap_or(-T::one() / T::default_epsilon());
    let mut worst_val = T::zero();
    for (i, x) in domain.constraints.iter().enumerate() {
        let val = space.eval(v, x)?;
        let scale = v.norm() * x.norm();
        let rel = if scale.is_zero() { T::zero() } else { val / scale };
        if i == 0 || rel > worst_rel {
            worst = i;
            worst_rel = rel;
            worst_val = val;
        }
    }
    let band = space.tol() * space.spectral_radius();
    let status = if worst_rel > band {
        MembershipStatus::Outside
    } else if worst_rel >= -band {
        MembershipStatus::Boundary
    } else {
        MembershipStatus::Interior
    };
    Ok(Membership { status, worst, value: worst_val })
}

/// Result of choosing coherent signs for a set of lifts.
#[derive(Debug, Clone, PartialEq)]
pub enum Lift<T: Real> {
    /// Signs `s_i` with `b(s_i x_i, s_j x_j) <= 0` (up to tolerance) for all pairs.
    Coherent { signs: Vec<i8>, vectors: Vec<DVector<T>> },
    /// A cycle of non-orthogonal pairs whose sign constraints are contradictory.
    Frustrated { cycle: Vec<usize> },
}

impl<T: Real> Lift<T> {
    pub fn vectors(&self) -> Option<&[DVector<T>]> {
        match self {
            Lift::Coherent { vectors, .. } => Some(vectors),
            Lift::Frustrated { .. } => None,
        }
    }
}

/// Chooses signs making all pairings nonpositive, by propagation over the
/// graph of non-orthogonal pairs; returns an odd cycle when impossible.
pub fn lift_nonpositive<T: Real>(space: &QuadraticSpace<T>, points: &[DVector<T>]) -> Result<Lift<T>> {
    if points.is_empty() {
        return Err(Error::Empty("point list"));
    }
    for v in points {
        if v.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: v.len() });
        }
    }
    let n = points.len();
    // sign of b(x_i, x_j): +1, -1 or 0 when orthogonal within tolerance
    let mut rel = vec![0i8; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let b = space.apply(&points[i], &points[j]);
            let s = if b.abs() <= space.zero_band(&points[i], &points[j]) {
                0
            } else if b > T::zero() {
                1
            } else {
                -1
            };
            rel[i * n + j] = s;
            rel[j * n + i] = s;
        }
    }
    let mut sign = vec![0i8; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if sign[root] != 0 {
            continue;
        }
        sign[root] = 1;
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                let s = rel[i * n + j];
                if j == i || s == 0 {
                    continue;
                }
                // need sign_i * sign_j * s < 0
                let want = -s * sign[i];
                if sign[j] == 0 {
                    sign[j] = want;
                    parent[j] = i;
                    queue.push_back(j);
                } else if sign[j] != want {
                    return Ok(Lift::Frustrated { cycle: tree_cycle(&parent, i, j) });
                }
            }
        }
    }
    let vectors = points
        .iter()
        .zip(&sign)
        .map(|(v, &s)| if s < 0 { -v } else { v.clone() })
        .collect();
    Ok(Lift::Coherent { signs: sign, vectors })
}

fn tree_cycle(parent: &[usize], i: usize, j: usize) -> Vec<usize> {
    let path_to_root = |mut k: usize| {
        let mut path = vec![k];
        while parent[k] != usize::MAX {
            k = parent[k];
            path.push(k);
        }
        path
    };
    let pi = path_to_root(i);
    let pj = path_to_root(j);
    let mut cycle = Vec::new();
    for (a, &k) in pi.iter().enumerate() {
        if let Some(b) = pj.iter().position(|&m| m == k) {
            cycle.extend_from_slice(&pi[..=a]);
            cycle.extend(pj[..b].iter().rev());
            break;
        }
    }
    cycle
}

/// Hilbert distance between interior points `y`, `z` of a half-space domain.
///
/// The projective line through `y` and `z` is parametrized by
/// `cos(t) y + sin(t) (z - y)`, so that `y` sits at `t = 0` and `z` at `t = pi/4`;
/// each constraint vanishes at one angle in `(0, pi)`.
pub fn hilbert_distance<T: Real>(
    space: &QuadraticSpace<T>,
    domain: &HalfspaceDomain<T>,
    y: &DVector<T>,
    z: &DVector<T>,
) -> Result<T> {
    if y.len() != space.dim() || z.len() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: y.len().min(z.len()) });
    }
    if y.norm().is_zero() || z.norm().is_zero() {
        return Err(Error::ZeroVector);
    }
    let y = y / y.norm();
    let mut z = z / z.norm();
    let xs = domain.constraints();
    let interior = |v: &DVector<T>| xs.iter().all(|x| space.apply(v, x) < T::zero());
    if !interior(&y) {
        return Err(Error::Precondition("first point is not interior".into()));
    }
    if !interior(&z) {
        let flipped = -&z;
        if interior(&flipped) {
            z = flipped;
        } else {
            return Err(Error::Precondition("second point is not interior".into()));
        }
    }
    // projectively equal points
    let along = y.dot(&z);
    if (&z - &y * along).norm() <= lit::<T>(64.0) * T::epsilon() {
        return Ok(T::zero());
    }
    // exit angle of each constraint on the circle cos(t) y + sin(t) (z - y)
    let w = &z - &y;
    let mut first = (T::pi(), T::zero(), T::zero());
    let mut last = (T::zero(), T::zero(), T::zero());
    for x in xs {
        let ay = space.apply(&y, x);
        let az = space.apply(&z, x);
        let t = (-ay).atan2(space.apply(&w, x));
        if t < first.0 {
            first = (t, ay, az);
        }
        if t > last.0 {
            last = (t, ay, az);
        }
    }
    if last.0 - first.0 <= lit::<T>(16.0) * T::epsilon() {
        return Err(Error::Unbounded("the line through the points stays inside the domain".into()));
    }
    // cross-ratio of the two exit functionals, evaluated without cancellation
    let (_, ay1, az1) = first;
    let (_, ay2, az2) = last;
    Ok(((ay1 / az1).ln() + (az2 / ay2).ln()) * lit(0.5))
}
