//! Matrix Lie algebras `o(p,q)` and dimensions of generated subalgebras.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{hstack, rank};
use crate::scalar::{lit, Real};

pub fn bracket<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    a * b - b * a
}

/// `diag(1^p, -1^q)`.
pub fn diagonal_form<T: Real>(p: usize, q: usize) -> DMatrix<T> {
    DMatrix::from_fn(p + q, p + q, |i, j| {
        if i != j {
            T::zero()
        } else if i < p {
            T::one()
        } else {
            -T::one()
        }
    })
}

/// Basis `J (E_ij - E_ji)`, `i < j`, of `o(p,q)` for `J = diag(1^p, -1^q)`.
pub fn so_basis<T: Real>(p: usize, q: usize) -> Vec<DMatrix<T>> {
    let n = p + q;
    let j = diagonal_form::<T>(p, q);
    let mut out = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            let mut e = DMatrix::zeros(n, n);
            e[(a, b)] = T::one();
            e[(b, a)] = -T::one();
            out.push(&j * e);
        }
    }
    out
}

/// Places `m` in the top-left corner of an `n x n` zero matrix.
pub fn embed<T: Real>(m: &DMatrix<T>, n: usize) -> Result<DMatrix<T>> {
    if m.nrows() > n || m.ncols() > n {
        return Err(Error::DimensionMismatch { expected: n, got: m.nrows().max(m.ncols()) });
    }
    let mut out = DMatrix::zeros(n, n);
    out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    Ok(out)
}

/// `E_(1, p+q'+1) + E_(p+q'+1, 1)` (1-based) in `o(p, q+1)`, size `p+q+1`.
pub fn canonical_x<T: Real>(p: usize, q_prime: usize, q: usize) -> Result<DMatrix<T>> {
    if p == 0 {
        return Err(Error::OutOfRange { index: 0, limit: 1 });
    }
    if q_prime == 0 || q_prime > q {
        return Err(Error::OutOfRange { index: q_prime, limit: q + 1 });
    }
    let n = p + q + 1;
    let k = p + q_prime;
    let mut x = DMatrix::zeros(n, n);
    x[(0, k)] = T::one();
    x[(k, 0)] = T::one();
    Ok(x)
}

/// `||X^T J + J X||_F`.
pub fn lie_residual<T: Real>(x: &DMatrix<T>, j: &DMatrix<T>) -> T {
    (x.transpose() * j + j * x).norm()
}

/// `[X, Y]` for every `Y` in the list.
pub fn ad_image<T: Real>(x: &DMatrix<T>, ys: &[DMatrix<T>]) -> Vec<DMatrix<T>> {
    ys.iter().map(|y| bracket(x, y)).collect()
}

/// Rank threshold for the closure.
pub const CLOSURE_TOL: f64 = 1e-9;

struct Span<T: Real> {
    basis: Vec<DVector<T>>,
}

impl<T: Real> Span<T> {
    fn add(&mut self, m: &DMatrix<T>) -> bool {
        let norm = m.norm();
        if norm <= T::default_epsilon() {
            return false;
        }
        let mut v = DVector::from_column_slice(m.as_slice()) / norm;
        for _ in 0..2 {
            for b in &self.basis {
                let c = b.dot(&v);
                v -= b * c;
            }
        }
        let r = v.norm();
        if r <= lit(CLOSURE_TOL) {
            return false;
        }
        self.basis.push(v / r);
        true
    }
}

/// Dimension of the Lie algebra generated by the seeds.
pub fn lie_closure_dim<T: Real>(seeds: &[DMatrix<T>]) -> Result<usize> {
    let Some(first) = seeds.first() else {
        return Ok(0);
    };
    let n = first.nrows();
    for s in seeds {
        if s.nrows() != n || s.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: s.nrows().max(s.ncols()) });
        }
    }
    let mut span = Span { basis: Vec::new() };
    let mut elems: Vec<DMatrix<T>> = Vec::new();
    for s in seeds {
        if span.add(s) {
            elems.push(s.clone());
        }
    }
    let mut done = 0;
    let mut rounds = 0;
    while done < elems.len() {
        rounds += 1;
        if rounds > n * n * n * n + 1 || elems.len() > n * n {
            return Err(Error::NoConvergence(rounds));
        }
        let new = elems[done].clone();
        done += 1;
        let mut k = 0;
        while k < elems.len() {
            let b = bracket(&new, &elems[k]);
            if span.add(&b) {
                elems.push(b);
            }
            k += 1;
        }
    }
    Ok(rank(&hstack(&span.basis), lit(CLOSURE_TOL)))
}

/// `dim o(p,q) = n(n-1)/2` with `n = p+q`.
pub fn so_dim(p: usize, q: usize) -> usize {
    let n = p + q;
    n * n.saturating_sub(1) / 2
}
