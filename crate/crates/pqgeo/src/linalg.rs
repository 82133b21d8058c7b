//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::scalar::{lit, Real};

/// Stacks vectors as the columns of a matrix.
pub fn hstack<T: Real>(vectors: &[DVector<T>]) -> DMatrix<T> {
    let rows = vectors.first().map_or(0, |v| v.len());
    DMatrix::from_fn(rows, vectors.len(), |i, j| vectors[j][i])
}

/// Singular values and right singular vectors of `m`, padded so that every
/// column direction is represented (rows are zero-padded up to the column count).
fn full_svd<T: Real>(m: &DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let (r, c) = m.shape();
    let padded = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    (svd.singular_values.iter().copied().collect(), vt)
}

/// Numerical rank: singular values above `tol * sigma_max`.
pub fn rank<T: Real>(m: &DMatrix<T>, tol: T) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.iter().fold(T::zero(), |a, &b| a.max(b));
    if smax <= T::zero() {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Orthonormal basis of `{x : m x = 0}` with relative threshold `tol`.
pub fn null_space<T: Real>(m: &DMatrix<T>, tol: T) -> Vec<DVector<T>> {
    let c = m.ncols();
    if m.nrows() == 0 {
        return (0..c).map(|i| DVector::from_fn(c, |k, _| if k == i { T::one() } else { T::zero() })).collect();
    }
    let (sv, vt) = full_svd(m);
    let smax = sv.iter().fold(T::zero(), |a, &b| a.max(b));
    let mut out = Vec::new();
    for (k, &s) in sv.iter().enumerate() {
        if smax <= T::zero() || s <= tol * smax {
            out.push(vt.row(k).transpose());
        }
    }
    out
}

/// Orthonormal basis of the span of `vectors`.
pub fn column_space<T: Real>(vectors: &[DVector<T>], tol: T) -> Vec<DVector<T>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = hstack(vectors);
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().fold(T::zero(), |a, &b| a.max(b));
    let mut out = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if smax > T::zero() && s > tol * smax {
            out.push(u.column(k).into_owned());
        }
    }
    out
}

/// Great-circle distance between unit vectors, via the chord length.
pub fn sphere_dist<T: Real>(a: &DVector<T>, b: &DVector<T>) -> T {
    let chord = (a - b).norm();
    let half = (chord / lit(2.0)).min(T::one());
    lit::<T>(2.0) * half.asin()
}

/// Largest absolute entry.
pub fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |a, &b| a.max(b.abs()))
}

/// Matrix exponential (scaling and squaring with a Padé approximant).
pub fn expm<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    m.exp()
}

/// `basis[i]` unit vector of length `n`.
pub fn unit<T: Real>(n: usize, i: usize) -> DVector<T> {
    let mut v = DVector::zeros(n);
    v[i] = T::one();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = null_space(&m, 1e-12);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!((&m * &v).norm() < 1e-14);
        }
    }

    #[test]
    fn rank_and_span() {
        let a = DVector::from_vec(vec![1.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![2.0, 0.0, 2.0]);
        let c = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        assert_eq!(column_space(&[a.clone(), b.clone(), c.clone()], 1e-12).len(), 2);
        assert_eq!(rank(&hstack(&[a, b, c]), 1e-12), 2);
    }

    #[test]
    fn sphere_distance_small_and_antipodal() {
        let a = DVector::from_vec(vec![1.0, 0.0]);
        let t: f64 = 1e-9;
        let b = DVector::from_vec(vec![t.cos(), t.sin()]);
        assert!((sphere_dist(&a, &b) - t).abs() < 1e-20);
        let c = DVector::from_vec(vec![-1.0, 0.0]);
        assert!((sphere_dist(&a, &c) - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn expm_against_series() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 0.3, -0.2, 0.1, 0.0, 0.5, 0.4, -0.1, 0.0]);
        let mut term = DMatrix::<f64>::identity(3, 3);
        let mut sum = term.clone();
        for k in 1..40 {
            term = &term * &m / k as f64;
            sum += &term;
        }
        assert!((expm(&m) - sum).norm() < 1e-14);
    }
}
