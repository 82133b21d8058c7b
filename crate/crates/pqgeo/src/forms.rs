//! Symmetric bilinear forms: signatures, classification, restriction and
//! orthogonal complements.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{column_space, hstack, max_abs, null_space, rank};
use crate::scalar::{to_f64, Real};

/// Inertia of a symmetric form: counts of positive, negative and null eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub pos: usize,
    pub neg: usize,
    pub null: usize,
}

impl Signature {
    pub fn new(pos: usize, neg: usize, null: usize) -> Self {
        Signature { pos, neg, null }
    }

    pub fn dim(&self) -> usize {
        self.pos + self.neg + self.null
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{}|{})", self.pos, self.neg, self.null)
    }
}

/// Sign of `b(v, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorClass {
    Positive,
    Negative,
    Isotropic,
}

fn symmetric_part<T: Real>(gram: &DMatrix<T>) -> DMatrix<T> {
    (gram + gram.transpose()) * crate::scalar::lit::<T>(0.5)
}

fn check_symmetric<T: Real>(gram: &DMatrix<T>, tol: T) -> Result<()> {
    if !gram.is_square() {
        return Err(Error::MalformedForm(format!(
            "gram matrix is {}x{}, not square",
            gram.nrows(),
            gram.ncols()
        )));
    }
    if gram.iter().any(|x| !x.is_finite()) {
        return Err(Error::MalformedForm("non-finite entry".into()));
    }
    let asym = max_abs(&(gram - gram.transpose()));
    let scale = max_abs(gram);
    if asym > tol * scale {
        return Err(Error::MalformedForm(format!(
            "asymmetry {:e} exceeds tolerance",
            to_f64(asym)
        )));
    }
    Ok(())
}

/// `floor` is a scale below which the band may not shrink.
fn eigen_census<T: Real>(sym: &DMatrix<T>, tol: T, floor: T) -> (Signature, T) {
    if sym.nrows() == 0 {
        return (Signature::new(0, 0, 0), T::zero());
    }
    let eig = sym.clone().symmetric_eigenvalues();
    let radius = eig.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    let cut = tol * radius.max(floor);
    let mut s = Signature::new(0, 0, 0);
    for &l in eig.iter() {
        if l.abs() <= cut {
            s.null += 1;
        } else if l > T::zero() {
            s.pos += 1;
        } else {
            s.neg += 1;
        }
    }
    (s, radius)
}

/// Signature of a symmetric matrix; eigenvalues within `tol * spectral radius`
/// of zero count as null.
pub fn signature<T: Real>(gram: &DMatrix<T>, tol: T) -> Result<Signature> {
    check_symmetric(gram, tol)?;
    Ok(eigen_census(&symmetric_part(gram), tol, T::zero()).0)
}

/// Positive and negative halves of an orthonormal basis.
pub type SignedBasis<T> = (Vec<DVector<T>>, Vec<DVector<T>>);

/// A finite-dimensional real space with a symmetric bilinear form.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSpace<T: Real> {
    gram: DMatrix<T>,
    sig: Signature,
    tol: T,
    radius: T,
}

impl<T: Real> QuadraticSpace<T> {
    /// Builds the space with the default tolerance of `T`.
    pub fn new(gram: DMatrix<T>) -> Result<Self> {
        Self::with_tol(gram, T::default_tol())
    }

    pub fn with_tol(gram: DMatrix<T>, tol: T) -> Result<Self> {
        Self::with_floor(gram, tol, T::zero())
    }

    fn with_floor(gram: DMatrix<T>, tol: T, floor: T) -> Result<Self> {
        if tol < T::zero() {
            return Err(Error::Precondition("tolerance must be nonnegative".into()));
        }
        check_symmetric(&gram, tol)?;
        let gram = symmetric_part(&gram);
        let (sig, radius) = eigen_census(&gram, tol, floor);
        Ok(QuadraticSpace { gram, sig, tol, radius })
    }

    /// Diagonal form `diag(entries)`.
    pub fn diagonal(entries: &[T]) -> Self {
        let gram = DMatrix::from_diagonal(&DVector::from_column_slice(entries));
        Self::new(gram).expect("diagonal matrices are symmetric")
    }

    /// `diag(1,..,1,-1,..,-1)` with `pos` plus signs and `neg` minus signs.
    pub fn standard(pos: usize, neg: usize) -> Self {
        let mut d = vec![T::one(); pos];
        d.extend(std::iter::repeat_n(-T::one(), neg));
        Self::diagonal(&d)
    }

    /// Same form with another tolerance.
    pub fn retol(&self, tol: T) -> Self {
        Self::with_tol(self.gram.clone(), tol).expect("already validated")
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<T> {
        &self.gram
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn tol(&self) -> T {
        self.tol
    }

    pub fn spectral_radius(&self) -> T {
        self.radius
    }

    pub fn is_degenerate(&self) -> bool {
        self.sig.null > 0
    }

    fn check_dim(&self, v: &DVector<T>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        Ok(())
    }

    /// `b(v, w)` with dimension checks.
    pub fn eval(&self, v: &DVector<T>, w: &DVector<T>) -> Result<T> {
        self.check_dim(v)?;
        self.check_dim(w)?;
        Ok(self.apply(v, w))
    }

    /// `b(v, w)` without checks; panics on mismatched lengths.
    #[inline]
    pub fn apply(&self, v: &DVector<T>, w: &DVector<T>) -> T {
        (v.transpose() * &self.gram * w)[(0, 0)]
    }

    /// `b(v, v)`.
    #[inline]
    pub fn norm2(&self, v: &DVector<T>) -> T {
        self.apply(v, v)
    }

    /// Absolute threshold below which `b(v, w)` is treated as zero.
    #[inline]
    pub fn zero_band(&self, v: &DVector<T>, w: &DVector<T>) -> T {
        self.tol * self.radius * v.norm() * w.norm()
    }

    /// Sign class of `b(v, v)`.
    pub fn classify_vector(&self, v: &DVector<T>) -> Result<VectorClass> {
        self.check_dim(v)?;
        if v.iter().all(|x| x.is_zero()) {
            return Err(Error::ZeroVector);
        }
        let q = self.norm2(v);
        let band = self.zero_band(v, v);
        Ok(if q > band {
            VectorClass::Positive
        } else if q < -band {
            VectorClass::Negative
        } else {
            VectorClass::Isotropic
        })
    }

    /// Gram matrix of `b` on the span of `basis` (in that basis).
    pub fn restrict(&self, basis: &[DVector<T>]) -> Result<QuadraticSpace<T>> {
        for v in basis {
            self.check_dim(v)?;
        }
        if basis.is_empty() {
            return Self::with_tol(DMatrix::zeros(0, 0), self.tol);
        }
        let b = hstack(basis);
        let r = rank(&b, self.tol);
        if r < basis.len() {
            return Err(Error::DependentBasis { rank: r, len: basis.len() });
        }
        let g = b.transpose() * &self.gram * &b;
        // a nearly isotropic span must not rescale its own noise into signal
        let len2 = basis.iter().fold(T::zero(), |a, v| a.max(v.norm_squared()));
        Self::with_floor(symmetric_part(&g), self.tol, self.radius * len2)
    }

    /// Orthonormal (Euclidean) basis of a maximal independent subset of the span.
    pub fn span_basis(&self, vectors: &[DVector<T>]) -> Result<Vec<DVector<T>>> {
        for v in vectors {
            self.check_dim(v)?;
        }
        Ok(column_space(vectors, self.tol))
    }

    /// Basis of `{w : b(w, v) = 0 for all v in span}`.
    pub fn orthogonal_complement(&self, span: &[DVector<T>]) -> Result<Vec<DVector<T>>> {
        for v in span {
            self.check_dim(v)?;
        }
        if span.is_empty() {
            return Ok(null_space(&DMatrix::zeros(0, self.dim()), self.tol));
        }
        let m = hstack(span).transpose() * &self.gram;
        Ok(null_space(&m, self.tol))
    }

    /// A `b`-orthonormal basis of a non-degenerate subspace, positive vectors first.
    ///
    /// Returns `(positive, negative)` with `b = +1` resp. `-1` on the diagonal.
    pub fn orthonormal_basis(
        &self,
        basis: &[DVector<T>],
    ) -> Result<SignedBasis<T>> {
        let sub = self.restrict(basis)?;
        if sub.is_degenerate() {
            return Err(Error::Precondition(format!(
                "subspace is degenerate, signature {}",
                sub.signature()
            )));
        }
        let eig = sub.gram.clone().symmetric_eigen();
        let b = hstack(basis);
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
        for k in order {
            let l = eig.eigenvalues[k];
            let v = &b * eig.eigenvectors.column(k) / l.abs().sqrt();
            if l > T::zero() {
                pos.push(v);
            } else {
                neg.push(v);
            }
        }
        Ok((pos, neg))
    }
}
