//! Coxeter diagrams, their deformed Cartan matrices `A_t` and the reflection
//! representations preserving them.

use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::{signature, Signature};
use crate::scalar::{cos_pi_frac, lit, Real};

/// Symmetric matrix of orders `m_ij`; `None` stands for infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoxeterDiagram {
    n: usize,
    m: Vec<Option<u32>>,
}

impl CoxeterDiagram {
    pub fn new(m: Vec<Vec<Option<u32>>>) -> Result<Self> {
        let n = m.len();
        if n == 0 {
            return Err(Error::Empty("Coxeter matrix"));
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in m.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            for (j, &e) in row.iter().enumerate() {
                if e != m[j][i] {
                    return Err(Error::UnsupportedDiagram(format!("m is not symmetric at ({i},{j})")));
                }
                let ok = if i == j { e == Some(1) } else { e.is_none_or(|v| v >= 2) };
                if !ok {
                    return Err(Error::UnsupportedDiagram(format!("invalid order at ({i},{j})")));
                }
                flat.push(e);
            }
        }
        Ok(CoxeterDiagram { n, m: flat })
    }

    /// Diagram with all off-diagonal orders 2, then the listed edges (0-based).
    pub fn from_edges(n: usize, edges: &[(usize, usize, Option<u32>)]) -> Result<Self> {
        let mut m = vec![vec![Some(2); n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = Some(1);
        }
        for &(i, j, e) in edges {
            if i >= n || j >= n {
                return Err(Error::OutOfRange { index: i.max(j), limit: n });
            }
            m[i][j] = e;
            m[j][i] = e;
        }
        Self::new(m)
    }

    /// Parses `{"N": n, "m": [[1, 3, "inf", ..], ..]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let parse = |message: String| Error::Parse { location: "diagram".into(), message };
        let v: Value = serde_json::from_str(text).map_err(|e| parse(e.to_string()))?;
        let rows = v.get("m").and_then(Value::as_array).ok_or_else(|| parse("missing array \"m\"".into()))?;
        let mut m = Vec::with_capacity(rows.len());
        for row in rows {
            let row = row.as_array().ok_or_else(|| parse("rows of \"m\" must be arrays".into()))?;
            let mut out = Vec::with_capacity(row.len());
            for e in row {
                out.push(match e {
                    Value::String(s) if s == "inf" => None,
                    Value::Number(k) => Some(
                        k.as_u64()
                            .and_then(|k| u32::try_from(k).ok())
                            .ok_or_else(|| parse(format!("bad order {k}")))?,
                    ),
                    other => return Err(parse(format!("bad entry {other}"))),
                });
            }
            m.push(out);
        }
        if let Some(n) = v.get("N") {
            if n.as_u64() != Some(m.len() as u64) {
                return Err(parse(format!("\"N\" = {n} does not match {} rows", m.len())));
            }
        }
        Self::new(m)
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = (0..self.n)
            .map(|i| (0..self.n).map(|j| self.m(i, j).map_or(json!("inf"), |k| json!(k))).collect())
            .collect();
        json!({ "N": self.n, "m": rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self, i: usize, j: usize) -> Option<u32> {
        self.m[i * self.n + j]
    }

    /// Pairs `i < j` with `m_ij` infinite.
    pub fn infinite_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.m(i, j).is_none() {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// The seven-generator family with a 4-cycle `1-2-3-4-5-1` closed by an
/// infinite edge `4-5`, plus leaves `6` (order `l` on `1-6`) and `7` (order `k` on `3-7`).
pub fn leaf_cycle_diagram(k: u32, l: u32) -> Result<CoxeterDiagram> {
    CoxeterDiagram::from_edges(
        7,
        &[
            (0, 1, Some(3)),
            (1, 2, Some(3)),
            (2, 3, Some(3)),
            (4, 0, Some(3)),
            (3, 4, None),
            (0, 5, Some(l)),
            (2, 6, Some(k)),
        ],
    )
}

/// `A_t`: `-2 cos(pi/m_ij)` for finite orders, `-2 - t` for infinite ones.
pub fn cartan_matrix<T: Real>(d: &CoxeterDiagram, t: T) -> DMatrix<T> {
    let two = lit::<T>(2.0);
    DMatrix::from_fn(d.n, d.n, |i, j| match d.m(i, j) {
        Some(m) => -two * cos_pi_frac::<T>(1, i64::from(m)),
        None => -two - t,
    })
}

/// Reflections `s_i -> I - e_i (A_t e_i)^T`, which satisfy `g^T A_t g = A_t`.
#[derive(Debug, Clone)]
pub struct ReflectionRep<T: Real> {
    pub diagram: CoxeterDiagram,
    pub t: T,
    pub cartan: DMatrix<T>,
    pub generators: Vec<DMatrix<T>>,
    pub signature: Signature,
}

/// Null-eigenvalue threshold for `A_t`, relative to its spectral radius.
pub const CARTAN_TOL: f64 = 1e-9;

pub fn reflection_rep<T: Real>(d: &CoxeterDiagram, t: T) -> Result<ReflectionRep<T>> {
    if t < T::zero() {
        return Err(Error::Precondition("t must be nonnegative".into()));
    }
    let a = cartan_matrix(d, t);
    let n = d.n;
    let generators = (0..n)
        .map(|i| {
            let mut g = DMatrix::identity(n, n);
            for c in 0..n {
                g[(i, c)] -= a[(c, i)];
            }
            g
        })
        .collect();
    let signature = signature(&a, lit(CARTAN_TOL))?;
    Ok(ReflectionRep { diagram: d.clone(), t, cartan: a, generators, signature })
}

impl<T: Real> ReflectionRep<T> {
    /// The transposed convention `v -> v - e_i^*(v) A_t e_i`, preserving `A_t` as `g A_t g^T = A_t`.
    pub fn vinberg_generators(&self) -> Vec<DMatrix<T>> {
        self.generators.iter().map(|g| g.transpose()).collect()
    }

    /// `max ||(g_i g_j)^m_ij - I||_F` over finite orders, including `g_i^2 = I`.
    pub fn relation_residual(&self) -> T {
        let n = self.diagram.n;
        let id = DMatrix::<T>::identity(n, n);
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                if let Some(m) = self.diagram.m(i, j) {
                    let (g, m) = if i == j {
                        (self.generators[i].clone(), 2)
                    } else {
                        (&self.generators[i] * &self.generators[j], m)
                    };
                    let mut p = id.clone();
                    for _ in 0..m {
                        p = &p * &g;
                    }
                    worst = worst.max((p - &id).norm());
                }
            }
        }
        worst
    }

    /// `max_i ||g_i^T A_t g_i - A_t||_F`.
    pub fn form_residual(&self) -> T {
        self.generators
            .iter()
            .map(|g| (g.transpose() * &self.cartan * g - &self.cartan).norm())
            .fold(T::zero(), |m, r| m.max(r))
    }
}

/// Quadratic `det(A_t) = a t^2 + b t + c` and its real roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetRoots<T: Real> {
    pub coeffs: [T; 3],
    /// Sorted real roots, `None` when the discriminant is negative.
    pub roots: Option<(T, T)>,
    /// Both roots real and positive.
    pub positive: bool,
}

pub fn det_roots<T: Real>(d: &CoxeterDiagram) -> Result<DetRoots<T>> {
    let inf = d.infinite_pairs();
    if inf.len() != 1 {
        return Err(Error::UnsupportedDiagram(format!("need exactly one infinite order, found {}", inf.len())));
    }
    let det = |t: f64| cartan_matrix::<T>(d, lit(t)).determinant();
    let (d0, d1, d2) = (det(0.0), det(1.0), det(2.0));
    let two = lit::<T>(2.0);
    let a = (d2 - two * d1 + d0) / two;
    let b = d1 - d0 - a;
    let c = d0;
    let scale = d0.abs().max(d1.abs()).max(d2.abs()).max(T::one());
    if a.abs() <= lit::<T>(1e-12) * scale {
        return Err(Error::UnsupportedDiagram("det(A_t) is not quadratic in t".into()));
    }
    let disc = b * b - lit::<T>(4.0) * a * c;
    if disc < T::zero() {
        return Ok(DetRoots { coeffs: [a, b, c], roots: None, positive: false });
    }
    let sq = disc.sqrt();
    let q = if b >= T::zero() { -(b + sq) / two } else { (sq - b) / two };
    let (r1, r2) = if q.is_zero() { (T::zero(), T::zero()) } else { (q / a, c / q) };
    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    Ok(DetRoots { coeffs: [a, b, c], roots: Some((lo, hi)), positive: lo > T::zero() })
}

/// One row of [`signature_scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow<T: Real> {
    pub t: T,
    pub signature: Signature,
    pub det: T,
    pub relation_residual: T,
}

pub fn signature_scan<T: Real>(d: &CoxeterDiagram, grid: &[T]) -> Result<Vec<ScanRow<T>>> {
    grid.iter()
        .map(|&t| {
            let rep = reflection_rep(d, t)?;
            Ok(ScanRow {
                t,
                signature: rep.signature,
                det: rep.cartan.clone().determinant(),
                relation_residual: rep.relation_residual(),
            })
        })
        .collect()
}
