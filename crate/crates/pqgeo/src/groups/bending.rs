//! Bending deformations of amalgams and HNN extensions along edge groups
//! with nontrivial centralizer.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::expm;
use crate::scalar::{lit, to_f64, Real};

use super::lie::{canonical_x, diagonal_form, lie_residual};

/// An edge: a direction `X` centralizing the images of the listed generators.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge<T: Real> {
    pub direction: DMatrix<T>,
    pub group: Vec<usize>,
}

/// A vertex group bent by `exp(s X_(chain[0])) .. exp(s X_(chain[last]))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub generators: Vec<usize>,
    pub chain: Vec<usize>,
}

/// Stable letter `g -> (prod over chain_in) g exp(s X_edge) (prod over chain_out)^-1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableLetter {
    pub generator: usize,
    pub edge: usize,
    #[serde(default)]
    pub chain_in: Vec<usize>,
    #[serde(default)]
    pub chain_out: Vec<usize>,
}

/// A word as `(generator, exponent)` pairs.
pub type Word = Vec<(usize, i32)>;

#[derive(Debug, Clone, PartialEq)]
pub struct BendDatum<T: Real> {
    pub form: DMatrix<T>,
    pub generators: Vec<DMatrix<T>>,
    pub edges: Vec<Edge<T>>,
    pub factors: Vec<Factor>,
    pub letters: Vec<StableLetter>,
    pub relations: Vec<Word>,
}

/// Tolerance for Lie-algebra membership and centralizing.
pub const CENTRALIZER_TOL: f64 = 1e-10;

#[derive(Deserialize)]
struct RawEdge {
    direction: Vec<Vec<f64>>,
    group: Vec<usize>,
}

#[derive(Deserialize)]
struct RawDatum {
    form: Vec<Vec<f64>>,
    generators: Vec<Vec<Vec<f64>>>,
    edges: Vec<RawEdge>,
    #[serde(default)]
    factors: Vec<Factor>,
    #[serde(default)]
    letters: Vec<StableLetter>,
    #[serde(default)]
    relations: Vec<Word>,
}

fn matrix<T: Real>(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<T>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(Error::Parse { location: what.into(), message: "ragged or empty matrix".into() });
    }
    Ok(DMatrix::from_fn(n, m, |i, j| lit(rows[i][j])))
}

fn to_rows<T: Real>(m: &DMatrix<T>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| to_f64(m[(i, j)])).collect()).collect()
}

impl<T: Real> BendDatum<T> {
    /// Checks shapes, indices, form preservation and the centralizer conditions.
    pub fn new(
        form: DMatrix<T>,
        generators: Vec<DMatrix<T>>,
        edges: Vec<Edge<T>>,
        factors: Vec<Factor>,
        letters: Vec<StableLetter>,
        relations: Vec<Word>,
    ) -> Result<Self> {
        let n = form.nrows();
        if form.ncols() != n {
            return Err(Error::MalformedForm("form is not square".into()));
        }
        let ng = generators.len();
        let check = |i: usize, limit: usize| -> Result<()> {
            if i >= limit {
                Err(Error::OutOfRange { index: i, limit })
            } else {
                Ok(())
            }
        };
        for g in &generators {
            if g.nrows() != n || g.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, got: g.nrows() });
            }
            let r = (g.transpose() * &form * g - &form).norm();
            if r > lit::<T>(1e-9) * form.norm().max(T::one()) {
                return Err(Error::NotFormPreserving(to_f64(r)));
            }
            if g.clone().try_inverse().is_none() {
                return Err(Error::Singular);
            }
        }
        for e in &edges {
            if e.direction.nrows() != n || e.direction.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, got: e.direction.nrows() });
            }
            let scale = e.direction.norm().max(T::one());
            let r = lie_residual(&e.direction, &form);
            if r > lit::<T>(CENTRALIZER_TOL) * scale {
                return Err(Error::Precondition(format!("edge direction is not in the Lie algebra (residual {:e})", to_f64(r))));
            }
            for &h in &e.group {
                check(h, ng)?;
                let g = &generators[h];
                let c = (&e.direction * g - g * &e.direction).norm();
                if c > lit::<T>(CENTRALIZER_TOL) * scale * g.norm().max(T::one()) {
                    return Err(Error::NotCentralizing(to_f64(c)));
                }
            }
        }
        let ne = edges.len();
        for f in &factors {
            f.generators.iter().try_for_each(|&g| check(g, ng))?;
            f.chain.iter().try_for_each(|&e| check(e, ne))?;
        }
        for l in &letters {
            check(l.generator, ng)?;
            check(l.edge, ne)?;
            l.chain_in.iter().chain(&l.chain_out).try_for_each(|&e| check(e, ne))?;
        }
        for w in &relations {
            w.iter().try_for_each(|&(g, _)| check(g, ng))?;
        }
        Ok(BendDatum { form, generators, edges, factors, letters, relations })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawDatum =
            serde_json::from_str(text).map_err(|e| Error::Parse { location: "datum".into(), message: e.to_string() })?;
        let form = matrix(&raw.form, "form")?;
        let generators = raw.generators.iter().map(|g| matrix(g, "generators")).collect::<Result<_>>()?;
        let edges = raw
            .edges
            .iter()
            .map(|e| Ok(Edge { direction: matrix(&e.direction, "edges")?, group: e.group.clone() }))
            .collect::<Result<_>>()?;
        Self::new(form, generators, edges, raw.factors, raw.letters, raw.relations)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "form": to_rows(&self.form),
            "generators": self.generators.iter().map(to_rows).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|e| serde_json::json!({
                "direction": to_rows(&e.direction),
                "group": e.group,
            })).collect::<Vec<_>>(),
            "factors": self.factors,
            "letters": self.letters,
            "relations": self.relations,
        })
    }

    fn chain_product(&self, chain: &[usize], s: T) -> DMatrix<T> {
        let n = self.form.nrows();
        chain
            .iter()
            .fold(DMatrix::identity(n, n), |acc, &e| acc * expm(&(&self.edges[e].direction * s)))
    }

    fn chain_inverse(&self, chain: &[usize], s: T) -> DMatrix<T> {
        let n = self.form.nrows();
        chain
            .iter()
            .rev()
            .fold(DMatrix::identity(n, n), |acc, &e| acc * expm(&(&self.edges[e].direction * (-s))))
    }

    /// Image of a word under the given generator images.
    pub fn evaluate(&self, gens: &[DMatrix<T>], word: &[(usize, i32)]) -> Result<DMatrix<T>> {
        let n = self.form.nrows();
        let mut out = DMatrix::identity(n, n);
        for &(g, k) in word {
            let m = if k < 0 { gens[g].clone().try_inverse().ok_or(Error::Singular)? } else { gens[g].clone() };
            for _ in 0..k.unsigned_abs() {
                out = &out * &m;
            }
        }
        Ok(out)
    }

    /// `max ||w - I||_F` over the relation words.
    pub fn relation_residual(&self, gens: &[DMatrix<T>]) -> Result<T> {
        let n = self.form.nrows();
        let id = DMatrix::<T>::identity(n, n);
        let mut worst = T::zero();
        for w in &self.relations {
            worst = worst.max((self.evaluate(gens, w)? - &id).norm());
        }
        Ok(worst)
    }

    /// `max ||g^T J g - J||_F`.
    pub fn form_residual(&self, gens: &[DMatrix<T>]) -> T {
        gens.iter()
            .map(|g| (g.transpose() * &self.form * g - &self.form).norm())
            .fold(T::zero(), |m, r| m.max(r))
    }
}

/// Conjugates the generators of one factor by its chain of exponentials.
pub fn bend_amalgam<T: Real>(datum: &BendDatum<T>, gens: &[DMatrix<T>], factor: usize, s: T) -> Result<Vec<DMatrix<T>>> {
    let f = datum.factors.get(factor).ok_or(Error::OutOfRange { index: factor, limit: datum.factors.len() })?;
    let mut out = gens.to_vec();
    if s.is_zero() || f.chain.is_empty() {
        return Ok(out);
    }
    let h = datum.chain_product(&f.chain, s);
    let hinv = datum.chain_inverse(&f.chain, s);
    for &g in &f.generators {
        out[g] = &h * &gens[g] * &hinv;
    }
    Ok(out)
}

/// Multiplies a stable letter by its exponentials.
pub fn bend_hnn<T: Real>(datum: &BendDatum<T>, gens: &[DMatrix<T>], letter: usize, s: T) -> Result<Vec<DMatrix<T>>> {
    let l = datum.letters.get(letter).ok_or(Error::OutOfRange { index: letter, limit: datum.letters.len() })?;
    let mut out = gens.to_vec();
    if s.is_zero() {
        return Ok(out);
    }
    let pre = datum.chain_product(&l.chain_in, s);
    let post_inv = datum.chain_inverse(&l.chain_out, s);
    let x = expm(&(&datum.edges[l.edge].direction * s));
    out[l.generator] = pre * &gens[l.generator] * x * post_inv;
    Ok(out)
}

/// Bends every factor and every stable letter with the same parameter.
pub fn bend_all<T: Real>(datum: &BendDatum<T>, s: T) -> Result<Vec<DMatrix<T>>> {
    let mut gens = datum.generators.clone();
    for f in 0..datum.factors.len() {
        gens = bend_amalgam(datum, &gens, f, s)?;
    }
    for l in 0..datum.letters.len() {
        gens = bend_hnn(datum, &gens, l, s)?;
    }
    Ok(gens)
}

/// Form-preserving boost of rapidity `t` in the plane of a positive axis `i` and a negative axis `k`.
pub fn boost<T: Real>(n: usize, i: usize, k: usize, t: T) -> DMatrix<T> {
    let mut m = DMatrix::identity(n, n);
    m[(i, i)] = t.cosh();
    m[(k, k)] = t.cosh();
    m[(i, k)] = t.sinh();
    m[(k, i)] = t.sinh();
    m
}

/// Amalgam `<a, c> *_<c> <b, c>` in `O(2,2)`; the second factor is bent along
/// a boost commuting with the shared element.
pub fn toy_amalgam<T: Real>() -> BendDatum<T> {
    let j = diagonal_form::<T>(2, 2);
    let c = boost(4, 1, 2, T::one());
    let a = boost(4, 0, 2, lit(2.0));
    let b = boost(4, 1, 3, lit(2.0));
    let x = canonical_x::<T>(2, 1, 1).expect("valid indices");
    BendDatum::new(
        j,
        vec![a, c.clone(), b, c],
        vec![Edge { direction: x, group: vec![1] }],
        vec![Factor { generators: vec![0, 1], chain: vec![] }, Factor { generators: vec![2, 3], chain: vec![0] }],
        vec![],
        vec![vec![(1, 1), (3, -1)], vec![(1, 2), (3, -2)]],
    )
    .expect("toy amalgam is valid")
}

/// HNN extension `<a, c, g | g c g^-1 = c>` in `O(2,2)`; the stable letter is bent.
pub fn toy_hnn<T: Real>() -> BendDatum<T> {
    let j = diagonal_form::<T>(2, 2);
    let c = boost(4, 1, 2, T::one());
    let a = boost(4, 0, 2, lit(2.0));
    let g = boost(4, 1, 2, lit(1.5));
    let x = canonical_x::<T>(2, 1, 1).expect("valid indices");
    BendDatum::new(
        j,
        vec![a, c, g],
        vec![Edge { direction: x, group: vec![1] }],
        vec![],
        vec![StableLetter { generator: 2, edge: 0, chain_in: vec![], chain_out: vec![] }],
        vec![vec![(2, 1), (1, 1), (2, -1), (1, -1)]],
    )
    .expect("toy HNN datum is valid")
}
