//! Crowns: `2j` boundary points, each transverse to exactly one partner.
//! Detection, adapted bases, the diagonal flow on the crown simplex and its
//! Hilbert geometry.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::forms::{QuadraticSpace, Signature};
use crate::graphs::{GraphDomain, GraphMap, LipschitzGraph};
use crate::linalg::hstack;
use crate::model::{hilbert_distance, BoundaryPoint, HalfspaceDomain, TimelikeFrame};
use crate::scalar::{lit, Real};

/// A `j`-crown. Lifts are stored as `[x1+, .., xj+, x1-, .., xj-]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Crown<T: Real> {
    j: usize,
    lifts: Vec<DVector<T>>,
    pairing: DMatrix<T>,
    indices: Vec<usize>,
}

fn transverse<T: Real>(space: &QuadraticSpace<T>, x: &DVector<T>, y: &DVector<T>) -> bool {
    space.apply(x, y).abs() > space.zero_band(x, y)
}

impl<T: Real> Crown<T> {
    /// Checks isotropy, the transversality pattern and the span signature `(j,j|0)`.
    pub fn new(space: &QuadraticSpace<T>, plus: Vec<DVector<T>>, minus: Vec<DVector<T>>) -> Result<Self> {
        let j = plus.len();
        if j == 0 || minus.len() != j {
            return Err(Error::Precondition("a crown needs j >= 1 matched pairs".into()));
        }
        let lifts: Vec<DVector<T>> = plus.into_iter().chain(minus).collect();
        for v in &lifts {
            BoundaryPoint::new(space, v.clone())?;
        }
        for a in 0..2 * j {
            for b in (a + 1)..2 * j {
                let partners = b == a + j;
                if transverse(space, &lifts[a], &lifts[b]) != partners {
                    return Err(Error::Precondition(format!("points {a} and {b} break the crown pattern")));
                }
            }
        }
        let sig = space.restrict(&lifts)?.signature();
        if sig != Signature::new(j, j, 0) {
            return Err(Error::Precondition(format!("crown span has signature {sig}")));
        }
        let n = 2 * j;
        let pairing = DMatrix::from_fn(n, n, |a, b| space.apply(&lifts[a], &lifts[b]));
        Ok(Crown { j, lifts, pairing, indices: Vec::new() })
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn lifts(&self) -> &[DVector<T>] {
        &self.lifts
    }

    pub fn plus(&self, i: usize) -> &DVector<T> {
        &self.lifts[i]
    }

    pub fn minus(&self, i: usize) -> &DVector<T> {
        &self.lifts[self.j + i]
    }

    pub fn pairing(&self) -> &DMatrix<T> {
        &self.pairing
    }

    /// Indices into the sample set the crown was detected in, in lift order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

/// Crowns found by [`detect_crowns`].
#[derive(Debug, Clone)]
pub struct CrownScan<T: Real> {
    pub crowns: Vec<Crown<T>>,
    pub truncated: bool,
}

/// Search nodes visited before [`detect_crowns`] gives up.
pub const CROWN_SEARCH_BUDGET: usize = 20_000_000;

/// Enumerates `2j`-subsets of the samples in lexicographic order and keeps
/// those whose transversality graph is a perfect matching and whose span has
/// signature `(j,j|0)`.
pub fn detect_crowns<T: Real>(
    space: &QuadraticSpace<T>,
    samples: &[DVector<T>],
    j: usize,
    max_results: usize,
) -> Result<CrownScan<T>> {
    if j == 0 {
        return Err(Error::Precondition("j must be positive".into()));
    }
    let unit: Vec<DVector<T>> = samples
        .iter()
        .map(|v| BoundaryPoint::new(space, v.clone()).map(|b| b.vec().clone()))
        .collect::<Result<_>>()?;
    let n = unit.len();
    let mut adj = vec![false; n * n];
    for a in 0..n {
        for b in (a + 1)..n {
            let t = transverse(space, &unit[a], &unit[b]);
            adj[a * n + b] = t;
            adj[b * n + a] = t;
        }
    }
    let mut search = Search {
        adj: &adj,
        n,
        size: 2 * j,
        chosen: Vec::with_capacity(2 * j),
        degree: vec![0; 2 * j],
        found: Vec::new(),
        visited: 0,
        stop: false,
        max_results,
    };
    if max_results > 0 && 2 * j <= n {
        search.extend(0);
    }
    let truncated = search.stop;
    let mut crowns = Vec::new();
    for subset in search.found {
        // pair each point with its partner; the smaller index is the plus point
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        let mut idx_plus = Vec::new();
        let mut idx_minus = Vec::new();
        for (a, &ia) in subset.iter().enumerate() {
            for &ib in &subset[a + 1..] {
                if adj[ia * n + ib] {
                    plus.push(unit[ia].clone());
                    minus.push(unit[ib].clone());
                    idx_plus.push(ia);
                    idx_minus.push(ib);
                }
            }
        }
        if let Ok(mut c) = Crown::new(space, plus, minus) {
            idx_plus.extend(idx_minus);
            c.indices = idx_plus;
            crowns.push(c);
        }
    }
    Ok(CrownScan { crowns, truncated })
}

struct Search<'a> {
    adj: &'a [bool],
    n: usize,
    size: usize,
    chosen: Vec<usize>,
    degree: Vec<usize>,
    found: Vec<Vec<usize>>,
    visited: usize,
    stop: bool,
    max_results: usize,
}

impl Search<'_> {
    fn extend(&mut self, start: usize) {
        if self.chosen.len() == self.size {
            if self.degree.iter().all(|&d| d == 1) {
                self.found.push(self.chosen.clone());
                if self.found.len() >= self.max_results {
                    self.stop = true;
                }
            }
            return;
        }
        let need = self.size - self.chosen.len();
        for c in start..=(self.n - need) {
            if self.stop {
                return;
            }
            self.visited += 1;
            if self.visited > CROWN_SEARCH_BUDGET {
                self.stop = true;
                return;
            }
            let k = self.chosen.len();
            let mut d = 0;
            let mut ok = true;
            for (s, &other) in self.chosen.iter().enumerate() {
                if self.adj[other * self.n + c] {
                    d += 1;
                    if self.degree[s] >= 1 || d > 1 {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            // points still unmatched must find partners among the remaining slots
            let unmatched = self.degree[..k].iter().filter(|&&x| x == 0).count() - d + usize::from(d == 0);
            if unmatched > need - 1 {
                continue;
            }
            for (s, &other) in self.chosen.iter().enumerate() {
                if self.adj[other * self.n + c] {
                    self.degree[s] += 1;
                }
            }
            self.degree[k] = d;
            self.chosen.push(c);
            self.extend(c + 1);
            self.chosen.pop();
            self.degree[k] = 0;
            for (s, &other) in self.chosen.iter().enumerate() {
                if self.adj[other * self.n + c] {
                    self.degree[s] -= 1;
                }
            }
        }
    }
}

/// Index of a sample `w` with `C` inside `w^perp`, if any.
pub fn is_boundary_crown<T: Real>(space: &QuadraticSpace<T>, crown: &Crown<T>, samples: &[DVector<T>]) -> Option<usize> {
    samples
        .iter()
        .position(|w| crown.lifts.iter().all(|x| !transverse(space, w, x)))
}

/// Lifts `e'_1, .., e'_2j` of a crown with `b(e'_i, e'_(j+i)) = -1` and all other pairings zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedBasis<T: Real> {
    space: QuadraticSpace<T>,
    vectors: Vec<DVector<T>>,
    residual: T,
}

/// Largest allowed deviation from the adapted pairing pattern, relative to the vector norms.
pub const ADAPTED_RESIDUAL: f64 = 1e-10;

impl<T: Real> AdaptedBasis<T> {
    /// Accepts vectors already in adapted form.
    pub fn new(space: &QuadraticSpace<T>, vectors: Vec<DVector<T>>) -> Result<Self> {
        if vectors.is_empty() || !vectors.len().is_multiple_of(2) {
            return Err(Error::Precondition("an adapted basis has 2j vectors".into()));
        }
        let j = vectors.len() / 2;
        let mut residual = T::zero();
        for a in 0..2 * j {
            for b in a..2 * j {
                let target = if b == a + j { -T::one() } else { T::zero() };
                let dev = (space.apply(&vectors[a], &vectors[b]) - target).abs()
                    / (vectors[a].norm() * vectors[b].norm()).max(T::one());
                residual = residual.max(dev);
            }
        }
        if residual > lit(ADAPTED_RESIDUAL) {
            return Err(Error::Precondition(format!("pairing pattern residual {residual:e}")));
        }
        Ok(AdaptedBasis { space: space.clone(), vectors, residual })
    }

    pub fn j(&self) -> usize {
        self.vectors.len() / 2
    }

    pub fn vectors(&self) -> &[DVector<T>] {
        &self.vectors
    }

    pub fn residual(&self) -> T {
        self.residual
    }

    pub fn space(&self) -> &QuadraticSpace<T> {
        &self.space
    }

    /// `sum_k c_k e'_k`.
    pub fn combine(&self, coeffs: &[T]) -> Result<DVector<T>> {
        if coeffs.len() != self.vectors.len() {
            return Err(Error::DimensionMismatch { expected: self.vectors.len(), got: coeffs.len() });
        }
        let mut v = DVector::zeros(self.space.dim());
        for (c, e) in coeffs.iter().zip(&self.vectors) {
            v += e * *c;
        }
        Ok(v)
    }

    /// The open simplex cone spanned by the basis, as a half-space domain.
    pub fn simplex_domain(&self) -> Result<HalfspaceDomain<T>> {
        HalfspaceDomain::new(self.vectors.clone())
    }
}

/// Flips each minus lift to pair negatively with its partner, then rescales
/// both by `1/sqrt|b|`.
pub fn adapted_basis<T: Real>(space: &QuadraticSpace<T>, crown: &Crown<T>) -> Result<AdaptedBasis<T>> {
    let j = crown.j;
    let mut plus = Vec::with_capacity(j);
    let mut minus = Vec::with_capacity(j);
    for i in 0..j {
        let x = crown.plus(i);
        let mut y = crown.minus(i).clone();
        let mut beta = space.apply(x, &y);
        if beta.abs() <= space.zero_band(x, &y) {
            return Err(Error::Precondition(format!("pair {i} has zero pairing")));
        }
        if beta > T::zero() {
            y = -y;
            beta = -beta;
        }
        let s = T::one() / (-beta).sqrt();
        plus.push(x * s);
        minus.push(y * s);
    }
    plus.extend(minus);
    AdaptedBasis::new(space, plus)
}

/// A point `exp(a) . x` on an orbit of the diagonal flow.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitPoint<T: Real> {
    pub base: Vec<T>,
    pub a: Vec<T>,
    /// Coefficients of the result in the adapted basis.
    pub coeffs: Vec<T>,
    pub vector: DVector<T>,
    /// `b(u_i, u_i) = -2 v_i v_(j+i)` for the pair components `u_i` of the result.
    pub weights: Vec<T>,
}

/// Applies `diag(e^a1, .., e^aj, e^-a1, .., e^-aj)` to the point with
/// positive coefficients `base`; optionally rescales onto `b = -1`.
pub fn orbit_point<T: Real>(basis: &AdaptedBasis<T>, base: &[T], a: &[T], normalize: bool) -> Result<OrbitPoint<T>> {
    let j = basis.j();
    if base.len() != 2 * j {
        return Err(Error::DimensionMismatch { expected: 2 * j, got: base.len() });
    }
    if a.len() != j {
        return Err(Error::DimensionMismatch { expected: j, got: a.len() });
    }
    if base.iter().any(|&c| c <= T::zero()) {
        return Err(Error::Precondition("orbit base needs positive coefficients".into()));
    }
    let mut coeffs = base.to_vec();
    for i in 0..j {
        coeffs[i] *= a[i].exp();
        coeffs[j + i] *= (-a[i]).exp();
    }
    if normalize {
        let q: T = (0..j).fold(T::zero(), |s, i| s + coeffs[i] * coeffs[j + i]);
        let s = T::one() / (q + q).sqrt();
        for c in &mut coeffs {
            *c *= s;
        }
    }
    let two = lit::<T>(2.0);
    let weights = (0..j).map(|i| -two * coeffs[i] * coeffs[j + i]).collect();
    let vector = basis.combine(&coeffs)?;
    Ok(OrbitPoint { base: base.to_vec(), a: a.to_vec(), coeffs, vector, weights })
}

/// Hilbert distance in the crown simplex between `x` and `exp(a) . x`.
pub fn orbit_hilbert_distance<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Relative tolerance on the equality of pair weights.
pub const MAXIMALITY_TOL: f64 = 1e-9;

/// True iff all pair weights agree.
pub fn maximality_test<T: Real>(p: &OrbitPoint<T>) -> bool {
    let big = p.weights.iter().fold(T::zero(), |m, w| m.max(w.abs()));
    let lo = p.weights.iter().fold(p.weights[0], |m, &w| m.min(w));
    let hi = p.weights.iter().fold(p.weights[0], |m, &w| m.max(w));
    hi - lo <= lit::<T>(MAXIMALITY_TOL) * big
}

/// The non-hyperbolic quadrilateral on the orbit through `x`.
#[derive(Debug, Clone)]
pub struct Quadrilateral<T: Real> {
    /// Flow parameters of the vertices `a`, `b`, `c`, `d`.
    pub vertices: [Vec<T>; 4],
    /// Smallest sampled Hilbert distance from `x` to the sides `ac`, `cd`, `db`.
    pub min_distance: T,
    pub samples: usize,
}

/// Points sampled on each side.
pub const SIDE_SAMPLES: usize = 64;

pub fn quadrilateral_demo<T: Real>(basis: &AdaptedBasis<T>, base: &[T], r: T) -> Result<Quadrilateral<T>> {
    let j = basis.j();
    if j < 2 {
        return Err(Error::Precondition("the quadrilateral needs j >= 2".into()));
    }
    if r < T::zero() {
        return Err(Error::Precondition("R must be nonnegative".into()));
    }
    let shift = |first: T, rest: T| -> Vec<T> {
        let mut v = vec![rest; j];
        v[0] = first;
        v
    };
    let three = lit::<T>(3.0);
    let va = shift(r, -r);
    let vb = shift(-r, r);
    let vc = shift(-r, -three * r);
    let vd = shift(-three * r, -r);
    let domain = basis.simplex_domain()?;
    let x = orbit_point(basis, base, &vec![T::zero(); j], false)?.vector;
    let sides: [(&Vec<T>, Vec<T>); 3] = [
        (&va, shift(-T::one(), -T::one())),
        (&vc, shift(-T::one(), T::one())),
        (&vd, shift(T::one(), T::one())),
    ];
    let mut min = T::max_value().unwrap_or(T::one() / T::default_epsilon());
    let mut samples = 0;
    let last = lit::<T>((SIDE_SAMPLES - 1) as f64);
    for (start, dir) in sides {
        for k in 0..SIDE_SAMPLES {
            let t = (r + r) * lit::<T>(k as f64) / last;
            let a: Vec<T> = start.iter().zip(&dir).map(|(s, d)| *s + *d * t).collect();
            let y = orbit_point(basis, base, &a, false)?.vector;
            let d = if r.is_zero() { T::zero() } else { hilbert_distance(basis.space(), &domain, &x, &y)? };
            min = min.min(d);
            samples += 1;
        }
    }
    Ok(Quadrilateral { vertices: [va, vb, vc, vd], min_distance: min, samples })
}

/// The ambient form of the standard crown: `-[[0, I], [I, 0]]` in adapted coordinates.
pub fn standard_crown_space<T: Real>(j: usize) -> QuadraticSpace<T> {
    let mut g = DMatrix::zeros(2 * j, 2 * j);
    for i in 0..j {
        g[(i, j + i)] = -T::one();
        g[(j + i, i)] = -T::one();
    }
    QuadraticSpace::new(g).expect("standard crown form is symmetric")
}

/// The coordinate basis of [`standard_crown_space`], which is adapted.
pub fn standard_adapted_basis<T: Real>(j: usize) -> AdaptedBasis<T> {
    let space = standard_crown_space(j);
    let vectors = (0..2 * j).map(|k| crate::linalg::unit(2 * j, k)).collect();
    AdaptedBasis::new(&space, vectors).expect("coordinate basis is adapted")
}

/// Timelike frame `e_i = (e'_i - e'_(j+i))/sqrt2`, `e_(j+i) = (e'_i + e'_(j+i))/sqrt2`.
pub fn standard_crown_frame<T: Real>(j: usize) -> Result<TimelikeFrame<T>> {
    let space = standard_crown_space::<T>(j);
    let h = T::one() / lit::<T>(2.0).sqrt();
    let mut cols = Vec::with_capacity(2 * j);
    for i in 0..j {
        let mut v = DVector::zeros(2 * j);
        v[i] = h;
        v[j + i] = -h;
        cols.push(v);
    }
    for i in 0..j {
        let mut v = DVector::zeros(2 * j);
        v[i] = h;
        v[j + i] = h;
        cols.push(v);
    }
    TimelikeFrame::new(&space, hstack(&cols), j)
}

/// The orbit of `sum tau_i e_(j+i)` under the diagonal flow, as a graph over `B^j`.
pub fn crown_orbit_graph<T: Real>(tau: &[T]) -> Result<LipschitzGraph<T>> {
    let j = tau.len();
    if j == 0 {
        return Err(Error::Empty("tau"));
    }
    let n2 = tau.iter().fold(T::zero(), |s, t| s + *t * *t);
    if (n2 - T::one()).abs() > lit(1e-12) {
        return Err(Error::Precondition("tau must be a unit vector".into()));
    }
    let space = standard_crown_space(j);
    let frame = standard_crown_frame(j)?;
    LipschitzGraph::new(space, frame, GraphDomain::Hemisphere, GraphMap::CrownOrbit(tau.to_vec()))
}

/// Experimental: sample pairs `(y, z)` that extend `crown` to a `(j+1)`-crown.
/// Finds candidates only; says nothing about crowns outside the samples.
pub fn extend_crown_scan<T: Real>(
    space: &QuadraticSpace<T>,
    crown: &Crown<T>,
    samples: &[DVector<T>],
) -> Result<Vec<(usize, usize)>> {
    let ortho: Vec<usize> = (0..samples.len())
        .filter(|&k| crown.lifts.iter().all(|x| !transverse(space, &samples[k], x)))
        .collect();
    let mut out = Vec::new();
    for (a, &ia) in ortho.iter().enumerate() {
        for &ib in &ortho[a + 1..] {
            if !transverse(space, &samples[ia], &samples[ib]) {
                continue;
            }
            let plus: Vec<_> = (0..crown.j).map(|i| crown.plus(i).clone()).chain([samples[ia].clone()]).collect();
            let minus: Vec<_> = (0..crown.j).map(|i| crown.minus(i).clone()).chain([samples[ib].clone()]).collect();
            if Crown::new(space, plus, minus).is_ok() {
                out.push((ia, ib));
            }
        }
    }
    Ok(out)
}
