//! Spectral diagnostics for finitely generated subgroups of `O(p,q+1)`:
//! Jordan projections, proximality, eigenvalue gaps along word spheres,
//! attracting fixed points and the limit cone.

use std::collections::HashMap;

use nalgebra::{Complex, DMatrix, DVector, Schur};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::QuadraticSpace;
use crate::groups::words::{Letter, Word, WordBall};
use crate::model::{lift_nonpositive, Lift};
use crate::scalar::{lit, to_f64, Real};

/// Iteration cap for one Schur decomposition.
pub const SCHUR_MAX_ITER: usize = 10_000;

/// Complex eigenvalues. QR iteration converges slowly on defective
/// eigenvalues (parabolic elements), so a stalled run is retried with a
/// looser deflation threshold and then on fixed orthogonal conjugates.
fn eigenvalues<T: Real>(g: &DMatrix<T>) -> Result<Vec<Complex<T>>> {
    let n = g.nrows();
    for attempt in 0..6 {
        let eps = T::default_epsilon() * lit::<T>(if attempt == 0 { 1.0 } else { 1e4 });
        let m = if attempt < 2 {
            g.clone()
        } else {
            // Householder reflection along a fixed irregular direction
            let v = DVector::from_fn(n, |i, _| lit::<T>(((i + 1) as f64 * (attempt as f64 + 0.5)).sin() + 1.5));
            let h = DMatrix::identity(n, n) - (&v * v.transpose()) * (lit::<T>(2.0) / v.norm_squared());
            &h * g * &h
        };
        if let Some(s) = Schur::try_new(m, eps, SCHUR_MAX_ITER) {
            return Ok(s.complex_eigenvalues().iter().copied().collect());
        }
    }
    Err(Error::NoConvergence(SCHUR_MAX_ITER))
}

/// Eigenvalues as `(re, im)` with moduli, sorted by decreasing modulus.
fn spectrum<T: Real>(g: &DMatrix<T>) -> Result<Vec<(T, T, T)>> {
    if g.nrows() != g.ncols() || g.nrows() == 0 {
        return Err(Error::DimensionMismatch { expected: g.nrows(), got: g.ncols() });
    }
    let ev = eigenvalues(g)?;
    let mut out: Vec<(T, T, T)> = ev.iter().map(|z| (z.re, z.im, (z.re * z.re + z.im * z.im).sqrt())).collect();
    let scale = g.norm();
    if out.iter().any(|e| e.2 <= T::default_epsilon() * scale) {
        return Err(Error::Singular);
    }
    out.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// Logs of the `r` largest eigenvalue moduli, nonincreasing.
pub fn jordan_projection<T: Real>(g: &DMatrix<T>, r: usize) -> Result<Vec<T>> {
    let s = spectrum(g)?;
    if r > s.len() {
        return Err(Error::OutOfRange { index: r, limit: s.len() + 1 });
    }
    Ok(s.iter().take(r).map(|e| e.2.ln()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProximalityClass {
    pub proximal: bool,
    pub positively_proximal: bool,
    pub semi_proximal: bool,
    pub positively_semi_proximal: bool,
    /// Some modulus lies too close to the top one to decide.
    pub undecided: bool,
}

/// Moduli within this relative distance of the top one are tied.
pub const CLUSTER_TOL: f64 = 1e-7;
/// Moduli between the cluster tolerance and this are reported undecided.
pub const UNDECIDED_TOL: f64 = 1e-6;

pub fn proximality_class<T: Real>(g: &DMatrix<T>) -> Result<ProximalityClass> {
    let s = spectrum(g)?;
    let top = s[0].2;
    let tie = lit::<T>(CLUSTER_TOL) * top;
    let grey = lit::<T>(UNDECIDED_TOL) * top;
    let tied: Vec<&(T, T, T)> = s.iter().filter(|e| top - e.2 <= tie).collect();
    let undecided = s.iter().any(|e| {
        let d = top - e.2;
        d > tie && d <= grey
    });
    let real = |e: &&(T, T, T)| e.1.abs() <= tie;
    let semi = tied.iter().any(real);
    let pos_semi = tied.iter().any(|e| real(e) && e.0 > T::zero());
    let proximal = tied.len() == 1 && real(&tied[0]);
    Ok(ProximalityClass {
        proximal,
        positively_proximal: proximal && pos_semi,
        semi_proximal: semi,
        positively_semi_proximal: pos_semi,
        undecided,
    })
}

/// Cyclic reduction followed by the least rotation, as a conjugacy key.
pub fn cyclic_key(w: &Word) -> Word {
    let mut v = w.0.clone();
    while v.len() >= 2 && v[0] == v[v.len() - 1].inv() {
        v.pop();
        v.remove(0);
    }
    let n = v.len();
    let code = |l: &Letter| (l.generator, l.inverse);
    let best = (0..n.max(1))
        .min_by(|&a, &b| {
            (0..n)
                .map(|k| code(&v[(a + k) % n]))
                .cmp((0..n).map(|k| code(&v[(b + k) % n])))
        })
        .unwrap_or(0);
    Word((0..n).map(|k| v[(best + k) % n]).collect())
}

/// Per-length statistics of `lambda_1 - lambda_2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSeries {
    /// Entry `l - 1` describes length `l`.
    pub min: Vec<Option<f64>>,
    pub median: Vec<Option<f64>>,
    pub count: Vec<usize>,
}

impl GapSeries {
    pub fn max_len(&self) -> usize {
        self.min.len()
    }
}

/// Gaps of one representative per cyclic word class, grouped by the length
/// of the reduced class word.
pub fn gap_series<T: Real>(ball: &WordBall<T>) -> Result<GapSeries> {
    if ball.is_empty() {
        return Err(Error::Empty("word ball"));
    }
    let l = ball.radius;
    let mut seen: HashMap<Word, ()> = HashMap::new();
    let mut gaps: Vec<Vec<f64>> = vec![Vec::new(); l];
    for e in &ball.elements {
        let key = cyclic_key(&e.word);
        if key.is_empty() || seen.insert(key.clone(), ()).is_some() {
            continue;
        }
        let j = jordan_projection(&e.matrix, 2)?;
        gaps[key.len() - 1].push(to_f64(j[0] - j[1]));
    }
    let mut out = GapSeries { min: Vec::with_capacity(l), median: Vec::with_capacity(l), count: Vec::with_capacity(l) };
    for mut g in gaps {
        g.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        out.count.push(g.len());
        out.min.push(g.first().copied());
        out.median.push(if g.is_empty() {
            None
        } else if g.len() % 2 == 1 {
            Some(g[g.len() / 2])
        } else {
            Some(0.5 * (g[g.len() / 2 - 1] + g[g.len() / 2]))
        });
    }
    Ok(out)
}

/// Attracting fixed points of ball elements with a large enough gap.
#[derive(Debug, Clone)]
pub struct LimitSample<T: Real> {
    /// Unit vectors, largest-magnitude entry positive.
    pub points: Vec<DVector<T>>,
    /// Index of the ball element each point came from.
    pub sources: Vec<usize>,
}

/// Euclidean distance below which two normalized points are merged.
pub const POINT_MERGE_TOL: f64 = 1e-7;

fn sign_normalize<T: Real>(v: DVector<T>) -> DVector<T> {
    let v = &v / v.norm();
    let big = v.iter().fold(T::zero(), |a, x| a.max(x.abs()));
    let pivot = *v.iter().find(|x| x.abs() >= big * (T::one() - lit(1e-9))).expect("nonzero vector");
    if pivot < T::zero() {
        -v
    } else {
        v
    }
}

pub fn sample_limit_set<T: Real>(
    space: &QuadraticSpace<T>,
    ball: &WordBall<T>,
    gap_threshold: T,
) -> Result<LimitSample<T>> {
    let j = space.gram();
    for g in &ball.generators {
        let r = (g.transpose() * j * g - j).norm();
        if r > lit::<T>(1e-9) * j.norm().max(T::one()) * g.norm().max(T::one()) {
            return Err(Error::NotFormPreserving(to_f64(r)));
        }
    }
    let n = space.dim();
    let mut out = LimitSample { points: Vec::new(), sources: Vec::new() };
    for (idx, e) in ball.elements.iter().enumerate() {
        if e.word.is_empty() {
            continue;
        }
        let s = spectrum(&e.matrix)?;
        if s[0].2.ln() - s[1].2.ln() < gap_threshold {
            continue;
        }
        let scale = e.matrix.norm();
        let m = (&e.matrix - DMatrix::identity(n, n) * s[0].0) / scale;
        let svd = m.svd(false, true);
        let vt = svd.v_t.ok_or(Error::NoConvergence(0))?;
        let (k, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, T::max_value().unwrap_or(T::one() / T::default_epsilon())), |(bi, bv), (i, &v)| {
                if v < bv {
                    (i, v)
                } else {
                    (bi, bv)
                }
            });
        let x = sign_normalize(vt.row(k).transpose());
        if out.points.iter().all(|y| (y - &x).norm() > lit(POINT_MERGE_TOL)) {
            out.points.push(x);
            out.sources.push(idx);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegativityVerdict {
    Negative,
    NonPositiveOnly,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativityReport {
    pub verdict: NegativityVerdict,
    /// `min |b(x_i, x_j)|` over pairs of the given vectors.
    pub margin: f64,
    /// Odd cycle of sign constraints when inconsistent.
    pub cycle: Option<Vec<usize>>,
}

pub fn negativity_test<T: Real>(space: &QuadraticSpace<T>, points: &[DVector<T>]) -> Result<NegativityReport> {
    if points.len() < 2 {
        return Err(Error::Empty("at least two points"));
    }
    let mut margin = T::max_value().unwrap_or(T::one() / T::default_epsilon());
    let mut strict = true;
    for i in 0..points.len() {
        for k in (i + 1)..points.len() {
            let b = space.apply(&points[i], &points[k]);
            margin = margin.min(b.abs());
            if b.abs() <= space.zero_band(&points[i], &points[k]) {
                strict = false;
            }
        }
    }
    let margin = to_f64(margin);
    Ok(match lift_nonpositive(space, points)? {
        Lift::Frustrated { cycle } => NegativityReport { verdict: NegativityVerdict::Inconsistent, margin, cycle: Some(cycle) },
        Lift::Coherent { .. } => NegativityReport {
            verdict: if strict { NegativityVerdict::Negative } else { NegativityVerdict::NonPositiveOnly },
            margin,
            cycle: None,
        },
    })
}

/// Angular tolerance for merging cone rays.
pub const RAY_MERGE_TOL: f64 = 1e-6;

/// Normalized Jordan projections of the non-elliptic ball elements.
pub fn limit_cone_sample<T: Real>(ball: &WordBall<T>, r: usize) -> Result<Vec<DVector<T>>> {
    if ball.is_empty() {
        return Err(Error::Empty("word ball"));
    }
    let mut rays: Vec<DVector<T>> = Vec::new();
    for e in &ball.elements {
        let v = DVector::from_vec(jordan_projection(&e.matrix, r)?);
        let n = v.norm();
        if n <= lit(1e-12) {
            continue;
        }
        let v = v / n;
        let two = lit::<T>(2.0);
        if rays.iter().all(|w| two * ((w - &v).norm() / two).asin() > lit(RAY_MERGE_TOL)) {
            rays.push(v);
        }
    }
    Ok(rays)
}
