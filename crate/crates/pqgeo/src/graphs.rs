//! Graphs of 1-Lipschitz maps `B^p -> S^q` (and `S^(p-1) -> S^q`) in the
//! conformal splitting: Lipschitz checks, kernel spheres, split spacetimes and
//! the timelike distance to the boundary of `Omega`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{QuadraticSpace, Signature};
use crate::linalg::{hstack, null_space, rank, sphere_dist};
use crate::model::{
    conformal_split, conformal_unsplit, pair_class, ConformalCoords, HPoint, PairClass, Point,
    TimelikeFrame,
};
use crate::sampling::{hemisphere, quasi_uniform_directions, unit_sphere};
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Domain of the map: the open hemisphere `B^p` or the sphere `S^(p-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphDomain {
    Hemisphere,
    Sphere,
}

/// How the graph is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphMap<T: Real> {
    /// Constant map onto a unit vector of `R^(q+1)`.
    Constant(DVector<T>),
    /// `y -> (sqrt(y0^2/p + y_i^2))_i`, zero-padded.
    SqrtFamily,
    /// `y -> (sqrt(tau_i^2 y0^2 + y_i^2))_i` in a crown frame.
    CrownOrbit(Vec<T>),
    /// Inclusion `x -> (x, 0, .., 0)`.
    Isometric,
    /// `t -> (|t_1|, .., |t_p|, 0, .., 0)`.
    AbsCoords,
    /// Sampled pairs (domain point, image point).
    Table(Vec<(DVector<T>, DVector<T>)>),
}

/// A (weakly) spacelike graph or non-positive sphere in a fixed splitting.
#[derive(Debug, Clone)]
pub struct LipschitzGraph<T: Real> {
    space: QuadraticSpace<T>,
    frame: TimelikeFrame<T>,
    domain: GraphDomain,
    map: GraphMap<T>,
}

impl<T: Real> LipschitzGraph<T> {
    pub fn new(
        space: QuadraticSpace<T>,
        frame: TimelikeFrame<T>,
        domain: GraphDomain,
        map: GraphMap<T>,
    ) -> Result<Self> {
        let p = frame.p();
        let q = frame.q();
        let dom = match domain {
            GraphDomain::Hemisphere => p + 1,
            GraphDomain::Sphere => p,
        };
        let fits = |need: usize| -> Result<()> {
            if need > q + 1 {
                Err(Error::Precondition(format!("map needs {need} image coordinates, S^{q} has {}", q + 1)))
            } else {
                Ok(())
            }
        };
        match &map {
            GraphMap::Constant(c) => {
                if c.len() != q + 1 {
                    return Err(Error::DimensionMismatch { expected: q + 1, got: c.len() });
                }
                if (c.norm() - T::one()).abs() > lit(1e-12) {
                    return Err(Error::Precondition("constant value must be a unit vector".into()));
                }
            }
            GraphMap::SqrtFamily => {
                if domain != GraphDomain::Hemisphere || p == 0 {
                    return Err(Error::Precondition("family is defined on B^p, p >= 1".into()));
                }
                fits(p)?;
            }
            GraphMap::CrownOrbit(tau) => {
                if domain != GraphDomain::Hemisphere || tau.len() != p {
                    return Err(Error::Precondition("crown orbit family is defined on B^j".into()));
                }
                fits(p)?;
            }
            GraphMap::Isometric => fits(dom)?,
            GraphMap::AbsCoords => fits(p)?,
            GraphMap::Table(entries) => {
                if entries.is_empty() {
                    return Err(Error::Empty("sample table"));
                }
                for (u, f) in entries {
                    if u.len() != dom {
                        return Err(Error::DimensionMismatch { expected: dom, got: u.len() });
                    }
                    if f.len() != q + 1 {
                        return Err(Error::DimensionMismatch { expected: q + 1, got: f.len() });
                    }
                }
            }
        }
        Ok(LipschitzGraph { space, frame, domain, map })
    }

    fn standard(p: usize, q: usize, domain: GraphDomain, map: GraphMap<T>) -> Result<Self> {
        let space = QuadraticSpace::standard(p, q + 1);
        let frame = TimelikeFrame::for_space(&space)?;
        Self::new(space, frame, domain, map)
    }

    /// Constant map `B^p -> {c}` in the standard form `diag(1^p, -1^(q+1))`.
    pub fn constant(p: usize, q: usize, c: DVector<T>) -> Result<Self> {
        Self::standard(p, q, GraphDomain::Hemisphere, GraphMap::Constant(c))
    }

    /// The square-root family on `B^p` (needs `p <= q + 1`).
    pub fn sqrt_family(p: usize, q: usize) -> Result<Self> {
        Self::standard(p, q, GraphDomain::Hemisphere, GraphMap::SqrtFamily)
    }

    /// Equatorial inclusion `B^p -> S^q` (needs `p <= q`).
    pub fn isometric_hemisphere(p: usize, q: usize) -> Result<Self> {
        Self::standard(p, q, GraphDomain::Hemisphere, GraphMap::Isometric)
    }

    /// Inclusion `S^(p-1) -> S^q` (needs `p <= q + 1`); spans a totally isotropic subspace.
    pub fn isometric_sphere(p: usize, q: usize) -> Result<Self> {
        Self::standard(p, q, GraphDomain::Sphere, GraphMap::Isometric)
    }

    /// `t -> (|t_i|)` on `S^(p-1)` (needs `p <= q + 1`).
    pub fn abs_sphere(p: usize, q: usize) -> Result<Self> {
        Self::standard(p, q, GraphDomain::Sphere, GraphMap::AbsCoords)
    }

    /// Constant map restricted to the sphere at infinity of its domain.
    pub fn constant_sphere(p: usize, q: usize, c: DVector<T>) -> Result<Self> {
        Self::standard(p, q, GraphDomain::Sphere, GraphMap::Constant(c))
    }

    pub fn space(&self) -> &QuadraticSpace<T> {
        &self.space
    }

    pub fn frame(&self) -> &TimelikeFrame<T> {
        &self.frame
    }

    pub fn domain(&self) -> GraphDomain {
        self.domain
    }

    pub fn map(&self) -> &GraphMap<T> {
        &self.map
    }

    pub fn p(&self) -> usize {
        self.frame.p()
    }

    pub fn q(&self) -> usize {
        self.frame.q()
    }

    /// Ambient length of domain points.
    pub fn domain_dim(&self) -> usize {
        match self.domain {
            GraphDomain::Hemisphere => self.p() + 1,
            GraphDomain::Sphere => self.p(),
        }
    }

    /// Image of a domain point.
    pub fn eval(&self, u: &DVector<T>) -> Result<DVector<T>> {
        if u.len() != self.domain_dim() {
            return Err(Error::DimensionMismatch { expected: self.domain_dim(), got: u.len() });
        }
        let q1 = self.q() + 1;
        let p = self.p();
        // coordinates after the hemisphere's height coordinate
        let tail = |i: usize| match self.domain {
            GraphDomain::Hemisphere => u[i + 1],
            GraphDomain::Sphere => u[i],
        };
        let height = match self.domain {
            GraphDomain::Hemisphere => u[0],
            GraphDomain::Sphere => T::zero(),
        };
        let mut f = DVector::zeros(q1);
        match &self.map {
            GraphMap::Constant(c) => f.copy_from(c),
            GraphMap::SqrtFamily => {
                let h2 = height * height / from_usize::<T>(p);
                for i in 0..p {
                    f[i] = (h2 + tail(i) * tail(i)).sqrt();
                }
            }
            GraphMap::CrownOrbit(tau) => {
                for i in 0..p {
                    f[i] = (tau[i] * tau[i] * height * height + tail(i) * tail(i)).sqrt();
                }
            }
            GraphMap::Isometric => {
                for i in 0..u.len() {
                    f[i] = u[i];
                }
            }
            GraphMap::AbsCoords => {
                for i in 0..p {
                    f[i] = tail(i).abs();
                }
            }
            GraphMap::Table(entries) => {
                let tol = lit::<T>(1e-12);
                return entries
                    .iter()
                    .find(|(d, _)| (d - u).norm() <= tol)
                    .map(|(_, f)| f.clone())
                    .ok_or_else(|| Error::Precondition("point is not in the sample table".into()));
            }
        }
        Ok(f)
    }

    /// Random domain points; sphere samples are closed under `u -> -u`.
    pub fn sample_domain<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<DVector<T>> {
        if let GraphMap::Table(entries) = &self.map {
            return entries.iter().map(|(u, _)| u.clone()).collect();
        }
        match self.domain {
            GraphDomain::Hemisphere => (0..n).map(|_| hemisphere(rng, self.p())).collect(),
            GraphDomain::Sphere => {
                let mut out = Vec::with_capacity(2 * n);
                for _ in 0..n {
                    let u: DVector<T> = unit_sphere(rng, self.p());
                    out.push(-&u);
                    out.push(u);
                }
                out
            }
        }
    }

    /// The point of `H^(p,q)` (or of its boundary) over `u`.
    pub fn lift(&self, u: &DVector<T>) -> Result<Point<T>> {
        let f = self.eval(u)?;
        let hemi = match self.domain {
            GraphDomain::Hemisphere => u.clone(),
            GraphDomain::Sphere => {
                let mut h = DVector::zeros(self.p() + 1);
                h.rows_mut(1, self.p()).copy_from(u);
                h
            }
        };
        conformal_unsplit(&self.frame, &ConformalCoords { u: hemi, u_prime: f, r: T::one() })
    }
}

/// Points of the graph over the given domain samples.
pub fn graph_points<T: Real>(g: &LipschitzGraph<T>, samples: &[DVector<T>]) -> Result<Vec<Point<T>>> {
    samples.iter().map(|u| g.lift(u)).collect()
}

/// Outcome of [`lipschitz_check`].
#[derive(Debug, Clone, Serialize)]
pub struct GraphReport {
    pub pairs: usize,
    pub max_ratio: f64,
    /// `1 - max_ratio`.
    pub margin: f64,
    pub violating: usize,
    pub strict: bool,
    pub timelike_pairs: usize,
    pub nonspacelike_pairs: usize,
    /// Pairs where the ratio test and the pair classification give opposite decisive verdicts.
    pub disagreements: usize,
    pub kernel_dim: Option<usize>,
}

fn sample_pairs<T: Real, R: Rng + ?Sized>(
    g: &LipschitzGraph<T>,
    pairs: usize,
    rng: &mut R,
) -> Vec<(DVector<T>, DVector<T>)> {
    match &g.map {
        GraphMap::Table(entries) => {
            let n = entries.len();
            if n * (n - 1) / 2 <= pairs {
                let mut out = Vec::new();
                for i in 0..n {
                    for j in (i + 1)..n {
                        out.push((entries[i].0.clone(), entries[j].0.clone()));
                    }
                }
                out
            } else {
                (0..pairs)
                    .map(|_| {
                        let i = rng.random_range(0..n);
                        let mut j = rng.random_range(0..n - 1);
                        if j >= i {
                            j += 1;
                        }
                        (entries[i].0.clone(), entries[j].0.clone())
                    })
                    .collect()
            }
        }
        _ => {
            let pts = g.sample_domain(rng, 2 * pairs);
            match g.domain {
                GraphDomain::Hemisphere => pts.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect(),
                // sphere samples come as antipodal couples; pair across couples
                GraphDomain::Sphere => (0..pairs)
                    .map(|k| (pts[(4 * k) % pts.len()].clone(), pts[(4 * k + 3) % pts.len()].clone()))
                    .collect(),
            }
        }
    }
}

#[derive(PartialEq)]
enum Verdict {
    Spacelike,
    Timelike,
    Borderline,
}

/// Largest sampled ratio `d(f(u1), f(u2)) / d(u1, u2)`, cross-checked against
/// the classification of the lifted pairs.
pub fn lipschitz_check<T: Real, R: Rng + ?Sized>(
    g: &LipschitzGraph<T>,
    pairs: usize,
    rng: &mut R,
) -> Result<GraphReport> {
    if pairs == 0 {
        return Err(Error::Empty("sample pairs"));
    }
    let tol = g.space.tol();
    let mut report = GraphReport {
        pairs: 0,
        max_ratio: 0.0,
        margin: 1.0,
        violating: 0,
        strict: false,
        timelike_pairs: 0,
        nonspacelike_pairs: 0,
        disagreements: 0,
        kernel_dim: None,
    };
    let mut max_ratio = T::zero();
    for (u1, u2) in sample_pairs(g, pairs, rng) {
        let dd = sphere_dist(&u1, &u2);
        if dd <= lit(1e-12) {
            continue;
        }
        let f1 = g.eval(&u1)?;
        let f2 = g.eval(&u2)?;
        let ratio = sphere_dist(&f1, &f2) / dd;
        report.pairs += 1;
        max_ratio = max_ratio.max(ratio);
        let by_ratio = if ratio > T::one() + tol {
            report.violating += 1;
            Verdict::Timelike
        } else if ratio < T::one() - tol {
            Verdict::Spacelike
        } else {
            Verdict::Borderline
        };
        let by_form = match (g.lift(&u1)?, g.lift(&u2)?) {
            (Point::Interior(x), Point::Interior(y)) => match pair_class(&g.space, &x, &y) {
                PairClass::Spacelike => Verdict::Spacelike,
                PairClass::Timelike => Verdict::Timelike,
                _ => Verdict::Borderline,
            },
            (a, b) => {
                // ideal points: the lifted pairing is cos d(u) - cos d(f)
                let (x, y) = (a.vector(), b.vector());
                let v = g.space.apply(&x, &y);
                let band = g.space.zero_band(&x, &y);
                if v < -band {
                    Verdict::Spacelike
                } else if v > band {
                    Verdict::Timelike
                } else {
                    Verdict::Borderline
                }
            }
        };
        if by_form == Verdict::Timelike {
            report.timelike_pairs += 1;
        }
        if by_form != Verdict::Spacelike {
            report.nonspacelike_pairs += 1;
        }
        if (by_form == Verdict::Spacelike && by_ratio == Verdict::Timelike)
            || (by_form == Verdict::Timelike && by_ratio == Verdict::Spacelike)
        {
            report.disagreements += 1;
        }
    }
    if report.pairs == 0 {
        return Err(Error::Empty("distinct sample pairs"));
    }
    report.max_ratio = to_f64(max_ratio);
    report.margin = 1.0 - report.max_ratio;
    report.strict = max_ratio < T::one() - tol;
    Ok(report)
}

/// Antipodal-symmetry locus of a sphere graph and the null count of the
/// span of its lifted points.
#[derive(Debug, Clone)]
pub struct KernelSphere<T: Real> {
    /// Dimension estimate `k` (the locus is a `(k-1)`-sphere, empty for `k = 0`).
    pub k: usize,
    pub samples: Vec<DVector<T>>,
    pub span_signature: Signature,
}

impl<T: Real> KernelSphere<T> {
    /// Whether `k` equals the null count of the span.
    pub fn consistent(&self) -> bool {
        self.k == self.span_signature.null
    }
}

/// Samples `u` with `f(-u) = -f(u)`; their span dimension estimates `k`.
pub fn kernel_sphere<T: Real>(g: &LipschitzGraph<T>, samples: &[DVector<T>]) -> Result<KernelSphere<T>> {
    if g.domain != GraphDomain::Sphere {
        return Err(Error::Precondition("kernel sphere needs a sphere-domain graph".into()));
    }
    if samples.is_empty() {
        return Err(Error::Empty("sphere samples"));
    }
    let close = lit::<T>(1e-9);
    for u in samples {
        if !samples.iter().any(|v| (u + v).norm() <= close) {
            return Err(Error::NotAntipodal);
        }
    }
    let tol = g.space.tol();
    let mut s = Vec::new();
    for u in samples {
        let minus = -u;
        let d = sphere_dist(&g.eval(&minus)?, &(-g.eval(u)?));
        if d <= tol {
            s.push(u.clone());
        }
    }
    let k = if s.is_empty() { 0 } else { rank(&hstack(&s), lit(1e-6)) };
    let lifted: Vec<DVector<T>> = samples
        .iter()
        .map(|u| g.lift(u).map(|p| p.vector()))
        .collect::<Result<_>>()?;
    let span = g.space.span_basis(&lifted)?;
    let span_signature = g.space.restrict(&span)?.signature();
    Ok(KernelSphere { k, samples: s, span_signature })
}

/// One factor of a split spacetime: a basis of `V_i` and points of the quadric in `V_i`.
#[derive(Debug, Clone)]
pub struct SplitFactor<T: Real> {
    pub basis: Vec<DVector<T>>,
    pub points: Vec<DVector<T>>,
}

/// Combined point set `{sum m_i / sqrt(r)}` as a sampled graph.
#[derive(Debug, Clone)]
pub struct SplitSpacetime<T: Real> {
    pub graph: LipschitzGraph<T>,
    pub points: Vec<DVector<T>>,
    pub factor_signatures: Vec<Signature>,
}

/// Largest number of combined points [`split_spacetime`] will build.
pub const SPLIT_POINT_BUDGET: usize = 1_000_000;

pub fn split_spacetime<T: Real>(space: &QuadraticSpace<T>, factors: &[SplitFactor<T>]) -> Result<SplitSpacetime<T>> {
    if factors.is_empty() {
        return Err(Error::Empty("factor list"));
    }
    let d = space.dim();
    let mut sigs = Vec::new();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut total = 0;
    for (i, f) in factors.iter().enumerate() {
        let sub = space.restrict(&f.basis)?;
        let sig = sub.signature();
        if sig.null > 0 || sig.pos == 0 || sig.neg == 0 {
            return Err(Error::Precondition(format!("factor {i} has signature {sig}, need (k,l|0) with k,l >= 1")));
        }
        sigs.push(sig);
        total += f.basis.len();
        for (j, g) in factors.iter().enumerate().skip(i + 1) {
            for a in &f.basis {
                for b in &g.basis {
                    if space.apply(a, b).abs() > space.zero_band(a, b) {
                        return Err(Error::Precondition(format!("factors {i} and {j} are not orthogonal")));
                    }
                }
            }
        }
        let (fp, fneg) = space.orthonormal_basis(&f.basis)?;
        pos.extend(fp);
        neg.extend(fneg);
        if f.points.is_empty() {
            return Err(Error::Empty("factor points"));
        }
        // points must lie in V_i on the quadric
        let proj = hstack(&f.basis);
        for m in &f.points {
            HPoint::new(space, m.clone())?;
            let coef = proj.clone().svd(true, true).solve(m, lit(1e-14)).map_err(|e| Error::Precondition(e.into()))?;
            if (&proj * coef - m).norm() > lit::<T>(1e-8) * m.norm() {
                return Err(Error::Precondition(format!("a point of factor {i} is outside its subspace")));
            }
        }
    }
    if total != d {
        return Err(Error::Precondition(format!("factor dimensions sum to {total}, ambient is {d}")));
    }
    let combos: usize = factors.iter().map(|f| f.points.len()).product();
    if combos > SPLIT_POINT_BUDGET {
        return Err(Error::Precondition(format!("{combos} combined points exceed the budget")));
    }
    let p = pos.len();
    let mut cols = pos;
    cols.extend(neg);
    let frame = TimelikeFrame::new(space, hstack(&cols), p)?;
    let scale = T::one() / from_usize::<T>(factors.len()).sqrt();
    let mut points = Vec::with_capacity(combos);
    let mut idx = vec![0usize; factors.len()];
    loop {
        let mut v = DVector::zeros(d);
        for (f, &k) in factors.iter().zip(&idx) {
            v += &f.points[k];
        }
        points.push(v * scale);
        // odometer over factor indices
        let mut pos = factors.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < factors[pos].points.len() {
                break;
            }
            idx[pos] = 0;
            if pos == 0 {
                pos = usize::MAX;
                break;
            }
        }
        if pos == usize::MAX {
            break;
        }
    }
    let mut entries = Vec::with_capacity(points.len());
    for v in &points {
        let c = conformal_split(&frame, &Point::Interior(HPoint { vec: v.clone(), projective: false }))?;
        entries.push((c.u, c.u_prime));
    }
    let graph = LipschitzGraph::new(space.clone(), frame, GraphDomain::Hemisphere, GraphMap::Table(entries))?;
    Ok(SplitSpacetime { graph, points, factor_signatures: sigs })
}

/// Sampled timelike distance from a graph to the boundary of `Omega(Lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimelikeDistance<T: Real> {
    pub d: T,
    pub base: usize,
    pub direction: usize,
    pub lambda: usize,
}

/// Finite-difference step on the hemisphere chart.
pub const TANGENT_STEP: f64 = 1e-5;

/// Minimizes, over sampled base points, normal directions and points of
/// `lambda`, the length of the timelike geodesic from the base point to the
/// hyperplane orthogonal to the point of `lambda`.
pub fn timelike_distance<T: Real>(
    g: &LipschitzGraph<T>,
    base: &[DVector<T>],
    lambda: &[DVector<T>],
    directions: usize,
) -> Result<TimelikeDistance<T>> {
    if g.domain != GraphDomain::Hemisphere || matches!(g.map, GraphMap::Table(_)) {
        return Err(Error::Precondition("timelike distance needs a closed-form graph on B^p".into()));
    }
    if base.is_empty() || lambda.is_empty() {
        return Err(Error::Empty("base points or boundary samples"));
    }
    let space = &g.space;
    let p = g.p();
    let q = g.q();
    let h = lit::<T>(TANGENT_STEP);
    let dirs = quasi_uniform_directions::<T>(q, directions.max(1));
    let mut best = TimelikeDistance { d: T::pi(), base: 0, direction: 0, lambda: 0 };
    let mut first = true;
    let point_at = |u: &DVector<T>| -> Result<DVector<T>> { Ok(g.lift(u)?.vector()) };
    for (bi, u) in base.iter().enumerate() {
        let o = point_at(u)?;
        let tangent_dirs = null_space(&DMatrix::from_row_slice(1, p + 1, u.as_slice()), lit(1e-12));
        let mut span = vec![o.clone()];
        for t in &tangent_dirs {
            let up = (u + t * h).normalize();
            let um = (u - t * h).normalize();
            span.push((point_at(&up)? - point_at(&um)?) / (h + h));
        }
        let normal = space.orthogonal_complement(&span)?;
        if normal.len() != q {
            return Err(Error::Precondition(format!(
                "normal space has dimension {}, expected {q}",
                normal.len()
            )));
        }
        let (npos, nneg) = space.orthonormal_basis(&normal)?;
        if !npos.is_empty() {
            return Err(Error::Precondition("normal space is not negative definite".into()));
        }
        for (di, c) in dirs.iter().enumerate() {
            let mut w = DVector::zeros(space.dim());
            for (k, n) in nneg.iter().enumerate() {
                w += n * c[k];
            }
            for (li, lam) in lambda.iter().enumerate() {
                let mut a = space.apply(&o, lam);
                let mut b = space.apply(&w, lam);
                if a.abs() <= space.zero_band(&o, lam) {
                    return Err(Error::Precondition(format!("base point {bi} lies on the hyperplane of boundary point {li}")));
                }
                if a > T::zero() {
                    a = -a;
                    b = -b;
                }
                let t = (-a).atan2(b);
                if first || t < best.d {
                    best = TimelikeDistance { d: t, base: bi, direction: di, lambda: li };
                    first = false;
                }
            }
        }
    }
    Ok(best)
}
