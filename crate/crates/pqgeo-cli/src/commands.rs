use std::path::Path;

use nalgebra::{DMatrix, DVector};
use pqgeo::anosov::{gap_series, limit_cone_sample, negativity_test, proximality_class, sample_limit_set};
use pqgeo::crowns::{crown_orbit_graph, detect_crowns};
use pqgeo::forms::QuadraticSpace;
use pqgeo::graphs::{lipschitz_check, GraphDomain, GraphMap, LipschitzGraph};
use pqgeo::groups::bending::{bend_all, boost, toy_amalgam, toy_hnn, BendDatum};
use pqgeo::groups::coxeter::{det_roots, leaf_cycle_diagram, reflection_rep, signature_scan, CoxeterDiagram};
use pqgeo::groups::polygon::gt_polygon as polygon;
use pqgeo::groups::words::{word_ball, WordBall};
use pqgeo::model::{
    hilbert_distance, omega_membership, pair_class, pair_class_conformal, HPoint, HalfspaceDomain, TimelikeFrame,
};
use pqgeo::QuadraticSpace64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::io::{
    in_file, input, matrix_from_rows, num, read_csv_rows, read_json, read_text, read_vector, read_vectors,
    scatter_svg, vectors_from_rows, Artifacts, Failure, Outcome,
};
use crate::{BuiltinGroup, DomainKind, Family, FormArgs, GroupArgs, Toy};

pub struct Ctx {
    pub tol: f64,
    pub seed: u64,
}

impl Ctx {
    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn standard(p: usize, q: usize, tol: f64) -> Outcome<QuadraticSpace64> {
    if p == 0 {
        return input("need p >= 1");
    }
    Ok(QuadraticSpace::standard(p, q + 1).retol(tol))
}

fn form_space(ctx: &Ctx, form: &FormArgs, fallback: Option<QuadraticSpace64>) -> Outcome<QuadraticSpace64> {
    match (&form.form, form.p, form.q) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => input("give either --form or --p/--q, not both"),
        (Some(path), None, None) => {
            let rows: Vec<Vec<f64>> = read_json(path, "form")?;
            let g = matrix_from_rows(&rows, path, "form")?;
            QuadraticSpace::with_tol(g, ctx.tol).map_err(in_file(path))
        }
        (None, Some(p), Some(q)) => standard(p, q, ctx.tol),
        (None, None, None) => fallback.ok_or_else(|| Failure::Input("need --form or both --p and --q".into())),
        _ => input("--p and --q go together"),
    }
}

fn check_dims(space: &QuadraticSpace64, vs: &[DVector<f64>], path: &Path) -> Outcome<()> {
    match vs.iter().find(|v| v.len() != space.dim()) {
        Some(v) => input(format!("{}: vector of length {} in a form of dimension {}", path.display(), v.len(), space.dim())),
        None => Ok(()),
    }
}

fn class_name<S: serde::Serialize>(s: &S) -> String {
    serde_json::to_value(s).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

pub fn classify_pair(ctx: &Ctx, out: &mut Artifacts, x: &Path, y: &Path, form: &FormArgs) -> Outcome<String> {
    let space = form_space(ctx, form, None)?;
    let xv = read_vector(x, "x")?;
    let yv = read_vector(y, "y")?;
    check_dims(&space, std::slice::from_ref(&xv), x)?;
    check_dims(&space, std::slice::from_ref(&yv), y)?;
    let xp = HPoint::normalize(&space, xv).map_err(in_file(x))?;
    let yp = HPoint::normalize(&space, yv).map_err(in_file(y))?;
    let class = pair_class(&space, &xp, &yp);
    let frame = TimelikeFrame::for_space(&space)?;
    let conformal = match pair_class_conformal(&space, &frame, &xp, &yp) {
        Ok(c) => json!(c),
        Err(pqgeo::Error::WrongSheet(_)) => Value::Null,
        Err(e) => return Err(e.into()),
    };
    out.json(
        "pair.json",
        &json!({
            "class": class,
            "b": space.apply(&xp.vec, &yp.vec),
            "conformal": conformal,
        }),
    )?;
    Ok(class_name(&class))
}

fn read_domain(path: &Path, space: &QuadraticSpace64) -> Outcome<HalfspaceDomain<f64>> {
    let cs = read_vectors(path, "constraints")?;
    check_dims(space, &cs, path)?;
    HalfspaceDomain::new(cs).map_err(in_file(path))
}

pub fn hilbert_dist(ctx: &Ctx, out: &mut Artifacts, domain: &Path, y: &Path, z: &Path, form: &FormArgs) -> Outcome<String> {
    let space = form_space(ctx, form, None)?;
    let dom = read_domain(domain, &space)?;
    let yv = read_vector(y, "y")?;
    let zv = read_vector(z, "z")?;
    check_dims(&space, std::slice::from_ref(&yv), y)?;
    check_dims(&space, std::slice::from_ref(&zv), z)?;
    let d = hilbert_distance(&space, &dom, &yv, &zv)?;
    out.json("hilbert.json", &json!({ "distance": d }))?;
    Ok(num(d))
}

pub fn omega_test(ctx: &Ctx, out: &mut Artifacts, domain: &Path, points: &Path, form: &FormArgs) -> Outcome<String> {
    let space = form_space(ctx, form, None)?;
    let dom = read_domain(domain, &space)?;
    let pts = read_vectors(points, "points")?;
    check_dims(&space, &pts, points)?;
    let mut rows = Vec::with_capacity(pts.len());
    let mut interior = 0;
    for (i, v) in pts.iter().enumerate() {
        let m = omega_membership(&space, &dom, v)?;
        if m.status == pqgeo::model::MembershipStatus::Interior {
            interior += 1;
        }
        rows.push(vec![i.to_string(), class_name(&m.status), m.worst.to_string(), num(m.value)]);
    }
    let header = ["index", "status", "worst_constraint", "value"].map(String::from);
    out.csv("omega.csv", &header, &rows)?;
    Ok(format!("{interior}/{} interior", pts.len()))
}

pub struct GraphSpec<'a> {
    pub family: Family,
    pub p: usize,
    pub q: usize,
    pub tau: &'a [f64],
    pub input: Option<&'a Path>,
    pub domain: DomainKind,
}

fn table_graph(spec: &GraphSpec, path: &Path) -> Outcome<LipschitzGraph<f64>> {
    let (p, q) = (spec.p, spec.q);
    let (domain, dd) = match spec.domain {
        DomainKind::Hemisphere => (GraphDomain::Hemisphere, p + 1),
        DomainKind::Sphere => (GraphDomain::Sphere, p),
    };
    let rows = read_csv_rows(path)?;
    let mut entries = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        if r.len() != dd + q + 1 {
            return input(format!(
                "{}: row {i} has {} columns, expected {dd} domain + {} image",
                path.display(),
                r.len(),
                q + 1
            ));
        }
        entries.push((DVector::from_column_slice(&r[..dd]), DVector::from_column_slice(&r[dd..])));
    }
    let space = QuadraticSpace::standard(p, q + 1);
    let d = p + q + 1;
    let frame = TimelikeFrame::new(&space, DMatrix::identity(d, d), p).map_err(in_file(path))?;
    LipschitzGraph::new(space, frame, domain, GraphMap::Table(entries)).map_err(in_file(path))
}

fn build_graph(spec: &GraphSpec) -> Outcome<LipschitzGraph<f64>> {
    let (p, q) = (spec.p, spec.q);
    if p == 0 {
        return input("need p >= 1");
    }
    let g = match spec.family {
        Family::Constant => {
            let mut c = DVector::zeros(q + 1);
            c[0] = 1.0;
            LipschitzGraph::constant(p, q, c)?
        }
        Family::Sqrt => LipschitzGraph::sqrt_family(p, q)?,
        Family::Isometric => LipschitzGraph::isometric_hemisphere(p, q)?,
        Family::IsometricSphere => LipschitzGraph::isometric_sphere(p, q)?,
        Family::AbsSphere => LipschitzGraph::abs_sphere(p, q)?,
        Family::MaximalCrown => {
            if q + 1 != p {
                return input(format!("maximal-crown lives in H^(j,j-1); got p = {p}, q = {q}"));
            }
            crown_orbit_graph(&vec![1.0 / (p as f64).sqrt(); p])?
        }
        Family::CrownOrbit => {
            if spec.tau.len() != p || q + 1 != p {
                return input(format!("crown-orbit needs q = p - 1 and {p} weights in --tau"));
            }
            crown_orbit_graph(spec.tau)?
        }
        Family::Table => match spec.input {
            Some(path) => table_graph(spec, path)?,
            None => return input("family table needs --input"),
        },
    };
    Ok(g)
}

pub fn graph_check(ctx: &Ctx, out: &mut Artifacts, spec: &GraphSpec, pairs: usize, samples: usize) -> Outcome<String> {
    let g = build_graph(spec)?;
    let mut rng = ctx.rng();
    let mut rows = Vec::new();
    if spec.family != Family::Table {
        for u in g.sample_domain(&mut rng, samples) {
            let f = g.eval(&u)?;
            rows.push(u.iter().chain(f.iter()).map(|&x| num(x)).collect::<Vec<_>>());
        }
    } else if let GraphMap::Table(entries) = g.map() {
        for (u, f) in entries {
            rows.push(u.iter().chain(f.iter()).map(|&x| num(x)).collect());
        }
    }
    let mut header: Vec<String> = (0..g.domain_dim()).map(|i| format!("u{i}")).collect();
    header.extend((0..=spec.q).map(|i| format!("f{i}")));
    out.csv("graph.csv", &header, &rows)?;
    let report = lipschitz_check(&g, pairs, &mut rng)?;
    out.json(
        "report.json",
        &json!({
            "family": spec.family,
            "p": spec.p,
            "q": spec.q,
            "domain": g.domain(),
            "report": report,
        }),
    )?;
    Ok(format!(
        "max ratio {} over {} pairs: {}",
        num(report.max_ratio),
        report.pairs,
        if report.strict { "strict" } else if report.violating == 0 { "weak" } else { "violated" }
    ))
}

pub fn crown_scan(ctx: &Ctx, out: &mut Artifacts, path: &Path, j: usize, max: usize, form: &FormArgs) -> Outcome<String> {
    let pts = vectors_from_rows(read_csv_rows(path)?, path, "points")?;
    let d = pts[0].len();
    let fallback = QuadraticSpace::standard(d.div_ceil(2), d / 2).retol(ctx.tol);
    let space = form_space(ctx, form, Some(fallback))?;
    check_dims(&space, &pts, path)?;
    let scan = detect_crowns(&space, &pts, j, max).map_err(in_file(path))?;
    let crowns: Vec<Value> = scan
        .crowns
        .iter()
        .map(|c| {
            json!({
                "j": c.j(),
                "indices": c.indices(),
                "lifts": c.lifts().iter().map(|v| v.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
                "pairing": rows_of(c.pairing()),
            })
        })
        .collect();
    out.json("crowns.json", &json!({ "j": j, "truncated": scan.truncated, "crowns": crowns }))?;
    Ok(format!("{} crowns{}", crowns.len(), if scan.truncated { " (truncated)" } else { "" }))
}

pub fn coxeter_scan(
    out: &mut Artifacts,
    diagram: Option<&Path>,
    family: &[u32],
    range: (f64, f64),
    steps: usize,
) -> Outcome<String> {
    let d = match (diagram, family) {
        (Some(path), _) => CoxeterDiagram::from_json(&read_text(path)?).map_err(in_file(path))?,
        (None, [k, l]) => leaf_cycle_diagram(*k, *l)?,
        _ => return input("need --diagram or --family k,l"),
    };
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) || steps < 2 {
        return input("need finite t-min <= t-max and at least 2 steps");
    }
    let grid: Vec<f64> = (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect();
    let rows = signature_scan(&d, &grid)?;
    let header = ["t", "pos", "neg", "null", "det", "max_relation_residual"].map(String::from);
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                num(r.t),
                r.signature.pos.to_string(),
                r.signature.neg.to_string(),
                r.signature.null.to_string(),
                num(r.det),
                num(r.relation_residual),
            ]
        })
        .collect();
    out.csv("scan.csv", &header, &table)?;
    let roots = det_roots::<f64>(&d).ok();
    let mut at_roots = Vec::new();
    if let Some((t1, t2)) = roots.and_then(|r| r.roots) {
        for t in [t1, t2] {
            let sig = if t >= 0.0 { Some(reflection_rep(&d, t)?.signature.to_string()) } else { None };
            at_roots.push(json!({ "t": t, "signature": sig }));
        }
    }
    out.json(
        "roots.json",
        &json!({
            "diagram": d.to_json(),
            "det_coefficients": roots.map(|r| r.coeffs.to_vec()),
            "roots": at_roots,
        }),
    )?;
    let mut transitions = Vec::new();
    for w in rows.windows(2) {
        if w[0].signature != w[1].signature {
            transitions.push(format!("{}->{}", w[0].signature, w[1].signature));
        }
    }
    Ok(format!("{} grid points, transitions: [{}]", rows.len(), transitions.join(", ")))
}

pub fn gt_polygon(out: &mut Artifacts, k: u32, n: u32, q: usize) -> Outcome<String> {
    let poly = polygon::<f64>(k, n, q)?;
    let dim = poly.space.dim();
    let mut header = vec!["j".to_string()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    header.push("b_self".into());
    header.push("b_next".into());
    let rows: Vec<Vec<String>> = poly
        .vertices
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let j64 = j as i64;
            let mut r = vec![j.to_string()];
            r.extend(v.iter().map(|&x| num(x)));
            r.push(num(poly.pairing(j64, j64)));
            r.push(num(poly.pairing(j64, j64 + 1)));
            r
        })
        .collect();
    out.csv("vertices.csv", &header, &rows)?;
    out.json(
        "polygon.json",
        &json!({
            "k": k,
            "n": n,
            "q": q,
            "alpha": poly.alpha,
            "identity_residual": poly.identity_residual(),
            "triples_independent": poly.triples_independent(),
        }),
    )?;
    Ok(format!("{} vertices, alpha {}", rows.len(), num(poly.alpha)))
}

pub fn bend(out: &mut Artifacts, datum: Option<&Path>, toy: Option<Toy>, s: &[f64]) -> Outcome<String> {
    let datum: BendDatum<f64> = match (datum, toy) {
        (Some(path), _) => BendDatum::from_json(&read_text(path)?).map_err(in_file(path))?,
        (None, Some(Toy::Amalgam)) => toy_amalgam(),
        (None, Some(Toy::Hnn)) => toy_hnn(),
        (None, None) => return input("need --datum or --toy"),
    };
    if s.is_empty() || s.iter().any(|x| !x.is_finite()) {
        return input("--s needs finite values");
    }
    let mut runs = Vec::new();
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &si in s {
        let gens = bend_all(&datum, si)?;
        let form_res = datum.form_residual(&gens);
        let rel_res = datum.relation_residual(&gens)?;
        worst = worst.max(rel_res);
        rows.push(vec![num(si), num(form_res), num(rel_res)]);
        runs.push(json!({
            "s": si,
            "form_residual": form_res,
            "relation_residual": rel_res,
            "generators": gens.iter().map(rows_of).collect::<Vec<_>>(),
        }));
    }
    let header = ["s", "form_residual", "relation_residual"].map(String::from);
    out.csv("bend.csv", &header, &rows)?;
    out.json("bend.json", &json!({ "datum": datum.to_json(), "runs": runs }))?;
    Ok(format!("{} parameters, max relation residual {}", s.len(), num(worst)))
}

fn builtin_group(b: BuiltinGroup) -> (QuadraticSpace64, Vec<DMatrix<f64>>) {
    let space = QuadraticSpace::standard(2, 2);
    let gens = match b {
        BuiltinGroup::Schottky => {
            let a = boost(4, 0, 2, 2.0);
            let shift = boost(4, 1, 2, 2.0);
            let back = boost(4, 1, 2, -2.0);
            let b = &shift * &a * back;
            vec![a, b]
        }
        BuiltinGroup::Split => vec![boost(4, 0, 2, 2.0), boost(4, 1, 3, 0.05)],
    };
    (space, gens)
}

fn read_group(ctx: &Ctx, path: &Path, form: &FormArgs) -> Outcome<(QuadraticSpace64, Vec<DMatrix<f64>>)> {
    let v: Value = read_json(path, "group")?;
    let field = |name: &str, val: &Value| -> Outcome<Vec<Vec<Vec<f64>>>> {
        serde_json::from_value(val.clone())
            .map_err(|e| Failure::Input(format!("{}: {name}: {e}", path.display())))
    };
    let (form_rows, gen_rows) = match &v {
        Value::Object(map) => {
            let gens = map
                .get("generators")
                .ok_or_else(|| Failure::Input(format!("{}: missing field \"generators\"", path.display())))?;
            let form_rows = match map.get("form") {
                Some(f) => Some(
                    serde_json::from_value::<Vec<Vec<f64>>>(f.clone())
                        .map_err(|e| Failure::Input(format!("{}: form: {e}", path.display())))?,
                ),
                None => None,
            };
            (form_rows, field("generators", gens)?)
        }
        other => (None, field("generators", other)?),
    };
    if gen_rows.is_empty() {
        return input(format!("{}: generators: empty list", path.display()));
    }
    let gens = gen_rows
        .iter()
        .enumerate()
        .map(|(i, g)| matrix_from_rows(g, path, &format!("generators[{i}]")))
        .collect::<Outcome<Vec<_>>>()?;
    let space = match form_rows {
        Some(rows) => {
            if form.form.is_some() || form.p.is_some() {
                return input(format!("{}: form given both in the file and on the command line", path.display()));
            }
            QuadraticSpace::with_tol(matrix_from_rows(&rows, path, "form")?, ctx.tol).map_err(in_file(path))?
        }
        None => form_space(ctx, form, None)?,
    };
    let n = space.dim();
    if let Some(i) = gens.iter().position(|g| g.nrows() != n || g.ncols() != n) {
        return input(format!("{}: generators[{i}] is not {n}x{n}", path.display()));
    }
    Ok((space, gens))
}

fn group(ctx: &Ctx, g: &GroupArgs) -> Outcome<(QuadraticSpace64, WordBall<f64>)> {
    let (space, gens) = match (&g.gens, g.builtin) {
        (Some(path), _) => read_group(ctx, path, &g.form)?,
        (None, Some(b)) => {
            let (s, gens) = builtin_group(b);
            (s.retol(ctx.tol), gens)
        }
        (None, None) => return input("need --gens or --builtin"),
    };
    if g.len == 0 {
        return input("--L must be positive");
    }
    let ball = word_ball(&gens, g.len)?;
    Ok((space, ball))
}

fn cone_rows(ball: &WordBall<f64>, r: usize) -> Outcome<(Vec<String>, Vec<Vec<String>>)> {
    let rays = limit_cone_sample(ball, r)?;
    let header = (0..r).map(|i| format!("ray{i}")).collect();
    let rows = rays.iter().map(|v| v.iter().map(|&x| num(x)).collect()).collect();
    Ok((header, rows))
}

pub fn anosov_diagnose(
    ctx: &Ctx,
    out: &mut Artifacts,
    g: &GroupArgs,
    r: usize,
    chart: (usize, usize),
    gap_threshold: f64,
) -> Outcome<String> {
    let (space, ball) = group(ctx, g)?;
    let n = space.dim();
    if chart.0 >= n || chart.1 >= n || chart.0 == chart.1 {
        return input(format!("--chart needs two distinct indices below {n}"));
    }
    let series = gap_series(&ball)?;
    let header = ["length", "classes", "min_gap", "median_gap"].map(String::from);
    let opt = |x: Option<f64>| x.map_or_else(String::new, num);
    let rows: Vec<Vec<String>> = (0..series.max_len())
        .map(|l| vec![(l + 1).to_string(), series.count[l].to_string(), opt(series.min[l]), opt(series.median[l])])
        .collect();
    out.csv("gaps.csv", &header, &rows)?;

    let limit = sample_limit_set(&space, &ball, gap_threshold)?;
    let mut header: Vec<String> = vec!["index".into(), "word".into()];
    header.extend((0..n).map(|i| format!("x{i}")));
    header.push("b_self".into());
    let rows: Vec<Vec<String>> = limit
        .points
        .iter()
        .zip(&limit.sources)
        .enumerate()
        .map(|(i, (x, &src))| {
            let mut row = vec![i.to_string(), ball.elements[src].word.to_string()];
            row.extend(x.iter().map(|&c| num(c)));
            row.push(num(space.norm2(x)));
            row
        })
        .collect();
    out.csv("limit.csv", &header, &rows)?;

    let (header, rows) = cone_rows(&ball, r)?;
    out.csv("cone.csv", &header, &rows)?;
    out.svg("limit.svg", &scatter_svg(&limit.points, chart))?;

    let negativity = if limit.points.len() >= 2 { Some(negativity_test(&space, &limit.points)?) } else { None };
    let generators = ball
        .generators
        .iter()
        .map(proximality_class)
        .collect::<pqgeo::Result<Vec<_>>>()?;
    let max_isotropy = limit.points.iter().map(|x| space.norm2(x).abs()).fold(0.0, f64::max);
    out.json(
        "diagnose.json",
        &json!({
            "ball_size": ball.len(),
            "gap_series": series,
            "limit_points": limit.points.len(),
            "max_isotropy_residual": max_isotropy,
            "negativity": negativity,
            "generator_proximality": generators,
        }),
    )?;
    Ok(format!(
        "{} elements, {} limit points, negativity {}",
        ball.len(),
        limit.points.len(),
        negativity.map_or_else(|| "n/a".to_string(), |n| format!("{} (margin {})", class_name(&n.verdict), num(n.margin)))
    ))
}

pub fn limit_cone(ctx: &Ctx, out: &mut Artifacts, g: &GroupArgs, r: usize) -> Outcome<String> {
    let (_, ball) = group(ctx, g)?;
    let (header, rows) = cone_rows(&ball, r)?;
    out.csv("cone.csv", &header, &rows)?;
    Ok(format!("{} rays", rows.len()))
}
