//! `pqgeo`: batch frontend writing CSV/JSON/SVG artifacts plus a manifest.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pqgeo::Real;
use serde::Serialize;

use crate::io::{Artifacts, Failure, Outcome};

#[derive(Parser, Debug, Serialize)]
#[command(name = "pqgeo", version, about = "Experiments in pseudo-Riemannian hyperbolic spaces")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "pqgeo-out")]
    out: PathBuf,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Relative tolerance for form classifications (overrides PQGEO_TOL).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

/// Ambient form: a JSON Gram matrix, or `diag(1^p, (-1)^(q+1))`.
#[derive(Args, Debug, Clone, Serialize)]
pub struct FormArgs {
    #[arg(long)]
    pub form: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub q: Option<usize>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Spacelike / lightlike / timelike verdict for two points.
    ClassifyPair {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[command(flatten)]
        form: FormArgs,
    },
    /// Hilbert distance inside a domain given by constraint vectors.
    HilbertDist {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        z: PathBuf,
        #[command(flatten)]
        form: FormArgs,
    },
    /// Locates points relative to a constraint domain.
    OmegaTest {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        points: PathBuf,
        #[command(flatten)]
        form: FormArgs,
    },
    /// Lipschitz check of a builtin graph family or a sample table.
    GraphCheck {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        /// Weights for `crown-orbit`.
        #[arg(long, value_delimiter = ',')]
        tau: Vec<f64>,
        /// Sample table for `table`: domain columns then image columns.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Domain of a `table` graph.
        #[arg(long, value_enum, default_value = "hemisphere")]
        domain: DomainKind,
        #[arg(long, default_value_t = 2000)]
        pairs: usize,
        /// Rows of the dumped graph table.
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Crowns among sampled boundary points.
    CrownScan {
        /// CSV of isotropic vectors, one per row.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        j: usize,
        #[arg(long, default_value_t = 1000)]
        max_results: usize,
        #[command(flatten)]
        form: FormArgs,
    },
    /// Signature, determinant and relation residual of the Cartan family along a t-grid.
    CoxeterScan {
        /// JSON diagram `{"N": n, "m": [[..]]}`.
        #[arg(long, conflicts_with = "family")]
        diagram: Option<PathBuf>,
        /// Builtin seven-node diagram with leaf orders `k,l`.
        #[arg(long, value_delimiter = ',')]
        family: Vec<u32>,
        #[arg(long, default_value_t = 0.0)]
        t_min: f64,
        #[arg(long, default_value_t = 5.0)]
        t_max: f64,
        #[arg(long, default_value_t = 500)]
        steps: usize,
    },
    /// Vertices of the `2k`-gon with angle data `n`.
    GtPolygon {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        q: usize,
    },
    /// Bends a representation along its edges.
    Bend {
        #[arg(long, conflicts_with = "toy")]
        datum: Option<PathBuf>,
        #[arg(long, value_enum)]
        toy: Option<Toy>,
        /// Bending parameters.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.1, 1.0])]
        s: Vec<f64>,
    },
    /// Gap series, limit set, cone rays and a chart scatter for a generated group.
    AnosovDiagnose {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value_t = 2)]
        r: usize,
        /// Coordinates plotted in the SVG.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0, 1])]
        chart: Vec<usize>,
        /// Minimal `lambda_1 - lambda_2` for a limit point.
        #[arg(long, default_value_t = 1.0)]
        gap_threshold: f64,
    },
    /// Normalized Jordan projections over a word ball.
    LimitCone {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value_t = 2)]
        r: usize,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GroupArgs {
    /// JSON `{"form": [[..]], "generators": [[[..]]]}` or a bare generator list.
    #[arg(long, conflicts_with = "builtin")]
    pub gens: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub builtin: Option<BuiltinGroup>,
    /// Word length.
    #[arg(long = "L", default_value_t = 6)]
    pub len: usize,
    #[command(flatten)]
    pub form: FormArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Constant,
    Sqrt,
    Isometric,
    IsometricSphere,
    AbsSphere,
    MaximalCrown,
    CrownOrbit,
    Table,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    Hemisphere,
    Sphere,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Toy {
    Amalgam,
    Hnn,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinGroup {
    /// Two hyperbolic translations along ultraparallel axes, in O(2,2).
    Schottky,
    /// A fast and a slow boost on orthogonal (1,1) planes, in O(2,2).
    Split,
}

fn resolve_tol(flag: Option<f64>) -> Outcome<f64> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var("PQGEO_TOL") {
            Ok(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| Failure::Input(format!("PQGEO_TOL: not a number: {s:?}")))?,
            Err(_) => f64::default_tol(),
        },
    };
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Failure::Input(format!("tolerance must be finite and nonnegative, got {tol}")));
    }
    Ok(tol)
}

fn run(cli: &Cli) -> Outcome<String> {
    let start = Instant::now();
    let tol = resolve_tol(cli.tol)?;
    let mut out = Artifacts::new(&cli.out)?;
    let ctx = commands::Ctx { tol, seed: cli.seed };
    let summary = match &cli.command {
        Command::ClassifyPair { x, y, form } => commands::classify_pair(&ctx, &mut out, x, y, form)?,
        Command::HilbertDist { domain, y, z, form } => commands::hilbert_dist(&ctx, &mut out, domain, y, z, form)?,
        Command::OmegaTest { domain, points, form } => commands::omega_test(&ctx, &mut out, domain, points, form)?,
        Command::GraphCheck { family, p, q, tau, input, domain, pairs, samples } => commands::graph_check(
            &ctx,
            &mut out,
            &commands::GraphSpec { family: *family, p: *p, q: *q, tau, input: input.as_deref(), domain: *domain },
            *pairs,
            *samples,
        )?,
        Command::CrownScan { input, j, max_results, form } => {
            commands::crown_scan(&ctx, &mut out, input, *j, *max_results, form)?
        }
        Command::CoxeterScan { diagram, family, t_min, t_max, steps } => {
            commands::coxeter_scan(&mut out, diagram.as_deref(), family, (*t_min, *t_max), *steps)?
        }
        Command::GtPolygon { k, n, q } => commands::gt_polygon(&mut out, *k, *n, *q)?,
        Command::Bend { datum, toy, s } => commands::bend(&mut out, datum.as_deref(), *toy, s)?,
        Command::AnosovDiagnose { group, r, chart, gap_threshold } => {
            let [i, j] = chart[..] else {
                return Err(Failure::Input("--chart takes two indices i,j".into()));
            };
            commands::anosov_diagnose(&ctx, &mut out, group, *r, (i, j), *gap_threshold)?
        }
        Command::LimitCone { group, r } => commands::limit_cone(&ctx, &mut out, group, *r)?,
    };
    let manifest = serde_json::json!({
        "config": cli,
        "tol": tol,
        "versions": {
            "pqgeo": pqgeo::VERSION,
            "pqgeo-cli": env!("CARGO_PKG_VERSION"),
        },
        "wall_time_s": start.elapsed().as_secs_f64(),
        "files": out.files,
    });
    out.manifest(&manifest)?;
    Ok(summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("pqgeo: {f}");
            ExitCode::from(f.code() as u8)
        }
    }
}
