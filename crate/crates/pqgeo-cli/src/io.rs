//! Input parsing, artifact writing and the run manifest.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// A failed run, split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad files, flags or preconditions (exit 2).
    Input(String),
    /// The computation itself failed (exit 1).
    Numeric(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numeric(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<pqgeo::Error> for Failure {
    fn from(e: pqgeo::Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

pub fn input<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Input(msg.into()))
}

/// Tags a library error with the file it came from.
pub fn in_file(path: &Path) -> impl Fn(pqgeo::Error) -> Failure + '_ {
    move |e| match Failure::from(e) {
        Failure::Input(m) => Failure::Input(format!("{}: {m}", path.display())),
        other => other,
    }
}

pub fn read_text(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Outcome<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::Input(format!(
            "{}: {what}: {} at line {} column {}",
            path.display(),
            e,
            e.line(),
            e.column()
        ))
    })
}

pub fn read_vector(path: &Path, what: &str) -> Outcome<DVector<f64>> {
    let v: Vec<f64> = read_json(path, what)?;
    if v.is_empty() {
        return input(format!("{}: {what}: empty vector", path.display()));
    }
    Ok(DVector::from_vec(v))
}

pub fn vectors_from_rows(rows: Vec<Vec<f64>>, path: &Path, what: &str) -> Outcome<Vec<DVector<f64>>> {
    let d = rows.first().map_or(0, Vec::len);
    if d == 0 {
        return input(format!("{}: {what}: no vectors", path.display()));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != d {
            return input(format!(
                "{}: {what}[{i}]: length {} differs from {d}",
                path.display(),
                r.len()
            ));
        }
    }
    Ok(rows.into_iter().map(DVector::from_vec).collect())
}

pub fn read_vectors(path: &Path, what: &str) -> Outcome<Vec<DVector<f64>>> {
    let rows: Vec<Vec<f64>> = read_json(path, what)?;
    vectors_from_rows(rows, path, what)
}

pub fn matrix_from_rows(rows: &[Vec<f64>], path: &Path, what: &str) -> Outcome<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || m == 0 || rows.iter().any(|r| r.len() != m) {
        return input(format!("{}: {what}: ragged or empty matrix", path.display()));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

/// Numeric CSV rows; `#` starts a comment and a non-numeric first row is a header.
pub fn read_csv_rows(path: &Path) -> Outcome<Vec<Vec<f64>>> {
    let text = read_text(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let parsed: Result<Vec<f64>, usize> = rec
            .iter()
            .enumerate()
            .map(|(c, f)| f.parse::<f64>().map_err(|_| c))
            .collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if i == 0 => continue,
            Err(c) => {
                let line = rec.position().map_or(i as u64 + 1, |p| p.line());
                return input(format!(
                    "{}: line {line}, column {}: not a number: {:?}",
                    path.display(),
                    c + 1,
                    rec.get(c).unwrap_or("")
                ));
            }
        }
    }
    if rows.is_empty() {
        return input(format!("{}: no data rows", path.display()));
    }
    Ok(rows)
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
    /// `data` or `presentation`.
    pub role: &'static str,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Output directory plus the list of files written so far.
pub struct Artifacts {
    dir: PathBuf,
    pub files: Vec<FileEntry>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Outcome<Self> {
        fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
        Ok(Artifacts { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn put(&mut self, name: &str, bytes: &[u8], role: &'static str) -> Outcome<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| Failure::Numeric(format!("{}: {e}", path.display())))?;
        self.files.push(FileEntry {
            name: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
            role,
        });
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Outcome<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| Failure::Numeric(format!("{name}: {e}"));
        w.write_record(header).map_err(fail)?;
        for r in rows {
            w.write_record(r).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::Numeric(format!("{name}: {e}")))?;
        self.put(name, &bytes, "data")
    }

    pub fn json<S: Serialize>(&mut self, name: &str, value: &S) -> Outcome<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Numeric(e.to_string()))?;
        text.push('\n');
        self.put(name, text.as_bytes(), "data")
    }

    pub fn svg(&mut self, name: &str, text: &str) -> Outcome<()> {
        self.put(name, text.as_bytes(), "presentation")
    }

    pub fn manifest(&self, value: &serde_json::Value) -> Outcome<()> {
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Numeric(e.to_string()))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Failure::Numeric(format!("{}: {e}", path.display())))
    }
}

/// Scatter plot of `(x_i, x_j)` for unit vectors, on `[-1, 1]^2`.
pub fn scatter_svg(points: &[DVector<f64>], chart: (usize, usize)) -> String {
    let size = 400.0;
    let half = size / 2.0;
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<line x1=\"0\" y1=\"{half}\" x2=\"{size}\" y2=\"{half}\" stroke=\"#ccc\"/>\n<line x1=\"{half}\" y1=\"0\" x2=\"{half}\" y2=\"{size}\" stroke=\"#ccc\"/>\n"
    ));
    for p in points {
        let x = half + 0.95 * half * p[chart.0];
        let y = half - 0.95 * half * p[chart.1];
        s.push_str(&format!("<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"1.5\" fill=\"black\"/>\n"));
    }
    s.push_str(&format!(
        "<text x=\"4\" y=\"14\" font-size=\"12\">x{} / x{}, {} points</text>\n</svg>\n",
        chart.0,
        chart.1,
        points.len()
    ));
    s
}
