//! Balls in the word metric of a finitely generated matrix group, with
//! projective deduplication.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn inv(self) -> Self {
        Letter { generator: self.generator, inverse: !self.inverse }
    }
}

/// A word as a list of letters; displayed as `0 1^-1 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}{}", l.generator, if l.inverse { "^-1" } else { "" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BallElement<T: Real> {
    pub matrix: DMatrix<T>,
    pub word: Word,
}

#[derive(Debug, Clone)]
pub struct WordBall<T: Real> {
    pub radius: usize,
    pub generators: Vec<DMatrix<T>>,
    pub inverses: Vec<DMatrix<T>>,
    pub elements: Vec<BallElement<T>>,
}

impl<T: Real> WordBall<T> {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Elements whose shortest word has length `l`.
    pub fn sphere(&self, l: usize) -> impl Iterator<Item = &BallElement<T>> {
        self.elements.iter().filter(move |e| e.word.len() == l)
    }

    pub fn letter_matrix(&self, l: Letter) -> &DMatrix<T> {
        if l.inverse {
            &self.inverses[l.generator]
        } else {
            &self.generators[l.generator]
        }
    }

    /// Product of the word's letters.
    pub fn evaluate(&self, w: &Word) -> DMatrix<T> {
        let n = self.generators[0].nrows();
        w.0.iter().fold(DMatrix::identity(n, n), |acc, &l| acc * self.letter_matrix(l))
    }
}

/// Frobenius threshold between normalized matrices.
pub const DEDUP_TOL: f64 = 1e-8;
/// Bucket width of the hash projection.
pub const HASH_WIDTH: f64 = 1e-6;

/// Divides by the entry of largest magnitude, making it positive.
pub fn projective_normalize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    let big = m.iter().fold(T::zero(), |a, x| a.max(x.abs()));
    if big.is_zero() {
        return m.clone();
    }
    let cut = big * (T::one() - lit(1e-9));
    let pivot = *m.iter().find(|x| x.abs() >= cut).expect("nonzero matrix has a pivot");
    m / pivot
}

struct Dedup<T: Real> {
    weights: Vec<T>,
    buckets: HashMap<i64, Vec<usize>>,
    normalized: Vec<DMatrix<T>>,
}

impl<T: Real> Dedup<T> {
    fn new(len: usize) -> Self {
        let mut rng = StdRng::seed_from_u64(0x5eed);
        let weights = (0..len).map(|_| lit(rng.random_range(0.5..1.5))).collect();
        Dedup { weights, buckets: HashMap::new(), normalized: Vec::new() }
    }

    /// Index of an earlier equal element, or registers `m` and returns `None`.
    fn insert(&mut self, m: &DMatrix<T>) -> Option<usize> {
        let n = projective_normalize(m);
        let key: T = n.iter().zip(&self.weights).fold(T::zero(), |s, (x, w)| s + *x * *w);
        let b = (key / lit(HASH_WIDTH)).floor().to_i64().unwrap_or(i64::MAX);
        for nb in [b.saturating_sub(1), b, b.saturating_add(1)] {
            if let Some(list) = self.buckets.get(&nb) {
                for &i in list {
                    if (&self.normalized[i] - &n).norm() < lit(DEDUP_TOL) {
                        return Some(i);
                    }
                }
            }
        }
        self.buckets.entry(b).or_default().push(self.normalized.len());
        self.normalized.push(n);
        None
    }
}

/// Breadth-first enumeration of reduced words of length `<= radius`,
/// keeping the first word found for each projective class.
pub fn word_ball<T: Real>(generators: &[DMatrix<T>], radius: usize) -> Result<WordBall<T>> {
    let Some(first) = generators.first() else {
        return Err(Error::Empty("generator list"));
    };
    let n = first.nrows();
    let mut inverses = Vec::with_capacity(generators.len());
    for g in generators {
        if g.nrows() != n || g.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: g.nrows() });
        }
        inverses.push(g.clone().try_inverse().ok_or(Error::Singular)?);
    }
    let letters: Vec<Letter> = (0..generators.len())
        .flat_map(|g| [Letter { generator: g, inverse: false }, Letter { generator: g, inverse: true }])
        .collect();
    let mut ball = WordBall { radius, generators: generators.to_vec(), inverses, elements: Vec::new() };
    let mut dedup = Dedup::new(n * n);
    let id = DMatrix::identity(n, n);
    dedup.insert(&id);
    ball.elements.push(BallElement { matrix: id, word: Word::default() });
    let mut frontier = vec![0usize];
    for _ in 0..radius {
        let mut next = Vec::new();
        for &i in &frontier {
            let last = ball.elements[i].word.0.last().copied();
            for &l in &letters {
                if last == Some(l.inv()) {
                    continue;
                }
                let m = &ball.elements[i].matrix * ball.letter_matrix(l);
                if dedup.insert(&m).is_some() {
                    continue;
                }
                let mut w = ball.elements[i].word.clone();
                w.0.push(l);
                next.push(ball.elements.len());
                ball.elements.push(BallElement { matrix: m, word: w });
            }
        }
        frontier = next;
    }
    Ok(ball)
}
