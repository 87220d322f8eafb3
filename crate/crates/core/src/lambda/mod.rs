//! Half-integral symmetric matrices: rank, level, characters, reduction to a
//! canonical GL-representative, isometries, and class enumeration.

mod classes;
mod hnf;
mod isometry;
mod matrix;
mod reduce;
mod short;

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactnum::{kronecker, QuadCharacter};

pub use classes::{enumerate_classes, enumerate_classes_scaled, enumerate_forms};
pub use hnf::hnf_matrices;
pub use isometry::{automorphism_count, automorphisms, is_equivalent};
pub use matrix::IntMatrix;
pub use reduce::{canonical_with_transform, minkowski_reduce};
pub use short::short_vectors;


/// Largest size handled by reduction and isometry search.
pub const MAX_SIZE: usize = 5;

/// A matrix `T` with `t_ii, 2 t_ij ∈ Z`, stored as the even symmetric matrix `2T`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct HalfIntegralMatrix {
    n: usize,
    two_t: Vec<i64>,
}

impl HalfIntegralMatrix {
    /// Builds from the row-major entries of `2T`.
    pub fn new(n: usize, two_t: Vec<i64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMatrix("size must be positive".into()));
        }
        if two_t.len() != n * n {
            return Err(Error::InvalidMatrix(format!("expected {} entries, got {}", n * n, two_t.len())));
        }
        for i in 0..n {
            if two_t[i * n + i] % 2 != 0 {
                return Err(Error::InvalidMatrix(format!("odd diagonal entry {} of 2T", two_t[i * n + i])));
            }
            for j in 0..i {
                if two_t[i * n + j] != two_t[j * n + i] {
                    return Err(Error::InvalidMatrix("2T is not symmetric".into()));
                }
            }
        }
        Ok(HalfIntegralMatrix { n, two_t })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("rows are not square".into()));
        }
        HalfIntegralMatrix::new(n, rows.concat())
    }

    /// `T = diag(t_1, ..., t_n)`.
    pub fn diagonal(t: &[i64]) -> Self {
        let n = t.len();
        let mut two_t = vec![0; n * n];
        for (i, &x) in t.iter().enumerate() {
            two_t[i * n + i] = 2 * x;
        }
        HalfIntegralMatrix { n, two_t }
    }

    pub fn zero(n: usize) -> Self {
        HalfIntegralMatrix { n, two_t: vec![0; n * n] }
    }

    pub(crate) fn from_int_matrix(g: &IntMatrix) -> Result<Self> {
        HalfIntegralMatrix::new(g.rows(), g.data().to_vec())
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Entry `(i, j)` of `2T`.
    pub fn two_t(&self, i: usize, j: usize) -> i64 {
        self.two_t[i * self.n + j]
    }

    /// Row-major entries of `2T`.
    pub fn entries(&self) -> &[i64] {
        &self.two_t
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.two_t.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn gram(&self) -> IntMatrix {
        IntMatrix::new(self.n, self.n, self.two_t.clone())
    }

    /// `tr(T)`.
    pub fn trace(&self) -> i64 {
        (0..self.n).map(|i| self.two_t(i, i) / 2).sum()
    }

    /// `det(2T)`.
    pub fn det2(&self) -> i128 {
        self.gram().det()
    }

    pub fn rank(&self) -> usize {
        self.gram().rank()
    }

    pub fn is_zero(&self) -> bool {
        self.two_t.iter().all(|&x| x == 0)
    }

    /// Leading principal minors of `2T` are all positive.
    pub fn is_positive_definite(&self) -> bool {
        (1..=self.n).all(|k| self.principal_minor(&(0..k).collect::<Vec<_>>()) > 0)
    }

    /// All principal minors of `2T` are nonnegative.
    pub fn is_positive_semidefinite(&self) -> bool {
        (1u32..(1 << self.n)).all(|mask| {
            let idx: Vec<usize> = (0..self.n).filter(|i| mask & (1 << i) != 0).collect();
            self.principal_minor(&idx) >= 0
        })
    }

    fn principal_minor(&self, idx: &[usize]) -> i128 {
        let k = idx.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in idx {
            for &j in idx {
                data.push(self.two_t(i, j) as i128);
            }
        }
        matrix::det_i128(k, data)
    }

    /// `T[X] = X^t T X` for an `n × m` integer matrix `X`.
    pub fn transform(&self, x: &IntMatrix) -> HalfIntegralMatrix {
        assert_eq!(x.rows(), self.n, "transform shape mismatch");
        let g = x.transpose().mul(&self.gram()).mul(x);
        HalfIntegralMatrix { n: x.cols(), two_t: g.data().to_vec() }
    }

    /// `T ⊕ 0_extra`.
    pub fn pad_zero(&self, extra: usize) -> HalfIntegralMatrix {
        let n = self.n + extra;
        let mut two_t = vec![0; n * n];
        for i in 0..self.n {
            for j in 0..self.n {
                two_t[i * n + j] = self.two_t(i, j);
            }
        }
        HalfIntegralMatrix { n, two_t }
    }

    /// Leading `r × r` block.
    pub fn leading_block(&self, r: usize) -> HalfIntegralMatrix {
        let mut two_t = Vec::with_capacity(r * r);
        for i in 0..r {
            for j in 0..r {
                two_t.push(self.two_t(i, j));
            }
        }
        HalfIntegralMatrix { n: r, two_t }
    }

    pub fn scale(&self, c: i64) -> HalfIntegralMatrix {
        HalfIntegralMatrix { n: self.n, two_t: self.two_t.iter().map(|x| x * c).collect() }
    }

    /// Entrywise quotient by `c`, when the result is again half-integral.
    pub fn divide(&self, c: i64) -> Option<HalfIntegralMatrix> {
        if c == 0 {
            return None;
        }
        let mut two_t = Vec::with_capacity(self.two_t.len());
        for &x in &self.two_t {
            if x % c != 0 {
                return None;
            }
            two_t.push(x / c);
        }
        HalfIntegralMatrix::new(self.n, two_t).ok()
    }

    /// Least `l ≥ 1` with `l (2T)^{-1}` integral with even diagonal.
    pub fn level(&self) -> Result<u64> {
        let g = self.gram();
        let d = g.det();
        if d == 0 {
            return Err(Error::NotPositiveDefinite);
        }
        let adj = g.adjugate();
        let mut level: i128 = 1;
        for i in 0..self.n {
            for j in 0..self.n {
                let a = adj[(i, j)] as i128;
                let (num, den) = if i == j { (a, 2 * d) } else { (a, d) };
                let g = num.gcd(&den);
                level = level.lcm(&(den / g).abs());
            }
        }
        Ok(level as u64)
    }

    /// `(-1)^{r/2} det(2T)` for even size.
    pub fn discriminant(&self) -> Result<i64> {
        if !self.n.is_multiple_of(2) {
            return Err(Error::OddRank(self.n));
        }
        let d = self.det2() as i64;
        Ok(if (self.n / 2).is_multiple_of(2) { d } else { -d })
    }

    /// `χ_S(d) = sign(d)^{r/2} ((-1)^{r/2} det 2S / |d|)`.
    pub fn chi(&self, d: i64) -> Result<i32> {
        let disc = self.discriminant()?;
        if !self.is_positive_definite() {
            return Err(Error::NotPositiveDefinite);
        }
        let sign = if d < 0 && (self.n / 2) % 2 == 1 { -1 } else { 1 };
        Ok(sign * kronecker(disc, d.abs()))
    }

    /// The primitive character inducing `χ_S`.
    pub fn eta(&self) -> Result<QuadCharacter> {
        let disc = self.discriminant()?;
        if !self.is_positive_definite() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(QuadCharacter::kronecker(disc).primitive())
    }

    /// `χ_S` as a character of modulus `|det 2S|`.
    pub fn character(&self) -> Result<QuadCharacter> {
        let disc = self.discriminant()?;
        Ok(QuadCharacter::kronecker(disc))
    }

    /// Text form `n; r_1; ...; r_n` of `2T`.
    pub fn to_text(&self) -> String {
        let rows: Vec<String> = self
            .two_t
            .chunks(self.n)
            .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
            .collect();
        format!("{}; {}", self.n, rows.join("; "))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut parts = s.split(';').map(str::trim);
        let n: usize = parts
            .next()
            .filter(|p| !p.is_empty())
            .ok_or_else(|| Error::Parse("empty matrix text".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad size: {e}")))?;
        let mut entries = Vec::with_capacity(n * n);
        let mut rows = 0;
        for part in parts {
            if part.is_empty() {
                continue;
            }
            rows += 1;
            for tok in part.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
                entries.push(tok.parse::<i64>().map_err(|e| Error::Parse(format!("bad entry {tok:?}: {e}")))?);
            }
        }
        if rows != n {
            return Err(Error::Parse(format!("expected {n} rows, got {rows}")));
        }
        HalfIntegralMatrix::new(n, entries)
    }
}

/// Rank over Q.
pub fn rank(t: &HalfIntegralMatrix) -> usize {
    t.rank()
}

pub fn level(s: &HalfIntegralMatrix) -> Result<u64> {
    if !s.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    s.level()
}

pub fn chi_s(s: &HalfIntegralMatrix, d: i64) -> Result<i32> {
    s.chi(d)
}

pub fn eta_s(s: &HalfIntegralMatrix) -> Result<QuadCharacter> {
    s.eta()
}

impl fmt::Display for HalfIntegralMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for HalfIntegralMatrix {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        HalfIntegralMatrix::parse(s)
    }
}

impl Serialize for HalfIntegralMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HalfIntegralMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<i64>>::deserialize(deserializer)?;
        HalfIntegralMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
