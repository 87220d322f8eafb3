use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::exactnum::{mod_inverse, pow_big, residue_mod_pm, Rational};

/// Row-echelon basis over `F_p`, for choosing rows that raise the rank.
pub(crate) struct ModPBasis {
    p: u64,
    rows: Vec<(usize, Vec<u64>)>,
}

impl ModPBasis {
    pub(crate) fn new(p: u64) -> Self {
        ModPBasis { p, rows: Vec::new() }
    }

    pub(crate) fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds `row` when it is independent of the rows kept so far.
    pub(crate) fn try_add(&mut self, row: &[u64]) -> bool {
        let p = self.p;
        let mut r: Vec<u64> = row.iter().map(|x| x % p).collect();
        for (pivot, basis) in &self.rows {
            let f = r[*pivot];
            if f != 0 {
                for (x, b) in r.iter_mut().zip(basis) {
                    *x = (*x + p - f * b % p) % p;
                }
            }
        }
        let Some(pivot) = r.iter().position(|&x| x != 0) else { return false };
        let inv = mod_inverse(&BigInt::from(r[pivot]), &BigInt::from(p)).unwrap();
        let inv = u64::try_from(inv).unwrap();
        for x in r.iter_mut() {
            *x = *x * inv % p;
        }
        self.rows.push((pivot, r));
        true
    }
}

/// Exact solution of a square system, `None` when singular.
pub(crate) fn solve_rational(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = b.len();
    let mut m: Vec<Vec<Rational>> = a.iter().zip(b).map(|(r, y)| r.iter().cloned().chain([y.clone()]).collect()).collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero())?;
        m.swap(c, p);
        let inv = Rational::one() / &m[c][c];
        for x in m[c].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for k in c..=n {
                    let d = &f * &m[c][k];
                    m[r][k] -= d;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

/// Solution of a square p-integral system modulo `p^c`, pivoting on p-units
/// only. `None` when some column has no unit pivot.
pub(crate) fn solve_mod_pm(a: &[Vec<Rational>], b: &[Rational], p: u64, c: u32) -> Option<Vec<BigInt>> {
    let n = b.len();
    let modulus = pow_big(p, c);
    let mut m: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for (row, y) in a.iter().zip(b) {
        let mut r = Vec::with_capacity(n + 1);
        for x in row.iter().chain([y]) {
            r.push(residue_mod_pm(x, p, c)?);
        }
        m.push(r);
    }
    let pb = BigInt::from(p);
    for col in 0..n {
        let piv = (col..n).find(|&r| !(&m[r][col] % &pb).is_zero())?;
        m.swap(col, piv);
        let inv = mod_inverse(&m[col][col], &modulus)?;
        for x in m[col].iter_mut() {
            *x = (&*x * &inv).mod_floor(&modulus);
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for k in col..=n {
                    let d = &f * &m[col][k];
                    m[r][k] = (&m[r][k] - d).mod_floor(&modulus);
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}
