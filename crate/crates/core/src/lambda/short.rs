use num_integer::Roots;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{HalfIntegralMatrix, IntMatrix};
use crate::error::{Error, Result};
use crate::exactnum::Rational;

type Q = Ratio<i128>;

/// All `x ≠ 0` with `x^t G x ≤ max_norm` for a positive definite Gram matrix
/// `G`, both signs, paired with `x^t G x`.
pub(crate) fn gram_short_vectors(g: &IntMatrix, max_norm: i64) -> Vec<(Vec<i64>, i64)> {
    let n = g.rows();
    let mut out = Vec::new();
    if max_norm <= 0 || n == 0 {
        return out;
    }
    // x^t G x = Σ_i q_ii (x_i + Σ_{j>i} q_ij x_j)^2
    let mut q: Vec<Vec<Q>> = (0..n)
        .map(|i| (0..n).map(|j| Q::from_integer(g[(i, j)] as i128)).collect())
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            q[j][i] = q[i][j];
            q[i][j] = q[i][j] / q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                let t = q[k][i] * q[i][l];
                q[k][l] -= t;
            }
        }
    }
    let mut x = vec![0i64; n];
    descend(g, &q, n - 1, Q::from_integer(max_norm as i128), &mut x, &mut out);
    out
}

fn descend(g: &IntMatrix, q: &[Vec<Q>], i: usize, remaining: Q, x: &mut [i64], out: &mut Vec<(Vec<i64>, i64)>) {
    let n = x.len();
    let mut center = Q::zero();
    for j in i + 1..n {
        center -= q[i][j] * Q::from_integer(x[j] as i128);
    }
    let t = remaining / q[i][i];
    let s = t.floor().to_integer().max(0).sqrt() as i64;
    let c0 = center.floor().to_integer() as i64;
    for xi in (c0 - s - 1)..=(c0 + s + 1) {
        let diff = Q::from_integer(xi as i128) - center;
        let used = q[i][i] * diff * diff;
        if used > remaining {
            continue;
        }
        x[i] = xi;
        if i == 0 {
            if x.iter().any(|&v| v != 0) {
                out.push((x.to_vec(), norm(g, x)));
            }
        } else {
            descend(g, q, i - 1, remaining - used, x, out);
        }
    }
    x[i] = 0;
}

pub(crate) fn norm(g: &IntMatrix, x: &[i64]) -> i64 {
    inner(g, x, x)
}

pub(crate) fn inner(g: &IntMatrix, x: &[i64], y: &[i64]) -> i64 {
    let n = x.len();
    let mut s = 0;
    for i in 0..n {
        if x[i] == 0 {
            continue;
        }
        let mut row = 0;
        for j in 0..n {
            row += g[(i, j)] * y[j];
        }
        s += x[i] * row;
    }
    s
}

/// All `x ≠ 0` with `S[x] ≤ bound`, paired with `S[x]`; with `full == false`
/// only the member of each `±x` pair whose first nonzero entry is positive.
pub fn short_vectors(s: &HalfIntegralMatrix, bound: &Rational, full: bool) -> Result<Vec<(Vec<i64>, i64)>> {
    if !s.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    if bound.is_negative() {
        return Ok(Vec::new());
    }
    let b = bound.floor().to_integer().to_i64().ok_or_else(|| Error::OutOfScale("bound too large".into()))?;
    let mut v: Vec<(Vec<i64>, i64)> = gram_short_vectors(&s.gram(), 2 * b)
        .into_iter()
        .filter(|(x, _)| full || x.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0))
        .map(|(x, nrm)| (x, nrm / 2))
        .collect();
    v.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    fn box_count(s: &HalfIntegralMatrix, bound: i64, r: i64) -> Vec<(Vec<i64>, i64)> {
        let n = s.size();
        let mut out = Vec::new();
        let total = (2 * r + 1).pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let x: Vec<i64> = (0..n)
                .map(|_| {
                    let d = c % (2 * r + 1) - r;
                    c /= 2 * r + 1;
                    d
                })
                .collect();
            let v = norm(&s.gram(), &x) / 2;
            if x.iter().any(|&c| c != 0) && v <= bound {
                out.push((x, v));
            }
        }
        out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        out
    }

    #[test]
    fn unary_form() {
        let s = HalfIntegralMatrix::diagonal(&[1]);
        let v = short_vectors(&s, &rat(4, 1), true).unwrap();
        let vals: Vec<i64> = v.iter().map(|x| x.1).collect();
        assert_eq!(vals, vec![1, 1, 4, 4]);
        assert_eq!(short_vectors(&s, &rat(4, 1), false).unwrap().len(), 2);
    }

    #[test]
    fn a2_roots() {
        let s = HalfIntegralMatrix::parse("2; 2 1; 1 2").unwrap();
        let v = short_vectors(&s, &rat(1, 1), true).unwrap();
        assert_eq!(v.len(), 6);
        assert!(v.iter().all(|x| x.1 == 1));
        assert_eq!(short_vectors(&s, &rat(1, 1), false).unwrap().len(), 3);
        assert!(short_vectors(&s, &rat(1, 2), true).unwrap().is_empty());
    }

    #[test]
    fn matches_box_enumeration() {
        let forms = ["2; 2 1; 1 4", "3; 2 1 0; 1 2 1; 0 1 4", "3; 4 -1 2; -1 6 1; 2 1 8", "4; 2 -1 0 0; -1 2 -1 -1; 0 -1 2 0; 0 -1 0 2"];
        for f in forms {
            let s = HalfIntegralMatrix::parse(f).unwrap();
            let got = short_vectors(&s, &rat(9, 2), true).unwrap();
            assert_eq!(got, box_count(&s, 4, 5), "{f}");
        }
    }
}
