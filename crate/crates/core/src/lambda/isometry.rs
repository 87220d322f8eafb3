use super::reduce::canonical_with_transform;
use super::short::{gram_short_vectors, inner};
use super::{HalfIntegralMatrix, IntMatrix, MAX_SIZE};
use crate::error::{Error, Result};

/// Backtracking over images of the standard basis: column `i` of `U` is a
/// vector of `G1`-norm `G2_ii` whose inner products with earlier columns
/// match `G2`. Stops after `limit` solutions when given.
fn isometries(g1: &IntMatrix, g2: &IntMatrix, limit: Option<usize>) -> Vec<IntMatrix> {
    let n = g1.rows();
    let max = (0..n).map(|i| g2[(i, i)]).max().unwrap_or(0);
    let short = gram_short_vectors(g1, max);
    let by_col: Vec<Vec<&Vec<i64>>> = (0..n)
        .map(|i| short.iter().filter(|(_, nv)| *nv == g2[(i, i)]).map(|(v, _)| v).collect())
        .collect();
    let mut out = Vec::new();
    let mut chosen: Vec<&Vec<i64>> = Vec::with_capacity(n);
    fn rec<'a>(
        g1: &IntMatrix,
        g2: &IntMatrix,
        by_col: &'a [Vec<&'a Vec<i64>>],
        chosen: &mut Vec<&'a Vec<i64>>,
        out: &mut Vec<IntMatrix>,
        limit: Option<usize>,
    ) -> bool {
        let i = chosen.len();
        let n = g1.rows();
        if i == n {
            let cols: Vec<Vec<i64>> = chosen.iter().map(|c| (*c).clone()).collect();
            let u = IntMatrix::from_columns(n, &cols);
            if u.det().abs() == 1 {
                out.push(u);
            }
            return limit.is_some_and(|l| out.len() >= l);
        }
        for v in &by_col[i] {
            if (0..i).all(|j| inner(g1, chosen[j], v) == g2[(j, i)]) {
                chosen.push(v);
                if rec(g1, g2, by_col, chosen, out, limit) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    rec(g1, g2, &by_col, &mut chosen, &mut out, limit);
    out
}

fn check_pair(s: &HalfIntegralMatrix, s2: &HalfIntegralMatrix) -> Result<()> {
    if s.size() != s2.size() {
        return Err(Error::InvalidArgument("forms of different size".into()));
    }
    if s.size() > MAX_SIZE {
        return Err(Error::OutOfScale(format!("isometry search of size {} > {MAX_SIZE}", s.size())));
    }
    if !s.is_positive_definite() || !s2.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(())
}

/// A unimodular `U` with `S[U] = S2`, if one exists.
pub fn is_equivalent(s: &HalfIntegralMatrix, s2: &HalfIntegralMatrix) -> Result<Option<IntMatrix>> {
    check_pair(s, s2)?;
    if s.det2() != s2.det2() {
        return Ok(None);
    }
    let found = isometries(&s.gram(), &s2.gram(), Some(1));
    Ok(found.into_iter().next())
}

/// All `U ∈ GL_r(Z)` with `S[U] = S`.
pub fn automorphisms(s: &HalfIntegralMatrix) -> Result<Vec<IntMatrix>> {
    check_pair(s, s)?;
    Ok(isometries(&s.gram(), &s.gram(), None))
}

/// `ε(S)`, the order of the automorphism group.
pub fn automorphism_count(s: &HalfIntegralMatrix) -> Result<u64> {
    check_pair(s, s)?;
    // Counting on the canonical form keeps the candidate lists short.
    let (c, _) = canonical_with_transform(s)?;
    Ok(isometries(&c.gram(), &c.gram(), None).len() as u64)
}
