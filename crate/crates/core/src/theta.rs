//! Theta series of positive definite forms and their genus averages.
//!
//! `verify_rank_decomposition` splits the rank-`r` part of an expansion into
//! theta series weighted by primitive coefficients.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{rat_int, Rational};
use crate::fourier::{primitive_coeffs, rank_filter, window_indices, QExpansion};
use crate::genus::GenusRecord;
use crate::lambda::{automorphism_count, short_vectors, HalfIntegralMatrix};

/// `θ_S^{(n)}`: `a(T) = #{X ∈ Z^{r×n} : S[X] = T}` for `tr(T) ≤ bound`.
pub fn theta_series(s: &HalfIntegralMatrix, n: usize, bound: i64) -> Result<QExpansion> {
    if !s.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let r = s.size();
    let g = s.gram();
    let mut by_norm: BTreeMap<i64, Vec<Vec<i64>>> = BTreeMap::new();
    by_norm.insert(0, vec![vec![0; r]]);
    for (x, v) in short_vectors(s, &rat_int(bound.max(0)), true)? {
        by_norm.entry(v).or_default().push(x);
    }
    QExpansion::from_fn(n, bound, |t| {
        let cols: Vec<&[Vec<i64>]> =
            (0..n).map(|i| by_norm.get(&(t.two_t(i, i) / 2)).map_or(&[][..], |v| v.as_slice())).collect();
        let mut chosen: Vec<&[i64]> = Vec::with_capacity(n);
        Ok(rat_int(count_columns(&g, t, &cols, &mut chosen)))
    })
}

/// Tuples of columns with prescribed norms and pairwise products `2t_ij`.
fn count_columns<'a>(
    g: &crate::lambda::IntMatrix,
    t: &HalfIntegralMatrix,
    cols: &[&'a [Vec<i64>]],
    chosen: &mut Vec<&'a [i64]>,
) -> u64 {
    let i = chosen.len();
    if i == cols.len() {
        return 1;
    }
    let mut total = 0;
    for x in cols[i] {
        let ok = chosen.iter().enumerate().all(|(j, y)| bilinear(g, y, x) == t.two_t(j, i));
        if ok {
            chosen.push(x);
            total += count_columns(g, t, cols, chosen);
            chosen.pop();
        }
    }
    total
}

fn bilinear(g: &crate::lambda::IntMatrix, x: &[i64], y: &[i64]) -> i64 {
    let n = x.len();
    let mut s = 0;
    for a in 0..n {
        if x[a] == 0 {
            continue;
        }
        for b in 0..n {
            s += x[a] * g[(a, b)] * y[b];
        }
    }
    s
}

/// `(Θ, Θ⁰)` with `Θ⁰ = Σ θ_{S_i} / ε(S_i)` and `Θ = Θ⁰ / mass`.
pub fn genus_theta(genus: &GenusRecord, n: usize, bound: i64) -> Result<(QExpansion, QExpansion)> {
    if genus.classes.is_empty() || genus.mass.is_zero() {
        return Err(Error::InvalidArgument("empty genus".into()));
    }
    let mut zero = QExpansion::zero(n, bound);
    for c in &genus.classes {
        let th = theta_series(&c.rep, n, bound)?;
        zero = zero.add_scaled(&th, &(Rational::one() / rat_int(c.epsilon)))?;
    }
    let avg = zero.scale(&(Rational::one() / &genus.mass));
    Ok((avg, zero))
}

/// Per-index comparison of `F_[r]` with `Σ_S a*(S)/ε(S) (θ_S^{(n)})_[r]`.
#[derive(Clone, Debug, Serialize)]
pub struct RankDecompositionReport {
    pub degree: usize,
    pub rank: usize,
    pub bound: i64,
    /// Rank-`r` indices compared.
    pub checked: usize,
    /// Forms `S` with nonzero primitive coefficient.
    pub terms: usize,
    pub mismatches: Vec<String>,
    pub passed: bool,
}

pub fn verify_rank_decomposition(f: &QExpansion, r: usize, bound: i64) -> Result<RankDecompositionReport> {
    if bound > f.bound() {
        return Err(Error::OutOfRange { trace: bound, bound: f.bound() });
    }
    let n = f.degree();
    let lhs = rank_filter(&f.truncate(bound)?, r);
    let prim = primitive_coeffs(f, r, bound)?;
    let mut rhs = QExpansion::zero(n, bound);
    for (s, a) in &prim {
        let eps = automorphism_count(s)?;
        let th = rank_filter(&theta_series(s, n, bound)?, r);
        rhs = rhs.add_scaled(&th, &(a / rat_int(eps)))?;
    }
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for t in window_indices(n, bound)?.iter().filter(|t| t.rank() == r) {
        checked += 1;
        let (a, b) = (lhs.coeff(t)?, rhs.coeff(t)?);
        if a != b {
            mismatches.push(format!("{t}: {a} vs {b}"));
        }
    }
    Ok(RankDecompositionReport {
        degree: n,
        rank: r,
        bound,
        checked,
        terms: prim.len(),
        passed: mismatches.is_empty(),
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use crate::genus::{partition_into_genera, ClassRecord};
    use crate::lambda::{enumerate_classes, IntMatrix};

    fn m(s: &str) -> HalfIntegralMatrix {
        HalfIntegralMatrix::parse(s).unwrap()
    }

    /// #{X ∈ Z^{r×n}, entries in [-c, c] : S[X] = T} by exhaustive search.
    fn box_theta(s: &HalfIntegralMatrix, t: &HalfIntegralMatrix, c: i64) -> i64 {
        let (r, n) = (s.size(), t.size());
        let range = 2 * c + 1;
        let total = range.pow((r * n) as u32);
        let mut count = 0;
        for code in 0..total {
            let mut k = code;
            let data: Vec<i64> = (0..r * n)
                .map(|_| {
                    let d = k % range - c;
                    k /= range;
                    d
                })
                .collect();
            let x = IntMatrix::new(r, n, data);
            if &s.transform(&x) == t {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn unary_and_a2() {
        let th = theta_series(&HalfIntegralMatrix::diagonal(&[1]), 1, 10).unwrap();
        let got: Vec<Rational> = (0..=10).map(|t| th.coeff(&HalfIntegralMatrix::diagonal(&[t])).unwrap()).collect();
        let want: Vec<Rational> = [1, 2, 0, 0, 2, 0, 0, 0, 0, 2, 0].iter().map(|&x| rat(x, 1)).collect();
        assert_eq!(got, want);
        let a2 = theta_series(&m("2; 2 1; 1 2"), 1, 3).unwrap();
        assert_eq!(a2.coeff(&HalfIntegralMatrix::diagonal(&[1])).unwrap(), rat(6, 1));
        assert_eq!(a2.constant_term(), rat(1, 1));
    }

    #[test]
    fn degree_two_matches_box_count() {
        let s = m("2; 2 1; 1 4");
        let th = theta_series(&s, 2, 4).unwrap();
        for t in th.indices().unwrap().iter() {
            assert_eq!(th.coeff(t).unwrap(), rat(box_theta(&s, t, 3), 1), "{t}");
        }
        // For n = r, a(S) ≥ ε(S).
        assert!(th.coeff(&s).unwrap() >= rat(automorphism_count(&s).unwrap() as i64, 1));
    }

    #[test]
    fn class_invariance() {
        let s = m("2; 2 1; 1 4");
        let u = IntMatrix::new(2, 2, vec![2, 1, 1, 1]);
        let moved = s.transform(&u);
        assert_eq!(theta_series(&s, 2, 5).unwrap(), theta_series(&moved, 2, 5).unwrap());
    }

    #[test]
    fn genus_theta_normalisations() {
        let classes = enumerate_classes(2, 3, u64::MAX).unwrap();
        let g = &partition_into_genera(&classes).unwrap()[0];
        let (avg, zero) = genus_theta(g, 2, 4).unwrap();
        assert_eq!(avg.constant_term(), rat(1, 1));
        assert_eq!(zero.constant_term(), g.mass);
        assert_eq!(avg.scale(&g.mass), zero);
        let single = &g.classes[0];
        assert_eq!(avg, theta_series(&single.rep, 2, 4).unwrap());

        let reps = [m("2; 2 1; 1 12"), m("2; 4 1; 1 6")];
        let recs: Vec<ClassRecord> =
            reps.iter().map(|r| ClassRecord { rep: r.clone(), epsilon: automorphism_count(r).unwrap() }).collect();
        let two = partition_into_genera(&recs).unwrap();
        assert_eq!(two.len(), 1);
        let (avg, zero) = genus_theta(&two[0], 1, 12).unwrap();
        let mut expect = QExpansion::zero(1, 12);
        for c in &recs {
            let th = theta_series(&c.rep, 1, 12).unwrap();
            expect = expect.add_scaled(&th, &rat(1, c.epsilon as i64)).unwrap();
        }
        assert_eq!(zero, expect);
        assert_eq!(avg, expect.scale(&(Rational::one() / &two[0].mass)));
        assert_eq!(avg.constant_term(), rat(1, 1));
    }

    #[test]
    fn decomposition_of_theta_series() {
        for s in ["1; 2", "2; 2 1; 1 2", "2; 2 0; 0 4"] {
            let s = m(s);
            let th = theta_series(&s, 3, 5).unwrap();
            let rep = verify_rank_decomposition(&th, s.size(), 5).unwrap();
            assert!(rep.passed, "{:?}", rep.mismatches);
            assert!(rep.checked > 0);
        }
    }

    #[test]
    fn decomposition_of_vanishing_rank_part() {
        let th = theta_series(&HalfIntegralMatrix::diagonal(&[1]), 3, 4).unwrap();
        let rep = verify_rank_decomposition(&th, 2, 4).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.terms, 0);
        assert!(primitive_coeffs(&th, 2, 4).unwrap().is_empty());
    }
}
