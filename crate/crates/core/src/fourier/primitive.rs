use std::collections::BTreeMap;

use num_traits::Zero;

use super::{window_indices, QExpansion};
use crate::error::{Error, Result};
use crate::exactnum::{divisors, Rational};
use crate::lambda::{hnf_matrices, minkowski_reduce, HalfIntegralMatrix};

/// `T[D^{-1}]` for every Hermite normal form `D` with `det D > 1` for which
/// it is again half-integral (so `det(D)^2 | det(2T)`).
pub fn sublattice_quotients(t: &HalfIntegralMatrix) -> Vec<HalfIntegralMatrix> {
    let r = t.size();
    let det2 = t.det2().unsigned_abs() as u64;
    let g = t.gram();
    let mut out = Vec::new();
    for d in divisors(det2) {
        if d == 1 || !det2.is_multiple_of(d * d) {
            continue;
        }
        let dd = (d * d) as i64;
        for h in hnf_matrices(r, d) {
            // D^{-1} = adj(D) / d
            let a = h.adjugate();
            let num = a.transpose().mul(&g).mul(&a);
            if num.data().iter().all(|x| x % dd == 0) {
                let data: Vec<i64> = num.data().iter().map(|x| x / dd).collect();
                if let Ok(s) = HalfIntegralMatrix::new(r, data) {
                    out.push(s);
                }
            }
        }
    }
    out
}

/// Rank-`r` primitive coefficients `a*(T)` for positive definite canonical
/// `T` of size `r` with `tr(T) ≤ bound`, from
/// `a(T ⊕ 0) = Σ_D a*(T[D^{-1}])` by induction on `det(2T)`.
pub fn primitive_coeffs(f: &QExpansion, r: usize, bound: i64) -> Result<BTreeMap<HalfIntegralMatrix, Rational>> {
    if !f.is_class_invariant() {
        return Err(Error::InvalidArgument("primitive coefficients need a class-invariant expansion".into()));
    }
    if r == 0 || r > f.degree() {
        return Err(Error::InvalidArgument(format!("rank {r} outside 1..={}", f.degree())));
    }
    if bound > f.bound() {
        return Err(Error::OutOfRange { trace: bound, bound: f.bound() });
    }
    let mut targets: Vec<HalfIntegralMatrix> =
        window_indices(r, bound)?.iter().filter(|t| t.is_positive_definite()).cloned().collect();
    targets.sort_by_key(|t| (t.det2(), t.clone()));
    let pad = f.degree() - r;
    let mut out: BTreeMap<HalfIntegralMatrix, Rational> = BTreeMap::new();
    for t in targets {
        let mut v = f.coeff(&t.pad_zero(pad))?;
        for s in sublattice_quotients(&t) {
            let c = minkowski_reduce(&s)?;
            match out.get(&c) {
                Some(x) => v -= x,
                None => return Err(Error::OutOfRange { trace: c.trace(), bound }),
            }
        }
        out.insert(t, v);
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

/// `a*(T)` for a single positive definite `T`, from a coefficient oracle
/// `T' ↦ a(T' ⊕ 0)` queried only on the forms below `T`.
pub fn primitive_coeff_at<F>(t: &HalfIntegralMatrix, coeff: &F) -> Result<Rational>
where
    F: Fn(&HalfIntegralMatrix) -> Result<Rational>,
{
    fn go<F>(t: &HalfIntegralMatrix, coeff: &F, memo: &mut BTreeMap<HalfIntegralMatrix, Rational>) -> Result<Rational>
    where
        F: Fn(&HalfIntegralMatrix) -> Result<Rational>,
    {
        let t = minkowski_reduce(t)?;
        if let Some(v) = memo.get(&t) {
            return Ok(v.clone());
        }
        let mut v = coeff(&t)?;
        for s in sublattice_quotients(&t) {
            v -= go(&s, coeff, memo)?;
        }
        memo.insert(t, v.clone());
        Ok(v)
    }
    if !t.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    go(t, coeff, &mut BTreeMap::new())
}
