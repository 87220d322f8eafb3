use num_bigint::BigInt;
use num_integer::Integer;

use super::QExpansion;
use crate::error::{Error, Result};
use crate::exactnum::{require_prime, v_p, v_p_unchecked, ExtendedValuation};
use crate::lambda::HalfIntegralMatrix;

/// Outcome of a window congruence test, with the first failing index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Congruence {
    pub holds: bool,
    pub witness: Option<HalfIntegralMatrix>,
    /// Trace bound of the compared window.
    pub bound: i64,
}

fn require_integral(f: &QExpansion, p: u64) -> Result<()> {
    for (t, v) in f.iter() {
        if !v_p(v, p)?.at_least(0) {
            return Err(Error::NotIntegral { index: t.to_text(), value: v.to_string(), p });
        }
    }
    Ok(())
}

/// `F ≡ G mod p^m` on the common window.
pub fn congruent_mod(f: &QExpansion, g: &QExpansion, p: u64, m: u32) -> Result<Congruence> {
    require_prime(p)?;
    if f.degree() != g.degree() {
        return Err(Error::DegreeMismatch(f.degree(), g.degree()));
    }
    require_integral(f, p)?;
    require_integral(g, p)?;
    let bound = f.bound().min(g.bound());
    let d = f.truncate(bound)?.sub(&g.truncate(bound)?)?;
    let witness = d.iter().find(|(_, v)| !v_p_unchecked(v, p).at_least(m as i64)).map(|(t, _)| t.clone());
    Ok(Congruence { holds: witness.is_none(), witness, bound })
}

/// `F_[r]`: coefficients at rank-`r` indices kept, all others zero.
pub fn rank_filter(f: &QExpansion, r: usize) -> QExpansion {
    let mut out = f.clone();
    out.coeffs.retain(|t, _| t.rank() == r);
    out
}

/// Minimum of `v_p` over stored rank-`r` coefficients of the window.
pub fn v_p_rank(f: &QExpansion, p: u64, r: usize) -> Result<ExtendedValuation> {
    require_prime(p)?;
    Ok(f
        .iter()
        .filter(|(t, _)| t.rank() == r)
        .map(|(_, v)| v_p_unchecked(v, p))
        .min()
        .unwrap_or(ExtendedValuation::Infinite))
}

/// The p-rank `r < n` when the window is mod `p^m` singular: every
/// coefficient of rank above `r` vanishes mod `p^m` and some rank-`r`
/// coefficient is a p-unit.
pub fn mod_pm_singular_rank(f: &QExpansion, p: u64, m: u32) -> Result<Option<usize>> {
    require_prime(p)?;
    require_integral(f, p)?;
    let top = f
        .iter()
        .filter(|(_, v)| !v_p_unchecked(v, p).at_least(m as i64))
        .map(|(t, _)| t.rank())
        .max();
    let Some(r) = top else {
        return Ok(None);
    };
    if r >= f.degree() {
        return Ok(None);
    }
    let unit = f.iter().any(|(t, v)| t.rank() == r && v_p_unchecked(v, p) == ExtendedValuation::Finite(0));
    Ok(unit.then_some(r))
}

/// `2k − r ≡ 0 mod (p − 1) p^(m−1)`.
pub fn check_weight_rank_congruence(k: u64, r: u64, p: u64, m: u32) -> bool {
    let modulus = BigInt::from(p - 1) * num_traits::pow(BigInt::from(p), m.saturating_sub(1) as usize);
    let lhs = BigInt::from(2 * k as i128 - r as i128);
    lhs.mod_floor(&modulus) == BigInt::from(0)
}

/// `F | U(p)`: `a(T) ↦ a(pT)` on the window of trace `⌊B/p⌋`.
pub fn u_p(f: &QExpansion, p: u64) -> Result<QExpansion> {
    require_prime(p)?;
    let bound = f.bound().div_euclid(p as i64);
    let mut out = QExpansion::zero(f.degree(), bound);
    out.class_invariant = f.is_class_invariant();
    for (t, v) in f.iter() {
        if let Some(s) = t.divide(p as i64) {
            if s.trace() <= bound {
                out.coeffs.insert(s, v.clone());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{bernoulli, rat, rat_int, sigma, Rational};
    use num_traits::Zero;
    use proptest::prelude::*;

    fn eis1(k: u32, bound: i64) -> QExpansion {
        let c = rat(-2 * k as i64, 1) / bernoulli(k);
        QExpansion::from_fn(1, bound, |t| {
            let n = t.trace() as u64;
            Ok(if n == 0 { rat(1, 1) } else { &c * rat_int(sigma(k - 1, n)) })
        })
        .unwrap()
    }

    #[test]
    fn kummer_congruence_degree_one() {
        let a = eis1(4, 30);
        let b = eis1(4 + 6 * 7, 30);
        assert!(congruent_mod(&a, &b, 7, 1).unwrap().holds);
        let c = congruent_mod(&a, &a, 7, 5).unwrap();
        assert!(c.holds && c.witness.is_none());
    }

    #[test]
    fn congruence_threshold_by_construction() {
        let a = eis1(4, 10);
        let unit = QExpansion::from_fn(1, 10, |_| Ok(rat(3, 1))).unwrap();
        let b = a.add_scaled(&unit, &rat(49, 1)).unwrap();
        assert!(congruent_mod(&a, &b, 7, 2).unwrap().holds);
        let fail = congruent_mod(&a, &b, 7, 3).unwrap();
        assert!(!fail.holds);
        assert!(fail.witness.is_some());
        let bad = QExpansion::from_fn(1, 3, |_| Ok(rat(1, 7))).unwrap();
        assert!(congruent_mod(&bad, &bad, 7, 1).is_err());
    }

    #[test]
    fn rank_filter_partitions() {
        let f = QExpansion::from_fn(2, 4, |t| Ok(rat(t.trace() * 3 + 1, 2))).unwrap();
        let zero = rank_filter(&f, 0);
        assert_eq!(zero.iter().count(), 1);
        let mut sum = QExpansion::zero(2, 4);
        for r in 0..=2 {
            sum = sum.add_scaled(&rank_filter(&f, r), &rat(1, 1)).unwrap();
        }
        assert_eq!(sum, f);
    }

    #[test]
    fn valuations_by_rank() {
        let f = QExpansion::from_fn(2, 3, |t| Ok(if t.rank() == 1 { rat(7 * (t.trace() + 1), 1) } else { rat(1, 1) })).unwrap();
        assert_eq!(v_p_rank(&f, 7, 1).unwrap(), ExtendedValuation::Finite(1));
        assert_eq!(v_p_rank(&rank_filter(&f, 0), 7, 1).unwrap(), ExtendedValuation::Infinite);
        let shifted = f.scale(&rat(1, 7));
        assert_eq!(v_p_rank(&shifted, 7, 1).unwrap(), ExtendedValuation::Finite(0));
    }

    #[test]
    fn singular_rank_examples() {
        let one = QExpansion::from_fn(2, 3, |t| Ok(if t.is_zero() { rat(1, 1) } else { Rational::zero() })).unwrap();
        assert_eq!(mod_pm_singular_rank(&one, 7, 3).unwrap(), Some(0));
        let g = QExpansion::from_fn(2, 4, |t| {
            Ok(match t.rank() {
                0 => rat(1, 1),
                1 => rat(t.trace() + 1, 1),
                _ => rat(49 * t.trace(), 1),
            })
        })
        .unwrap();
        assert_eq!(mod_pm_singular_rank(&g, 7, 2).unwrap(), Some(1));
        assert_eq!(mod_pm_singular_rank(&g, 7, 3).unwrap(), None);
        let top = QExpansion::from_fn(1, 4, |_| Ok(rat(1, 1))).unwrap();
        assert_eq!(mod_pm_singular_rank(&top, 7, 1).unwrap(), None);
    }

    #[test]
    fn weight_rank_congruence() {
        assert!(check_weight_rank_congruence(296, 4, 7, 3));
        assert!(!check_weight_rank_congruence(296, 4, 7, 4));
        for m in 1..6 {
            assert!(check_weight_rank_congruence(5, 10, 11, m));
        }
    }

    #[test]
    fn hecke_up_on_unary_theta() {
        // θ for S = (7): a(t) = 2 when t = 7x², x ≠ 0.
        let f = QExpansion::from_fn(1, 70, |t| {
            let n = t.trace();
            let square = (1..=n).any(|x| 7 * x * x == n);
            Ok(if n == 0 { rat(1, 1) } else if square { rat(2, 1) } else { Rational::zero() })
        })
        .unwrap();
        let g = u_p(&f, 7).unwrap();
        assert_eq!(g.bound(), 10);
        for t in 0..=10 {
            let idx = HalfIntegralMatrix::diagonal(&[t]);
            assert_eq!(g.coeff(&idx).unwrap(), f.coeff(&HalfIntegralMatrix::diagonal(&[7 * t])).unwrap());
        }
        let c = QExpansion::from_fn(2, 9, |t| Ok(if t.is_zero() { rat(5, 1) } else { Rational::zero() })).unwrap();
        assert_eq!(u_p(&c, 3).unwrap().constant_term(), rat(5, 1));
        let f2 = QExpansion::from_fn(2, 9, |t| Ok(rat(t.trace() * t.trace() + t.rank() as i64, 1))).unwrap();
        let twice = u_p(&u_p(&f2, 3).unwrap(), 3).unwrap();
        for t in twice.indices().unwrap().iter() {
            assert_eq!(twice.coeff(t).unwrap(), f2.coeff(&t.scale(9)).unwrap());
        }
    }

    proptest! {
        #[test]
        fn up_is_linear(c in -20i64..20, d in 1i64..7) {
            let f = QExpansion::from_fn(2, 6, |t| Ok(rat(t.trace() * 2 - 3, 1))).unwrap();
            let g = QExpansion::from_fn(2, 6, |t| Ok(rat(t.rank() as i64 + 1, 3))).unwrap();
            let s = rat(c, d);
            let lhs = u_p(&f.add_scaled(&g, &s).unwrap(), 2).unwrap();
            let rhs = u_p(&f, 2).unwrap().add_scaled(&u_p(&g, 2).unwrap(), &s).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn congruence_is_symmetric(a in 0i64..50, b in 0i64..50) {
            let f = QExpansion::from_fn(1, 5, |t| Ok(rat(a * t.trace() + 1, 1))).unwrap();
            let g = QExpansion::from_fn(1, 5, |t| Ok(rat(b * t.trace() + 1, 1))).unwrap();
            prop_assert_eq!(congruent_mod(&f, &g, 5, 1).unwrap().holds, congruent_mod(&g, &f, 5, 1).unwrap().holds);
        }
    }
}
