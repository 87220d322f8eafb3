use std::collections::HashMap;
use std::sync::{Mutex, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{QuadCharacter, Rational};

/// B_0, B_1, ..., B_N with B_1 = -1/2; grown on demand.
static TABLE: RwLock<Vec<Rational>> = RwLock::new(Vec::new());

type GeneralizedTable = Mutex<Option<HashMap<(u32, i64, u64), Rational>>>;
static GENERALIZED: GeneralizedTable = Mutex::new(None);

/// Exact Bernoulli number `B_k` (with `B_1 = -1/2`).
pub fn bernoulli(k: u32) -> Rational {
    let k = k as usize;
    {
        let t = TABLE.read().expect("bernoulli table poisoned");
        if k < t.len() {
            return t[k].clone();
        }
    }
    let mut t = TABLE.write().expect("bernoulli table poisoned");
    if k >= t.len() {
        let target = (k + 1).max(2 * t.len()).max(64);
        *t = bernoulli_table(target);
    }
    t[k].clone()
}

/// Bernoulli numbers B_0..B_{len-1} from the tangent numbers
/// (integer-only recurrence, then `B_2n = (-1)^(n-1) 2n T_n / (4^n (4^n - 1))`).
fn bernoulli_table(len: usize) -> Vec<Rational> {
    let half = len / 2 + 1;
    let mut tangent = vec![BigInt::zero(); half + 1];
    if half >= 1 {
        tangent[1] = BigInt::one();
    }
    for k in 2..=half {
        tangent[k] = &tangent[k - 1] * (k as u64 - 1);
    }
    for k in 2..=half {
        for j in k..=half {
            tangent[j] = &tangent[j - 1] * (j as u64 - k as u64) + &tangent[j] * (j as u64 - k as u64 + 2);
        }
    }
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        let b = match i {
            0 => Rational::one(),
            1 => Rational::new(BigInt::from(-1), BigInt::from(2)),
            _ if i % 2 == 1 => Rational::zero(),
            _ => {
                let n = i / 2;
                let four_n = num_traits::pow(BigInt::from(4), n);
                let den = &four_n * (&four_n - 1u32);
                let num = &tangent[n] * BigInt::from(2 * n as u64);
                let v = Rational::new(num, den);
                if n % 2 == 1 {
                    v
                } else {
                    -v
                }
            }
        };
        out.push(b);
    }
    out
}

fn binomials(k: u32) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(k as usize + 1);
    let mut c = BigInt::one();
    row.push(c.clone());
    for i in 0..k {
        c = c * (k - i) / (i + 1);
        row.push(c.clone());
    }
    row
}

/// The Bernoulli polynomial `B_k(x) = Σ C(k,i) B_i x^(k-i)`.
pub fn bernoulli_polynomial(k: u32, x: &Rational) -> Rational {
    let c = binomials(k);
    let mut acc = Rational::zero();
    let mut xp = Rational::one();
    // Horner-free accumulation from the highest power of x downwards.
    let mut terms = Vec::with_capacity(k as usize + 1);
    for _ in 0..=k {
        terms.push(xp.clone());
        xp *= x;
    }
    for i in 0..=k {
        let bi = bernoulli(i);
        if bi.is_zero() {
            continue;
        }
        acc += Rational::from_integer(c[i as usize].clone()) * bi * &terms[(k - i) as usize];
    }
    acc
}

/// Generalized Bernoulli number `B_{k,χ} = F^(k-1) Σ_{a=1}^{F} χ(a) B_k(a/F)`
/// with `F` the modulus of `chi` (the value depends on `chi` as a function,
/// so an imprimitive character gives the imprimitive value).
pub fn generalized_bernoulli(k: u32, chi: &QuadCharacter) -> Rational {
    let key = (k, chi.discriminant(), chi.modulus());
    if let Some(v) = GENERALIZED
        .lock()
        .expect("memo poisoned")
        .as_ref()
        .and_then(|m| m.get(&key))
    {
        return v.clone();
    }
    let value = generalized_bernoulli_uncached(k, chi);
    GENERALIZED
        .lock()
        .expect("memo poisoned")
        .get_or_insert_with(HashMap::new)
        .insert(key, value.clone());
    value
}

fn generalized_bernoulli_uncached(k: u32, chi: &QuadCharacter) -> Rational {
    let f = chi.modulus();
    if f == 1 {
        return bernoulli(k);
    }
    // Power sums S_j = Σ_a χ(a) a^j for j = 0..k.
    let mut sums = vec![BigInt::zero(); k as usize + 1];
    for a in 1..=f {
        let c = chi.eval(a as i64);
        if c == 0 {
            continue;
        }
        let mut pw = BigInt::one();
        for s in sums.iter_mut() {
            if c > 0 {
                *s += &pw;
            } else {
                *s -= &pw;
            }
            pw *= a;
        }
    }
    let binom = binomials(k);
    let fb = BigInt::from(f);
    let mut acc = Rational::zero();
    // F^(i-1) for i = 0 is 1/F.
    let mut fpow = Rational::new(BigInt::one(), fb.clone());
    for i in 0..=k {
        let bi = bernoulli(i);
        if !bi.is_zero() {
            let s = &sums[(k - i) as usize];
            if !s.is_zero() {
                acc += bi * Rational::from_integer(&binom[i as usize] * s) * &fpow;
            }
        }
        fpow *= Rational::from_integer(fb.clone());
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{factorize, rat};

    /// B_k from the defining recurrence Σ_{j<n+1} C(n+1, j) B_j = 0.
    fn recurrence_bernoulli(n: usize) -> Vec<Rational> {
        let mut b = vec![Rational::one()];
        for m in 1..=n {
            let c = binomials(m as u32 + 1);
            let mut s = Rational::zero();
            for (j, bj) in b.iter().enumerate() {
                s += Rational::from_integer(c[j].clone()) * bj;
            }
            b.push(-s / Rational::from_integer(c[m].clone()));
        }
        b
    }

    #[test]
    fn small_values() {
        assert_eq!(bernoulli(0), rat(1, 1));
        assert_eq!(bernoulli(1), rat(-1, 2));
        assert_eq!(bernoulli(3), rat(0, 1));
        assert_eq!(bernoulli(4), rat(-1, 30));
        assert_eq!(bernoulli(12), rat(-691, 2730));
    }

    #[test]
    fn tangent_route_matches_recurrence() {
        let r = recurrence_bernoulli(80);
        for (k, v) in r.iter().enumerate() {
            assert_eq!(&bernoulli(k as u32), v, "B_{k}");
        }
    }

    #[test]
    fn von_staudt_clausen_denominators() {
        for k in (2..=60u32).step_by(2) {
            let den: BigInt = (2..=k as u64 + 1)
                .filter(|&q| factorize(q).len() == 1 && factorize(q)[0].1 == 1 && (k as u64).is_multiple_of(q - 1))
                .map(BigInt::from)
                .product();
            assert_eq!(bernoulli(k).denom(), &den, "k={k}");
        }
    }

    #[test]
    fn large_index_is_consistent_with_kummer() {
        // (1 - p^(k-1)) B_k / k is p-adically continuous on k ≡ 2 (mod p-1).
        let p = 7i64;
        let a = bernoulli(44) / rat(44, 1) * (Rational::one() - Rational::from_integer(num_traits::pow(BigInt::from(p), 43)));
        let b = bernoulli(2) / rat(2, 1) * rat(1 - p, 1);
        let d = a - b;
        let v = crate::exactnum::v_p(&d, 7).unwrap();
        assert!(v.at_least(2), "valuation {v}");
    }

    fn series_oracle(k: u32, chi: &QuadCharacter) -> Rational {
        // Σ_a χ(a) t e^(at) / (e^(Ft) - 1) = Σ B_{k,χ} t^k / k!.
        let f = chi.modulus() as i64;
        let n = k as usize + 1;
        // g(t) = (e^(Ft) - 1) / t = Σ F^(j+1) t^j / (j+1)!
        let mut fact = vec![BigInt::one()];
        for i in 1..=n + 1 {
            let last = fact[i - 1].clone();
            fact.push(last * i);
        }
        let g: Vec<Rational> = (0..n)
            .map(|j| Rational::new(num_traits::pow(BigInt::from(f), j + 1), fact[j + 1].clone()))
            .collect();
        let mut inv = vec![Rational::zero(); n];
        inv[0] = Rational::one() / &g[0];
        for i in 1..n {
            let mut s = Rational::zero();
            for j in 1..=i {
                s += &g[j] * &inv[i - j];
            }
            inv[i] = -s / &g[0];
        }
        let ex: Vec<Rational> = (0..n)
            .map(|j| {
                let mut s = BigInt::zero();
                for a in 1..=f {
                    s += BigInt::from(chi.eval(a)) * num_traits::pow(BigInt::from(a), j);
                }
                Rational::new(s, fact[j].clone())
            })
            .collect();
        let mut c = Rational::zero();
        for j in 0..=k as usize {
            c += &ex[j] * &inv[k as usize - j];
        }
        c * Rational::from_integer(fact[k as usize].clone())
    }

    #[test]
    fn generalized_bernoulli_two_routes() {
        let chis = [
            QuadCharacter::kronecker(-3),
            QuadCharacter::kronecker(-4),
            QuadCharacter::kronecker(5),
            QuadCharacter::kronecker(-7),
            QuadCharacter::kronecker(8),
        ];
        for chi in &chis {
            for k in 1..=12 {
                assert_eq!(generalized_bernoulli(k, chi), series_oracle(k, chi), "k={k} chi={chi:?}");
            }
        }
        assert_eq!(generalized_bernoulli(1, &QuadCharacter::kronecker(-3)), rat(-1, 3));
        assert_eq!(generalized_bernoulli(2, &QuadCharacter::trivial()), rat(1, 6));
        for k in 2..20 {
            assert_eq!(generalized_bernoulli(k, &QuadCharacter::trivial()), bernoulli(k));
        }
    }

    #[test]
    fn bernoulli_polynomial_at_zero_and_one() {
        for k in 2..15 {
            assert_eq!(bernoulli_polynomial(k, &Rational::zero()), bernoulli(k));
            assert_eq!(bernoulli_polynomial(k, &Rational::one()), bernoulli(k));
        }
        // B_2(x) = x^2 - x + 1/6
        let x = rat(1, 3);
        assert_eq!(bernoulli_polynomial(2, &x), rat(1, 9) - rat(1, 3) + rat(1, 6));
    }
}
