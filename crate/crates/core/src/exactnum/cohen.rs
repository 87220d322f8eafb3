use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{bernoulli, divisors, factorize, generalized_bernoulli, mobius, rat, sigma, QuadCharacter, Rational};
use crate::error::{Error, Result};

static MEMO: Mutex<Option<HashMap<(u32, u64), Rational>>> = Mutex::new(None);

/// Split a nonzero integer `D` as `D = d0 · f²` with `d0` a fundamental
/// discriminant (or 1). When `D` is not a discriminant (`D ≡ 2, 3 mod 4`) the
/// returned `d0` is still the discriminant of `Q(√D)` and `f` is 0.
pub fn fundamental_discriminant(d: i64) -> (i64, u64) {
    assert!(d != 0, "fundamental discriminant of 0");
    let mut core: i64 = if d < 0 { -1 } else { 1 };
    let mut f: u64 = 1;
    for (q, e) in factorize(d.unsigned_abs()) {
        if e % 2 == 1 {
            core *= q as i64;
        }
        f *= q.pow(e / 2);
    }
    if core.rem_euclid(4) == 1 {
        (core, f)
    } else if f.is_multiple_of(2) {
        (4 * core, f / 2)
    } else {
        (4 * core, 0)
    }
}

/// Cohen's function `H(r, N)` for `r ≥ 1`: `ζ(1-2r)` at `N = 0`, zero for
/// `N ≡ 1, 2 (mod 4)`, and otherwise
/// `L(1-r, χ_{D0}) Σ_{d | f} μ(d) χ_{D0}(d) d^(r-1) σ_{2r-1}(f/d)` where
/// `-N = D0 f²` with `D0` fundamental.
pub fn cohen_h(r: u32, n: u64) -> Result<Rational> {
    if r == 0 {
        return Err(Error::InvalidArgument("Cohen H(r, N) needs r >= 1".into()));
    }
    if n == 0 {
        return Ok(-bernoulli(2 * r) / rat(2 * r as i64, 1));
    }
    if matches!(n % 4, 1 | 2) {
        return Ok(Rational::zero());
    }
    if let Some(v) = MEMO.lock().expect("memo poisoned").as_ref().and_then(|m| m.get(&(r, n))) {
        return Ok(v.clone());
    }
    let (d0, f) = fundamental_discriminant(-(n as i64));
    let chi = QuadCharacter::kronecker(d0);
    let l_value = -generalized_bernoulli(r, &chi) / rat(r as i64, 1);
    let mut s = BigInt::zero();
    for d in divisors(f) {
        let mu = mobius(d);
        let c = chi.eval(d as i64);
        if mu == 0 || c == 0 {
            continue;
        }
        let term = num_traits::pow(BigInt::from(d), (r - 1) as usize) * sigma(2 * r - 1, f / d);
        if mu * c as i64 > 0 {
            s += term;
        } else {
            s -= term;
        }
    }
    let v = l_value * Rational::from_integer(s);
    MEMO.lock()
        .expect("memo poisoned")
        .get_or_insert_with(HashMap::new)
        .insert((r, n), v.clone());
    Ok(v)
}

/// Hurwitz class number `H(N)` by counting reduced binary forms of
/// discriminant `-N`, forms equivalent to `a(x²+y²)` and `a(x²+xy+y²)`
/// weighted by 1/2 and 1/3. `H(0) = -1/12`.
pub fn hurwitz_class_number_brute(n: u64) -> Rational {
    if n == 0 {
        return rat(-1, 12);
    }
    if matches!(n % 4, 1 | 2) {
        return Rational::zero();
    }
    let n = n as i64;
    let mut total = Rational::zero();
    let mut a = 1i64;
    while 3 * a * a <= n {
        for b in -a + 1..=a {
            let num = b * b + n;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            total += if a == c && b == 0 {
                rat(1, 2)
            } else if a == b && b == c {
                rat(1, 3)
            } else {
                rat(1, 1)
            };
        }
        a += 1;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(cohen_h(1, 3).unwrap(), rat(1, 3));
        assert_eq!(cohen_h(1, 4).unwrap(), rat(1, 2));
        assert_eq!(cohen_h(3, 6).unwrap(), rat(0, 1));
        assert_eq!(cohen_h(2, 5).unwrap(), rat(0, 1));
        assert_eq!(cohen_h(2, 0).unwrap(), rat(1, 120));
        // H(3, 3) = L(-2, χ_{-3}) = -B_{3,χ}/3 = -2/9.
        assert_eq!(cohen_h(3, 3).unwrap(), rat(-2, 9));
        assert!(cohen_h(0, 3).is_err());
    }

    #[test]
    fn r_one_is_hurwitz_class_number() {
        for n in 1..400u64 {
            assert_eq!(cohen_h(1, n).unwrap(), hurwitz_class_number_brute(n), "N={n}");
        }
    }

    #[test]
    fn fundamental_parts() {
        assert_eq!(fundamental_discriminant(-16), (-4, 2));
        assert_eq!(fundamental_discriminant(-3 * 25), (-3, 5));
        assert_eq!(fundamental_discriminant(49), (1, 7));
        assert_eq!(fundamental_discriminant(-7), (-7, 1));
        assert_eq!(fundamental_discriminant(28), (28, 1));
        assert_eq!(fundamental_discriminant(7), (28, 0));
        assert_eq!(fundamental_discriminant(-32), (-8, 2));
    }
}
