//! Exact arithmetic substrate: rationals, p-adic valuations, the Kronecker
//! symbol, Bernoulli numbers and Cohen's function `H(r, N)`.

mod bernoulli;
mod character;
mod cohen;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bernoulli::{bernoulli, bernoulli_polynomial, generalized_bernoulli};
pub use character::QuadCharacter;
pub use cohen::{cohen_h, fundamental_discriminant, hurwitz_class_number_brute};

/// Arbitrary precision rational, always in lowest terms with positive denominator.
pub type Rational = num_rational::BigRational;

/// A p-adic valuation, `+∞` exactly for zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExtendedValuation {
    Finite(i64),
    Infinite,
}

impl ExtendedValuation {
    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedValuation::Infinite)
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            ExtendedValuation::Finite(v) => Some(v),
            ExtendedValuation::Infinite => None,
        }
    }

    /// True when the valuation is at least `m`.
    pub fn at_least(self, m: i64) -> bool {
        match self {
            ExtendedValuation::Finite(v) => v >= m,
            ExtendedValuation::Infinite => true,
        }
    }
}

impl std::ops::Add for ExtendedValuation {
    type Output = ExtendedValuation;
    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtendedValuation::Finite(a), ExtendedValuation::Finite(b)) => {
                ExtendedValuation::Finite(a + b)
            }
            _ => ExtendedValuation::Infinite,
        }
    }
}

impl fmt::Display for ExtendedValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedValuation::Finite(v) => write!(f, "{v}"),
            ExtendedValuation::Infinite => write!(f, "inf"),
        }
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int<T: Into<BigInt>>(n: T) -> Rational {
    Rational::from_integer(n.into())
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// Prime factorization by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (q, e) in factorize(n) {
        let cur = ds.clone();
        let mut pw = 1u64;
        for _ in 0..e {
            pw *= q;
            ds.extend(cur.iter().map(|d| d * pw));
        }
    }
    ds.sort_unstable();
    ds
}

pub fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `σ_k(n) = Σ_{d | n} d^k`.
pub fn sigma(k: u32, n: u64) -> BigInt {
    divisors(n)
        .into_iter()
        .map(|d| num_traits::pow(BigInt::from(d), k as usize))
        .sum()
}

/// Exponent of `p` in a nonzero integer.
pub fn v_p_int(x: &BigInt, p: u64) -> Option<u64> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut x = x.clone();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        x = q;
        v += 1;
    }
}

/// The p-adic valuation normalized by `v_p(p) = 1`.
pub fn v_p(x: &Rational, p: u64) -> Result<ExtendedValuation> {
    require_prime(p)?;
    Ok(v_p_unchecked(x, p))
}

pub(crate) fn v_p_unchecked(x: &Rational, p: u64) -> ExtendedValuation {
    if x.is_zero() {
        return ExtendedValuation::Infinite;
    }
    let a = v_p_int(x.numer(), p).unwrap_or(0) as i64;
    let b = v_p_int(x.denom(), p).unwrap_or(0) as i64;
    ExtendedValuation::Finite(a - b)
}

/// Membership in `Z_(p)`.
pub fn is_p_integral(x: &Rational, p: u64) -> bool {
    v_p_unchecked(x, p).at_least(0)
}

pub fn pow_big(base: u64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(base), e as usize)
}

/// Residue of a p-integral rational modulo `p^m`, in `[0, p^m)`.
pub fn residue_mod_pm(x: &Rational, p: u64, m: u32) -> Option<BigInt> {
    if !is_p_integral(x, p) {
        return None;
    }
    let modulus = pow_big(p, m);
    let den = x.denom().mod_floor(&modulus);
    let inv = mod_inverse(&den, &modulus)?;
    Some((x.numer() * inv).mod_floor(&modulus))
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Rational reconstruction: the unique `a/b` with `|a|, b ≤ sqrt(m/2)` and
/// `a ≡ r b (mod m)`, if it exists.
pub fn rational_reconstruction(r: &BigInt, m: &BigInt) -> Option<Rational> {
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), r.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = r1;
        r1 = r2;
        t0 = t1;
        t1 = t2;
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    if !r1.gcd(&t1).is_one() {
        return None;
    }
    Some(Rational::new(r1, t1))
}

/// The Kronecker symbol `(a/b)` with the standard extension to all integers:
/// `(a/0) = 1` iff `a = ±1`, `(a/-1) = -1` iff `a < 0`, and `(a/2)` equal to
/// 0 for even `a`, 1 for `a ≡ ±1 (mod 8)`, −1 for `a ≡ ±3 (mod 8)`.
pub fn kronecker(a: i64, b: i64) -> i32 {
    if b == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    let mut res = 1;
    let mut b = b as i128;
    if b < 0 {
        b = -b;
        if a < 0 {
            res = -res;
        }
    }
    let v = b.trailing_zeros();
    b >>= v;
    if v % 2 == 1 {
        match (a as i128).rem_euclid(8) {
            1 | 7 => {}
            _ => res = -res,
        }
    }
    res * jacobi((a as i128).rem_euclid(b), b)
}

fn jacobi(mut a: i128, mut n: i128) -> i32 {
    debug_assert!(n > 0 && n % 2 == 1);
    let mut res = 1;
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                res = -res;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            res = -res;
        }
        a %= n;
    }
    if n == 1 {
        res
    } else {
        0
    }
}

/// JSON form of an exact rational: numerator and denominator as decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
}

impl From<&Rational> for RationalJson {
    fn from(x: &Rational) -> Self {
        RationalJson {
            num: x.numer().to_string(),
            den: x.denom().to_string(),
        }
    }
}

impl TryFrom<&RationalJson> for Rational {
    type Error = Error;
    fn try_from(j: &RationalJson) -> Result<Rational> {
        let n: BigInt = j
            .num
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator {:?}", j.num)))?;
        let d: BigInt = j
            .den
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator {:?}", j.den)))?;
        if d.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Rational::new(n, d))
    }
}
