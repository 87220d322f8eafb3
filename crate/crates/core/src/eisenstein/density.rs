use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{
    bernoulli, factorize, fundamental_discriminant, generalized_bernoulli, kronecker, rat, rat_int, QuadCharacter,
    Rational,
};
use crate::lambda::{hnf_matrices, minkowski_reduce, HalfIntegralMatrix};

/// Coefficients of a polynomial, lowest degree first.
type Poly = Vec<Rational>;

static FACTORS: Mutex<Option<HashMap<(HalfIntegralMatrix, u64), Poly>>> = Mutex::new(None);

fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn add(a: &[Rational], b: &[Rational]) -> Poly {
    let mut out = vec![Rational::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] += c;
    }
    out
}

fn mul(a: &[Rational], b: &[Rational]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `num / den`, or `None` when the remainder is nonzero.
fn div_exact(num: &[Rational], den: &[Rational]) -> Option<Poly> {
    let den = trim(den.to_vec());
    let mut rem = trim(num.to_vec());
    let lead = den.last()?.clone();
    if rem.len() < den.len() {
        return rem.is_empty().then(Vec::new);
    }
    let mut quot = vec![Rational::zero(); rem.len() - den.len() + 1];
    while rem.len() >= den.len() {
        let shift = rem.len() - den.len();
        let c = rem.last().unwrap() / &lead;
        for (i, d) in den.iter().enumerate() {
            rem[shift + i] -= &c * d;
        }
        quot[shift] = c;
        rem.pop();
        rem = trim(rem);
    }
    rem.is_empty().then_some(quot)
}

fn eval(p: &[Rational], x: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

fn q_pow(q: u64, e: i64) -> Rational {
    let base = rat_int(BigInt::from(q).pow(e.unsigned_abs() as u32));
    if e >= 0 {
        base
    } else {
        Rational::one() / base
    }
}

/// Symmetric matrix mod an odd `q` brought to diagonal form by congruence.
fn diagonalize_mod(mut m: Vec<i64>, n: usize, q: i64) -> Vec<i64> {
    let md = |x: i64| x.rem_euclid(q);
    for x in m.iter_mut() {
        *x = md(*x);
    }
    let inv = |a: i64| crate::exactnum::mod_inverse(&BigInt::from(a), &BigInt::from(q)).map(|v| i64::try_from(v).unwrap()).unwrap();
    let mut diag = Vec::new();
    let mut live: Vec<usize> = (0..n).collect();
    while !live.is_empty() {
        let pivot = live.iter().copied().find(|&i| m[i * n + i] != 0);
        let p = match pivot {
            Some(p) => p,
            None => {
                let pair = live
                    .iter()
                    .flat_map(|&i| live.iter().map(move |&j| (i, j)))
                    .find(|&(i, j)| i != j && m[i * n + j] != 0);
                let Some((i, j)) = pair else { break };
                // e_i ← e_i + e_j makes the diagonal entry 2 m_ij.
                for c in 0..n {
                    m[i * n + c] = md(m[i * n + c] + m[j * n + c]);
                }
                for r in 0..n {
                    m[r * n + i] = md(m[r * n + i] + m[r * n + j]);
                }
                i
            }
        };
        let a = m[p * n + p];
        let ai = inv(a);
        live.retain(|&i| i != p);
        for &i in &live {
            let f = md(m[i * n + p] * ai);
            if f == 0 {
                continue;
            }
            for c in 0..n {
                m[i * n + c] = md(m[i * n + c] - f * m[p * n + c]);
            }
            for r in 0..n {
                m[r * n + i] = md(m[r * n + i] - f * m[r * n + p]);
            }
        }
        diag.push(a);
    }
    diag
}

/// Vectors of a nondegenerate quadratic space over `F_q` of dimension `2k − i`
/// with `Q = a`, as a polynomial in `Y = q^k`. `rel` fixes the discriminant
/// as `(−1)^k · rel` up to squares.
fn value_count(q: i64, i: i64, rel: i64, a: i64) -> Poly {
    let top = q_pow(q as u64, -i - 1);
    let leg = |x: i64| kronecker(x.rem_euclid(q), q) as i64;
    let sgn = |e: i64| if e % 2 == 0 { 1 } else { -1 };
    let mid = if i % 2 == 0 {
        let eps = leg(sgn(i / 2) * rel);
        let c = q_pow(q as u64, -i / 2 - 1);
        if a == 0 {
            c * rat(eps * (q - 1), 1)
        } else {
            c * rat(-eps, 1)
        }
    } else if a == 0 {
        Rational::zero()
    } else {
        q_pow(q as u64, -(i + 1) / 2) * rat(leg(sgn((i + 1) / 2) * a * rel), 1)
    };
    vec![Rational::zero(), mid, top]
}

/// Injective `X : F_q^n → H_k` with `H_k[X] ≡ T (mod q)`, odd `q`, as a
/// polynomial in `Y = q^k`.
fn primitive_count_odd(t: &HalfIntegralMatrix, q: i64) -> Poly {
    let n = t.size();
    let inv2 = (q + 1) / 2;
    let diag: Vec<i64> = diagonalize_mod(t.entries().to_vec(), n, q).into_iter().map(|d| d * inv2 % q).collect();
    let mut poly = vec![Rational::one()];
    let mut rel = 1i64;
    let mut i = 0i64;
    for &a in &diag {
        poly = mul(&poly, &value_count(q, i, rel, a));
        rel = (rel * a).rem_euclid(q);
        i += 1;
    }
    for l in 0..(n - diag.len()) as i64 {
        let mut f = value_count(q, i, rel, 0);
        f[0] -= Rational::one();
        let f: Poly = f.iter().map(|c| c * q_pow(q as u64, l)).collect();
        poly = mul(&poly, &f);
        i += 2;
        rel = (-rel).rem_euclid(q);
    }
    poly
}

/// A quadratic form on `F_2^n`: `Q(x) = Σ d_i x_i + Σ_{i<j} b_ij x_i x_j`.
#[derive(Clone)]
struct BinaryForm {
    n: usize,
    d: Vec<u8>,
    b: Vec<u8>,
}

impl BinaryForm {
    fn of(t: &HalfIntegralMatrix) -> Self {
        let n = t.size();
        let d = (0..n).map(|i| ((t.two_t(i, i) / 2).rem_euclid(2)) as u8).collect();
        let b = t.entries().iter().map(|x| x.rem_euclid(2) as u8).collect();
        BinaryForm { n, d, b }
    }

    fn polar(&self, x: u32, y: u32) -> u8 {
        let mut s = 0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j && x >> i & 1 == 1 && y >> j & 1 == 1 {
                    s ^= self.b[i * self.n + j];
                }
            }
        }
        s
    }

    fn value(&self, x: u32) -> u8 {
        let mut s = 0;
        for i in 0..self.n {
            if x >> i & 1 == 1 {
                s ^= self.d[i];
                for j in i + 1..self.n {
                    if x >> j & 1 == 1 {
                        s ^= self.b[i * self.n + j];
                    }
                }
            }
        }
        s
    }

    /// The form restricted to the span of `basis`.
    fn restrict(&self, basis: &[u32]) -> Self {
        let m = basis.len();
        let d = basis.iter().map(|&v| self.value(v)).collect();
        let mut b = vec![0; m * m];
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    b[i * m + j] = self.polar(basis[i], basis[j]);
                }
            }
        }
        BinaryForm { n: m, d, b }
    }

    /// All `X : F_2^n → H_k` with `H_k[X] = Q`, as a polynomial in `Y = 2^k`,
    /// by Fourier inversion over `Sym_n(F_2)`.
    fn all_count(&self) -> Poly {
        let n = self.n;
        let slots: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let mut poly = vec![Rational::zero(); 2 * n + 1];
        for mask in 0u32..(1 << slots.len()) {
            let mut rows = vec![0u32; n];
            let mut pair = 0u8;
            for (s, &(i, j)) in slots.iter().enumerate() {
                if mask >> s & 1 == 1 {
                    rows[i] |= 1 << j;
                    rows[j] |= 1 << i;
                    pair ^= if i == j { self.d[i] } else { self.b[i * n + j] };
                }
            }
            let deg = 2 * n - rank_f2(rows);
            poly[deg] += rat(if pair == 0 { 1 } else { -1 }, 1);
        }
        let scale = q_pow(2, -((n * (n + 1) / 2) as i64));
        poly.iter().map(|c| c * &scale).collect()
    }

    /// Injective `X` by Möbius inversion over subspaces of the radical.
    fn primitive_count(&self) -> Poly {
        let n = self.n;
        let full = 1u32 << n;
        let radical: Vec<u32> = (1..full)
            .filter(|&x| self.value(x) == 0 && (0..n).all(|j| self.polar(x, 1 << j) == 0))
            .collect();
        let mut seen = std::collections::BTreeSet::new();
        let mut stack = vec![vec![0u32]];
        let mut poly = Vec::new();
        while let Some(space) = stack.pop() {
            let key: Vec<u32> = {
                let mut s = space.clone();
                s.sort_unstable();
                s
            };
            if !seen.insert(key) {
                continue;
            }
            let dim = space.len().trailing_zeros() as usize;
            let complement = complement_basis(&space, n);
            let sign = if dim.is_multiple_of(2) { 1 } else { -1 };
            let mu = rat(sign * (1i64 << (dim * dim.saturating_sub(1) / 2)), 1);
            let term: Poly = self.restrict(&complement).all_count().iter().map(|c| c * &mu).collect();
            poly = add(&poly, &term);
            for &v in &radical {
                if !space.contains(&v) {
                    let mut bigger = space.clone();
                    bigger.extend(space.iter().map(|s| s ^ v));
                    stack.push(bigger);
                }
            }
        }
        poly
    }
}

fn rank_f2(mut rows: Vec<u32>) -> usize {
    let mut rank = 0;
    for bit in 0..32 {
        let Some(p) = rows.iter().position(|r| r >> bit & 1 == 1) else { continue };
        let pivot = rows.swap_remove(p);
        for r in rows.iter_mut() {
            if *r >> bit & 1 == 1 {
                *r ^= pivot;
            }
        }
        rank += 1;
    }
    rank
}

/// Standard basis vectors spanning a complement of `space`.
fn complement_basis(space: &[u32], n: usize) -> Vec<u32> {
    let mut span: Vec<u32> = space.to_vec();
    let mut out = Vec::new();
    for i in 0..n {
        let e = 1u32 << i;
        if !span.contains(&e) {
            out.push(e);
            let shifted: Vec<u32> = span.iter().map(|s| s ^ e).collect();
            span.extend(shifted);
        }
    }
    out
}

/// Whether `T[G^{-1}]` is half-integral over `Z_q`, returned as its `2T`.
fn quotient(t: &HalfIntegralMatrix, g: &crate::lambda::IntMatrix, q: u64) -> Option<HalfIntegralMatrix> {
    let n = t.size();
    let det = g.det() as i64;
    let dd = det * det;
    let a = g.adjugate();
    let num = a.transpose().mul(&t.gram()).mul(&a);
    let data = num.data();
    for i in 0..n {
        for j in 0..n {
            let need = if i == j && q == 2 { 2 * dd } else { dd };
            if data[i * n + j] % need != 0 {
                return None;
            }
        }
    }
    HalfIntegralMatrix::new(n, data.iter().map(|x| x / dd).collect()).ok()
}

/// The local polynomial `F_q(T, X)` with `b_q(T, k) = γ_q(T, q^{-k}) F_q(T, q^{-k})`.
pub fn local_factor(t: &HalfIntegralMatrix, q: u64) -> Result<Vec<Rational>> {
    crate::exactnum::require_prime(q)?;
    if !t.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let key = (minkowski_reduce(t)?, q);
    if let Some(p) = FACTORS.lock().expect("memo poisoned").as_ref().and_then(|m| m.get(&key)) {
        return Ok(p.clone());
    }
    let f = local_factor_uncached(&key.0, q)?;
    FACTORS.lock().expect("memo poisoned").get_or_insert_with(HashMap::new).insert(key, f.clone());
    Ok(f)
}

fn local_factor_uncached(t: &HalfIntegralMatrix, q: u64) -> Result<Poly> {
    let n = t.size();
    let det2 = t.det2().unsigned_abs();
    let mut v = 0u32;
    let mut rest = det2;
    while rest.is_multiple_of(q as u128) {
        rest /= q as u128;
        v += 1;
    }
    let scale = q_pow(q, (n * (n + 1) / 2) as i64);
    let mut b: Poly = Vec::new();
    for j in 0..=v / 2 {
        let shift = q_pow(q, j as i64 * (n as i64 + 1)) * &scale;
        for g in hnf_matrices(n, q.pow(j)) {
            let Some(tq) = quotient(t, &g, q) else { continue };
            let count = if q == 2 { BinaryForm::of(&tq).primitive_count() } else { primitive_count_odd(&tq, q as i64) };
            // Y^i with Y = q^k becomes X^{2n+2j-i}.
            let mut term = vec![Rational::zero(); 2 * n + 2 * j as usize + 1];
            for (i, c) in count.iter().enumerate() {
                term[2 * n + 2 * j as usize - i] += c * &shift;
            }
            b = add(&b, &term);
        }
    }
    let mut den = vec![Rational::one(), -Rational::one()];
    for i in 1..=(n / 2) as i64 {
        den = mul(&den, &[Rational::one(), Rational::zero(), -q_pow(q, 2 * i)]);
    }
    if n.is_multiple_of(2) {
        let chi = QuadCharacter::kronecker(fundamental_discriminant(signed_disc(t)).0).eval(q as i64);
        b = mul(&b, &[Rational::one(), -q_pow(q, n as i64 / 2) * rat(chi as i64, 1)]);
    }
    div_exact(&b, &den)
        .map(trim)
        .ok_or_else(|| Error::Unstable(format!("local factor of {t} at {q} is not a polynomial")))
}

/// `(−1)^{n/2} det(2T)`.
fn signed_disc(t: &HalfIntegralMatrix) -> i64 {
    let d = t.det2() as i64;
    if (t.size() / 2).is_multiple_of(2) {
        d
    } else {
        -d
    }
}

/// `ζ(1 − m) = −B_m / m`.
fn zeta_neg(m: u32) -> Rational {
    -bernoulli(m) / rat(m as i64, 1)
}

/// Siegel's product formula without the range check on `k`.
pub(crate) fn siegel_coefficient(t: &HalfIntegralMatrix, k: u32) -> Result<Rational> {
    let n = t.size();
    let half = n / 2;
    let mut value = rat(1i64 << n.div_ceil(2), 1) / zeta_neg(k);
    for i in 1..=half as u32 {
        value /= zeta_neg(2 * k - 2 * i);
    }
    if n.is_multiple_of(2) {
        let chi = QuadCharacter::kronecker(fundamental_discriminant(signed_disc(t)).0);
        let m = k - half as u32;
        value *= -generalized_bernoulli(m, &chi) / rat(m as i64, 1);
    }
    let x = |q: u64| q_pow(q, k as i64 - n as i64 - 1);
    for (q, _) in factorize(t.det2().unsigned_abs() as u64) {
        value *= eval(&local_factor(t, q)?, &x(q));
    }
    Ok(value)
}

/// `a_k^{(r)}(T)` for positive definite `T` of size `r ≤ 4` from the product
/// of local densities.
pub fn local_density_coeff(t: &HalfIntegralMatrix, k: u32) -> Result<Rational> {
    let r = t.size();
    if r == 0 || r > 4 {
        return Err(Error::InvalidArgument(format!("rank {r} outside 1..=4")));
    }
    if k % 2 == 1 || k as usize <= r + 1 {
        return Err(Error::InvalidWeight(format!("weight {k} must be even and exceed {}", r + 1)));
    }
    siegel_coefficient(t, k)
}
