//! Fourier coefficients of the level-one Siegel–Eisenstein series.
//!
//! Degrees 1 and 2 use closed forms; `local_density_coeff` evaluates the
//! product of local densities for any positive definite index of size ≤ 4.

mod density;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::exactnum::{bernoulli, cohen_h, divisors, rat, rat_int, sigma, Rational};
use crate::fourier::QExpansion;
use crate::lambda::HalfIntegralMatrix;

pub use density::{local_density_coeff, local_factor};

fn check_weight(k: u32, n: usize) -> Result<()> {
    if k % 2 == 1 {
        return Err(Error::InvalidWeight(format!("weight {k} is odd")));
    }
    if k as usize <= n + 1 {
        return Err(Error::InvalidWeight(format!("weight {k} must exceed {}", n + 1)));
    }
    Ok(())
}

/// `−2k/B_k · σ_{k−1}(t)` for `t ≥ 1`.
pub fn degree_one_coeff(k: u32, t: u64) -> Rational {
    rat(-2 * k as i64, 1) / bernoulli(k) * rat_int(sigma(k - 1, t))
}

/// Rank-2 coefficient `2/(ζ(1−k)ζ(3−2k)) Σ_{d | c(T)} d^{k−1} H(k−1, det(2T)/d²)`.
pub fn degree_two_coeff(k: u32, t: &HalfIntegralMatrix) -> Result<Rational> {
    if t.size() != 2 || !t.is_positive_definite() {
        return Err(Error::InvalidArgument(format!("{t} is not a positive definite binary form")));
    }
    let content = (t.two_t(0, 0) / 2).gcd(&t.two_t(0, 1)).gcd(&(t.two_t(1, 1) / 2)) as u64;
    let disc = t.det2() as u64;
    let mut s = Rational::from_integer(0.into());
    for d in divisors(content) {
        let h = cohen_h(k - 1, disc / (d * d))?;
        s += rat_int(num_bigint::BigInt::from(d).pow(k - 1)) * h;
    }
    let zeta = |m: u32| -bernoulli(m) / rat(m as i64, 1);
    Ok(rat(2, 1) / (zeta(k) * zeta(2 * k - 2)) * s)
}

/// `E_k^{(n)}` on the trace window `B`, for `n ∈ {1, 2}`.
pub fn eisenstein_qexp(k: u32, n: usize, bound: i64) -> Result<QExpansion> {
    if !(1..=2).contains(&n) {
        return Err(Error::InvalidArgument(format!("degree {n} outside 1..=2")));
    }
    check_weight(k, n)?;
    QExpansion::from_fn(n, bound, |t| match t.rank() {
        0 => Ok(rat(1, 1)),
        1 => Ok(degree_one_coeff(k, t.trace() as u64)),
        _ => degree_two_coeff(k, t),
    })
}

/// `a_k^{(n)}(T)` for any index `T ⊕ 0` with positive definite block of size
/// at most 4, through the local-density path.
pub fn coefficient(k: u32, t: &HalfIntegralMatrix) -> Result<Rational> {
    let r = t.rank();
    if r == 0 {
        return Ok(rat(1, 1));
    }
    let (c, _) = crate::lambda::canonical_with_transform(t)?;
    local_density_coeff(&c.leading_block(r), k)
}
