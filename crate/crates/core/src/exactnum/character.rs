use serde::{Deserialize, Serialize};

use super::{fundamental_discriminant, kronecker};

/// A quadratic Dirichlet character `d ↦ (D/d)` (Kronecker symbol) restricted
/// to integers coprime to `modulus`.
///
/// `discriminant` is the integer `D` on top of the Kronecker symbol; the
/// character is primitive exactly when `D` is a fundamental discriminant (or 1)
/// and `modulus = |D|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadCharacter {
    discriminant: i64,
    modulus: u64,
}

impl QuadCharacter {
    /// The trivial character mod 1.
    pub fn trivial() -> Self {
        QuadCharacter { discriminant: 1, modulus: 1 }
    }

    /// The trivial character mod `n` (`1_N`).
    pub fn trivial_mod(n: u64) -> Self {
        QuadCharacter { discriminant: 1, modulus: n.max(1) }
    }

    /// `d ↦ (D/d)` with modulus `|D|`.
    pub fn kronecker(discriminant: i64) -> Self {
        QuadCharacter {
            discriminant,
            modulus: discriminant.unsigned_abs().max(1),
        }
    }

    /// The Legendre character `(·/p)` of an odd prime, written as the
    /// Kronecker character of `p* = (-1)^((p-1)/2) p`.
    pub fn legendre(p: u64) -> Self {
        let star = if p % 4 == 1 { p as i64 } else { -(p as i64) };
        QuadCharacter::kronecker(star)
    }

    /// `χ_p^j` for `j ∈ {0, 1}`: trivial mod p or the Legendre character.
    pub fn legendre_power(p: u64, j: u8) -> Self {
        if j.is_multiple_of(2) {
            QuadCharacter::trivial_mod(p)
        } else {
            QuadCharacter::legendre(p)
        }
    }

    pub fn discriminant(&self) -> i64 {
        self.discriminant
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn eval(&self, d: i64) -> i32 {
        if num_integer::gcd(d.unsigned_abs(), self.modulus) != 1 {
            return 0;
        }
        kronecker(self.discriminant, d)
    }

    /// The primitive character inducing this one.
    pub fn primitive(&self) -> Self {
        let (d0, _) = fundamental_discriminant(self.discriminant);
        QuadCharacter::kronecker(d0)
    }

    pub fn conductor(&self) -> u64 {
        self.primitive().modulus
    }

    pub fn is_trivial(&self) -> bool {
        self.primitive().discriminant == 1
    }

    /// Equality of the underlying primitive characters.
    pub fn same_primitive(&self, other: &QuadCharacter) -> bool {
        self.primitive() == other.primitive()
    }

    /// `χ(-1)`.
    pub fn parity(&self) -> i32 {
        if self.discriminant < 0 {
            -1
        } else {
            1
        }
    }
}
