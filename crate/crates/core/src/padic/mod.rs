//! Weight sequences converging in `Z_p × Z/(p−1)Z`, p-adic limits of
//! Eisenstein windows, and the genus-theta fit with held-out verification.

mod fit;
mod limit;
mod linalg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::require_prime;

pub use fit::{
    audit_singular, candidate_genera, fit_and_verify, fit_and_verify_with, AuditEntry, FitConfig, FittedCoefficient, GenusEntry, Residual,
    RungReport, SplitRule, UpCheck, VerificationReport,
};
pub use limit::{direct_limit_coefficient, empirical_limit, DirectLadder, LimitEntry, LimitWindow};

/// The limit weight `(k, k + j(p−1)/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightTarget {
    pub p: u64,
    pub k: u64,
    pub j: u8,
}

impl WeightTarget {
    /// Checks parity constraints, and `p > 2k + 1` unless `exploratory`.
    pub fn new(p: u64, k: u64, j: u8, exploratory: bool) -> Result<Self> {
        require_prime(p)?;
        if p == 2 {
            return Err(Error::InvalidArgument("p must be odd".into()));
        }
        if k == 0 {
            return Err(Error::InvalidWeight("k must be positive".into()));
        }
        match j {
            0 if !k.is_multiple_of(2) => return Err(Error::InvalidWeight(format!("j = 0 needs even k, got {k}"))),
            1 if k % 2 != ((p - 1) / 2) % 2 => {
                return Err(Error::InvalidWeight(format!("j = 1 needs k ≡ (p−1)/2 mod 2, got k = {k}, p = {p}")))
            }
            0 | 1 => {}
            _ => return Err(Error::InvalidArgument(format!("j must be 0 or 1, got {j}"))),
        }
        if !exploratory && p <= 2 * k + 1 {
            return Err(Error::InvalidArgument(format!("p = {p} must exceed 2k + 1 = {}", 2 * k + 1)));
        }
        Ok(WeightTarget { p, k, j })
    }

    /// Whether `p > 2k + 1`.
    pub fn within_theorem(&self) -> bool {
        self.p > 2 * self.k + 1
    }

    /// Minimal positive `a ≡ (p−1)/2^j (mod p−1)`.
    pub fn step(&self) -> u64 {
        (self.p - 1) >> self.j
    }
}

/// `k_j(m) = k + a · p^{b(m)}` for a strictly increasing schedule `b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightSequence {
    pub target: WeightTarget,
    pub schedule: Vec<u32>,
}

impl WeightSequence {
    pub fn new(target: WeightTarget, schedule: Vec<u32>) -> Result<Self> {
        if schedule.is_empty() || schedule[0] == 0 || schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!("schedule {schedule:?} must be strictly increasing and positive")));
        }
        Ok(WeightSequence { target, schedule })
    }

    /// The default schedule `b(m) = m` for `m = 1..=m_max`.
    pub fn linear(target: WeightTarget, m_max: u32) -> Result<Self> {
        WeightSequence::new(target, (1..=m_max).collect())
    }

    pub fn len(&self) -> usize {
        self.schedule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schedule.is_empty()
    }

    /// `b(m)` for `1 ≤ m ≤ len`.
    pub fn b(&self, m: u32) -> Result<u32> {
        self.schedule
            .get((m as usize).wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("rung {m} outside schedule of length {}", self.len())))
    }
}

/// `k_j(m)`.
pub fn weight_at(seq: &WeightSequence, m: u32) -> Result<u64> {
    let b = seq.b(m)?;
    let t = &seq.target;
    t.p.checked_pow(b)
        .and_then(|pb| pb.checked_mul(t.step()))
        .and_then(|x| x.checked_add(t.k))
        .ok_or_else(|| Error::OutOfScale(format!("weight overflow at b = {b}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let t = WeightTarget::new(7, 2, 0, false).unwrap();
        let seq = WeightSequence::linear(t, 3).unwrap();
        assert_eq!(weight_at(&seq, 1).unwrap(), 44);
        assert_eq!(weight_at(&seq, 2).unwrap(), 296);
        assert_eq!(weight_at(&seq, 3).unwrap(), 2060);
        assert!(weight_at(&seq, 4).is_err());
        assert!(weight_at(&seq, 0).is_err());
        // The formula alone; this target fails the parity rule and yields odd weights.
        let t1 = WeightTarget { p: 11, k: 4, j: 1 };
        assert!(WeightTarget::new(11, 4, 1, true).is_err());
        let s1 = WeightSequence::new(t1, vec![1, 2]).unwrap();
        assert_eq!(weight_at(&s1, 2).unwrap(), 4 + 5 * 121);
        let t2 = WeightTarget::new(13, 4, 1, false).unwrap();
        assert_eq!(weight_at(&WeightSequence::new(t2, vec![1]).unwrap(), 1).unwrap(), 4 + 6 * 13);
    }

    #[test]
    fn validation() {
        assert!(WeightTarget::new(7, 3, 0, true).is_err());
        assert!(WeightTarget::new(7, 2, 1, true).is_err());
        assert!(WeightTarget::new(7, 3, 1, false).is_err());
        assert!(WeightTarget::new(7, 3, 1, true).is_ok());
        assert!(WeightTarget::new(5, 2, 0, false).is_err());
        assert!(WeightTarget::new(5, 2, 0, true).is_ok());
        assert!(WeightTarget::new(9, 2, 0, true).is_err());
        assert!(WeightSequence::new(WeightTarget::new(7, 2, 0, false).unwrap(), vec![2, 2]).is_err());
    }

    proptest! {
        #[test]
        fn weights_converge_in_both_components(pi in 0usize..5, k in 1u64..6, j in 0u8..2, b in 1u32..4) {
            let p = [7u64, 11, 13, 17, 19][pi];
            let Ok(t) = WeightTarget::new(p, k, j, true) else { return Ok(()) };
            let seq = WeightSequence::new(t, vec![b]).unwrap();
            let w = weight_at(&seq, 1).unwrap();
            prop_assert_eq!((w - k) % p.pow(b), 0);
            prop_assert_eq!((w - k) % (p - 1), ((p - 1) >> j) % (p - 1));
            prop_assert_eq!(w % 2, 0);
        }
    }
}
