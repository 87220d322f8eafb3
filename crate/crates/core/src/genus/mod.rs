//! Genera of positive definite even forms and the genus cache file.
//!
//! Two forms of equal rank are in the same genus exactly when their
//! discriminant quadratic forms `(Z^r / 2S Z^r, x ↦ x^t (2S)^{-1} x mod 2)`
//! are isometric; the test works one primary component at a time.

mod cache;
mod discriminant;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{QuadCharacter, Rational};
use crate::lambda::HalfIntegralMatrix;

pub use cache::{CachedClass, CachedGenus, GenusCache};
pub use discriminant::DiscriminantForm;

/// A class representative in canonical form with its automorphism count.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassRecord {
    pub rep: HalfIntegralMatrix,
    pub epsilon: u64,
}

/// One genus: its classes, level, primitive character and mass `Σ 1/ε`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenusRecord {
    pub classes: Vec<ClassRecord>,
    pub level: u64,
    /// `η_S` for even rank; `None` for odd rank.
    pub character: Option<QuadCharacter>,
    pub mass: Rational,
}

impl GenusRecord {
    pub fn rank(&self) -> usize {
        self.classes[0].rep.size()
    }

    pub fn det2(&self) -> i128 {
        self.classes[0].rep.det2()
    }

    /// `χ_S` agrees with `χ_p^j` as a primitive character.
    pub fn character_is_legendre_power(&self, p: u64, j: u8) -> bool {
        self.character.is_some_and(|c| c.same_primitive(&QuadCharacter::legendre_power(p, j)))
    }
}

/// Local equivalence at every prime (and over R, automatic for definite forms).
pub fn same_genus(s: &HalfIntegralMatrix, s2: &HalfIntegralMatrix) -> Result<bool> {
    if s.size() != s2.size() {
        return Err(Error::InvalidArgument("forms of different rank".into()));
    }
    if !s.is_positive_definite() || !s2.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    if s.det2() != s2.det2() {
        return Ok(false);
    }
    let a = DiscriminantForm::new(s)?;
    let b = DiscriminantForm::new(s2)?;
    Ok(a.is_isometric(&b))
}

/// Groups pairwise inequivalent classes of one rank into genera, in input order.
pub fn partition_into_genera(classes: &[ClassRecord]) -> Result<Vec<GenusRecord>> {
    let mut groups: Vec<Vec<ClassRecord>> = Vec::new();
    'outer: for c in classes {
        for g in groups.iter_mut() {
            if same_genus(&g[0].rep, &c.rep)? {
                g.push(c.clone());
                continue 'outer;
            }
        }
        groups.push(vec![c.clone()]);
    }
    groups.into_iter().map(genus_record).collect()
}

fn genus_record(classes: Vec<ClassRecord>) -> Result<GenusRecord> {
    let first = &classes[0].rep;
    let level = first.level()?;
    let character = if first.size().is_multiple_of(2) { Some(first.eta()?) } else { None };
    let mut mass = Rational::zero();
    for c in &classes {
        if c.epsilon == 0 {
            return Err(Error::InvalidArgument("automorphism count must be positive".into()));
        }
        mass += Rational::one() / Rational::from_integer(c.epsilon.into());
        if c.rep.level()? != level {
            return Err(Error::InvalidArgument("level differs within a genus".into()));
        }
    }
    Ok(GenusRecord { classes, level, character, mass })
}
