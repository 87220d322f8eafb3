use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::{weight_at, WeightSequence, WeightTarget};
use crate::eisenstein::local_density_coeff;
use crate::error::{Error, Result};
use crate::exactnum::{residue_mod_pm, v_p_unchecked, ExtendedValuation, Rational, RationalJson};
use crate::fourier::{primitive_coeff_at, window_indices, QExpansion};
use crate::lambda::HalfIntegralMatrix;

pub(crate) fn residues_as_strings<S: Serializer>(v: &[Option<BigInt>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let strs: Vec<Option<String>> = v.iter().map(|x| x.as_ref().map(|b| b.to_string())).collect();
    strs.serialize(s)
}

fn rationals_as_json<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    let js: Vec<RationalJson> = v.iter().map(RationalJson::from).collect();
    js.serialize(s)
}

/// One index of a limit window: the residue of `a_{k(m)}(T)` mod `p^{b(m)}`
/// per rung, and `v_p(a_{k(m+1)}(T) − a_{k(m)}(T))` between rungs.
#[derive(Clone, Debug, Serialize)]
pub struct LimitEntry {
    pub index: HalfIntegralMatrix,
    #[serde(serialize_with = "residues_as_strings")]
    pub residues: Vec<Option<BigInt>>,
    pub certificates: Vec<ExtendedValuation>,
    /// Non-integral coefficient or a certificate that drops.
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitWindow {
    pub target: WeightTarget,
    pub schedule: Vec<u32>,
    pub weights: Vec<u64>,
    pub degree: usize,
    pub bound: i64,
    pub entries: Vec<LimitEntry>,
}

impl LimitWindow {
    /// Residue at rung `m` (1-based).
    pub fn residue(&self, t: &HalfIntegralMatrix, m: u32) -> Option<&BigInt> {
        let e = self.entries.iter().find(|e| &e.index == t)?;
        e.residues.get((m as usize).checked_sub(1)?)?.as_ref()
    }

    pub fn flagged(&self) -> Vec<&HalfIntegralMatrix> {
        self.entries.iter().filter(|e| e.flagged).map(|e| &e.index).collect()
    }
}

/// Residue ladders of `E_{k(m)}^{(n)}` on the trace window `B`, with
/// `source(k, n, B)` producing each window.
pub fn empirical_limit<F>(seq: &WeightSequence, n: usize, bound: i64, source: F) -> Result<LimitWindow>
where
    F: Fn(u64, usize, i64) -> Result<QExpansion> + Sync,
{
    let rungs = seq.len() as u32;
    let weights: Vec<u64> = (1..=rungs).map(|m| weight_at(seq, m)).collect::<Result<_>>()?;
    let windows: Vec<QExpansion> = weights.par_iter().map(|&k| source(k, n, bound)).collect::<Result<_>>()?;
    let p = seq.target.p;
    let mut entries = Vec::new();
    for t in window_indices(n, bound)?.iter() {
        let values: Vec<Rational> = windows.iter().map(|w| w.coeff(t)).collect::<Result<_>>()?;
        let residues: Vec<Option<BigInt>> =
            values.iter().zip(&seq.schedule).map(|(v, &b)| residue_mod_pm(v, p, b)).collect();
        let certificates: Vec<ExtendedValuation> = values.windows(2).map(|w| v_p_unchecked(&(&w[1] - &w[0]), p)).collect();
        let flagged = residues.iter().any(Option::is_none) || certificates.windows(2).any(|c| c[1] < c[0]);
        entries.push(LimitEntry { index: t.clone(), residues, certificates, flagged });
    }
    Ok(LimitWindow { target: seq.target, schedule: seq.schedule.clone(), weights, degree: n, bound, entries })
}

/// Ladder of primitive coefficients `a*_{k(m)}(S)` of the degree-`rank(S)`
/// Eisenstein series.
#[derive(Clone, Debug, Serialize)]
pub struct DirectLadder {
    pub form: HalfIntegralMatrix,
    pub weights: Vec<u64>,
    #[serde(serialize_with = "rationals_as_json")]
    pub values: Vec<Rational>,
    #[serde(serialize_with = "residues_as_strings")]
    pub residues: Vec<Option<BigInt>>,
    pub valuations: Vec<ExtendedValuation>,
}

impl DirectLadder {
    /// Every residue is defined and zero.
    pub fn vanishes(&self) -> bool {
        self.residues.iter().all(|r| r.as_ref().is_some_and(|x| x == &BigInt::from(0)))
    }
}

pub fn direct_limit_coefficient(s: &HalfIntegralMatrix, seq: &WeightSequence) -> Result<DirectLadder> {
    let r = s.size() as u64;
    if r != 2 * seq.target.k {
        return Err(Error::InvalidArgument(format!("form of rank {r} for target weight {}", seq.target.k)));
    }
    if r > 4 {
        return Err(Error::OutOfScale(format!("rank {r} exceeds the local-density range")));
    }
    let rungs = seq.len() as u32;
    let weights: Vec<u64> = (1..=rungs).map(|m| weight_at(seq, m)).collect::<Result<_>>()?;
    let values: Vec<Rational> = weights
        .par_iter()
        .map(|&k| {
            let k = u32::try_from(k).map_err(|_| Error::OutOfScale(format!("weight {k}")))?;
            primitive_coeff_at(s, &|t| local_density_coeff(t, k))
        })
        .collect::<Result<_>>()?;
    let p = seq.target.p;
    let residues = values.iter().zip(&seq.schedule).map(|(v, &b)| residue_mod_pm(v, p, b)).collect();
    let valuations = values.iter().map(|v| v_p_unchecked(v, p)).collect();
    Ok(DirectLadder { form: s.clone(), weights, values, residues, valuations })
}
