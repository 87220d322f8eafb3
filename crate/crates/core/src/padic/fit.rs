use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use super::linalg::{solve_mod_pm, solve_rational, ModPBasis};
use super::{weight_at, WeightSequence, WeightTarget};
use crate::eisenstein::eisenstein_qexp;
use crate::error::{Error, Result};
use crate::exactnum::{pow_big, residue_mod_pm, v_p_unchecked, ExtendedValuation, Rational, RationalJson};
use crate::fourier::{check_weight_rank_congruence, congruent_mod, mod_pm_singular_rank, u_p, window_indices, QExpansion};
use crate::genus::{partition_into_genera, ClassRecord, GenusRecord};
use crate::lambda::{enumerate_classes, minkowski_reduce, HalfIntegralMatrix};
use crate::theta::genus_theta;

/// How window indices are split into training and held-out sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SplitRule {
    /// Indices in trace order, each kept when it raises the rank mod `p`.
    SmallestTrace,
    /// A fixed training set of exactly one index per genus.
    Explicit(Vec<HalfIntegralMatrix>),
}

#[derive(Clone, Debug, Serialize)]
pub struct FitConfig {
    pub target: WeightTarget,
    pub degree: usize,
    pub bound: i64,
    pub schedule: Vec<u32>,
    pub split: SplitRule,
    pub exploratory: bool,
}

impl FitConfig {
    /// `b(m) = m` for `m = 1..=m_max`, smallest-trace split.
    pub fn new(target: WeightTarget, degree: usize, bound: i64, m_max: u32) -> Self {
        FitConfig {
            target,
            degree,
            bound,
            schedule: (1..=m_max).collect(),
            split: SplitRule::SmallestTrace,
            exploratory: !target.within_theorem(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GenusEntry {
    pub classes: Vec<ClassRecord>,
    pub level: u64,
    /// Discriminant of the primitive character.
    pub character: Option<i64>,
    pub mass: RationalJson,
}

/// Coefficient of one genus theta series in the fit of `p^{-ν̂} E`.
#[derive(Clone, Debug, Serialize)]
pub struct FittedCoefficient {
    pub genus: usize,
    pub exact: RationalJson,
    pub residue: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub index: HalfIntegralMatrix,
    pub valuation: ExtendedValuation,
}

#[derive(Clone, Debug, Serialize)]
pub struct UpCheck {
    pub bound: i64,
    pub holds: bool,
    pub witness: Option<HalfIntegralMatrix>,
}

/// One exponent `m'` at which a window was tested for singularity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditEntry {
    pub exponent: u32,
    pub rank: Option<usize>,
    /// `2k − r ≡ 0 mod (p−1)p^{m'−1}` when a rank was detected.
    pub consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RungReport {
    pub m: u32,
    pub weight: u64,
    pub b: u32,
    pub target_exponent: u32,
    pub nu_hat: i64,
    pub fitted: Vec<FittedCoefficient>,
    pub residuals: Vec<Residual>,
    pub achieved_exponent: ExtendedValuation,
    pub passed: bool,
    pub up_check: UpCheck,
    pub audit: Vec<AuditEntry>,
    #[serde(skip)]
    residue_vector: Vec<BigInt>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub mode: String,
    pub config: FitConfig,
    pub genera: Vec<GenusEntry>,
    pub training: Vec<HalfIntegralMatrix>,
    pub held_out: usize,
    pub rungs: Vec<RungReport>,
    /// Fitted residues at rung `m + 1` reduce to those at rung `m`.
    pub coherent: Vec<bool>,
    pub passed: bool,
    pub failed_stage: Option<String>,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Genera of rank `2k` with level dividing `p` and character `χ_p^j`.
pub fn candidate_genera(target: &WeightTarget) -> Result<Vec<GenusRecord>> {
    let classes = enumerate_classes(2 * target.k as usize, target.p, u64::MAX)?;
    Ok(partition_into_genera(&classes)?
        .into_iter()
        .filter(|g| target.p.is_multiple_of(g.level) && g.character_is_legendre_power(target.p, target.j))
        .collect())
}

/// Singularity tests of `f` modulo `p^{m'}` for `m' = 1..=max_exponent`.
pub fn audit_singular(f: &QExpansion, k: u64, p: u64, max_exponent: u32) -> Result<Vec<AuditEntry>> {
    (1..=max_exponent)
        .map(|e| {
            let rank = mod_pm_singular_rank(f, p, e)?;
            let consistent = rank.is_none_or(|r| check_weight_rank_congruence(k, r as u64, p, e));
            Ok(AuditEntry { exponent: e, rank, consistent })
        })
        .collect()
}

fn unit_row(values: &[Rational], p: u64) -> Result<Vec<u64>> {
    values
        .iter()
        .map(|v| {
            residue_mod_pm(v, p, 1)
                .map(|r| u64::try_from(r).unwrap())
                .ok_or_else(|| Error::NotIntegral { index: "dictionary".into(), value: v.to_string(), p })
        })
        .collect()
}

/// Fits `p^{-ν̂} E_{k(m)}` against the genus theta dictionary on training
/// indices and checks the congruence on every other index of the window.
pub fn fit_and_verify(cfg: &FitConfig, genera: &[GenusRecord]) -> Result<VerificationReport> {
    fit_and_verify_with(cfg, genera, |k, n, b| {
        let k = u32::try_from(k).map_err(|_| Error::OutOfScale(format!("weight {k}")))?;
        eisenstein_qexp(k, n, b)
    })
}

/// `fit_and_verify` with `source(k, n, B)` supplying each Eisenstein window.
pub fn fit_and_verify_with<F>(cfg: &FitConfig, genera: &[GenusRecord], source: F) -> Result<VerificationReport>
where
    F: Fn(u64, usize, i64) -> Result<QExpansion> + Sync,
{
    let target = cfg.target;
    let target = WeightTarget::new(target.p, target.k, target.j, cfg.exploratory)?;
    let seq = WeightSequence::new(target, cfg.schedule.clone())?;
    let p = target.p;
    if genera.is_empty() {
        return Err(Error::InvalidArgument("empty genus dictionary".into()));
    }
    let (n, bound) = (cfg.degree, cfg.bound);
    let dictionary: Vec<QExpansion> =
        genera.par_iter().map(|g| genus_theta(g, n, bound).map(|(_, zero)| zero)).collect::<Result<_>>()?;
    let mut indices: Vec<HalfIntegralMatrix> = window_indices(n, bound)?.to_vec();
    indices.sort_by_key(|t| (t.trace(), t.clone()));
    let row = |t: &HalfIntegralMatrix| -> Result<Vec<Rational>> { dictionary.iter().map(|d| d.coeff(t)).collect() };

    let training = match &cfg.split {
        SplitRule::SmallestTrace => {
            let mut basis = ModPBasis::new(p);
            let mut chosen = Vec::new();
            for t in &indices {
                if basis.rank() == genera.len() {
                    break;
                }
                if basis.try_add(&unit_row(&row(t)?, p)?) {
                    chosen.push(t.clone());
                }
            }
            if basis.rank() < genera.len() {
                return Err(Error::SingularFit(format!(
                    "{} genera but rank {} mod {p} on the window; enlarge the window",
                    genera.len(),
                    basis.rank()
                )));
            }
            chosen
        }
        SplitRule::Explicit(list) => {
            let list: Vec<HalfIntegralMatrix> = list.iter().map(minkowski_reduce).collect::<Result<_>>()?;
            if list.len() != genera.len() {
                return Err(Error::SingularFit(format!("{} training indices for {} genera", list.len(), genera.len())));
            }
            list
        }
    };
    let system: Vec<Vec<Rational>> = training.iter().map(&row).collect::<Result<_>>()?;
    let held: Vec<&HalfIntegralMatrix> = indices.iter().filter(|t| !training.contains(t)).collect();

    let rungs: Vec<RungReport> = (1..=seq.len() as u32)
        .into_par_iter()
        .map(|m| -> Result<RungReport> {
            let weight = weight_at(&seq, m)?;
            let b = seq.b(m)?;
            let c = b;
            let e = source(weight, n, bound)?;
            let nu = e.iter().filter_map(|(_, v)| v_p_unchecked(v, p).finite()).min().unwrap_or(0).min(0);
            let f = e.scale(&Rational::from_integer(pow_big(p, (-nu) as u32)));
            let rhs: Vec<Rational> = training.iter().map(|t| f.coeff(t)).collect::<Result<_>>()?;
            let singular = || Error::SingularFit(format!("training system is singular mod {p}"));
            let exact = solve_rational(&system, &rhs).ok_or_else(singular)?;
            let modular = solve_mod_pm(&system, &rhs, p, c).ok_or_else(singular)?;
            for (x, r) in exact.iter().zip(&modular) {
                if residue_mod_pm(x, p, c).as_ref() != Some(r) {
                    return Err(Error::SingularFit("modular and exact fits disagree".into()));
                }
            }
            let mut fitted_series = QExpansion::zero(n, bound);
            for (x, d) in exact.iter().zip(&dictionary) {
                fitted_series = fitted_series.add_scaled(d, x)?;
            }
            let residuals: Vec<Residual> = held
                .iter()
                .map(|t| {
                    let r = f.coeff(t)? - fitted_series.coeff(t)?;
                    Ok(Residual { index: (*t).clone(), valuation: v_p_unchecked(&r, p) })
                })
                .collect::<Result<_>>()?;
            let achieved = residuals.iter().map(|r| r.valuation).min().unwrap_or(ExtendedValuation::Infinite);
            let up = congruent_mod(&u_p(&fitted_series, p)?, &fitted_series, p, c)?;
            let audit = audit_singular(&f, weight, p, c)?;
            let fitted = exact
                .iter()
                .zip(&modular)
                .enumerate()
                .map(|(genus, (x, r))| FittedCoefficient { genus, exact: x.into(), residue: r.to_string() })
                .collect();
            Ok(RungReport {
                m,
                weight,
                b,
                target_exponent: c,
                nu_hat: nu,
                fitted,
                residuals,
                achieved_exponent: achieved,
                passed: achieved.at_least(c as i64),
                up_check: UpCheck { bound: up.bound, holds: up.holds, witness: up.witness },
                audit,
                residue_vector: modular,
            })
        })
        .collect::<Result<_>>()?;

    let coherent: Vec<bool> = rungs
        .windows(2)
        .map(|w| {
            let md = pow_big(p, w[0].target_exponent);
            w[0].nu_hat == w[1].nu_hat
                && w[1].residue_vector.iter().zip(&w[0].residue_vector).all(|(hi, lo)| &(hi % &md) == lo)
        })
        .collect();
    let failed_stage = if !rungs.iter().all(|r| r.passed) {
        Some("verify")
    } else if !coherent.iter().all(|&c| c) {
        Some("coherence")
    } else if !rungs.iter().all(|r| r.up_check.holds) {
        Some("hecke")
    } else if !rungs.iter().all(|r| r.audit.iter().all(|a| a.consistent)) {
        Some("audit")
    } else {
        None
    };
    let genera_json = genera
        .iter()
        .map(|g| GenusEntry {
            classes: g.classes.clone(),
            level: g.level,
            character: g.character.map(|c| c.discriminant()),
            mass: (&g.mass).into(),
        })
        .collect();
    Ok(VerificationReport {
        mode: if target.within_theorem() { "theorem" } else { "exploratory (outside theorem hypotheses)" }.into(),
        config: FitConfig { target, ..cfg.clone() },
        genera: genera_json,
        training,
        held_out: held.len(),
        rungs,
        coherent,
        passed: failed_stage.is_none(),
        failed_stage: failed_stage.map(str::to_string),
    })
}

impl RungReport {
    /// Fitted residues as integers mod `p^{c(m)}`.
    pub fn residues(&self) -> &[BigInt] {
        &self.residue_vector
    }
}
