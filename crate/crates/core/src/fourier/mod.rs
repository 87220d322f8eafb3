//! Truncated Fourier expansions `Σ a(T) q^T` of a fixed degree over a
//! trace-bounded window of canonical indices.

mod ops;
mod primitive;

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{Rational, RationalJson};
use crate::lambda::{minkowski_reduce, HalfIntegralMatrix};

pub use ops::{check_weight_rank_congruence, congruent_mod, mod_pm_singular_rank, rank_filter, u_p, v_p_rank, Congruence};
pub use primitive::{primitive_coeff_at, primitive_coeffs, sublattice_quotients};

/// A truncated expansion. Keys are canonical indices with `tr(T) ≤ bound`;
/// absent keys inside the window read as zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QExpansion {
    degree: usize,
    bound: i64,
    coeffs: BTreeMap<HalfIntegralMatrix, Rational>,
    class_invariant: bool,
}

impl QExpansion {
    /// The zero expansion of a class-invariant form.
    pub fn zero(degree: usize, bound: i64) -> Self {
        QExpansion { degree, bound, coeffs: BTreeMap::new(), class_invariant: true }
    }

    /// Fills every window index with `f(T)`, in parallel.
    pub fn from_fn<F>(degree: usize, bound: i64, f: F) -> Result<Self>
    where
        F: Fn(&HalfIntegralMatrix) -> Result<Rational> + Sync,
    {
        let idx = window_indices(degree, bound)?;
        let values: Result<Vec<(HalfIntegralMatrix, Rational)>> =
            idx.par_iter().map(|t| Ok((t.clone(), f(t)?))).collect();
        let mut out = QExpansion::zero(degree, bound);
        for (t, v) in values? {
            if !v.is_zero() {
                out.coeffs.insert(t, v);
            }
        }
        Ok(out)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    pub fn is_class_invariant(&self) -> bool {
        self.class_invariant
    }

    /// Marks the expansion as not GL-invariant; keys are then used verbatim.
    pub fn without_class_invariance(mut self) -> Self {
        self.class_invariant = false;
        self
    }

    /// Nonzero stored coefficients in canonical key order.
    pub fn iter(&self) -> impl Iterator<Item = (&HalfIntegralMatrix, &Rational)> {
        self.coeffs.iter()
    }

    /// All window indices (canonical), including those with zero coefficient.
    pub fn indices(&self) -> Result<Arc<Vec<HalfIntegralMatrix>>> {
        window_indices(self.degree, self.bound)
    }

    fn key(&self, t: &HalfIntegralMatrix) -> Result<HalfIntegralMatrix> {
        if t.size() != self.degree {
            return Err(Error::DegreeMismatch(t.size(), self.degree));
        }
        let k = if self.class_invariant { minkowski_reduce(t)? } else { t.clone() };
        if k.trace() > self.bound {
            return Err(Error::OutOfRange { trace: k.trace(), bound: self.bound });
        }
        Ok(k)
    }

    /// `a(T)`; indices beyond the window are an error, never zero.
    pub fn coeff(&self, t: &HalfIntegralMatrix) -> Result<Rational> {
        let k = self.key(t)?;
        Ok(self.coeffs.get(&k).cloned().unwrap_or_else(Rational::zero))
    }

    /// `a(T)` for a key already in canonical form.
    pub(crate) fn coeff_canonical(&self, t: &HalfIntegralMatrix) -> Rational {
        self.coeffs.get(t).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, t: &HalfIntegralMatrix, value: Rational) -> Result<()> {
        let k = self.key(t)?;
        if value.is_zero() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, value);
        }
        Ok(())
    }

    /// The constant term `a(0)`.
    pub fn constant_term(&self) -> Rational {
        self.coeff_canonical(&HalfIntegralMatrix::zero(self.degree))
    }

    pub fn scale(&self, c: &Rational) -> QExpansion {
        let mut out = self.clone();
        if c.is_zero() {
            out.coeffs.clear();
        } else {
            for v in out.coeffs.values_mut() {
                *v *= c;
            }
        }
        out
    }

    /// `self + c · other` on the common window.
    pub fn add_scaled(&self, other: &QExpansion, c: &Rational) -> Result<QExpansion> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(self.degree, other.degree));
        }
        let bound = self.bound.min(other.bound);
        let mut out = self.truncate(bound)?;
        out.class_invariant &= other.class_invariant;
        for (t, v) in other.coeffs.iter().filter(|(t, _)| t.trace() <= bound) {
            let e = out.coeffs.entry(t.clone()).or_insert_with(Rational::zero);
            *e += v * c;
            if e.is_zero() {
                out.coeffs.remove(t);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &QExpansion) -> Result<QExpansion> {
        self.add_scaled(other, &-Rational::from_integer(1.into()))
    }

    /// The same expansion on a smaller window.
    pub fn truncate(&self, bound: i64) -> Result<QExpansion> {
        if bound > self.bound {
            return Err(Error::OutOfRange { trace: bound, bound: self.bound });
        }
        let mut out = self.clone();
        out.bound = bound;
        out.coeffs.retain(|t, _| t.trace() <= bound);
        Ok(out)
    }

    /// The degree `n - 1` window read through `T' ↦ T' ⊕ 0`.
    pub fn restrict_degree(&self) -> Result<QExpansion> {
        if self.degree < 2 {
            return Err(Error::InvalidArgument("degree-1 expansion has no restriction".into()));
        }
        QExpansion::from_fn(self.degree - 1, self.bound, |t| self.coeff(&t.pad_zero(1)))
    }

    /// Dump as deterministic JSON over all window indices.
    pub fn to_dump(&self) -> Result<ExpansionDump> {
        let idx = self.indices()?;
        let coefficients = idx
            .iter()
            .map(|t| {
                let v = self.coeff_canonical(t);
                let r = RationalJson::from(&v);
                DumpEntry { two_t: t.clone(), num: r.num, den: r.den }
            })
            .collect();
        Ok(ExpansionDump { degree: self.degree, bound: self.bound, coefficients })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.to_dump()?)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_dump(dump: &ExpansionDump) -> Result<QExpansion> {
        let mut out = QExpansion::zero(dump.degree, dump.bound);
        for e in &dump.coefficients {
            let v = Rational::try_from(&RationalJson { num: e.num.clone(), den: e.den.clone() })?;
            out.set(&e.two_t, v)?;
        }
        Ok(out)
    }
}

/// Serialized expansion: one entry per canonical window index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionDump {
    pub degree: usize,
    pub bound: i64,
    pub coefficients: Vec<DumpEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpEntry {
    #[serde(rename = "twoT")]
    pub two_t: HalfIntegralMatrix,
    pub num: String,
    pub den: String,
}

type IndexCache = Mutex<Option<HashMap<(usize, i64), Arc<Vec<HalfIntegralMatrix>>>>>;
static INDICES: IndexCache = Mutex::new(None);

/// Canonical `T ≥ 0` of size `n` with `tr(T) ≤ bound`, sorted.
pub fn window_indices(n: usize, bound: i64) -> Result<Arc<Vec<HalfIntegralMatrix>>> {
    if n == 0 {
        return Err(Error::InvalidArgument("degree must be positive".into()));
    }
    if let Some(v) = INDICES.lock().expect("index cache poisoned").as_ref().and_then(|m| m.get(&(n, bound))) {
        return Ok(v.clone());
    }
    let v = Arc::new(enumerate_indices(n, bound)?);
    INDICES
        .lock()
        .expect("index cache poisoned")
        .get_or_insert_with(HashMap::new)
        .insert((n, bound), v.clone());
    Ok(v)
}

/// Every canonical index satisfies `|2t_ij| ≤ min(t_ii, t_jj)`, so it suffices
/// to reduce the semidefinite matrices in that box.
fn enumerate_indices(n: usize, bound: i64) -> Result<Vec<HalfIntegralMatrix>> {
    let mut diags = Vec::new();
    let mut cur = vec![0i64; n];
    fn rec(i: usize, left: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for t in 0..=left {
            cur[i] = t;
            rec(i + 1, left - t, cur, out);
        }
    }
    rec(0, bound.max(-1), &mut cur, &mut diags);
    let found: Result<Vec<Vec<HalfIntegralMatrix>>> = diags
        .par_iter()
        .map(|d| {
            let mut out = Vec::new();
            let mut g = vec![0i64; n * n];
            for i in 0..n {
                g[i * n + i] = 2 * d[i];
            }
            let slots: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            fill(&slots, 0, n, &mut g, &mut out)?;
            Ok(out)
        })
        .collect();
    let mut all: Vec<HalfIntegralMatrix> = found?.into_iter().flatten().collect();
    all.sort();
    all.dedup();
    Ok(all)
}

fn fill(slots: &[(usize, usize)], k: usize, n: usize, g: &mut Vec<i64>, out: &mut Vec<HalfIntegralMatrix>) -> Result<()> {
    if k == slots.len() {
        let t = HalfIntegralMatrix::new(n, g.clone())?;
        if t.is_positive_semidefinite() {
            let c = minkowski_reduce(&t)?;
            if c == t {
                out.push(c);
            }
        }
        return Ok(());
    }
    let (i, j) = slots[k];
    let lim = g[i * n + i].min(g[j * n + j]) / 2;
    for v in -lim..=lim {
        g[i * n + j] = v;
        g[j * n + i] = v;
        fill(slots, k + 1, n, g, out)?;
    }
    g[i * n + j] = 0;
    g[j * n + i] = 0;
    Ok(())
}
