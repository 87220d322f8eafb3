use std::collections::BTreeSet;

use num_rational::Ratio;
use rayon::prelude::*;

use super::{automorphism_count, minkowski_reduce, HalfIntegralMatrix, IntMatrix};
use crate::error::{Error, Result};
use crate::exactnum::divisors;
use crate::genus::ClassRecord;

/// `∏ λ_i ≤ γ_r^r det` for the successive minima, with `γ_r^r` exact.
fn hermite_power(r: usize) -> Ratio<i128> {
    match r {
        1 => Ratio::from_integer(1),
        2 => Ratio::new(4, 3),
        3 => Ratio::from_integer(2),
        4 => Ratio::from_integer(4),
        _ => unreachable!("rank checked by caller"),
    }
}

/// GL_r(Z)-classes of positive definite `S` with `level(S) | level_divides`
/// and `det(2S) ≤ det_bound`, sorted by canonical representative.
pub fn enumerate_classes(r: usize, level_divides: u64, det_bound: u64) -> Result<Vec<ClassRecord>> {
    enumerate_classes_scaled(r, level_divides, det_bound, 1)
}

/// As [`enumerate_classes`], with the diagonal-product search bound
/// multiplied by `factor`.
pub fn enumerate_classes_scaled(r: usize, level_divides: u64, det_bound: u64, factor: u64) -> Result<Vec<ClassRecord>> {
    if !r.is_multiple_of(2) {
        return Err(Error::OddRank(r));
    }
    if r == 0 || r > 4 {
        return Err(Error::OutOfScale(format!("class enumeration at rank {r}")));
    }
    if level_divides == 0 {
        return Err(Error::InvalidArgument("level must be positive".into()));
    }
    let top = (level_divides as u128).pow(r as u32);
    let dets: Vec<u64> = divisors(top.min(u64::MAX as u128) as u64)
        .into_iter()
        .filter(|&d| d <= det_bound && top.is_multiple_of(d as u128))
        .collect();
    let forms = reduced_candidates(r, &dets, factor, &|s| s.level().is_ok_and(|l| level_divides.is_multiple_of(l)))?;
    forms
        .into_par_iter()
        .map(|rep| {
            let epsilon = automorphism_count(&rep)?;
            Ok(ClassRecord { rep, epsilon })
        })
        .collect()
}

/// Canonical representatives of all positive definite classes of size `r`
/// (any r ≤ 4) whose `det(2S)` lies in `dets`.
pub fn enumerate_forms(r: usize, dets: &[u64], factor: u64) -> Result<Vec<HalfIntegralMatrix>> {
    if r == 0 || r > 4 {
        return Err(Error::OutOfScale(format!("form enumeration at rank {r}")));
    }
    reduced_candidates(r, dets, factor, &|_| true)
}

fn reduced_candidates(
    r: usize,
    dets: &[u64],
    factor: u64,
    keep: &(dyn Fn(&HalfIntegralMatrix) -> bool + Sync),
) -> Result<Vec<HalfIntegralMatrix>> {
    let found: Result<Vec<BTreeSet<HalfIntegralMatrix>>> = dets
        .par_iter()
        .map(|&d| {
            let mut raw = Vec::new();
            let limit = hermite_power(r) * Ratio::from_integer(d as i128 * factor as i128);
            let mut g = IntMatrix::zeros(r, r);
            grow(r, d as i128, &limit, 0, &mut g, &mut raw);
            let mut set = BTreeSet::new();
            for s in raw {
                if keep(&s) {
                    set.insert(minkowski_reduce(&s)?);
                }
            }
            Ok(set)
        })
        .collect();
    let mut all = BTreeSet::new();
    for s in found? {
        all.extend(s);
    }
    Ok(all.into_iter().collect())
}

fn leading_det(g: &IntMatrix, k: usize) -> i128 {
    let mut data = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            data.push(g[(i, j)] as i128);
        }
    }
    super::matrix::det_i128(k, data)
}

/// Fills column `s` of `g`: nondecreasing even diagonal, `|g_is| ≤ g_ii / 2`,
/// first nonzero entry above the diagonal positive, positive leading minors,
/// and the diagonal product within `limit`. The last diagonal entry is
/// solved from `det g = det`.
fn grow(r: usize, det: i128, limit: &Ratio<i128>, s: usize, g: &mut IntMatrix, out: &mut Vec<HalfIntegralMatrix>) {
    if s == r {
        if let Ok(h) = HalfIntegralMatrix::from_int_matrix(g) {
            if h.is_positive_definite() && h.det2() == det {
                out.push(h);
            }
        }
        return;
    }
    let prod: i128 = (0..s).map(|i| g[(i, i)] as i128).product();
    let prev = if s == 0 { 2 } else { g[(s - 1, s - 1)] };
    let mut off = vec![0i64; s];
    off_diagonals(r, det, limit, s, 0, prod, prev, g, &mut off, out);
}

#[allow(clippy::too_many_arguments)]
fn off_diagonals(
    r: usize,
    det: i128,
    limit: &Ratio<i128>,
    s: usize,
    i: usize,
    prod: i128,
    prev: i64,
    g: &mut IntMatrix,
    off: &mut Vec<i64>,
    out: &mut Vec<HalfIntegralMatrix>,
) {
    if i < s {
        let half = g[(i, i)] / 2;
        let leading_zero = off[..i].iter().all(|&x| x == 0);
        let lo = if leading_zero { 0 } else { -half };
        for v in lo..=half {
            off[i] = v;
            g[(i, s)] = v;
            g[(s, i)] = v;
            off_diagonals(r, det, limit, s, i + 1, prod, prev, g, off, out);
        }
        g[(i, s)] = 0;
        g[(s, i)] = 0;
        return;
    }
    if s == r - 1 {
        // det is affine in the last diagonal entry: det = x·minor + base.
        g[(s, s)] = 0;
        let base = leading_det(g, r);
        let minor = leading_det(g, r - 1);
        if minor <= 0 || (det - base) % minor != 0 {
            return;
        }
        let x = (det - base) / minor;
        if x < prev as i128 || x % 2 != 0 || Ratio::from_integer(prod * x) > *limit {
            return;
        }
        g[(s, s)] = x as i64;
        grow(r, det, limit, s + 1, g, out);
        g[(s, s)] = 0;
        return;
    }
    let remaining = (r - s) as u32;
    let mut x = prev;
    // Later diagonal entries are at least x, so prod · x^(r-s) ≤ limit.
    while Ratio::from_integer(prod * (x as i128).pow(remaining)) <= *limit {
        g[(s, s)] = x;
        if leading_det(g, s + 1) > 0 {
            grow(r, det, limit, s + 1, g, out);
        }
        x += 2;
    }
    g[(s, s)] = 0;
}
