use super::matrix::gcd_i128;
use super::short::{gram_short_vectors, inner};
use super::{HalfIntegralMatrix, IntMatrix, MAX_SIZE};
use crate::error::{Error, Result};

/// Canonical GL_n(Z)-representative of a positive semidefinite `T`.
pub fn minkowski_reduce(t: &HalfIntegralMatrix) -> Result<HalfIntegralMatrix> {
    Ok(canonical_with_transform(t)?.0)
}

/// Canonical representative `C` and a unimodular `U` with `T[U] = C`.
///
/// `C = C' ⊕ 0` where `C'` is positive definite. The basis of `C'` is the
/// lexicographically least sequence of per-step keys
/// `(c_ii, -c_1i, ..., -c_{i-1,i})` over all bases, so the diagonal is
/// Minkowski-reduced and off-diagonal ties favour larger entries.
pub fn canonical_with_transform(t: &HalfIntegralMatrix) -> Result<(HalfIntegralMatrix, IntMatrix)> {
    let n = t.size();
    if n > MAX_SIZE {
        return Err(Error::OutOfScale(format!("reduction of size {n} > {MAX_SIZE}")));
    }
    if !t.is_positive_semidefinite() {
        return Err(Error::NotPositiveDefinite);
    }
    let (u, r) = split_radical(&t.gram());
    let block = t.transform(&u).leading_block(r.max(1));
    let v = if r == 0 { IntMatrix::identity(0) } else { canonical_basis(&block.gram()) };
    let total = u.mul(&v.pad_identity(n - r));
    let c = t.transform(&total);
    Ok((c, total))
}

/// Unimodular `U` and `r = rank G` with `G U = [H | 0]`, so that
/// `U^t G U = G' ⊕ 0` with `G'` of size `r`.
fn split_radical(g: &IntMatrix) -> (IntMatrix, usize) {
    let n = g.rows();
    let mut m: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| g[(i, j)] as i128).collect()).collect();
    let mut u = IntMatrix::identity(n);
    let mut pivots = 0;
    let col_op = |m: &mut Vec<Vec<i128>>, u: &mut IntMatrix, dst: usize, src: usize, q: i128| {
        for row in m.iter_mut() {
            row[dst] -= q * row[src];
        }
        for i in 0..n {
            u[(i, dst)] -= q as i64 * u[(i, src)];
        }
    };
    let swap = |m: &mut Vec<Vec<i128>>, u: &mut IntMatrix, a: usize, b: usize| {
        for row in m.iter_mut() {
            row.swap(a, b);
        }
        for i in 0..n {
            let t = u[(i, a)];
            u[(i, a)] = u[(i, b)];
            u[(i, b)] = t;
        }
    };
    for row in 0..n {
        loop {
            let Some(c) = (pivots..n).filter(|&c| m[row][c] != 0).min_by_key(|&c| m[row][c].abs()) else {
                break;
            };
            let mut done = true;
            for c2 in pivots..n {
                if c2 != c && m[row][c2] != 0 {
                    let q = m[row][c2].div_euclid(m[row][c]);
                    col_op(&mut m, &mut u, c2, c, q);
                    if m[row][c2] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                swap(&mut m, &mut u, c, pivots);
                pivots += 1;
                break;
            }
        }
    }
    (u, pivots)
}

/// Pairwise size reduction; returns the basis as columns.
fn greedy_reduce(g: &IntMatrix) -> Vec<Vec<i64>> {
    let n = g.rows();
    let mut basis: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    loop {
        let mut improved = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let gij = inner(g, &basis[i], &basis[j]);
                let gjj = inner(g, &basis[j], &basis[j]);
                let c = (2 * gij + gjj).div_euclid(2 * gjj);
                if c == 0 {
                    continue;
                }
                let gii = inner(g, &basis[i], &basis[i]);
                if gii - 2 * c * gij + c * c * gjj < gii {
                    let bj = basis[j].clone();
                    for (a, b) in basis[i].iter_mut().zip(bj) {
                        *a -= c * b;
                    }
                    improved = true;
                }
            }
        }
        if !improved {
            return basis;
        }
    }
}

/// Columns of the unimodular matrix taking `g` to its canonical form.
fn canonical_basis(g: &IntMatrix) -> IntMatrix {
    let n = g.rows();
    let start = greedy_reduce(g);
    let max_diag = start.iter().map(|b| inner(g, b, b)).max().unwrap_or(0);
    // For n ≤ 4 the reduced diagonal is the successive minima; beyond, allow slack.
    let bound = if n <= 4 { max_diag } else { 2 * max_diag };
    let mut cands = gram_short_vectors(g, bound);
    cands.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)));
    let mut search = Search { g, n, cands: &cands, best: None, key: Vec::new(), chosen: Vec::new() };
    search.run();
    let (_, basis) = search.best.expect("a reduced basis always exists");
    IntMatrix::from_columns(n, &basis)
}

struct Search<'a> {
    g: &'a IntMatrix,
    n: usize,
    cands: &'a [(Vec<i64>, i64)],
    best: Option<(Vec<i64>, Vec<Vec<i64>>)>,
    key: Vec<i64>,
    chosen: Vec<Vec<i64>>,
}

impl Search<'_> {
    fn run(&mut self) {
        let i = self.chosen.len();
        if i == self.n {
            let better = match &self.best {
                None => true,
                Some((b, _)) => self.key < *b,
            };
            if better {
                self.best = Some((self.key.clone(), self.chosen.clone()));
            }
            return;
        }
        for idx in 0..self.cands.len() {
            let (v, nv) = &self.cands[idx];
            if i == 0 && v.iter().find(|&&c| c != 0).is_some_and(|&c| c < 0) {
                continue;
            }
            let base = self.key.len();
            if let Some((b, _)) = &self.best {
                if self.key[..] == b[..base] && *nv > b[base] {
                    break;
                }
            }
            self.key.push(*nv);
            for w in &self.chosen {
                self.key.push(-inner(self.g, w, v));
            }
            let keep = match &self.best {
                None => true,
                Some((b, _)) => self.key[..] <= b[..self.key.len()],
            };
            if keep {
                self.chosen.push(v.clone());
                if extends_primitively(&self.chosen) {
                    self.run();
                }
                self.chosen.pop();
            }
            self.key.truncate(base);
        }
    }
}

/// The columns `vs` form part of a basis of Z^n: the gcd of the maximal
/// minors is 1.
pub(crate) fn extends_primitively(vs: &[Vec<i64>]) -> bool {
    let k = vs.len();
    let n = vs[0].len();
    let mut g: i128 = 0;
    let mut rows = Vec::with_capacity(k);
    combos(n, k, 0, &mut rows, &mut |rows| {
        let mut data = Vec::with_capacity(k * k);
        for &r in rows {
            for v in vs {
                data.push(v[r] as i128);
            }
        }
        g = gcd_i128(g, super::matrix::det_i128(k, data));
        g == 1
    });
    g == 1
}

/// Calls `f` on each k-subset of 0..n until it returns true.
fn combos(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    if cur.len() == k {
        return f(cur);
    }
    for i in start..n {
        cur.push(i);
        if combos(n, k, i + 1, cur, f) {
            return true;
        }
        cur.pop();
    }
    false
}
