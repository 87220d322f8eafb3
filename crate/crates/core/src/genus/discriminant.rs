use crate::error::{Error, Result};
use crate::exactnum::factorize;
use crate::lambda::{HalfIntegralMatrix, IntMatrix};

/// The discriminant form of the even lattice with Gram matrix `G = 2S`:
/// the group `Z^r / G Z^r` with `b(x, y) = x^t G^{-1} y mod 1` and
/// `q(x) = x^t G^{-1} x mod 2`, both stored as numerators over `det G`.
#[derive(Clone, Debug)]
pub struct DiscriminantForm {
    det: i128,
    adj: IntMatrix,
    /// Generators with their orders (all > 1), from the Smith normal form.
    gens: Vec<(Vec<i64>, u64)>,
}

impl DiscriminantForm {
    pub fn new(s: &HalfIntegralMatrix) -> Result<Self> {
        let g = s.gram();
        let det = g.det();
        if det <= 0 {
            return Err(Error::NotPositiveDefinite);
        }
        let (diag, w) = smith_left(&g);
        let gens = diag
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > 1)
            .map(|(i, &d)| (w.column(i), d as u64))
            .collect();
        Ok(DiscriminantForm { det, adj: g.adjugate(), gens })
    }

    /// Group order `|det G|`.
    pub fn order(&self) -> u64 {
        self.det as u64
    }

    /// Invariant factors of the group.
    pub fn invariants(&self) -> Vec<u64> {
        self.gens.iter().map(|g| g.1).collect()
    }

    fn pairing(&self, x: &[i64], y: &[i64]) -> i128 {
        let n = x.len();
        let mut s = 0i128;
        for i in 0..n {
            for j in 0..n {
                s += x[i] as i128 * self.adj[(i, j)] as i128 * y[j] as i128;
            }
        }
        s
    }

    /// Numerator of `b(x, y)` reduced mod `det`.
    fn b(&self, x: &[i64], y: &[i64]) -> i128 {
        self.pairing(x, y).rem_euclid(self.det)
    }

    /// Numerator of `q(x)` reduced mod `2 det`.
    fn q(&self, x: &[i64]) -> i128 {
        self.pairing(x, x).rem_euclid(2 * self.det)
    }

    /// Generators of the `p`-primary part with exponents `a` (orders `p^a`).
    fn primary(&self, p: u64) -> Vec<(Vec<i64>, u32)> {
        self.gens
            .iter()
            .filter_map(|(v, d)| {
                let mut a = 0;
                let mut rest = *d;
                while rest % p == 0 {
                    rest /= p;
                    a += 1;
                }
                (a > 0).then(|| (v.iter().map(|x| x * rest as i64).collect(), a))
            })
            .collect()
    }

    /// An isometry of discriminant forms exists.
    pub fn is_isometric(&self, other: &DiscriminantForm) -> bool {
        if self.det != other.det {
            return false;
        }
        factorize(self.det as u64).into_iter().all(|(p, _)| self.primary_isometric(other, p))
    }

    fn primary_isometric(&self, other: &DiscriminantForm, p: u64) -> bool {
        let src = self.primary(p);
        let dst = other.primary(p);
        let mut ea: Vec<u32> = src.iter().map(|g| g.1).collect();
        let mut eb: Vec<u32> = dst.iter().map(|g| g.1).collect();
        ea.sort_unstable();
        eb.sort_unstable();
        if ea != eb {
            return false;
        }
        // Every element of the target component, with its order exponent.
        let r = self.adj.rows();
        let mut elements: Vec<(Vec<i64>, u32, i128)> = Vec::new();
        let sizes: Vec<u64> = dst.iter().map(|g| p.pow(g.1)).collect();
        let total: u64 = sizes.iter().product();
        for code in 0..total {
            let mut c = code;
            let mut v = vec![0i64; r];
            let mut exp = 0;
            for (k, (gen, a)) in dst.iter().enumerate() {
                let coef = c % sizes[k];
                c /= sizes[k];
                for (x, g) in v.iter_mut().zip(gen) {
                    *x += coef as i64 * g;
                }
                let mut e = *a;
                let mut cc = coef;
                while e > 0 && cc.is_multiple_of(p) && cc != 0 {
                    cc /= p;
                    e -= 1;
                }
                if coef == 0 {
                    e = 0;
                }
                exp = exp.max(e);
            }
            let qv = other.q(&v);
            elements.push((v, exp, qv));
        }
        let mut images: Vec<usize> = Vec::with_capacity(src.len());
        self.extend(other, &src, &elements, &mut images)
    }

    fn extend(
        &self,
        other: &DiscriminantForm,
        src: &[(Vec<i64>, u32)],
        elements: &[(Vec<i64>, u32, i128)],
        images: &mut Vec<usize>,
    ) -> bool {
        let i = images.len();
        if i == src.len() {
            return true;
        }
        let (h, a) = &src[i];
        let qh = self.q(h);
        for (idx, (y, e, qy)) in elements.iter().enumerate() {
            if e != a || *qy != qh {
                continue;
            }
            let ok = (0..i).all(|k| other.b(y, &elements[images[k]].0) == self.b(h, &src[k].0));
            if ok {
                images.push(idx);
                if self.extend(other, src, elements, images) {
                    return true;
                }
                images.pop();
            }
        }
        false
    }
}

/// Smith form by row and column operations on `g`; returns the diagonal and
/// `W = U^{-1}` for the accumulated row operations `U`, so the columns of `W`
/// generate `Z^r / g Z^r` with the returned orders.
fn smith_left(g: &IntMatrix) -> (Vec<i128>, IntMatrix) {
    let n = g.rows();
    let mut m: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| g[(i, j)] as i128).collect()).collect();
    let mut w = IntMatrix::identity(n);
    // Row ops on m act on W as inverse column ops.
    let row_add = |m: &mut Vec<Vec<i128>>, w: &mut IntMatrix, dst: usize, src: usize, c: i128| {
        for j in 0..n {
            let t = m[src][j];
            m[dst][j] += c * t;
        }
        for i in 0..n {
            w[(i, src)] -= c as i64 * w[(i, dst)];
        }
    };
    let row_swap = |m: &mut Vec<Vec<i128>>, w: &mut IntMatrix, a: usize, b: usize| {
        m.swap(a, b);
        for i in 0..n {
            let t = w[(i, a)];
            w[(i, a)] = w[(i, b)];
            w[(i, b)] = t;
        }
    };
    let col_add = |m: &mut Vec<Vec<i128>>, dst: usize, src: usize, c: i128| {
        for row in m.iter_mut() {
            row[dst] += c * row[src];
        }
    };
    for t in 0..n {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if m[i][j] != 0 && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                break;
            };
            row_swap(&mut m, &mut w, t, bi);
            for row in m.iter_mut() {
                row.swap(t, bj);
            }
            let piv = m[t][t];
            let mut clean = true;
            for i in t + 1..n {
                let q = m[i][t].div_euclid(piv);
                if q != 0 {
                    row_add(&mut m, &mut w, i, t, -q);
                }
                clean &= m[i][t] == 0;
            }
            for j in t + 1..n {
                let q = m[t][j].div_euclid(piv);
                if q != 0 {
                    col_add(&mut m, j, t, -q);
                }
                clean &= m[t][j] == 0;
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..n).find(|&i| (t + 1..n).any(|j| m[i][j] % piv != 0));
            match bad {
                Some(i) => row_add(&mut m, &mut w, t, i, 1),
                None => break,
            }
        }
        if m[t][t] < 0 {
            for j in 0..n {
                m[t][j] = -m[t][j];
            }
            for i in 0..n {
                w[(i, t)] = -w[(i, t)];
            }
        }
    }
    ((0..n).map(|i| m[i][i]).collect(), w)
}
