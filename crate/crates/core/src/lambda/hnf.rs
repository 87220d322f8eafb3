use super::IntMatrix;
use crate::exactnum::divisors;

/// Upper-triangular Hermite normal forms of determinant `det`: positive
/// diagonal, `0 ≤ h_ij < h_jj` above the diagonal. One per left coset
/// `GL_n(Z) D`.
pub fn hnf_matrices(n: usize, det: u64) -> Vec<IntMatrix> {
    let mut out = Vec::new();
    if n == 0 || det == 0 {
        return out;
    }
    let mut diag = vec![0u64; n];
    diagonals(n, 0, det, &mut diag, &mut |d| fill_above(n, d, &mut out));
    out
}

fn diagonals(n: usize, i: usize, rest: u64, diag: &mut [u64], f: &mut dyn FnMut(&[u64])) {
    if i == n - 1 {
        diag[i] = rest;
        f(diag);
        return;
    }
    for d in divisors(rest) {
        diag[i] = d;
        diagonals(n, i + 1, rest / d, diag, f);
    }
}

fn fill_above(n: usize, diag: &[u64], out: &mut Vec<IntMatrix>) {
    let slots: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    let mut m = IntMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i] as i64;
    }
    fn rec(k: usize, slots: &[(usize, usize)], diag: &[u64], m: &mut IntMatrix, out: &mut Vec<IntMatrix>) {
        if k == slots.len() {
            out.push(m.clone());
            return;
        }
        let (i, j) = slots[k];
        for v in 0..diag[j] as i64 {
            m[(i, j)] = v;
            rec(k + 1, slots, diag, m, out);
        }
        m[(i, j)] = 0;
    }
    rec(0, &slots, diag, &mut m, out);
}
