use std::fmt;

/// A small dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<i64>) -> Self {
        assert_eq!(data.len(), rows * cols, "IntMatrix shape mismatch");
        IntMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix::new(rows, cols, vec![0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_columns(rows: usize, columns: &[Vec<i64>]) -> Self {
        let mut m = IntMatrix::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            for i in 0..rows {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[i64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> i128 {
        assert_eq!(self.rows, self.cols);
        det_i128(self.rows, self.data.iter().map(|&x| x as i128).collect())
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        let (r, c) = (self.rows, self.cols);
        let mut a: Vec<i128> = self.data.iter().map(|&x| x as i128).collect();
        let mut rank = 0;
        for col in 0..c {
            let Some(piv) = (rank..r).find(|&i| a[i * c + col] != 0) else {
                continue;
            };
            for j in 0..c {
                a.swap(piv * c + j, rank * c + j);
            }
            for i in 0..r {
                if i != rank && a[i * c + col] != 0 {
                    let (f, g) = (a[i * c + col], a[rank * c + col]);
                    let h = gcd_i128(f, g);
                    let (f, g) = (f / h, g / h);
                    for j in 0..c {
                        a[i * c + j] = a[i * c + j] * g - a[rank * c + j] * f;
                    }
                    let row_gcd = (0..c).fold(0, |acc, j| gcd_i128(acc, a[i * c + j]));
                    if row_gcd > 1 {
                        for j in 0..c {
                            a[i * c + j] /= row_gcd;
                        }
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    /// The adjugate, so that `self * adj = det * I`.
    pub fn adjugate(&self) -> IntMatrix {
        let n = self.rows;
        assert_eq!(n, self.cols);
        if n == 1 {
            return IntMatrix::new(1, 1, vec![1]);
        }
        let mut adj = IntMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let minor = self.minor(i, j).det();
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                adj[(j, i)] = (sign * minor) as i64;
            }
        }
        adj
    }

    fn minor(&self, row: usize, col: usize) -> IntMatrix {
        let n = self.rows;
        let mut data = Vec::with_capacity((n - 1) * (n - 1));
        for i in 0..n {
            if i == row {
                continue;
            }
            for j in 0..n {
                if j != col {
                    data.push(self[(i, j)]);
                }
            }
        }
        IntMatrix::new(n - 1, n - 1, data)
    }

    /// Inverse of a unimodular matrix.
    pub fn unimodular_inverse(&self) -> Option<IntMatrix> {
        let d = self.det();
        if d == 1 {
            Some(self.adjugate())
        } else if d == -1 {
            let a = self.adjugate();
            Some(IntMatrix::new(a.rows, a.cols, a.data.iter().map(|x| -x).collect()))
        } else {
            None
        }
    }

    /// Block diagonal `self ⊕ I_extra`.
    pub fn pad_identity(&self, extra: usize) -> IntMatrix {
        let n = self.rows + extra;
        let mut m = IntMatrix::identity(n);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)];
            }
        }
        m
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = i64;
    fn index(&self, (i, j): (usize, usize)) -> &i64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

pub(crate) fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub(crate) fn det_i128(n: usize, mut a: Vec<i128>) -> i128 {
    if n == 0 {
        return 1;
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k * n + k] == 0 {
            let Some(swap) = (k + 1..n).find(|&i| a[i * n + k] != 0) else {
                return 0;
            };
            for j in 0..n {
                a.swap(k * n + j, swap * n + j);
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
            }
        }
        prev = a[k * n + k];
    }
    sign * a[n * n - 1]
}
