//! Small dense linear algebra: LU with partial pivoting for the tiny
//! per-axis systems, and column-pivoted Householder QR for least squares.

use std::fmt;

use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.iter().flatten().copied().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(a, b)| *a * *b).sum()).collect()
    }

    pub fn mul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> T {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<T>()).fold(T::zero(), T::max)
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> =
                self.data[i * self.cols..(i + 1) * self.cols].iter().map(|v| format!("{v:?}")).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> fmt::Display for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// LU factorisation `P A = L U` of a square matrix.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: Mat<T>,
    perm: Vec<usize>,
    singular: bool,
}

impl<T: Scalar> Lu<T> {
    pub fn new(a: &Mat<T>) -> Self {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut singular = false;
        for k in 0..n {
            let (p, pivot) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].abs()))
                    .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot == T::zero() {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            for i in k + 1..n {
                let factor = lu[(i, k)] / lu[(k, k)];
                lu[(i, k)] = factor;
                for j in k + 1..n {
                    lu[(i, j)] = lu[(i, j)] - factor * lu[(k, j)];
                }
            }
        }
        Lu { lu, perm, singular }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Solves `A x = b`; `None` when a pivot vanished.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        if self.singular {
            return None;
        }
        let n = self.lu.rows;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] = x[i] - self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] = x[i] - self.lu[(i, j)] * x[j];
            }
            x[i] = x[i] / self.lu[(i, i)];
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Mat<T>> {
        let n = self.lu.rows;
        let mut inv = Mat::zeros(n, n);
        for j in 0..n {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            let col = self.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Some(inv)
    }
}

/// Inverse together with the reciprocal 1-norm condition number.
pub fn inverse_with_rcond<T: Scalar>(a: &Mat<T>) -> (Option<Mat<T>>, T) {
    if a.rows == 0 {
        return (Some(Mat::zeros(0, 0)), T::one());
    }
    let inv = Lu::new(a).inverse();
    match inv {
        Some(inv) => {
            let denom = a.norm1() * inv.norm1();
            let rcond = if denom.is_finite() && denom > T::zero() { T::one() / denom } else { T::zero() };
            (Some(inv), rcond)
        }
        None => (None, T::zero()),
    }
}

/// Column-pivoted Householder QR of a tall matrix.
#[derive(Debug, Clone)]
pub struct PivotedQr<T> {
    /// Householder vectors on and below the diagonal, R strictly above.
    qr: Mat<T>,
    rdiag: Vec<T>,
    betas: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> PivotedQr<T> {
    pub fn new(a: &Mat<T>) -> Self {
        let (m, n) = (a.rows, a.cols);
        let mut qr = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let steps = n.min(m);
        let mut betas = Vec::with_capacity(steps);
        let mut rdiag = Vec::with_capacity(steps);
        for k in 0..steps {
            let (p, _) =
                (k..n).map(|j| (j, col_norm2(&qr, j, k))).fold((k, -T::one()), |b, c| if c.1 > b.1 { c } else { b });
            if p != k {
                for i in 0..m {
                    let tmp = qr[(i, k)];
                    qr[(i, k)] = qr[(i, p)];
                    qr[(i, p)] = tmp;
                }
                perm.swap(k, p);
            }
            let norm = col_norm2(&qr, k, k).sqrt();
            if norm == T::zero() {
                betas.push(T::zero());
                rdiag.push(T::zero());
                continue;
            }
            let alpha = if qr[(k, k)] > T::zero() { -norm } else { norm };
            qr[(k, k)] = qr[(k, k)] - alpha;
            let vtv = col_norm2(&qr, k, k);
            let beta = T::of(2.0) / vtv;
            for j in k + 1..n {
                let dot: T = (k..m).map(|i| qr[(i, k)] * qr[(i, j)]).sum();
                let s = beta * dot;
                for i in k..m {
                    qr[(i, j)] = qr[(i, j)] - s * qr[(i, k)];
                }
            }
            betas.push(beta);
            rdiag.push(alpha);
        }
        PivotedQr { qr, rdiag, betas, perm }
    }

    /// `|R[k][k]|` in pivot order.
    pub fn r_diagonal(&self) -> Vec<T> {
        self.rdiag.iter().map(|v| v.abs()).collect()
    }

    /// Numerical rank: diagonal entries above `rel_tol * |R[0][0]|`.
    pub fn rank(&self, rel_tol: T) -> usize {
        let d = self.r_diagonal();
        let Some(&first) = d.first() else { return 0 };
        if first == T::zero() {
            return 0;
        }
        d.iter().take_while(|&&v| v > rel_tol * first).count()
    }

    /// Least-squares solution restricted to the leading `rank` pivot columns;
    /// remaining unknowns are set to zero.
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[T], rank: usize) -> Vec<T> {
        let m = self.qr.rows;
        let n = self.qr.cols;
        assert_eq!(b.len(), m);
        let mut y = b.to_vec();
        for (k, &beta) in self.betas.iter().enumerate() {
            if beta == T::zero() {
                continue;
            }
            let dot: T = (k..m).map(|i| self.qr[(i, k)] * y[i]).sum();
            let s = beta * dot;
            for i in k..m {
                y[i] = y[i] - s * self.qr[(i, k)];
            }
        }
        let mut z = vec![T::zero(); n];
        for k in (0..rank).rev() {
            let mut acc = y[k];
            for j in k + 1..rank {
                acc = acc - self.qr[(k, j)] * z[j];
            }
            z[k] = acc / self.rdiag[k];
        }
        let mut x = vec![T::zero(); n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = z[k];
        }
        x
    }
}

fn col_norm2<T: Scalar>(a: &Mat<T>, j: usize, from: usize) -> T {
    (from..a.rows).map(|i| a[(i, j)] * a[(i, j)]).sum()
}
