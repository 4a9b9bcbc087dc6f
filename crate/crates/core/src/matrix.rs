//! Exact dense linear algebra over any `Scalar` field.
//!
//! Everything here is ordinary Gaussian elimination with a fixed,
//! deterministic pivot rule: columns are processed left to right and the
//! pivot is the first row (top-down) with a nonzero entry. Determinism
//! matters because downstream objects — hom-space bases, arrow labels in the
//! reduced quiver — inherit their ordering from echelon forms, and outputs
//! must be reproducible run to run. There are no tolerances anywhere;
//! comparisons are exact field equality.

use std::fmt;

use num_traits::Zero;

use crate::scalar::Scalar;

/// Dense row-major matrix over an exact field.
#[derive(Clone, PartialEq)]
pub struct Matrix<K> {
    rows: usize,
    cols: usize,
    data: Vec<K>,
}

impl<K: Scalar> Matrix<K> {
    /// The zero matrix of the given shape.
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![K::zero(); rows * cols],
        }
    }

    /// The n×n identity.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, K::one());
        }
        m
    }

    /// Builds from nested rows; all rows must share one length.
    pub fn from_rows(rows_data: Vec<Vec<K>>) -> Self {
        let rows = rows_data.len();
        let cols = rows_data.first().map_or(0, Vec::len);
        assert!(
            rows_data.iter().all(|r| r.len() == cols),
            "ragged rows in matrix literal"
        );
        Matrix {
            rows,
            cols,
            data: rows_data.into_iter().flatten().collect(),
        }
    }

    /// Builds entry-wise from a function of (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> K) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    /// A single-column matrix from a vector.
    pub fn column(v: Vec<K>) -> Self {
        Matrix {
            rows: v.len(),
            cols: 1,
            data: v,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &K {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: K) {
        self.data[r * self.cols + c] = v;
    }

    /// Borrows row r as a slice.
    pub fn row(&self, r: usize) -> &[K] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Copies column c out as a vector.
    pub fn col(&self, c: usize) -> Vec<K> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    /// Matrix product; shapes must be compatible.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matrix product shape mismatch: {}x{} by {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out: Matrix<K> = Matrix::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(r, c).clone();
                    out.set(r, c, cur + a.clone() * b.clone());
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[K]) -> Vec<K> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|r| {
                let mut acc = K::zero();
                for c in 0..self.cols {
                    let a = self.get(r, c);
                    if !a.is_zero() && !v[c].is_zero() {
                        acc = acc + a.clone() * v[c].clone();
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix::from_fn(self.rows, self.cols, |r, c| {
            self.get(r, c).clone() + other.get(r, c).clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix::from_fn(self.rows, self.cols, |r, c| {
            self.get(r, c).clone() - other.get(r, c).clone()
        })
    }

    pub fn scale(&self, s: &K) -> Self {
        Matrix::from_fn(self.rows, self.cols, |r, c| {
            self.get(r, c).clone() * s.clone()
        })
    }

    /// Glues `other` to the right of `self`.
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        Matrix::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self.get(r, c).clone()
            } else {
                other.get(r, c - self.cols).clone()
            }
        })
    }

    /// Glues `other` below `self`.
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        Matrix::from_fn(self.rows + other.rows, self.cols, |r, c| {
            if r < self.rows {
                self.get(r, c).clone()
            } else {
                other.get(r - self.rows, c).clone()
            }
        })
    }

    /// Reduced row echelon form together with the pivot column indices.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            // First nonzero entry scanning rows top-down.
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for c in 0..m.cols {
                    m.data.swap(p * m.cols + c, row * m.cols + c);
                }
            }
            let inv = m
                .get(row, col)
                .try_inv()
                .expect("pivot is nonzero by selection");
            for c in col..m.cols {
                let v = m.get(row, c).clone() * inv.clone();
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r != row && !m.get(r, col).is_zero() {
                    let factor = m.get(r, col).clone();
                    for c in col..m.cols {
                        let v = m.get(r, c).clone() - factor.clone() * m.get(row, c).clone();
                        m.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Solves A·X = B exactly, returning `None` when the system is
    /// inconsistent. With a rank-deficient A the free variables are set to
    /// zero, which keeps the returned solution deterministic.
    pub fn solve(&self, b: &Self) -> Option<Self> {
        assert_eq!(
            self.rows, b.rows,
            "solve requires equal row counts: {} vs {}",
            self.rows, b.rows
        );
        let (r, pivots) = self.hstack(b).rref();
        // Any pivot landing in the B block marks an inconsistent row.
        if pivots.iter().any(|&c| c >= self.cols) {
            return None;
        }
        let mut x = Matrix::zero(self.cols, b.cols);
        for (i, &pc) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.set(pc, j, r.get(i, self.cols + j).clone());
            }
        }
        Some(x)
    }

    /// Exact basis of the right null space {v : A·v = 0}, one single-column
    /// matrix per basis vector, each scaled so its first nonzero entry is 1.
    pub fn kernel_basis(&self) -> Vec<Self> {
        let (r, pivots) = self.rref();
        let mut basis = Vec::new();
        let mut piv_iter = pivots.iter().copied().peekable();
        let mut free_cols = Vec::new();
        for c in 0..self.cols {
            if piv_iter.peek() == Some(&c) {
                piv_iter.next();
            } else {
                free_cols.push(c);
            }
        }
        for fc in free_cols {
            let mut v = vec![K::zero(); self.cols];
            v[fc] = K::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -r.get(i, fc).clone();
            }
            let lead = v
                .iter()
                .find(|x| !x.is_zero())
                .expect("kernel vector has a unit coordinate")
                .clone();
            let inv = lead.try_inv().expect("leading entry is nonzero");
            for x in &mut v {
                *x = x.clone() * inv.clone();
            }
            basis.push(Matrix::column(v));
        }
        basis
    }

    /// Exact inverse, or `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "inverse requires a square matrix");
        if self.rank() < self.rows {
            return None;
        }
        self.solve(&Matrix::identity(self.rows))
    }
}

impl<K: Scalar> fmt::Debug for Matrix<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let entries: Vec<String> = self.row(r).iter().map(|e| e.to_string()).collect();
            writeln!(f, "  [{}]", entries.join(", "))?;
        }
        write!(f, "]")
    }
}
