//! Small dense matrices over any [`Scalar`], with LU-based determinants.
//!
//! Sizes here never exceed a handful of rows, so a row-major `Vec` and
//! Gaussian elimination with partial pivoting are all that is needed. The
//! same code runs exactly over rationals (pivoting then only has to avoid
//! zeros) and approximately over floats.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::{RealScalar, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = T::zero();
            for l in 0..self.cols {
                acc = acc + self[(i, l)].clone() * other[(l, j)].clone();
            }
            acc
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() - other[(i, j)].clone()
        })
    }

    /// Copy of the block starting at `(r0, c0)` with the given shape.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    /// Assemble `[[w, x], [y, z]]`.
    pub fn from_blocks(w: &Self, x: &Self, y: &Self, z: &Self) -> Self {
        assert_eq!(w.rows, x.rows);
        assert_eq!(y.rows, z.rows);
        assert_eq!(w.cols, y.cols);
        assert_eq!(x.cols, z.cols);
        let (top, left) = (w.rows, w.cols);
        Self::from_fn(w.rows + y.rows, w.cols + x.cols, |i, j| match (i < top, j < left) {
            (true, true) => w[(i, j)].clone(),
            (true, false) => x[(i, j - left)].clone(),
            (false, true) => y[(i - top, j)].clone(),
            (false, false) => z[(i - top, j - left)].clone(),
        })
    }

    /// Submatrix with row `skip_row` and column `skip_col` removed.
    pub fn minor(&self, skip_row: usize, skip_col: usize) -> Self {
        let mut data = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for i in (0..self.rows).filter(|&i| i != skip_row) {
            for j in (0..self.cols).filter(|&j| j != skip_col) {
                data.push(self[(i, j)].clone());
            }
        }
        Self {
            rows: self.rows - 1,
            cols: self.cols - 1,
            data,
        }
    }

    pub fn lu(&self) -> Result<Lu<T>> {
        Lu::factor(self)
    }

    /// Determinant via LU with partial pivoting; zero for singular input.
    pub fn det(&self) -> T {
        assert!(self.is_square(), "determinant of non-square matrix");
        match Lu::factor(self) {
            Ok(lu) => lu.det(),
            Err(_) => T::zero(),
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let lu = self.lu()?;
        let n = self.rows;
        let mut inv = Self::zeros(n, n);
        for j in 0..n {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            let col = lu.solve(&e);
            for (i, v) in col.into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        Ok(inv)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> T {
        (0..self.cols)
            .map(|j| {
                (0..self.rows).fold(T::zero(), |acc, i| acc + self[(i, j)].abs())
            })
            .fold(T::zero(), T::max_of)
    }
}

impl<T: RealScalar> Matrix<T> {
    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &v| acc + v * v)
            .sqrt()
    }

    /// One-norm condition number; infinite when singular.
    pub fn condition_one(&self) -> T {
        match self.inverse() {
            Ok(inv) => self.norm_one() * inv.norm_one(),
            Err(_) => T::infinity(),
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Packed `PA = LU` factorisation.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    swaps: usize,
}

impl<T: Scalar> Lu<T> {
    fn factor(m: &Matrix<T>) -> Result<Self> {
        assert!(m.is_square(), "LU of non-square matrix");
        let n = m.rows;
        let mut a = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for col in 0..n {
            let mut pivot = col;
            let mut best = a[col * n + col].abs();
            for row in col + 1..n {
                let v = a[row * n + col].abs();
                if v > best {
                    best = v;
                    pivot = row;
                }
            }
            if best.is_zero() {
                return Err(Error::Singular);
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                }
                perm.swap(col, pivot);
                swaps += 1;
            }
            let p = a[col * n + col].clone();
            for row in col + 1..n {
                let factor = a[row * n + col].clone() / p.clone();
                if factor.is_zero() {
                    continue;
                }
                for j in col + 1..n {
                    let upd = factor.clone() * a[col * n + j].clone();
                    a[row * n + j] = a[row * n + j].clone() - upd;
                }
                a[row * n + col] = factor;
            }
        }
        Ok(Self {
            n,
            lu: a,
            perm,
            swaps,
        })
    }

    pub fn det(&self) -> T {
        let mut d = if self.swaps % 2 == 0 {
            T::one()
        } else {
            -T::one()
        };
        for i in 0..self.n {
            d = d * self.lu[i * self.n + i].clone();
        }
        d
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y: Vec<T> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                let upd = self.lu[i * n + j].clone() * y[j].clone();
                y[i] = y[i].clone() - upd;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let upd = self.lu[i * n + j].clone() * y[j].clone();
                y[i] = y[i].clone() - upd;
            }
            y[i] = y[i].clone() / self.lu[i * n + i].clone();
        }
        y
    }
}

/// Determinant by cofactor expansion along the first row. Exponential cost;
/// only used as an independent oracle on tiny matrices.
pub fn det_cofactor<T: Scalar>(m: &Matrix<T>) -> T {
    assert!(m.is_square());
    match m.rows() {
        0 => T::one(),
        1 => m[(0, 0)].clone(),
        2 => m[(0, 0)].clone() * m[(1, 1)].clone() - m[(0, 1)].clone() * m[(1, 0)].clone(),
        n => (0..n).fold(T::zero(), |acc, j| {
            let term = m[(0, j)].clone() * det_cofactor(&m.minor(0, j));
            if j % 2 == 0 {
                acc + term
            } else {
                acc - term
            }
        }),
    }
}
