//! Dense integer matrices with exact (fraction-free) determinant and rational solving.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bigint_serde;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatrixError {
    #[error("ragged matrix literal: row {row} has {found} entries, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn diagonal<I: Into<BigInt>>(entries: impl IntoIterator<Item = I>) -> Self {
        let entries: Vec<BigInt> = entries.into_iter().map(Into::into).collect();
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.into_iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn from_rows<I: Into<BigInt>>(rows: Vec<Vec<I>>) -> Result<Self, MatrixError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != ncols {
                return Err(MatrixError::Ragged {
                    row: r,
                    expected: ncols,
                    found: row.len(),
                });
            }
            data.extend(row.into_iter().map(Into::into));
        }
        Ok(IntMatrix {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    /// Square matrix from rows; panics on ragged or non-square input.
    /// Intended for literals in code and tests.
    pub fn square<I: Into<BigInt>, const N: usize>(rows: [[I; N]; N]) -> Self {
        let rows: Vec<Vec<BigInt>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(Into::into).collect())
            .collect();
        Self::from_rows(rows).expect("square literal")
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<BigInt>]) -> Result<Self, MatrixError> {
        let ncols = columns.len();
        let nrows = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(nrows, ncols);
        for (c, col) in columns.iter().enumerate() {
            if col.len() != nrows {
                return Err(MatrixError::Ragged {
                    row: c,
                    expected: nrows,
                    found: col.len(),
                });
            }
            for (r, v) in col.iter().enumerate() {
                m[(r, c)] = v.clone();
            }
        }
        Ok(m)
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

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<BigInt> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * &other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `aᵀ · self · b`.
    pub fn bilinear(&self, a: &[BigInt], b: &[BigInt]) -> BigInt {
        assert_eq!(self.rows, a.len());
        assert_eq!(self.cols, b.len());
        let mut acc = BigInt::zero();
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            let row: BigInt = self.row(i).iter().zip(b).map(|(m, bj)| m * bj).sum();
            acc += ai * row;
        }
        acc
    }

    pub fn pow(&self, mut e: u64) -> IntMatrix {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| -x).collect(),
        }
    }

    /// Block-diagonal sum `self ⊕ other`.
    pub fn block_sum(&self, other: &IntMatrix) -> IntMatrix {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = self[(r, c)].clone();
            }
        }
        for r in 0..other.rows {
            for c in 0..other.cols {
                out[(self.rows + r, self.cols + c)] = other[(r, c)].clone();
            }
        }
        out
    }

    /// Exact determinant by Bareiss fraction-free elimination.
    pub fn determinant(&self) -> BigInt {
        assert!(self.is_square(), "determinant of a non-square matrix");
        bareiss_determinant(self.to_rows())
    }

    /// Exact inverse over the rationals, `None` when singular.
    pub fn rational_inverse(&self) -> Option<Vec<Vec<BigRational>>> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug: Vec<Vec<BigRational>> = (0..n)
            .map(|r| {
                let mut row: Vec<BigRational> = self
                    .row(r)
                    .iter()
                    .map(|x| BigRational::from_integer(x.clone()))
                    .collect();
                row.extend((0..n).map(|c| {
                    if c == r {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                }));
                row
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !aug[r][col].is_zero())?;
            aug.swap(col, pivot);
            let inv = aug[col][col].recip();
            for x in aug[col].iter_mut() {
                *x *= &inv;
            }
            for r in 0..n {
                if r != col && !aug[r][col].is_zero() {
                    let f = aug[r][col].clone();
                    for c in 0..2 * n {
                        let delta = &f * &aug[col][c];
                        aug[r][c] -= delta;
                    }
                }
            }
        }
        Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
    }

    /// Inverse over the integers; `None` unless the determinant is ±1.
    pub fn integer_inverse(&self) -> Option<IntMatrix> {
        if !self.determinant().abs().is_one() {
            return None;
        }
        let inv = self.rational_inverse()?;
        let rows = inv
            .into_iter()
            .map(|row| row.into_iter().map(|q| q.to_integer()).collect::<Vec<_>>())
            .collect();
        IntMatrix::from_rows(rows).ok()
    }

    pub fn max_abs_entry(&self) -> BigInt {
        self.data
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }
}

pub(crate) fn bareiss_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (r, c): (usize, usize)) -> &BigInt {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut BigInt {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (c, x) in self.row(r).iter().enumerate() {
                if c > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Serialized as a JSON array of arrays of integers.
impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<bigint_serde::Wrapped>> = self
            .to_rows()
            .into_iter()
            .map(|r| r.into_iter().map(bigint_serde::Wrapped).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<bigint_serde::Wrapped>> = Vec::deserialize(deserializer)?;
        let rows: Vec<Vec<BigInt>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|w| w.0).collect())
            .collect();
        IntMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}
