//! Dense matrices over ℚ.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{format_rational, rat, serde_rational, Rational};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch { expected: c, found: bad.len() });
        }
        Ok(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Panics on ragged input; meant for literals in tests and examples.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect())
            .expect("rectangular literal")
    }

    pub fn from_columns(cols: &[Vec<Rational>]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            if col.len() != r {
                return Err(Error::DimensionMismatch { expected: r, found: col.len() });
            }
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        Ok(m)
    }

    pub fn diagonal(entries: &[Rational]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, x) in entries.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
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

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, rhs: &QMatrix) -> Result<QMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: rhs.rows });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn add(&self, rhs: &QMatrix) -> Result<QMatrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &QMatrix) -> Result<QMatrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &QMatrix, f: impl Fn(&Rational, &Rational) -> Rational) -> Result<QMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch { expected: self.rows * self.cols, found: rhs.rows * rhs.cols });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn scale(&self, k: &Rational) -> QMatrix {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * k).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Rows `rows` and columns `cols` of `self`, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> QMatrix {
        let mut m = Self::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m[(a, b)] = self[(i, j)].clone();
            }
        }
        m
    }

    /// Block matrix `[self 0; 0 other]`.
    pub fn direct_sum(&self, other: &QMatrix) -> QMatrix {
        let mut m = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                m[(self.rows + i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        m
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        let v = &m[(r, j)] * &f;
                        m[(i, j)] -= v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : self · x = 0}`, one vector per free column, with the
    /// free coordinate equal to 1.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(row, f)].clone();
                }
                v
            })
            .collect()
    }

    pub fn inverse(&self) -> Option<QMatrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rational::one();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let idx: Vec<usize> = (0..n).collect();
        let cols: Vec<usize> = (n..2 * n).collect();
        Some(r.select(&idx, &cols))
    }

    pub fn determinant(&self) -> Rational {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let mut m = self.clone();
        let n = m.rows;
        let mut det = Rational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[(i, c)].is_zero()) else {
                return Rational::zero();
            };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let piv = m[(c, c)].clone();
            det *= &piv;
            for i in c + 1..n {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = &m[(i, c)] / &piv;
                for j in c..n {
                    let v = &m[(c, j)] * &f;
                    m[(i, j)] -= v;
                }
            }
        }
        det
    }

    /// Solves `self · x = b` for square invertible `self`.
    pub fn solve(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        let inv = self.inverse()?;
        inv.mul_vec(b).ok()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.to_rows()
            .iter()
            .map(|r| r.iter().map(crate::rational::to_f64).collect())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = self.to_rows().iter().map(|r| r.iter().map(format_rational).collect()).collect();
        write!(f, "{rows:?}")
    }
}

impl Serialize for QMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde_rational::matrix::serialize(&self.to_rows(), s)
    }
}

impl<'de> Deserialize<'de> for QMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = serde_rational::matrix::deserialize(d)?;
        QMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Dot product of rational vectors.
pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Symmetric congruence diagonalization: returns `d` such that the form is
/// congruent over ℚ to `diag(d)`. Signs of `d` are the inertia.
pub fn congruence_diagonal(sym: &QMatrix) -> Vec<Rational> {
    assert!(sym.is_square());
    let n = sym.rows();
    let mut a = sym.clone();
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        if a[(k, k)].is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !a[(j, j)].is_zero()) {
                swap_sym(&mut a, k, j);
            } else if let Some(j) = (k + 1..n).find(|&j| !a[(k, j)].is_zero()) {
                // row/col k += row/col j makes the pivot 2 a[k][j].
                for c in 0..n {
                    let v = a[(j, c)].clone();
                    a[(k, c)] += v;
                }
                for r in 0..n {
                    let v = a[(r, j)].clone();
                    a[(r, k)] += v;
                }
            }
        }
        let piv = a[(k, k)].clone();
        diag.push(piv.clone());
        if piv.is_zero() {
            continue;
        }
        for i in k + 1..n {
            if a[(i, k)].is_zero() {
                continue;
            }
            let f = &a[(i, k)] / &piv;
            for c in k..n {
                let v = &a[(k, c)] * &f;
                a[(i, c)] -= v;
            }
            for r in k..n {
                let v = &a[(r, k)] * &f;
                a[(r, i)] -= v;
            }
        }
    }
    diag
}

fn swap_sym(a: &mut QMatrix, i: usize, j: usize) {
    a.swap_rows(i, j);
    let n = a.cols;
    for r in 0..a.rows {
        a.data.swap(r * n + i, r * n + j);
    }
}

/// Tests positive definiteness by unpivoted symmetric elimination. On failure
/// returns coefficients `c` with `cᵀ M c ≤ 0`, `c ≠ 0`.
pub fn positive_definite_witness(sym: &QMatrix) -> Option<Vec<Rational>> {
    let n = sym.rows();
    let mut a = sym.clone();
    // Columns of `t` track the transformed basis: tᵀ M t is upper-left diagonal.
    let mut t = QMatrix::identity(n);
    for k in 0..n {
        let piv = a[(k, k)].clone();
        if !piv.is_positive() {
            return Some(t.column(k));
        }
        for i in k + 1..n {
            if a[(i, k)].is_zero() {
                continue;
            }
            let f = &a[(i, k)] / &piv;
            for c in k..n {
                let v = &a[(k, c)] * &f;
                a[(i, c)] -= v;
            }
            for r in k..n {
                let v = &a[(r, k)] * &f;
                a[(r, i)] -= v;
            }
            for r in 0..n {
                let v = &t[(r, k)] * &f;
                t[(r, i)] -= v;
            }
        }
    }
    None
}

pub fn is_positive_definite(sym: &QMatrix) -> bool {
    positive_definite_witness(sym).is_none()
}

/// `M = Lᵀ D L` with `L` unit upper triangular, for symmetric positive
/// definite `M`; returns `(L, d)`.
pub fn ldl(sym: &QMatrix) -> Option<(QMatrix, Vec<Rational>)> {
    let n = sym.rows();
    let mut a = sym.clone();
    let mut l = QMatrix::identity(n);
    let mut d = Vec::with_capacity(n);
    for k in 0..n {
        let piv = a[(k, k)].clone();
        if !piv.is_positive() {
            return None;
        }
        for j in k + 1..n {
            l[(k, j)] = &a[(k, j)] / &piv;
        }
        for i in k + 1..n {
            if a[(i, k)].is_zero() {
                continue;
            }
            let f = &a[(i, k)] / &piv;
            for c in k..n {
                let v = &a[(k, c)] * &f;
                a[(i, c)] -= v;
            }
        }
        d.push(piv);
    }
    Some((l, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn rref_and_nullspace() {
        let m = QMatrix::from_i64(&[&[-1, -1], &[1, 1]]);
        assert_eq!(m.rank(), 1);
        assert_eq!(m.nullspace(), vec![vec![rat(-1), rat(1)]]);
        let z = QMatrix::zeros(2, 2);
        assert_eq!(z.nullspace().len(), 2);
    }

    #[test]
    fn inverse_and_determinant() {
        let m = QMatrix::from_rows(vec![vec![rat(-1), rat(-1)], vec![rat(1), ratio(1, 2)]]).unwrap();
        assert_eq!(m.determinant(), ratio(1, 2));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), QMatrix::identity(2));
        assert!(QMatrix::from_i64(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn congruence_handles_zero_diagonal() {
        // xy
        let m = QMatrix::from_rows(vec![vec![rat(0), ratio(1, 2)], vec![ratio(1, 2), rat(0)]]).unwrap();
        let d = congruence_diagonal(&m);
        assert_eq!(d.iter().filter(|x| x.is_positive()).count(), 1);
        assert_eq!(d.iter().filter(|x| x.is_negative()).count(), 1);
    }

    #[test]
    fn definiteness_witness() {
        let m = QMatrix::from_i64(&[&[1, 2], &[2, 1]]);
        let c = positive_definite_witness(&m).unwrap();
        let mc = m.mul_vec(&c).unwrap();
        assert!(!dot(&c, &mc).is_positive());
        assert!(is_positive_definite(&QMatrix::from_i64(&[&[2, 1], &[1, 2]])));
    }

    #[test]
    fn ldl_reconstructs() {
        let m = QMatrix::from_i64(&[&[4, 2, 0], &[2, 3, 1], &[0, 1, 5]]);
        let (l, d) = ldl(&m).unwrap();
        let back = l.transpose().mul(&QMatrix::diagonal(&d)).unwrap().mul(&l).unwrap();
        assert_eq!(back, m);
    }
}
