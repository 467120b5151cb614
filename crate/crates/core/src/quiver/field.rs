//! Dense matrices and subspaces over a small prime field `𝔽_q`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn is_small_prime(q: u8) -> bool {
    q >= 2 && (2..q as u16).take_while(|d| d * d <= q as u16).all(|d| !(q as u16).is_multiple_of(d))
}

fn inv_mod(a: u8, q: u8) -> u8 {
    debug_assert!(!a.is_multiple_of(q));
    // q is tiny, so a linear search beats extended Euclid for clarity.
    (1..q).find(|&b| (a as u16 * b as u16) % q as u16 == 1).expect("q prime")
}

/// Row-major matrix over `𝔽_q`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpMatrix {
    q: u8,
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl FpMatrix {
    pub fn zeros(q: u8, rows: usize, cols: usize) -> Self {
        Self { q, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(q: u8, n: usize) -> Self {
        let mut m = Self::zeros(q, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Entries are reduced mod `q`; negative inputs are allowed.
    pub fn from_rows(q: u8, rows: usize, cols: usize, entries: &[Vec<i64>]) -> Result<Self> {
        if entries.len() != rows {
            return Err(Error::DimensionMismatch { expected: rows, found: entries.len() });
        }
        let mut m = Self::zeros(q, rows, cols);
        for (i, row) in entries.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: row.len() });
            }
            for (j, &x) in row.iter().enumerate() {
                m.set(i, j, x.rem_euclid(q as i64) as u8);
            }
        }
        Ok(m)
    }

    pub fn field(&self) -> u8 {
        self.q
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u8) {
        self.data[i * self.cols + j] = v % self.q;
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|&x| x as i64).collect()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn from_row_vectors(q: u8, cols: usize, vectors: &[Vec<u8>]) -> Self {
        let mut m = Self::zeros(q, vectors.len(), cols);
        for (i, v) in vectors.iter().enumerate() {
            m.data[i * cols..(i + 1) * cols].copy_from_slice(v);
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.q, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, rhs: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix shapes");
        let q = self.q as u32;
        let mut out = Self::zeros(self.q, self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let s: u32 = (0..self.cols).map(|k| self.get(i, k) as u32 * rhs.get(k, j) as u32).sum();
                out.data[i * rhs.cols + j] = (s % q) as u8;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(self.cols, v.len(), "matrix shapes");
        let q = self.q as u32;
        (0..self.rows)
            .map(|i| ((0..self.cols).map(|k| self.get(i, k) as u32 * v[k] as u32).sum::<u32>() % q) as u8)
            .collect()
    }

    /// Reduced row echelon form with zero rows dropped, plus pivot columns.
    pub fn rref(&self) -> (FpMatrix, Vec<usize>) {
        let q = self.q;
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..a.cols {
            if r == a.rows {
                break;
            }
            let Some(p) = (r..a.rows).find(|&i| a.get(i, c) != 0) else { continue };
            for j in 0..a.cols {
                a.data.swap(r * a.cols + j, p * a.cols + j);
            }
            let inv = inv_mod(a.get(r, c), q);
            for j in 0..a.cols {
                let v = (a.get(r, j) as u16 * inv as u16 % q as u16) as u8;
                a.set(r, j, v);
            }
            for i in 0..a.rows {
                let f = a.get(i, c);
                if i != r && f != 0 {
                    for j in 0..a.cols {
                        let v = (a.get(i, j) as u16 + (q - f) as u16 * a.get(r, j) as u16) % q as u16;
                        a.set(i, j, v as u8);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        let mut out = Self::zeros(q, r, a.cols);
        out.data.copy_from_slice(&a.data[..r * a.cols]);
        (out, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}{:?}", self.q, self.to_rows())
    }
}

/// A subspace of `𝔽_q^n`, kept as its reduced row echelon basis so that equal
/// subspaces have equal representations.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    basis: FpMatrix,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(q: u8, n: usize) -> Self {
        Self { basis: FpMatrix::zeros(q, 0, n), pivots: Vec::new() }
    }

    pub fn full(q: u8, n: usize) -> Self {
        Self { basis: FpMatrix::identity(q, n), pivots: (0..n).collect() }
    }

    pub fn span(q: u8, n: usize, vectors: &[Vec<u8>]) -> Self {
        let (basis, pivots) = FpMatrix::from_row_vectors(q, n, vectors).rref();
        Self { basis, pivots }
    }

    pub fn from_matrix(m: &FpMatrix) -> Self {
        let (basis, pivots) = m.rref();
        Self { basis, pivots }
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn field(&self) -> u8 {
        self.basis.field()
    }

    pub fn basis(&self) -> &FpMatrix {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn basis_vectors(&self) -> Vec<Vec<u8>> {
        (0..self.dim()).map(|i| self.basis.row(i).to_vec()).collect()
    }

    /// `v` minus its component along the pivots; zero iff `v` lies in the span.
    pub fn reduce(&self, v: &[u8]) -> Vec<u8> {
        let q = self.field() as u16;
        let mut w = v.to_vec();
        for (i, &p) in self.pivots.iter().enumerate() {
            let f = w[p] as u16;
            if f != 0 {
                for (j, x) in w.iter_mut().enumerate() {
                    *x = ((*x as u16 + (q - f) * self.basis.get(i, j) as u16) % q) as u8;
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis_vectors().iter().all(|v| self.contains(v))
    }

    /// Coordinates of `v ∈ self` in the echelon basis (its pivot entries).
    pub fn coordinates(&self, v: &[u8]) -> Vec<u8> {
        self.pivots.iter().map(|&p| v[p]).collect()
    }

    /// Columns not used as pivots: a coordinate complement.
    pub fn complement_coordinates(&self) -> Vec<usize> {
        (0..self.ambient_dim()).filter(|j| !self.pivots.contains(j)).collect()
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut vs = self.basis_vectors();
        vs.extend(other.basis_vectors());
        Subspace::span(self.field(), self.ambient_dim(), &vs)
    }

    /// Zassenhaus: echelonize `[[A, A], [B, 0]]`; rows `(0, y)` span `A ∩ B`.
    pub fn intersection(&self, other: &Subspace) -> Subspace {
        let n = self.ambient_dim();
        let mut rows = Vec::new();
        for v in self.basis_vectors() {
            rows.push([v.clone(), v].concat());
        }
        for v in other.basis_vectors() {
            rows.push([v, vec![0; n]].concat());
        }
        let (r, pivots) = FpMatrix::from_row_vectors(self.field(), 2 * n, &rows).rref();
        let vs: Vec<Vec<u8>> = pivots
            .iter()
            .enumerate()
            .filter(|(_, &p)| p >= n)
            .map(|(i, _)| r.row(i)[n..].to_vec())
            .collect();
        Subspace::span(self.field(), n, &vs)
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span{:?}", self.basis_vectors())
    }
}

/// Number of `k`-dimensional subspaces of `𝔽_q^n` (Gaussian binomial).
pub fn gaussian_binomial(n: usize, k: usize, q: u8) -> u128 {
    if k > n {
        return 0;
    }
    let q = q as u128;
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num = num.saturating_mul(q.saturating_pow((n - i) as u32).saturating_sub(1));
        den = den.saturating_mul(q.saturating_pow((i + 1) as u32) - 1);
    }
    num / den
}

pub fn subspace_count(n: usize, q: u8) -> u128 {
    (0..=n).map(|k| gaussian_binomial(n, k, q)).fold(0u128, u128::saturating_add)
}

/// Every subspace of `𝔽_q^n`, ordered by dimension, then pivot set
/// (lexicographic), then free entries counted in base `q`.
pub fn all_subspaces(q: u8, n: usize) -> Vec<Subspace> {
    let mut out = Vec::new();
    for k in 0..=n {
        for pivots in combinations(n, k) {
            let free: Vec<(usize, usize)> = (0..k)
                .flat_map(|i| {
                    let pivots = &pivots;
                    (pivots[i] + 1..n).filter(move |j| !pivots.contains(j)).map(move |j| (i, j))
                })
                .collect();
            let total = (q as u64).pow(free.len() as u32);
            for code in 0..total {
                let mut m = FpMatrix::zeros(q, k, n);
                for (i, &p) in pivots.iter().enumerate() {
                    m.set(i, p, 1);
                }
                let mut c = code;
                for &(i, j) in &free {
                    m.set(i, j, (c % q as u64) as u8);
                    c /= q as u64;
                }
                out.push(Subspace { basis: m, pivots: pivots.clone() });
            }
        }
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Serialized form: rows of integers.
impl Serialize for FpMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for FpMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(_: D) -> std::result::Result<Self, D::Error> {
        Err(serde::de::Error::custom("FpMatrix needs its field and shape; parse through the representation document"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subspace_counts_match_gaussian_binomials() {
        for q in [2u8, 3, 5] {
            for n in 0..=3 {
                let all = all_subspaces(q, n);
                assert_eq!(all.len() as u128, subspace_count(n, q), "q={q} n={n}");
                let mut sorted = all.clone();
                sorted.sort();
                sorted.dedup();
                assert_eq!(sorted.len(), all.len());
            }
        }
        assert_eq!(gaussian_binomial(2, 1, 2), 3);
        assert_eq!(gaussian_binomial(4, 2, 2), 35);
    }

    #[test]
    fn intersection_and_sum() {
        let a = Subspace::span(2, 3, &[vec![1, 0, 0], vec![0, 1, 0]]);
        let b = Subspace::span(2, 3, &[vec![0, 1, 0], vec![0, 0, 1]]);
        let i = a.intersection(&b);
        assert_eq!(i, Subspace::span(2, 3, &[vec![0, 1, 0]]));
        assert_eq!(a.sum(&b), Subspace::full(2, 3));
        assert!(a.contains(&[1, 1, 0]));
        assert!(!a.contains(&[1, 1, 1]));
    }

    #[test]
    fn primes() {
        assert!(is_small_prime(2) && is_small_prime(3) && is_small_prime(5) && is_small_prime(251));
        assert!(!is_small_prime(1) && !is_small_prime(4) && !is_small_prime(9));
    }
}
