//! Exact linear algebra on `Λ ≅ ℤ^m`: classes, central charges, quadratic
//! forms, kernel projections and the `GL₂⁺` action.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{self, dot, QMatrix};
use crate::phase::PhasePoint;
use crate::rational::{
    format_rational, primitive_integer_vector, rat, rational_sqrt, serde_rational, to_f64, QComplex, Rational,
};

/// An element of the lattice `Λ`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Class(pub Vec<i64>);

impl Class {
    pub fn zero(rank: usize) -> Self {
        Class(vec![0; rank])
    }

    pub fn basis(rank: usize, i: usize) -> Self {
        let mut v = vec![0; rank];
        v[i] = 1;
        Class(v)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn to_rational(&self) -> Vec<Rational> {
        self.0.iter().map(|&x| rat(x)).collect()
    }

    pub fn add(&self, other: &Class) -> Class {
        Class(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Class) -> Class {
        Class(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Class {
        Class(self.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, k: i64) -> Class {
        Class(self.0.iter().map(|a| a * k).collect())
    }

    /// Componentwise `0 ≤ self ≤ bound`.
    pub fn within(&self, bound: &Class) -> bool {
        self.0.iter().zip(&bound.0).all(|(&a, &b)| 0 <= a && a <= b)
    }

    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }
}

impl fmt::Debug for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A linear map `Λ → ℂ`, stored as its real and imaginary rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CentralCharge {
    re: Vec<Rational>,
    im: Vec<Rational>,
}

impl CentralCharge {
    pub fn new(re: Vec<Rational>, im: Vec<Rational>) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::DimensionMismatch { expected: re.len(), found: im.len() });
        }
        Ok(Self { re, im })
    }

    pub fn from_values(values: &[QComplex]) -> Self {
        Self {
            re: values.iter().map(|z| z.re.clone()).collect(),
            im: values.iter().map(|z| z.im.clone()).collect(),
        }
    }

    pub fn zero(rank: usize) -> Self {
        Self { re: vec![Rational::zero(); rank], im: vec![Rational::zero(); rank] }
    }

    pub fn from_matrix(m: &QMatrix) -> Result<Self> {
        if m.rows() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: m.rows() });
        }
        Self::new(m.row(0).to_vec(), m.row(1).to_vec())
    }

    pub fn rank(&self) -> usize {
        self.re.len()
    }

    pub fn re(&self) -> &[Rational] {
        &self.re
    }

    pub fn im(&self) -> &[Rational] {
        &self.im
    }

    /// `Z(e_j)`.
    pub fn column(&self, j: usize) -> QComplex {
        QComplex::new(self.re[j].clone(), self.im[j].clone())
    }

    pub fn columns(&self) -> Vec<QComplex> {
        (0..self.rank()).map(|j| self.column(j)).collect()
    }

    pub fn as_matrix(&self) -> QMatrix {
        QMatrix::from_rows(vec![self.re.clone(), self.im.clone()]).expect("rows of equal length")
    }

    pub fn evaluate(&self, v: &Class) -> Result<QComplex> {
        if v.rank() != self.rank() {
            return Err(Error::DimensionMismatch { expected: self.rank(), found: v.rank() });
        }
        Ok(self.evaluate_vec(&v.to_rational()))
    }

    pub fn evaluate_vec(&self, v: &[Rational]) -> QComplex {
        debug_assert_eq!(v.len(), self.rank());
        QComplex::new(dot(&self.re, v), dot(&self.im, v))
    }

    /// Real rank of `Z` as a map `Λ_ℝ → ℝ²`.
    pub fn real_rank(&self) -> usize {
        self.as_matrix().rank()
    }

    pub fn add(&self, other: &CentralCharge) -> Result<CentralCharge> {
        if self.rank() != other.rank() {
            return Err(Error::DimensionMismatch { expected: self.rank(), found: other.rank() });
        }
        Ok(Self {
            re: self.re.iter().zip(&other.re).map(|(a, b)| a + b).collect(),
            im: self.im.iter().zip(&other.im).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, k: &Rational) -> CentralCharge {
        Self { re: self.re.iter().map(|a| a * k).collect(), im: self.im.iter().map(|a| a * k).collect() }
    }

    /// `g ∘ Z` for a real 2×2 matrix `g` acting on `ℂ = ℝ²`.
    pub fn compose_left(&self, g: &QMatrix) -> CentralCharge {
        let m = g.mul(&self.as_matrix()).expect("2×2 times 2×m");
        Self::from_matrix(&m).expect("two rows")
    }

    /// `Z ∘ S` for an `m × n` matrix `S` (change of lattice coordinates).
    pub fn compose_right(&self, s: &QMatrix) -> Result<CentralCharge> {
        Self::from_matrix(&self.as_matrix().mul(s)?)
    }

    /// Appends the values of `Z` on new basis vectors.
    pub fn extended(&self, values: &[QComplex]) -> CentralCharge {
        let mut out = self.clone();
        for z in values {
            out.re.push(z.re.clone());
            out.im.push(z.im.clone());
        }
        out
    }

    /// Real part as a charge with zero imaginary row, and vice versa.
    pub fn real_part(&self) -> CentralCharge {
        Self { re: self.re.clone(), im: vec![Rational::zero(); self.rank()] }
    }

    pub fn imaginary_part(&self) -> CentralCharge {
        Self { re: vec![Rational::zero(); self.rank()], im: self.im.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.iter().chain(&self.im).all(Zero::is_zero)
    }
}

impl fmt::Debug for CentralCharge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols: Vec<String> = self.columns().iter().map(|z| z.to_string()).collect();
        write!(f, "Z[{}]", cols.join(", "))
    }
}

impl Serialize for CentralCharge {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde_rational::matrix::serialize(&[self.re.clone(), self.im.clone()], s)
    }
}

impl<'de> Deserialize<'de> for CentralCharge {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = serde_rational::matrix::deserialize(d)?;
        if rows.len() != 2 {
            return Err(serde::de::Error::custom("central charge needs exactly two rows [re, im]"));
        }
        let mut it = rows.into_iter();
        let re = it.next().unwrap();
        let im = it.next().unwrap();
        CentralCharge::new(re, im).map_err(serde::de::Error::custom)
    }
}

/// A quadratic form `Q(v) = vᵀ G v` with symmetric rational Gram matrix `G`.
/// `bilinear(u, v) = uᵀ G v`, so `Q(v) = bilinear(v, v)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadraticForm {
    gram: QMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub null: usize,
}

impl Signature {
    pub fn as_tuple(&self) -> (usize, usize, usize) {
        (self.positive, self.negative, self.null)
    }
}

impl QuadraticForm {
    pub fn new(gram: QMatrix) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::DimensionMismatch { expected: gram.rows(), found: gram.cols() });
        }
        if !gram.is_symmetric() {
            return Err(Error::Invalid("Gram matrix is not symmetric".into()));
        }
        Ok(Self { gram })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::new(QMatrix::from_i64(rows)).expect("symmetric literal")
    }

    pub fn diagonal(entries: &[Rational]) -> Self {
        Self { gram: QMatrix::diagonal(entries) }
    }

    /// `Q(x, y) = xy`, Gram `[[0, 1/2], [1/2, 0]]`.
    pub fn hyperbolic_xy() -> Self {
        let h = Rational::new(1.into(), 2.into());
        Self {
            gram: QMatrix::from_rows(vec![vec![Rational::zero(), h.clone()], vec![h, Rational::zero()]]).unwrap(),
        }
    }

    pub fn gram(&self) -> &QMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn bilinear(&self, u: &[Rational], v: &[Rational]) -> Rational {
        dot(u, &self.gram.mul_vec(v).expect("dimension checked by caller"))
    }

    pub fn value(&self, v: &[Rational]) -> Rational {
        self.bilinear(v, v)
    }

    pub fn value_class(&self, v: &Class) -> Rational {
        self.value(&v.to_rational())
    }

    /// `Bᵀ G B` for basis vectors `B` given as columns.
    pub fn restricted(&self, basis: &[Vec<Rational>]) -> QMatrix {
        let k = basis.len();
        let mut m = QMatrix::zeros(k, k);
        let gb: Vec<Vec<Rational>> = basis.iter().map(|b| self.gram.mul_vec(b).expect("rank")).collect();
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = dot(&basis[i], &gb[j]);
            }
        }
        m
    }

    pub fn negated(&self) -> QuadraticForm {
        Self { gram: self.gram.scale(&-Rational::one()) }
    }

    pub fn add(&self, other: &QuadraticForm) -> Result<QuadraticForm> {
        Ok(Self { gram: self.gram.add(&other.gram)? })
    }

    /// `Sᵀ G S`.
    pub fn congruent(&self, s: &QMatrix) -> Result<QuadraticForm> {
        Ok(Self { gram: s.transpose().mul(&self.gram)?.mul(s)? })
    }

    /// `|Z(v)|²` as a quadratic form.
    pub fn charge_norm(z: &CentralCharge) -> QuadraticForm {
        let zm = z.as_matrix();
        Self { gram: zm.transpose().mul(&zm).expect("2×m") }
    }

    pub fn radical(&self) -> Vec<Vec<Rational>> {
        self.gram.nullspace().into_iter().map(|v| primitive(&v)).collect()
    }
}

impl fmt::Debug for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{:?}", self.gram)
    }
}

impl Serialize for QuadraticForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.gram.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadraticForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let g = QMatrix::deserialize(d)?;
        QuadraticForm::new(g).map_err(serde::de::Error::custom)
    }
}

/// Rescales to a primitive integer vector with positive leading entry; the
/// zero vector (or an overflowing one) is returned unchanged.
fn primitive(v: &[Rational]) -> Vec<Rational> {
    match primitive_integer_vector(v) {
        Some(ints) => ints.into_iter().map(rat).collect(),
        None => v.to_vec(),
    }
}

/// Sylvester inertia `(n₊, n₋, n₀)` from an exact congruence diagonalization.
pub fn signature(q: &QuadraticForm) -> Signature {
    let d = matrix::congruence_diagonal(q.gram());
    Signature {
        positive: d.iter().filter(|x| x.is_positive()).count(),
        negative: d.iter().filter(|x| x.is_negative()).count(),
        null: d.iter().filter(|x| x.is_zero()).count(),
    }
}

/// Basis of `Ker Z ⊗ ℚ`, as primitive integer vectors.
pub fn kernel(z: &CentralCharge) -> Vec<Vec<Rational>> {
    z.as_matrix().nullspace().into_iter().map(|v| primitive(&v)).collect()
}

fn check_independent(q: &QuadraticForm, basis: &[Vec<Rational>]) -> Result<()> {
    if let Some(b) = basis.iter().find(|b| b.len() != q.rank()) {
        return Err(Error::DimensionMismatch { expected: q.rank(), found: b.len() });
    }
    if basis.is_empty() {
        return Ok(());
    }
    let m = QMatrix::from_rows(basis.to_vec())?;
    if m.rank() < basis.len() {
        return Err(Error::DependentBasis);
    }
    Ok(())
}

/// A vector in the span of `basis` with `Q ≥ 0`, if `Q` is not negative
/// definite there.
pub fn negative_definite_witness(q: &QuadraticForm, basis: &[Vec<Rational>]) -> Result<Option<Vec<Rational>>> {
    check_independent(q, basis)?;
    let neg = q.restricted(basis).scale(&-Rational::one());
    Ok(matrix::positive_definite_witness(&neg).map(|c| {
        let mut v = vec![Rational::zero(); q.rank()];
        for (ci, b) in c.iter().zip(basis) {
            for (vj, bj) in v.iter_mut().zip(b) {
                *vj += ci * bj;
            }
        }
        primitive(&v)
    }))
}

pub fn is_negative_definite_on(q: &QuadraticForm, basis: &[Vec<Rational>]) -> Result<bool> {
    Ok(negative_definite_witness(q, basis)?.is_none())
}

fn witness_strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

/// Kernel of `Z` together with the `Q`-orthogonal projection onto it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelData {
    #[serde(with = "serde_rational::matrix")]
    pub kernel_basis: Vec<Vec<Rational>>,
    /// Gram matrix of `-Q` on `kernel_basis`.
    pub neg_gram: QMatrix,
    /// `m × m` matrix of `p`.
    pub projector: QMatrix,
    /// `k × m` matrix sending `v` to the coordinates of `p(v)` in `kernel_basis`.
    pub coefficients: QMatrix,
}

impl KernelData {
    pub fn new(q: &QuadraticForm, z: &CentralCharge) -> Result<Self> {
        if q.rank() != z.rank() {
            return Err(Error::DimensionMismatch { expected: q.rank(), found: z.rank() });
        }
        let basis = kernel(z);
        Self::from_basis(q, basis)
    }

    pub fn from_basis(q: &QuadraticForm, basis: Vec<Vec<Rational>>) -> Result<Self> {
        let m = q.rank();
        if let Some(w) = negative_definite_witness(q, &basis)? {
            return Err(Error::KernelNotNegativeDefinite { witness: witness_strings(&w) });
        }
        let k = basis.len();
        if k == 0 {
            return Ok(Self {
                kernel_basis: basis,
                neg_gram: QMatrix::zeros(0, 0),
                projector: QMatrix::zeros(m, m),
                coefficients: QMatrix::zeros(0, m),
            });
        }
        let kmat = QMatrix::from_columns(&basis)?; // m × k
        let kt_g = kmat.transpose().mul(q.gram())?; // k × m
        let gram_k = kt_g.mul(&kmat)?; // k × k, negative definite
        let inv = gram_k.inverse().expect("definite Gram matrices are invertible");
        let coefficients = inv.mul(&kt_g)?;
        let projector = kmat.mul(&coefficients)?;
        Ok(Self { kernel_basis: basis, neg_gram: gram_k.scale(&-Rational::one()), projector, coefficients })
    }

    pub fn dim(&self) -> usize {
        self.kernel_basis.len()
    }

    pub fn project(&self, v: &[Rational]) -> Vec<Rational> {
        self.projector.mul_vec(v).expect("rank")
    }

    pub fn kernel_coordinates(&self, v: &[Rational]) -> Vec<Rational> {
        self.coefficients.mul_vec(v).expect("rank")
    }

    /// `‖p(v)‖² = -Q(p(v))`.
    pub fn norm_sq(&self, v: &[Rational]) -> Rational {
        let c = self.kernel_coordinates(v);
        dot(&c, &self.neg_gram.mul_vec(&c).expect("k"))
    }

    /// `Q(v - p(v))`, the squared length of `Z(v)` in normalized coordinates.
    pub fn complement_value(&self, q: &QuadraticForm, v: &[Rational]) -> Rational {
        q.value(v) + self.norm_sq(v)
    }
}

/// A `GL₂⁺(ℝ)` element with a chosen lift to the universal cover.
///
/// `phase_lift` is the image of phase `0` under the lifted action; it must be
/// congruent to `arg(g·1)/π` modulo 2.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Gl2Element {
    pub matrix: QMatrix,
    pub phase_lift: f64,
}

const LIFT_TOL: f64 = 1e-9;

impl Gl2Element {
    pub fn new(matrix: QMatrix, phase_lift: f64) -> Result<Self> {
        if matrix.rows() != 2 || matrix.cols() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: matrix.rows() });
        }
        if !matrix.determinant().is_positive() {
            return Err(Error::NonPositiveDeterminant);
        }
        let expected = image_of_one(&matrix).arg_over_pi();
        let diff = (phase_lift - expected).rem_euclid(2.0);
        if diff.min(2.0 - diff) > LIFT_TOL {
            return Err(Error::BadPhaseLift { lift: phase_lift, expected });
        }
        Ok(Self { matrix, phase_lift })
    }

    /// The lift sending phase 0 into `(-1, 1]`.
    pub fn principal(matrix: QMatrix) -> Result<Self> {
        if matrix.rows() != 2 || matrix.cols() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: matrix.rows() });
        }
        let lift = image_of_one(&matrix).arg_over_pi();
        Self::new(matrix, lift)
    }

    pub fn identity() -> Self {
        Self { matrix: QMatrix::identity(2), phase_lift: 0.0 }
    }

    /// `-1`, lifted so that every phase moves up by one (the shift `[1]`).
    pub fn shift_by_one() -> Self {
        Self { matrix: QMatrix::identity(2).scale(&-Rational::one()), phase_lift: 1.0 }
    }

    pub fn scaling(k: &Rational) -> Result<Self> {
        if !k.is_positive() {
            return Err(Error::NonPositiveDeterminant);
        }
        Ok(Self { matrix: QMatrix::identity(2).scale(k), phase_lift: 0.0 })
    }

    /// Multiplication by the complex number `c ≠ 0`, principal lift.
    pub fn complex_multiplication(c: &QComplex) -> Result<Self> {
        if c.is_zero() {
            return Err(Error::NonPositiveDeterminant);
        }
        let m = QMatrix::from_rows(vec![vec![c.re.clone(), -c.im.clone()], vec![c.im.clone(), c.re.clone()]])?;
        Self::principal(m)
    }

    pub fn apply(&self, z: &QComplex) -> QComplex {
        let v = self.matrix.mul_vec(&[z.re.clone(), z.im.clone()]).expect("2×2");
        QComplex::new(v[0].clone(), v[1].clone())
    }

    /// Lifted action on real phases.
    pub fn act_value(&self, phi: f64) -> f64 {
        let base = phi.floor();
        let frac = phi - base;
        let angle = frac * std::f64::consts::PI;
        let m = self.matrix.to_f64();
        let (x, y) = (angle.cos(), angle.sin());
        let gx = m[0][0] * x + m[0][1] * y;
        let gy = m[1][0] * x + m[1][1] * y;
        let theta = gy.atan2(gx) / std::f64::consts::PI;
        // Representative of θ mod 2 in [lift, lift + 1): orientation-preserving
        // maps send the half-turn [0, 1) onto a half-turn starting at the lift.
        let k = ((self.phase_lift - theta - 1e-12) / 2.0).ceil();
        theta + 2.0 * k + base
    }

    /// Exact image of a phase: the representative charge moves by `g`, the
    /// integer shift is read off the lifted value.
    pub fn act_phase(&self, p: &PhasePoint) -> PhasePoint {
        let w = self.apply(&p.charge);
        let charge = if w.in_upper_half_plane() { w } else { -&w };
        let base = PhasePoint { charge: charge.clone(), shift: 0 }.value();
        let target = self.act_value(p.value());
        let shift = (target - base).round() as i64;
        PhasePoint { charge, shift }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Gl2Element) -> Gl2Element {
        let matrix = self.matrix.mul(&other.matrix).expect("2×2");
        let phase_lift = self.act_value(other.phase_lift);
        Gl2Element { matrix, phase_lift }
    }

    pub fn determinant(&self) -> Rational {
        self.matrix.determinant()
    }
}

impl fmt::Debug for Gl2Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{:?} lift {}", self.matrix, self.phase_lift)
    }
}

fn image_of_one(m: &QMatrix) -> QComplex {
    QComplex::new(m[(0, 0)].clone(), m[(1, 0)].clone())
}

/// `g̃.(Z, phases) = (g ∘ Z, g̃.phases)`.
pub fn gl2_act(g: &Gl2Element, z: &CentralCharge, phases: &[PhasePoint]) -> Result<(CentralCharge, Vec<PhasePoint>)> {
    if !g.determinant().is_positive() {
        return Err(Error::NonPositiveDeterminant);
    }
    Ok((z.compose_left(&g.matrix), phases.iter().map(|p| g.act_phase(p)).collect()))
}

/// `g = diag(√d₁, √d₂) · U` with `U` rational unit upper triangular; the
/// square roots are kept symbolic through `scale_squares`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizingMap {
    pub unipotent: QMatrix,
    #[serde(with = "serde_rational::vec")]
    pub scale_squares: Vec<Rational>,
}

impl NormalizingMap {
    /// The map as an exact `GL₂⁺` element, when both scales are rational.
    pub fn exact(&self) -> Option<Gl2Element> {
        let a = rational_sqrt(&self.scale_squares[0])?;
        let b = rational_sqrt(&self.scale_squares[1])?;
        let d = QMatrix::diagonal(&[a, b]);
        Gl2Element::principal(d.mul(&self.unipotent).ok()?).ok()
    }

    pub fn to_f64(&self) -> [[f64; 2]; 2] {
        let u = self.unipotent.to_f64();
        let a = to_f64(&self.scale_squares[0]).sqrt();
        let b = to_f64(&self.scale_squares[1]).sqrt();
        [[a * u[0][0], a * u[0][1]], [b * u[1][0], b * u[1][1]]]
    }

    pub fn apply_f64(&self, z: &QComplex) -> (f64, f64) {
        let g = self.to_f64();
        let (x, y) = z.to_f64();
        (g[0][0] * x + g[0][1] * y, g[1][0] * x + g[1][1] * y)
    }
}

/// Coordinates in which `Q(v) = |Z_norm(v)|² - ‖p(v)‖²`, `Z_norm = g ∘ Z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub kernel: KernelData,
    #[serde(with = "serde_rational::matrix")]
    pub complement_basis: Vec<Vec<Rational>>,
    /// `S = gᵀ g`: the inner product on `ℂ = ℝ²` pulled back along `g`.
    pub metric: QMatrix,
    pub map: NormalizingMap,
}

impl Normalization {
    /// `⟨g a, g b⟩`.
    pub fn charge_inner(&self, a: &QComplex, b: &QComplex) -> Rational {
        let sb = self.metric.mul_vec(&[b.re.clone(), b.im.clone()]).expect("2×2");
        &a.re * &sb[0] + &a.im * &sb[1]
    }

    pub fn charge_norm_sq(&self, z: &QComplex) -> Rational {
        self.charge_inner(z, z)
    }

    pub fn charge_norm(&self, z: &QComplex) -> f64 {
        to_f64(&self.charge_norm_sq(z)).sqrt()
    }

    /// `Z_norm` exactly, if `g` is rational.
    pub fn normalized_charge(&self, z: &CentralCharge) -> Option<CentralCharge> {
        self.map.exact().map(|g| z.compose_left(&g.matrix))
    }

    /// Checks `Q(eᵢ+eⱼ) - Q(eᵢ) - Q(eⱼ) = 2(⟨Z_norm eᵢ, Z_norm eⱼ⟩ - ⟨p eᵢ, p eⱼ⟩)`
    /// for all basis pairs, in exact arithmetic.
    pub fn verify(&self, q: &QuadraticForm, z: &CentralCharge) -> bool {
        let m = q.rank();
        let two = rat(2);
        let unit = |i: usize| -> Vec<Rational> {
            let mut v = vec![Rational::zero(); m];
            v[i] = Rational::one();
            v
        };
        for i in 0..m {
            for j in 0..m {
                let (ei, ej) = (unit(i), unit(j));
                let sum: Vec<Rational> = ei.iter().zip(&ej).map(|(a, b)| a + b).collect();
                let lhs = q.value(&sum) - q.value(&ei) - q.value(&ej);
                let zc = self.charge_inner(&z.column(i), &z.column(j));
                let ci = self.kernel.kernel_coordinates(&ei);
                let cj = self.kernel.kernel_coordinates(&ej);
                let pp = dot(&ci, &self.kernel.neg_gram.mul_vec(&cj).expect("k"));
                if lhs != &two * (zc - pp) {
                    return false;
                }
            }
        }
        true
    }
}

/// Normalized coordinates for `(Q, Z)`; requires signature `(2, m-2, 0)` and a
/// negative definite kernel.
pub fn normalize(q: &QuadraticForm, z: &CentralCharge) -> Result<Normalization> {
    let m = q.rank();
    if z.rank() != m {
        return Err(Error::DimensionMismatch { expected: m, found: z.rank() });
    }
    let sig = signature(q);
    let expected = (2, m.saturating_sub(2), 0);
    if m < 2 || sig.as_tuple() != expected {
        return Err(Error::SignatureMismatch { expected, found: sig.as_tuple() });
    }
    let kernel = KernelData::new(q, z)?;
    let complement_basis = orthogonal_complement(q, &kernel.kernel_basis)?;
    if complement_basis.len() != 2 {
        return Err(Error::DegenerateOnComplement);
    }
    let a = QMatrix::from_columns(&[
        vec![z.evaluate_vec(&complement_basis[0]).re, z.evaluate_vec(&complement_basis[0]).im],
        vec![z.evaluate_vec(&complement_basis[1]).re, z.evaluate_vec(&complement_basis[1]).im],
    ])?;
    let a_inv = a.inverse().ok_or(Error::DegenerateOnComplement)?;
    let h = q.restricted(&complement_basis);
    let metric = a_inv.transpose().mul(&h)?.mul(&a_inv)?;
    let (unipotent, scale_squares) = matrix::ldl(&metric).ok_or(Error::DegenerateOnComplement)?;
    Ok(Normalization { kernel, complement_basis, metric, map: NormalizingMap { unipotent, scale_squares } })
}

/// `{v : B(v, k) = 0 for all k in basis}`.
pub fn orthogonal_complement(q: &QuadraticForm, basis: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let m = q.rank();
    if basis.is_empty() {
        return Ok(QMatrix::zeros(0, m).nullspace());
    }
    let kt_g = QMatrix::from_rows(basis.to_vec())?.mul(q.gram())?;
    Ok(kt_g.nullspace().into_iter().map(|v| primitive(&v)).collect())
}

/// All integer `x` with `xᵀ M x ≤ bound` for positive definite `M`, in
/// lexicographic order. Fails once more than `limit` points are visited.
pub fn enumerate_ellipsoid(m: &QMatrix, bound: &Rational, limit: u64) -> Result<Vec<Vec<i64>>> {
    let n = m.rows();
    let (l, d) = matrix::ldl(m).ok_or_else(|| Error::Invalid("form is not positive definite".into()))?;
    let mut out = Vec::new();
    if bound.is_negative() {
        return Ok(out);
    }
    let mut x = vec![0i64; n];
    let mut visited = 0u64;
    #[allow(clippy::too_many_arguments)]
    fn level(
        k: usize,
        l: &QMatrix,
        d: &[Rational],
        bound: &Rational,
        partial: Rational,
        x: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
        visited: &mut u64,
        limit: u64,
    ) -> Result<()> {
        let n = x.len();
        // center = -Σ_{j>k} L_kj x_j
        let mut center = Rational::zero();
        for j in k + 1..n {
            center -= &l[(k, j)] * rat(x[j]);
        }
        let slack = (bound - &partial) / &d[k];
        let r = to_f64(&slack).max(0.0).sqrt();
        let c = to_f64(&center);
        let lo = (c - r).floor() as i64 - 1;
        let hi = (c + r).ceil() as i64 + 1;
        for xk in lo..=hi {
            *visited += 1;
            if *visited > limit {
                return Err(Error::BudgetExceeded { required: u128::from(*visited), budget: limit });
            }
            let t = rat(xk) - &center;
            let value = &partial + &d[k] * &t * &t;
            if &value > bound {
                continue;
            }
            x[k] = xk;
            if k == 0 {
                out.push(x.clone());
            } else {
                level(k - 1, l, d, bound, value, x, out, visited, limit)?;
            }
        }
        x[k] = 0;
        Ok(())
    }
    if n == 0 {
        out.push(Vec::new());
        return Ok(out);
    }
    level(n - 1, &l, &d, bound, Rational::zero(), &mut x, &mut out, &mut visited, limit)?;
    out.sort();
    Ok(out)
}
