//! Support certificates for charges on a lattice with a Mukai-type pairing:
//! roots of square `-2`, the constant `C`, and `Q = (v,v) + (2/C²)|Z(v)|²`.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{enumerate_ellipsoid, kernel, negative_definite_witness, orthogonal_complement, CentralCharge, Class, KernelData, QuadraticForm};
use crate::matrix::QMatrix;
use crate::rational::{format_rational, rat, rational_sqrt, serde_rational, to_f64, Rational};

/// Points visited by a single root search before giving up.
pub const SEARCH_LIMIT: u64 = 5_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MukaiLattice {
    pub gram: QMatrix,
}

impl MukaiLattice {
    pub fn new(gram: QMatrix) -> Result<Self> {
        if !gram.is_square() || !gram.is_symmetric() {
            return Err(Error::Invalid("pairing matrix must be square and symmetric".into()));
        }
        if gram.determinant().is_zero() {
            return Err(Error::Invalid("pairing is degenerate".into()));
        }
        Ok(Self { gram })
    }

    /// `U`: `((a,b),(c,d)) = ad + bc`.
    pub fn hyperbolic_plane() -> Self {
        Self { gram: QMatrix::from_i64(&[&[0, 1], &[1, 0]]) }
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn form(&self) -> QuadraticForm {
        QuadraticForm::new(self.gram.clone()).expect("symmetric")
    }

    pub fn square(&self, v: &Class) -> Rational {
        self.form().value_class(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Class>,
    /// Roots listed are exactly those with `|Z(δ)| ≤ bound`.
    #[serde(with = "serde_rational")]
    pub bound: Rational,
}

/// Gram matrix of `|Z(v)|²`.
fn charge_gram(z: &CentralCharge) -> QMatrix {
    QuadraticForm::charge_norm(z).gram().clone()
}

/// Upper bound for `(c,c) / |Z(c)|²` over `c ∈ K⊥`, by Gershgorin.
fn complement_ratio_bound(l: &MukaiLattice, z: &CentralCharge, kd: &KernelData) -> Result<Rational> {
    let form = l.form();
    let comp = orthogonal_complement(&form, &kd.kernel_basis)?;
    let cols: Vec<Vec<Rational>> = comp.iter().map(|f| {
        let c = z.evaluate_vec(f);
        vec![c.re, c.im]
    }).collect();
    let h = form.restricted(&comp);
    let t = match comp.len() {
        0 => return Ok(Rational::zero()),
        1 => {
            let zf = z.evaluate_vec(&comp[0]).norm_sqr();
            if zf.is_zero() {
                return Err(Error::DegenerateOnComplement);
            }
            QMatrix::from_rows(vec![vec![&h[(0, 0)] / zf]])?
        }
        2 => {
            let a_inv = QMatrix::from_columns(&cols)?.inverse().ok_or(Error::DegenerateOnComplement)?;
            a_inv.transpose().mul(&h)?.mul(&a_inv)?
        }
        _ => return Err(Error::DegenerateOnComplement),
    };
    let mut best = Rational::zero();
    for i in 0..t.rows() {
        let mut r = t[(i, i)].clone();
        for j in 0..t.cols() {
            if i != j {
                r += t[(i, j)].abs();
            }
        }
        best = best.max(r);
    }
    Ok(best)
}

/// `|Z(v)|² + ‖p(v)‖²`, positive definite when `Ker Z` is negative definite.
fn majorant(z: &CentralCharge, kd: &KernelData) -> Result<QMatrix> {
    let g = charge_gram(z);
    if kd.dim() == 0 {
        return Ok(g);
    }
    g.add(&kd.coefficients.transpose().mul(&kd.neg_gram)?.mul(&kd.coefficients)?)
}

/// All `δ` with `(δ,δ) = -2` and `|Z(δ)| ≤ bound`.
pub fn enumerate_roots_near(l: &MukaiLattice, z: &CentralCharge, bound: &Rational) -> Result<RootSet> {
    if z.rank() != l.rank() {
        return Err(Error::DimensionMismatch { expected: l.rank(), found: z.rank() });
    }
    let form = l.form();
    let kd = KernelData::new(&form, z)?;
    let b2 = bound * bound;
    // (δ,δ) = (c,c) - ‖p(δ)‖² with c ∈ K⊥, so ‖p(δ)‖² ≤ λ⁺ |Z(δ)|² + 2.
    let lambda = complement_ratio_bound(l, z, &kd)?;
    let reach = &b2 + &lambda * &b2 + rat(2);
    let m = majorant(z, &kd)?;
    let zg = charge_gram(z);
    let mut roots = Vec::new();
    for x in enumerate_ellipsoid(&m, &reach, SEARCH_LIMIT)? {
        let v = Class(x);
        if form.value_class(&v) != rat(-2) {
            continue;
        }
        let r = v.to_rational();
        let zz = crate::matrix::dot(&r, &zg.mul_vec(&r)?);
        if zz <= b2 {
            roots.push(v);
        }
    }
    roots.sort();
    Ok(RootSet { roots, bound: bound.clone() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CKind {
    /// Minimum of `|Z(δ)|` over roots with `|Z(δ)| ≤ 1`.
    Attained,
    /// No root has `|Z(δ)| < 1`; `C = 1`.
    Sentinel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CValue {
    #[serde(with = "serde_rational")]
    pub c_squared: Rational,
    pub kind: CKind,
    pub witness: Option<Class>,
}

impl CValue {
    pub fn value(&self) -> f64 {
        to_f64(&self.c_squared).sqrt()
    }

    /// `C` exactly: a rational, or `sqrt(C²)`.
    pub fn exact(&self) -> String {
        match rational_sqrt(&self.c_squared) {
            Some(r) => format_rational(&r),
            None => format!("sqrt({})", format_rational(&self.c_squared)),
        }
    }
}

/// Integer points of `Ker Z` with `(δ,δ) = -2`.
fn kernel_roots(l: &MukaiLattice, z: &CentralCharge, kd: &KernelData) -> Result<Vec<Class>> {
    if kd.dim() == 0 {
        return Ok(Vec::new());
    }
    let m = majorant(z, kd)?;
    let form = l.form();
    Ok(enumerate_ellipsoid(&m, &rat(2), SEARCH_LIMIT)?
        .into_iter()
        .map(Class)
        .filter(|v| z.evaluate(v).map(|c| c.is_zero()).unwrap_or(false) && form.value_class(v) == rat(-2))
        // one of each pair ±δ: first nonzero coordinate positive
        .filter(|v| v.0.iter().find(|x| **x != 0).is_some_and(|x| *x > 0))
        .collect())
}

pub fn compute_c(l: &MukaiLattice, z: &CentralCharge) -> Result<CValue> {
    let kd = KernelData::new(&l.form(), z)?;
    if let Some(w) = kernel_roots(l, z, &kd)?.into_iter().next() {
        return Err(Error::KernelRoot { witness: w });
    }
    let roots = enumerate_roots_near(l, z, &Rational::one())?;
    let zg = charge_gram(z);
    let mut best: Option<(Rational, Class)> = None;
    for d in &roots.roots {
        let r = d.to_rational();
        let v = crate::matrix::dot(&r, &zg.mul_vec(&r)?);
        if best.as_ref().is_none_or(|(b, _)| &v < b) {
            best = Some((v, d.clone()));
        }
    }
    Ok(match best {
        Some((v, d)) => CValue { c_squared: v, kind: CKind::Attained, witness: Some(d) },
        None => CValue { c_squared: Rational::one(), kind: CKind::Sentinel, witness: None },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootCheck {
    pub root: Class,
    #[serde(with = "serde_rational")]
    pub charge_norm_sq: Rational,
    #[serde(with = "serde_rational")]
    pub q: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportCertificate {
    pub q: QuadraticForm,
    pub c: CValue,
    pub kernel_negative_definite: bool,
    /// Roots with `|Z(δ)| ≤ 2`.
    pub roots: Vec<RootCheck>,
    pub roots_nonnegative: bool,
}

/// `Q(v) = (v,v) + (2/C²)|Z(v)|²`, checked on `Ker Z` and on nearby roots.
pub fn build_support_q(l: &MukaiLattice, z: &CentralCharge) -> Result<SupportCertificate> {
    let c = compute_c(l, z)?;
    let zg = charge_gram(z);
    let gram = l.gram.add(&zg.scale(&(rat(2) / &c.c_squared)))?;
    let q = QuadraticForm::new(gram)?;
    let kernel_negative_definite = negative_definite_witness(&q, &kernel(z))?.is_none();
    let mut roots = Vec::new();
    for d in enumerate_roots_near(l, z, &rat(2))?.roots {
        let r = d.to_rational();
        roots.push(RootCheck { charge_norm_sq: crate::matrix::dot(&r, &zg.mul_vec(&r)?), q: q.value_class(&d), root: d });
    }
    let roots_nonnegative = roots.iter().all(|r| !r.q.is_negative());
    Ok(SupportCertificate { q, c, kernel_negative_definite, roots, roots_nonnegative })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub member: bool,
    pub kernel_negative_definite: bool,
    /// A kernel vector with `(v,v) ≥ 0`, or a kernel root.
    #[serde(with = "serde_rational::option_vec")]
    pub witness: Option<Vec<Rational>>,
    pub reason: Option<String>,
}

pub fn check_p0_membership(l: &MukaiLattice, z: &CentralCharge) -> Result<MembershipReport> {
    if z.rank() != l.rank() {
        return Err(Error::DimensionMismatch { expected: l.rank(), found: z.rank() });
    }
    let form = l.form();
    let kb = kernel(z);
    if let Some(w) = negative_definite_witness(&form, &kb)? {
        let reason = format!("(v,v) = {} ≥ 0 on Ker Z", format_rational(&form.value(&w)));
        return Ok(MembershipReport { member: false, kernel_negative_definite: false, witness: Some(w), reason: Some(reason) });
    }
    let kd = KernelData::from_basis(&form, kb)?;
    if let Some(d) = kernel_roots(l, z, &kd)?.into_iter().next() {
        return Ok(MembershipReport {
            member: false,
            kernel_negative_definite: true,
            witness: Some(d.to_rational()),
            reason: Some(format!("root {d} lies in Ker Z")),
        });
    }
    Ok(MembershipReport { member: true, kernel_negative_definite: true, witness: None, reason: None })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverStep {
    pub index: usize,
    pub next_kernel_negative_definite: bool,
}

/// For consecutive sampled charges, the certificate built at the first also
/// has a negative definite kernel at the second.
pub fn covering_chain(l: &MukaiLattice, charges: &[CentralCharge]) -> Result<Vec<CoverStep>> {
    let mut out = Vec::new();
    for (index, w) in charges.windows(2).enumerate() {
        let cert = build_support_q(l, &w[0])?;
        let ok = negative_definite_witness(&cert.q, &kernel(&w[1]))?.is_none();
        out.push(CoverStep { index, next_kernel_negative_definite: ok });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{ratio, QComplex};

    fn u_charge(scale: Rational) -> CentralCharge {
        CentralCharge::from_values(&[QComplex::new(rat(0), scale.clone()), QComplex::new(-scale, rat(0))])
    }

    #[test]
    fn roots_of_hyperbolic_plane() {
        let l = MukaiLattice::hyperbolic_plane();
        let z = u_charge(rat(1));
        assert!(enumerate_roots_near(&l, &z, &rat(1)).unwrap().roots.is_empty());
        let r = enumerate_roots_near(&l, &z, &rat(2)).unwrap();
        assert_eq!(r.roots, vec![Class(vec![-1, 1]), Class(vec![1, -1])]);
        let pd = MukaiLattice::new(QMatrix::from_i64(&[&[2, 1], &[1, 2]])).unwrap();
        assert!(enumerate_roots_near(&pd, &z, &rat(5)).unwrap().roots.is_empty());
    }

    #[test]
    fn c_branches() {
        let l = MukaiLattice::hyperbolic_plane();
        let c = compute_c(&l, &u_charge(rat(1))).unwrap();
        assert_eq!((c.kind, c.c_squared.clone()), (CKind::Sentinel, rat(1)));
        let c = compute_c(&l, &u_charge(ratio(1, 2))).unwrap();
        assert_eq!((c.kind, c.c_squared.clone()), (CKind::Attained, ratio(1, 2)));
        assert_eq!(c.exact(), "sqrt(1/2)");
        assert!((c.value() - 2f64.sqrt() / 2.0).abs() < 1e-12);
        let bad = CentralCharge::from_values(&[QComplex::from_ints(0, 1), QComplex::from_ints(0, 1)]);
        assert!(matches!(compute_c(&l, &bad), Err(Error::KernelRoot { witness }) if witness == Class(vec![1, -1])));
    }

    #[test]
    fn certificates() {
        let l = MukaiLattice::hyperbolic_plane();
        let cert = build_support_q(&l, &u_charge(rat(1))).unwrap();
        assert_eq!(cert.q, QuadraticForm::from_i64(&[&[2, 1], &[1, 2]]));
        assert_eq!(cert.q.value_class(&Class(vec![1, -1])), rat(2));
        assert!(cert.roots_nonnegative && cert.kernel_negative_definite);
        let cert = build_support_q(&l, &u_charge(ratio(1, 2))).unwrap();
        assert_eq!(cert.q, QuadraticForm::from_i64(&[&[1, 1], &[1, 1]]));
        assert!(cert.roots_nonnegative && cert.roots.iter().all(|r| !r.q.is_negative()));
    }

    #[test]
    fn membership() {
        let l = MukaiLattice::hyperbolic_plane();
        assert!(check_p0_membership(&l, &u_charge(rat(1))).unwrap().member);
        let root_kernel = CentralCharge::from_values(&[QComplex::from_ints(0, 1), QComplex::from_ints(0, 1)]);
        let r = check_p0_membership(&l, &root_kernel).unwrap();
        assert!(!r.member && r.kernel_negative_definite);
        let w = r.witness.unwrap();
        assert!(w == vec![rat(1), rat(-1)] || w == vec![rat(-1), rat(1)]);
        let positive_kernel = CentralCharge::from_values(&[QComplex::from_ints(0, 1), QComplex::from_ints(0, -1)]);
        let r = check_p0_membership(&l, &positive_kernel).unwrap();
        assert!(!r.member && !r.kernel_negative_definite);
    }
}
