//! Affine paths of central charges: normal-form decomposition, operator
//! norms, exact wall detection, Jordan-Hölder factors at walls, and lifting a
//! path with the heart held fixed.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hn::{check_heart, hn_polygon, is_semistable, is_semistable_classes, is_stable, is_stable_classes};
use crate::lattice::{
    kernel, negative_definite_witness, normalize, orthogonal_complement, CentralCharge, Class, Gl2Element, KernelData,
    QuadraticForm,
};
use crate::matrix::{is_positive_definite, QMatrix};
use crate::phase::PhasePoint;
use crate::quadform_ext::{compose, reduce_and_lift};
use crate::quiver::{Representation, SubobjectClassSet, Subrep};
use crate::rational::{format_rational, rat, rational_sqrt, serde_rational, to_f64, Rational};
use crate::slicing::{distance_dprime, make_prestability, PreStability, ShiftedObject};

/// Width to which irrational wall parameters are isolated.
pub const ROOT_WIDTH: f64 = 1e-9;
/// Tolerance for the float side of the continuity bound.
pub const BOUND_TOL: f64 = 1e-9;
const MAX_SUBDIVISION_DEPTH: u32 = 24;

/// `u : Ker Z → ℂ` as a 2×k matrix in a kernel basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformationDirection {
    pub u: QMatrix,
    pub real: bool,
}

impl DeformationDirection {
    pub fn new(u: QMatrix) -> Result<Self> {
        if u.rows() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: u.rows() });
        }
        let real = u.row(1).iter().all(Zero::is_zero);
        Ok(Self { u, real })
    }

    pub fn zero(k: usize) -> Self {
        Self { u: QMatrix::zeros(2, k), real: true }
    }

    pub fn kernel_dim(&self) -> usize {
        self.u.cols()
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero()
    }

    pub fn real_part(&self) -> Self {
        let mut u = self.u.clone();
        for j in 0..u.cols() {
            u[(1, j)] = Rational::zero();
        }
        Self { u, real: true }
    }

    pub fn imaginary_part(&self) -> Self {
        let mut u = self.u.clone();
        for j in 0..u.cols() {
            u[(0, j)] = Rational::zero();
        }
        Self::new(u).expect("two rows")
    }
}

/// `Z_t = Z₀ + t · u ∘ p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalForm {
    pub kernel: KernelData,
    pub u: DeformationDirection,
}

/// `Z_t = Z₀ + t W` for `t ∈ [0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformationPath {
    #[serde(rename = "Z0")]
    pub z0: CentralCharge,
    #[serde(rename = "W")]
    pub w: QMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal_form: Option<NormalForm>,
}

impl DeformationPath {
    pub fn affine(z0: CentralCharge, w: QMatrix) -> Result<Self> {
        if w.rows() != 2 || w.cols() != z0.rank() {
            return Err(Error::Invalid(format!("W must be 2×{}, got {}×{}", z0.rank(), w.rows(), w.cols())));
        }
        Ok(Self { z0, w, normal_form: None })
    }

    /// `W = u · coefficients`, i.e. `u ∘ p` in lattice coordinates.
    pub fn normal(z0: CentralCharge, q: &QuadraticForm, u: DeformationDirection) -> Result<Self> {
        let kernel = KernelData::new(q, &z0)?;
        if u.kernel_dim() != kernel.dim() {
            return Err(Error::DimensionMismatch { expected: kernel.dim(), found: u.kernel_dim() });
        }
        let w = if kernel.dim() == 0 { QMatrix::zeros(2, z0.rank()) } else { u.u.mul(&kernel.coefficients)? };
        Ok(Self { z0, w, normal_form: Some(NormalForm { kernel, u }) })
    }

    pub fn constant(z0: CentralCharge) -> Self {
        let m = z0.rank();
        Self { z0, w: QMatrix::zeros(2, m), normal_form: None }
    }

    /// The straight path between two charges.
    pub fn between(z0: &CentralCharge, z1: &CentralCharge) -> Result<Self> {
        let w = z1.as_matrix().sub(&z0.as_matrix())?;
        Self::affine(z0.clone(), w)
    }

    pub fn rank(&self) -> usize {
        self.z0.rank()
    }

    pub fn is_constant(&self) -> bool {
        self.w.is_zero()
    }

    pub fn direction(&self) -> CentralCharge {
        CentralCharge::from_matrix(&self.w).expect("two rows")
    }

    fn at(&self, t: &Rational) -> CentralCharge {
        self.z0.add(&self.direction().scale(t)).expect("ranks agree")
    }

    pub fn end(&self) -> CentralCharge {
        self.at(&Rational::one())
    }

    /// `cross(Z_t(a), Z_t(b))` as a polynomial in `t` of degree ≤ 2.
    pub fn cross_polynomial(&self, a: &Class, b: &Class) -> Result<Vec<Rational>> {
        let d = self.direction();
        let (a0, a1) = (self.z0.evaluate(a)?, d.evaluate(a)?);
        let (b0, b1) = (self.z0.evaluate(b)?, d.evaluate(b)?);
        Ok(vec![a0.cross(&b0), a0.cross(&b1) + a1.cross(&b0), a1.cross(&b1)])
    }
}

fn check_t(t: &Rational) -> Result<()> {
    if t.is_negative() || t > &Rational::one() {
        return Err(Error::ParameterOutOfRange(format_rational(t)));
    }
    Ok(())
}

pub fn charge_at(path: &DeformationPath, t: &Rational) -> Result<CentralCharge> {
    check_t(t)?;
    Ok(path.at(t))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityCheck {
    pub holds: bool,
    pub witness: Option<Class>,
}

/// Every listed nonzero class lands in `H` at parameter `t`.
pub fn is_stability_function_at(path: &DeformationPath, t: &Rational, classes: &[Class]) -> Result<StabilityCheck> {
    let z = charge_at(path, t)?;
    for c in classes.iter().filter(|c| !c.is_zero()) {
        if !z.evaluate(c)?.in_upper_half_plane() {
            return Ok(StabilityCheck { holds: false, witness: Some(c.clone()) });
        }
    }
    Ok(StabilityCheck { holds: true, witness: None })
}

fn check_neg_gram(kd: &KernelData) -> Result<()> {
    if kd.dim() > 0 && !is_positive_definite(&kd.neg_gram) {
        return Err(Error::KernelNotNegativeDefinite { witness: Vec::new() });
    }
    Ok(())
}

/// `M S` with `M = u N⁻¹ uᵀ`; its largest eigenvalue is `‖u‖²`.
fn norm_matrix(u: &DeformationDirection, kd: &KernelData, metric: &QMatrix) -> Result<QMatrix> {
    check_neg_gram(kd)?;
    if u.kernel_dim() != kd.dim() {
        return Err(Error::DimensionMismatch { expected: kd.dim(), found: u.kernel_dim() });
    }
    let inv = kd.neg_gram.inverse().expect("definite");
    u.u.mul(&inv)?.mul(&u.u.transpose())?.mul(metric)
}

/// Operator norm of `u` from `(Ker Z, ‖·‖₋Q)` to Euclidean `ℂ`.
pub fn operator_norm(u: &DeformationDirection, kd: &KernelData) -> Result<f64> {
    operator_norm_in(u, kd, &QMatrix::identity(2))
}

/// Same, with `ℂ` measured by `|z|² = zᵀ S z`.
pub fn operator_norm_in(u: &DeformationDirection, kd: &KernelData, metric: &QMatrix) -> Result<f64> {
    if kd.dim() == 0 {
        return Ok(0.0);
    }
    let p = norm_matrix(u, kd, metric)?;
    let tr = to_f64(&(&p[(0, 0)] + &p[(1, 1)]));
    let det = to_f64(&p.determinant());
    let disc = (tr * tr - 4.0 * det).max(0.0);
    Ok(((tr + disc.sqrt()) / 2.0).max(0.0).sqrt())
}

/// Exact test `‖u‖ < s`: `s² N - uᵀ S u` is positive definite.
pub fn operator_norm_below(u: &DeformationDirection, kd: &KernelData, metric: &QMatrix, s: &Rational) -> Result<bool> {
    check_neg_gram(kd)?;
    if kd.dim() == 0 {
        return Ok(s.is_positive());
    }
    let form = kd.neg_gram.scale(&(s * s)).sub(&u.u.transpose().mul(metric)?.mul(&u.u)?)?;
    Ok(is_positive_definite(&form))
}

/// `g ∘ Z′ = Z + u ∘ p` with `g ∘ Z′ = Z` on `K⊥`.
pub fn decompose(zp: &CentralCharge, z: &CentralCharge, q: &QuadraticForm) -> Result<(Gl2Element, DeformationDirection)> {
    if zp.rank() != z.rank() {
        return Err(Error::DimensionMismatch { expected: z.rank(), found: zp.rank() });
    }
    let kd = KernelData::new(q, z)?;
    if let Some(w) = negative_definite_witness(q, &kernel(zp))? {
        return Err(Error::KernelNotNegativeDefinite { witness: w.iter().map(format_rational).collect() });
    }
    let comp = orthogonal_complement(q, &kd.kernel_basis)?;
    if comp.len() != 2 {
        return Err(Error::DegenerateOnComplement);
    }
    let columns = |c: &CentralCharge| -> Result<QMatrix> {
        let cols: Vec<Vec<Rational>> = comp.iter().map(|f| {
            let v = c.evaluate_vec(f);
            vec![v.re, v.im]
        }).collect();
        QMatrix::from_columns(&cols)
    };
    let a_z = columns(z)?;
    let a_zp_inv = columns(zp)?.inverse().ok_or(Error::DegenerateOnComplement)?;
    if a_z.determinant().is_zero() {
        return Err(Error::DegenerateOnComplement);
    }
    let g = Gl2Element::principal(a_z.mul(&a_zp_inv)?)?;
    let moved = zp.compose_left(&g.matrix);
    let cols: Vec<Vec<Rational>> = kd.kernel_basis.iter().map(|k| {
        let v = moved.evaluate_vec(k);
        vec![v.re, v.im]
    }).collect();
    let u = if cols.is_empty() { DeformationDirection::zero(0) } else { DeformationDirection::new(QMatrix::from_columns(&cols)?)? };
    Ok((g, u))
}

// ---------------------------------------------------------------- roots

fn trim(p: &[Rational]) -> Vec<Rational> {
    let mut v = p.to_vec();
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    v
}

fn eval(p: &[Rational], t: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * t + c)
}

fn sign(x: &Rational) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// A root of a polynomial in `[0, 1]`, exact or isolated in `[lo, hi]`.
#[derive(Clone, Debug)]
enum Root {
    Exact(Rational),
    Isolated { poly: Vec<Rational>, larger: bool, lo: Rational, hi: Rational },
}

impl Root {
    fn lo(&self) -> &Rational {
        match self {
            Root::Exact(x) => x,
            Root::Isolated { lo, .. } => lo,
        }
    }

    fn hi(&self) -> &Rational {
        match self {
            Root::Exact(x) => x,
            Root::Isolated { hi, .. } => hi,
        }
    }

    fn same(&self, other: &Root) -> bool {
        match (self, other) {
            (Root::Exact(a), Root::Exact(b)) => a == b,
            (Root::Isolated { poly: p, larger: a, .. }, Root::Isolated { poly: q, larger: b, .. }) => p == q && a == b,
            _ => false,
        }
    }

    fn refine(&mut self) {
        if let Root::Isolated { poly, lo, hi, .. } = self {
            let mid = (&*lo + &*hi) / rat(2);
            if sign(&eval(poly, lo)) * sign(&eval(poly, &mid)) < 0 {
                *hi = mid;
            } else {
                *lo = mid;
            }
        }
    }

    fn width(&self) -> f64 {
        to_f64(&(self.hi() - self.lo()))
    }

    /// `p` vanishes here.
    fn is_root_of(&self, p: &[Rational]) -> bool {
        let p = trim(p);
        match self {
            Root::Exact(x) => !p.is_empty() && eval(&p, x).is_zero(),
            Root::Isolated { poly, .. } => p.len() == 3 && monic(&p) == *poly,
        }
    }

    fn representative(&self) -> Rational {
        (self.lo() + self.hi()) / rat(2)
    }
}

fn monic(p: &[Rational]) -> Vec<Rational> {
    let lead = p.last().expect("nonzero").clone();
    p.iter().map(|c| c / &lead).collect()
}

/// Roots in `[0, 1]` of a nonzero polynomial of degree ≤ 2.
fn unit_roots(p: &[Rational]) -> Vec<Root> {
    let p = trim(p);
    let in_unit = |x: &Rational| !x.is_negative() && x <= &Rational::one();
    match p.len() {
        0 | 1 => Vec::new(),
        2 => {
            let x = -&p[0] / &p[1];
            if in_unit(&x) { vec![Root::Exact(x)] } else { Vec::new() }
        }
        _ => {
            let (c, b, a) = (&p[0], &p[1], &p[2]);
            let disc = b * b - rat(4) * a * c;
            if disc.is_negative() {
                return Vec::new();
            }
            let two_a = rat(2) * a;
            if let Some(s) = rational_sqrt(&disc) {
                let mut xs: Vec<Rational> = vec![(-b - &s) / &two_a, (-b + &s) / &two_a];
                xs.sort();
                xs.dedup();
                return xs.into_iter().filter(in_unit).map(Root::Exact).collect();
            }
            let m = monic(&p);
            let vertex = -b / &two_a;
            let mut out = Vec::new();
            // Each side of the vertex holds one root; `larger` names the side.
            for larger in [false, true] {
                let (lo, hi) = if larger {
                    (vertex.clone().max(Rational::zero()), Rational::one())
                } else {
                    (Rational::zero(), vertex.clone().min(Rational::one()))
                };
                if lo >= hi || sign(&eval(&m, &lo)) * sign(&eval(&m, &hi)) >= 0 {
                    continue;
                }
                let mut r = Root::Isolated { poly: m.clone(), larger, lo, hi };
                while r.width() > ROOT_WIDTH {
                    r.refine();
                }
                out.push(r);
            }
            out
        }
    }
}

/// Distinct roots, sorted, with pairwise disjoint isolating intervals.
fn separate(mut roots: Vec<Root>) -> Vec<Root> {
    let mut uniq: Vec<Root> = Vec::new();
    for r in roots.drain(..) {
        if !uniq.iter().any(|u| u.same(&r)) {
            uniq.push(r);
        }
    }
    loop {
        uniq.sort_by(|a, b| a.lo().cmp(b.lo()).then_with(|| a.hi().cmp(b.hi())));
        let clash = uniq.windows(2).position(|w| w[0].hi() >= w[1].lo());
        match clash {
            None => return uniq,
            Some(i) => {
                uniq[i].refine();
                uniq[i + 1].refine();
            }
        }
    }
}

// ---------------------------------------------------------------- walls

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Stable,
    StrictlySemistable,
    Unstable,
}

impl Status {
    pub fn is_semistable(self) -> bool {
        self != Status::Unstable
    }

    fn from_signs(signs: impl Iterator<Item = i8>) -> Status {
        let mut aligned = false;
        for s in signs {
            if s > 0 {
                return Status::Unstable;
            }
            aligned |= s == 0;
        }
        if aligned { Status::StrictlySemistable } else { Status::Stable }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    #[serde(with = "serde_rational")]
    pub t_value: Rational,
    /// Set when `t_value` is irrational; `t_value` is then the midpoint.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "serde_interval")]
    pub isolating_interval: Option<(Rational, Rational)>,
    pub object_class: Class,
    pub destabilizer_class: Class,
    pub before: Option<Status>,
    pub at: Status,
    pub after: Option<Status>,
}

impl Wall {
    pub fn is_exact(&self) -> bool {
        self.isolating_interval.is_none()
    }
}

mod serde_interval {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Pair(#[serde(with = "serde_rational")] Rational, #[serde(with = "serde_rational")] Rational);

    pub fn serialize<S: Serializer>(v: &Option<(Rational, Rational)>, s: S) -> std::result::Result<S::Ok, S::Error> {
        v.as_ref().map(|(a, b)| Pair(a.clone(), b.clone())).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<(Rational, Rational)>, D::Error> {
        Ok(Option::<Pair>::deserialize(d)?.map(|Pair(a, b)| (a, b)))
    }
}

/// Cross polynomials `cross(Z_t(E), Z_t(A))` for proper nonzero classes `A`;
/// positive means `A` has larger phase.
fn class_polynomials(classes: &SubobjectClassSet, path: &DeformationPath, ve: &Class) -> Result<Vec<(Class, Vec<Rational>)>> {
    classes
        .iter()
        .filter(|c| !c.is_zero() && *c != ve)
        .map(|c| Ok((c.clone(), trim(&path.cross_polynomial(ve, c)?))))
        .collect()
}

fn status_at_rational(polys: &[(Class, Vec<Rational>)], t: &Rational) -> Status {
    Status::from_signs(polys.iter().map(|(_, p)| sign(&eval(p, t))))
}

fn status_at_root(polys: &[(Class, Vec<Rational>)], r: &Root) -> Status {
    match r {
        Root::Exact(x) => status_at_rational(polys, x),
        Root::Isolated { .. } => {
            let mid = r.representative();
            Status::from_signs(polys.iter().map(|(_, p)| if r.is_root_of(p) { 0 } else { sign(&eval(p, &mid)) }))
        }
    }
}

/// Semistability status of an object of class `ve` with the given subobject
/// classes at parameter `t`.
pub fn status_at(classes: &SubobjectClassSet, path: &DeformationPath, ve: &Class, t: &Rational) -> Result<Status> {
    Ok(status_at_rational(&class_polynomials(classes, path, ve)?, t))
}

/// Walls of a single object along the path: parameters where its
/// semistability changes, each with a destabilizing class.
pub fn find_walls(r: &Representation, path: &DeformationPath, budget: u64) -> Result<Vec<Wall>> {
    if r.is_zero() {
        return Ok(Vec::new());
    }
    if r.dims().len() != path.rank() {
        return Err(Error::DimensionMismatch { expected: path.rank(), found: r.dims().len() });
    }
    walls_from_classes(&r.subobject_classes(budget)?, path, &r.dimension_vector())
}

pub fn walls_from_classes(classes: &SubobjectClassSet, path: &DeformationPath, ve: &Class) -> Result<Vec<Wall>> {
    let polys = class_polynomials(classes, path, ve)?;
    let linear = polys.iter().all(|(_, p)| p.len() <= 2);
    let candidates: Vec<&(Class, Vec<Rational>)> = if linear && !path.is_constant() {
        let mut keep = BTreeSet::new();
        for t in [Rational::zero(), Rational::one()] {
            let z = path.at(&t);
            let trunc = hn_polygon(classes, &z, ve)?.truncated();
            for (c, _) in &polys {
                if trunc.contains(&z.evaluate(c)?) {
                    keep.insert(c.clone());
                }
            }
        }
        polys.iter().filter(|(c, _)| keep.contains(c)).collect()
    } else {
        polys.iter().collect()
    };
    let roots = separate(candidates.iter().flat_map(|(_, p)| unit_roots(p)).collect());
    let mut walls = Vec::new();
    for (i, root) in roots.iter().enumerate() {
        let before = (root.lo().is_positive()).then(|| {
            let left = if i == 0 { Rational::zero() } else { roots[i - 1].hi().clone() };
            status_at_rational(&polys, &((left + root.lo()) / rat(2)))
        });
        let after = (root.hi() < &Rational::one()).then(|| {
            let right = roots.get(i + 1).map(|r| r.lo().clone()).unwrap_or_else(Rational::one);
            status_at_rational(&polys, &((root.hi() + right) / rat(2)))
        });
        let at = status_at_root(&polys, root);
        let flips = |s: Option<Status>| s.is_some_and(|s| s.is_semistable() != at.is_semistable());
        if !(flips(before) || flips(after)) {
            continue;
        }
        let vanishing: Vec<&(Class, Vec<Rational>)> = candidates.iter().copied().filter(|(_, p)| root.is_root_of(p)).collect();
        // Prefer a class that is positive on an unstable side next to the wall.
        let probe = |side: Option<Status>, left: bool| -> Option<Class> {
            if side != Some(Status::Unstable) {
                return None;
            }
            let t = if left {
                let l = if i == 0 { Rational::zero() } else { roots[i - 1].hi().clone() };
                (l + root.lo()) / rat(2)
            } else {
                let r = roots.get(i + 1).map(|r| r.lo().clone()).unwrap_or_else(Rational::one);
                (root.hi() + r) / rat(2)
            };
            vanishing.iter().find(|(_, p)| eval(p, &t).is_positive()).map(|(c, _)| c.clone())
        };
        let destabilizer = probe(before, true)
            .or_else(|| probe(after, false))
            .or_else(|| vanishing.first().map(|(c, _)| c.clone()))
            .expect("a wall comes from a vanishing cross product");
        let isolating_interval = match root {
            Root::Exact(_) => None,
            Root::Isolated { lo, hi, .. } => Some((lo.clone(), hi.clone())),
        };
        walls.push(Wall {
            t_value: root.representative(),
            isolating_interval,
            object_class: ve.clone(),
            destabilizer_class: destabilizer,
            before,
            at,
            after,
        });
    }
    Ok(walls)
}

/// `{t ∈ [0,1] : φ_t(a) ≥ φ_t(e)}` as a closed interval, for paths whose
/// cross polynomial has degree ≤ 1.
pub fn dominance_interval(path: &DeformationPath, a: &Class, e: &Class) -> Result<Option<(Rational, Rational)>> {
    let p = trim(&path.cross_polynomial(e, a)?);
    let (zero, one) = (Rational::zero(), Rational::one());
    match p.len() {
        0 => Ok(Some((zero, one))),
        1 => Ok((p[0].is_positive()).then_some((zero, one))),
        2 => {
            let root = -&p[0] / &p[1];
            let (lo, hi) = if p[1].is_positive() { (root, one) } else { (zero, root) };
            let (lo, hi) = (lo.max(Rational::zero()), hi.min(Rational::one()));
            Ok((lo <= hi).then_some((lo, hi)))
        }
        _ => Err(Error::Invalid("cross product is quadratic in t".into())),
    }
}

// ----------------------------------------------------------- Jordan-Hölder

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JHDecomposition {
    pub object_class: Class,
    /// Sorted multiset of stable factor classes.
    pub factor_classes: Vec<Class>,
    /// Factors in the order of the filtration that produced them.
    pub series: Vec<Class>,
    pub aligned_phase: PhasePoint,
}

pub fn jordan_holder(r: &Representation, z: &CentralCharge, budget: u64) -> Result<JHDecomposition> {
    jordan_holder_with(r, z, budget, &mut |_| 0)
}

/// As `jordan_holder`, with `choose(n)` picking which of the `n` same-phase
/// stable subobjects to peel off next.
pub fn jordan_holder_with(
    r: &Representation,
    z: &CentralCharge,
    budget: u64,
    choose: &mut dyn FnMut(usize) -> usize,
) -> Result<JHDecomposition> {
    if r.is_zero() {
        return Err(Error::ZeroObject);
    }
    if !is_semistable(r, z, budget)? {
        return Err(Error::NotSemistable);
    }
    let ve = r.dimension_vector();
    let aligned_phase = PhasePoint::of_class_charge(&ve, z.evaluate(&ve)?)?;
    let mut series = Vec::new();
    let mut current = r.clone();
    loop {
        let vc = current.dimension_vector();
        let zc = z.evaluate(&vc)?;
        let mut stable_subs: Vec<Subrep> = Vec::new();
        for s in current.subreps(budget)? {
            let c = s.class();
            if c.is_zero() || c == vc || !zc.cross(&z.evaluate(&c)?).is_zero() {
                continue;
            }
            if is_stable(&current.restrict(&s)?, z, budget)? {
                stable_subs.push(s);
            }
        }
        if stable_subs.is_empty() {
            series.push(vc);
            break;
        }
        let pick = choose(stable_subs.len()) % stable_subs.len();
        let s = &stable_subs[pick];
        series.push(s.class());
        current = current.quotient(s)?;
    }
    let mut factor_classes = series.clone();
    factor_classes.sort();
    Ok(JHDecomposition { object_class: ve, factor_classes, series, aligned_phase })
}

/// `|Z(E)| = Σ|Z(Eᵢ)| ≥ Σ‖p(Eᵢ)‖ ≥ ‖p(E)‖`, with `|Z|` measured so that
/// `Q(v) = |Z(v)|² - ‖p(v)‖²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleChain {
    pub charge_total: f64,
    pub charge_sum: f64,
    pub projection_sum: f64,
    pub projection_total: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QWallReport {
    pub object_class: Class,
    #[serde(with = "serde_rational")]
    pub q_total: Rational,
    #[serde(with = "serde_rational::vec")]
    pub factor_q: Vec<Rational>,
    pub factors_nonnegative: bool,
    pub total_nonnegative: bool,
    /// `Q(v(E)) = 0`, reported rather than required.
    pub total_is_zero: bool,
    pub chain: Option<TriangleChain>,
}

pub fn check_q_at_wall(jh: &JHDecomposition, q: &QuadraticForm, kd: Option<&KernelData>) -> QWallReport {
    let q_total = q.value_class(&jh.object_class);
    let factor_q: Vec<Rational> = jh.factor_classes.iter().map(|c| q.value_class(c)).collect();
    let factors_nonnegative = factor_q.iter().all(|x| !x.is_negative());
    let chain = match kd {
        Some(kd) if factors_nonnegative => {
            let zlen = |c: &Class| {
                let v = kd.complement_value(q, &c.to_rational());
                (!v.is_negative()).then(|| to_f64(&v).sqrt())
            };
            let plen = |c: &Class| to_f64(&kd.norm_sq(&c.to_rational())).sqrt();
            let parts: Option<Vec<f64>> = jh.factor_classes.iter().map(zlen).collect();
            match (zlen(&jh.object_class), parts) {
                (Some(charge_total), Some(parts)) => {
                    let charge_sum: f64 = parts.iter().sum();
                    let projection_sum: f64 = jh.factor_classes.iter().map(plen).sum();
                    let projection_total = plen(&jh.object_class);
                    let tol = BOUND_TOL * (1.0 + charge_sum);
                    let holds = (charge_total - charge_sum).abs() <= tol
                        && charge_sum + tol >= projection_sum
                        && projection_sum + tol >= projection_total;
                    Some(TriangleChain { charge_total, charge_sum, projection_sum, projection_total, holds })
                }
                _ => None,
            }
        }
        _ => None,
    };
    QWallReport {
        object_class: jh.object_class.clone(),
        total_nonnegative: !q_total.is_negative(),
        total_is_zero: q_total.is_zero(),
        q_total,
        factor_q,
        factors_nonnegative,
        chain,
    }
}

// ---------------------------------------------------------------- lifting

/// Parameters in `[0, 1]` where the rank of `Z_t` drops below its generic
/// value. Only rational parameters are found.
pub fn kernel_jumps(path: &DeformationPath) -> Vec<Rational> {
    let m = path.rank();
    let probes = [rat(1) / rat(3), rat(2) / rat(7), rat(5) / rat(11)];
    let generic = probes.iter().map(|t| path.at(t).real_rank()).max().unwrap_or(0);
    let entry = |i: usize, j: usize| -> Vec<Rational> {
        let z = path.z0.as_matrix();
        vec![z[(i, j)].clone(), path.w[(i, j)].clone()]
    };
    let mul = |a: &[Rational], b: &[Rational]| -> Vec<Rational> {
        let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    let mut polys: Vec<Vec<Rational>> = Vec::new();
    match generic {
        0 => return Vec::new(),
        1 => {
            for i in 0..2 {
                for j in 0..m {
                    polys.push(entry(i, j));
                }
            }
        }
        _ => {
            for a in 0..m {
                for b in a + 1..m {
                    let p = mul(&entry(0, a), &entry(1, b));
                    let n = mul(&entry(0, b), &entry(1, a));
                    polys.push(p.iter().zip(&n).map(|(x, y)| x - y).collect());
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for p in &polys {
        for r in unit_roots(p) {
            if let Root::Exact(t) = r {
                if path.at(&t).real_rank() < generic {
                    out.insert(t);
                }
            }
        }
    }
    out.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectStatus {
    pub index: usize,
    pub class: Class,
    pub status: Status,
    #[serde(with = "serde_rational")]
    pub q: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Regular,
    Wall,
    KernelJump,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    #[serde(with = "serde_rational")]
    pub t: Rational,
    pub kinds: Vec<GridKind>,
    pub kernel_dim: usize,
    /// Corpus indices whose HN polygon from the bounded class set differs
    /// from the full one.
    pub hn_mismatch: Vec<usize>,
    pub objects: Vec<ObjectStatus>,
    /// Semistable corpus indices with `Q(v) < 0`.
    pub support_violations: Vec<usize>,
    pub walls: Vec<QWallReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegKind {
    Real,
    Imaginary,
    General,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LegPiece {
    #[serde(with = "serde_rational")]
    pub from: Rational,
    #[serde(with = "serde_rational")]
    pub to: Rational,
    pub operator_norm: f64,
    /// Rank of the lattice the norm was measured on (larger after extension).
    pub lattice_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub kind: LegKind,
    #[serde(rename = "Z_start")]
    pub start: CentralCharge,
    #[serde(rename = "Z_end")]
    pub end: CentralCharge,
    /// Rotation applied to both ends so that the leg direction is real.
    pub conjugation: Option<QMatrix>,
    pub pieces: Vec<LegPiece>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectWall {
    pub index: usize,
    pub wall: Wall,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    #[serde(with = "serde_rational")]
    pub t: Rational,
    pub d_prime: f64,
    pub norm_effective: f64,
    /// The path is not in normal form around a normalized start, so the
    /// bound uses `‖u‖ = 1` and is indicative only.
    pub advisory: bool,
    pub bound: f64,
    pub linear_bound: f64,
    pub pass: bool,
    /// `d′` lies between the linear and the arcsine bound.
    pub flagged: bool,
    pub witness: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftReport {
    pub steps: usize,
    pub grid: Vec<GridPoint>,
    pub walls: Vec<ObjectWall>,
    pub legs: Vec<Leg>,
    pub continuity: Vec<ContinuityReport>,
    pub hn_ok: bool,
    pub support_preserved: bool,
    pub ok: bool,
}

/// Norm of the step `za → zb`, measured after decomposing relative to `za`,
/// upstairs if `(q, za)` is not already normalizable.
fn step_norm(q: &QuadraticForm, za: &CentralCharge, zb: &CentralCharge) -> Result<(f64, bool, usize)> {
    let half = Rational::new(1.into(), 2.into());
    let (q2, za2, zb2) = match normalize(q, za) {
        Ok(_) => (q.clone(), za.clone(), zb.clone()),
        Err(_) => {
            let steps = reduce_and_lift(q, za)?;
            let ext = compose(q, za, &steps);
            let zb2 = ext.extend_charge(zb);
            (ext.q_bar, ext.z_bar, zb2)
        }
    };
    let norm = normalize(&q2, &za2)?;
    let (_, u) = decompose(&zb2, &za2, &q2)?;
    let value = operator_norm_in(&u, &norm.kernel, &norm.metric)?;
    let below = operator_norm_below(&u, &norm.kernel, &norm.metric, &half)?;
    Ok((value, below, q2.rank()))
}

fn subdivide(
    q: &QuadraticForm,
    charge: &dyn Fn(&Rational) -> CentralCharge,
    from: Rational,
    to: Rational,
    depth: u32,
    out: &mut Vec<LegPiece>,
) -> Result<()> {
    let (za, zb) = (charge(&from), charge(&to));
    let measured = match step_norm(q, &za, &zb) {
        Ok(x) => Some(x),
        Err(Error::KernelNotNegativeDefinite { .. } | Error::DegenerateOnComplement | Error::NonPositiveDeterminant) => None,
        Err(e) => return Err(e),
    };
    match measured {
        Some((operator_norm, true, lattice_rank)) => {
            out.push(LegPiece { from, to, operator_norm, lattice_rank });
            Ok(())
        }
        _ if depth >= MAX_SUBDIVISION_DEPTH => {
            Err(Error::OperatorNormTooLarge { from: format_rational(&from), to: format_rational(&to) })
        }
        _ => {
            let mid = (&from + &to) / rat(2);
            subdivide(q, charge, from, mid.clone(), depth + 1, out)?;
            subdivide(q, charge, mid, to, depth + 1, out)
        }
    }
}

fn build_leg(q: &QuadraticForm, kind: LegKind, start: CentralCharge, end: CentralCharge, conjugation: Option<QMatrix>) -> Result<Leg> {
    let (a, b) = match &conjugation {
        Some(r) => (start.compose_left(r), end.compose_left(r)),
        None => (start.clone(), end.clone()),
    };
    let dir = b.add(&a.scale(&-Rational::one()))?;
    let charge = |s: &Rational| a.add(&dir.scale(s)).expect("ranks agree");
    let mut pieces = Vec::new();
    if !dir.is_zero() {
        subdivide(q, &charge, Rational::zero(), Rational::one(), 0, &mut pieces)?;
    }
    Ok(Leg { kind, start, end, conjugation, pieces })
}

fn path_legs(q: &QuadraticForm, path: &DeformationPath) -> Result<Vec<Leg>> {
    let z1 = path.end();
    let Some(nf) = &path.normal_form else {
        return Ok(vec![build_leg(q, LegKind::General, path.z0.clone(), z1, None)?]);
    };
    let re = nf.u.real_part();
    let im = nf.u.imaginary_part();
    let mut legs = Vec::new();
    let mid = if re.is_zero() {
        path.z0.clone()
    } else {
        let w = if nf.kernel.dim() == 0 { QMatrix::zeros(2, path.rank()) } else { re.u.mul(&nf.kernel.coefficients)? };
        let mid = path.z0.add(&CentralCharge::from_matrix(&w)?)?;
        legs.push(build_leg(q, LegKind::Real, path.z0.clone(), mid.clone(), None)?);
        mid
    };
    if !im.is_zero() {
        // Multiplication by -i turns `i · Im u ∘ p` into a real direction.
        let rot = QMatrix::from_i64(&[&[0, 1], &[-1, 0]]);
        legs.push(build_leg(q, LegKind::Imaginary, mid, z1, Some(rot))?);
    }
    Ok(legs)
}

/// Lifts `(A, Z₀)` along the path with the heart fixed, checking the corpus
/// `σ₀.generators` at `steps + 1` grid points, at every wall and at every
/// kernel jump.
pub fn lift_path(
    sigma0: &PreStability,
    q: &QuadraticForm,
    path: &DeformationPath,
    steps: usize,
    budget: u64,
) -> Result<LiftReport> {
    if steps == 0 {
        return Err(Error::Invalid("steps must be at least 1".into()));
    }
    if path.z0 != sigma0.z {
        return Err(Error::Invalid("path does not start at the charge of σ₀".into()));
    }
    if q.rank() != path.rank() {
        return Err(Error::DimensionMismatch { expected: path.rank(), found: q.rank() });
    }
    let corpus: Vec<(usize, &Representation, SubobjectClassSet)> = sigma0
        .generators
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.is_zero())
        .map(|(i, r)| Ok((i, r, r.subobject_classes(budget)?)))
        .collect::<Result<_>>()?;

    let mut grid: BTreeSet<Rational> = (0..=steps).map(|j| Rational::new(j.into(), steps.into())).collect();
    let jumps = kernel_jumps(path);
    grid.extend(jumps.iter().cloned());
    let mut walls = Vec::new();
    for (index, r, classes) in &corpus {
        for wall in walls_from_classes(classes, path, &r.dimension_vector())? {
            if wall.is_exact() {
                grid.insert(wall.t_value.clone());
            }
            walls.push(ObjectWall { index: *index, wall });
        }
    }

    let mut points = Vec::new();
    for t in &grid {
        let z = path.at(t);
        let kb = kernel(&z);
        if let Some(w) = negative_definite_witness(q, &kb)? {
            return Err(Error::PathNotAdmissible {
                t: format_rational(t),
                reason: format!(
                    "Q({}) = {} on Ker Z_t",
                    w.iter().map(format_rational).collect::<Vec<_>>().join(","),
                    format_rational(&q.value(&w))
                ),
            });
        }
        let kd = KernelData::from_basis(q, kb)?;
        let mut kinds = Vec::new();
        if (t * rat(steps as i64)).is_integer() {
            kinds.push(GridKind::Regular);
        }
        if walls.iter().any(|w| w.wall.is_exact() && &w.wall.t_value == t) {
            kinds.push(GridKind::Wall);
        }
        if jumps.contains(t) {
            kinds.push(GridKind::KernelJump);
        }
        let mut point = GridPoint {
            t: t.clone(),
            kinds,
            kernel_dim: kd.dim(),
            hn_mismatch: Vec::new(),
            objects: Vec::new(),
            support_violations: Vec::new(),
            walls: Vec::new(),
        };
        for (index, r, classes) in &corpus {
            let ve = r.dimension_vector();
            check_heart(classes, &z).map_err(|e| Error::PathNotAdmissible {
                t: format_rational(t),
                reason: format!("not a stability function on the heart: {e}"),
            })?;
            let c = z.evaluate(&ve)?.re.max(Rational::zero());
            let mut bounded = classes.bounded(&z, Some(&c))?;
            bounded.classes.insert(Class::zero(ve.rank()));
            bounded.classes.insert(ve.clone());
            if hn_polygon(&bounded, &z, &ve)?.vertices != hn_polygon(classes, &z, &ve)?.vertices {
                point.hn_mismatch.push(*index);
            }
            let status = if !is_semistable_classes(classes, &z, &ve)? {
                Status::Unstable
            } else if is_stable_classes(classes, &z, &ve)? {
                Status::Stable
            } else {
                Status::StrictlySemistable
            };
            let qv = q.value_class(&ve);
            if status.is_semistable() && qv.is_negative() {
                point.support_violations.push(*index);
            }
            if status == Status::StrictlySemistable {
                let jh = jordan_holder(r, &z, budget)?;
                point.walls.push(check_q_at_wall(&jh, q, Some(&kd)));
            }
            point.objects.push(ObjectStatus { index: *index, class: ve, status, q: qv });
        }
        points.push(point);
    }

    let legs = path_legs(q, path)?;

    let sample: Vec<ShiftedObject> = corpus.iter().map(|(_, r, _)| ShiftedObject::new((*r).clone())).collect();
    let mut continuity = Vec::new();
    for t in grid.iter().filter(|t| t.is_positive() && *t < &Rational::one()) {
        match continuity_check(sigma0, path, t, &sample, Some(q), budget) {
            Ok(c) => continuity.push(c),
            Err(Error::EmptySample) => {}
            Err(e) => return Err(e),
        }
    }

    let hn_ok = points.iter().all(|p| p.hn_mismatch.is_empty());
    let support_preserved = points.iter().all(|p| p.support_violations.is_empty());
    Ok(LiftReport { steps, grid: points, walls, legs, continuity, hn_ok, support_preserved, ok: hn_ok && support_preserved })
}

/// `d′(P₀, P_t)` over the sample against `(1/π) arcsin(t ‖u‖)`.
pub fn continuity_check(
    sigma0: &PreStability,
    path: &DeformationPath,
    t: &Rational,
    sample: &[ShiftedObject],
    q: Option<&QuadraticForm>,
    budget: u64,
) -> Result<ContinuityReport> {
    if !t.is_positive() || t >= &Rational::one() {
        return Err(Error::ParameterOutOfRange(format_rational(t)));
    }
    let sigma_t = make_prestability(&path.at(t), &[], budget)?;
    let report = distance_dprime(sigma0, &sigma_t, sample, budget)?;
    let exact_norm = match (&path.normal_form, q) {
        (Some(nf), Some(q)) => match normalize(q, &path.z0) {
            Ok(n) if n.metric == QMatrix::identity(2) => Some(operator_norm(&nf.u, &nf.kernel)?),
            _ => None,
        },
        _ => None,
    };
    let advisory = exact_norm.is_none();
    let norm_effective = exact_norm.unwrap_or(1.0);
    let tf = to_f64(t);
    let bound = (tf * norm_effective).min(1.0).asin() / std::f64::consts::PI;
    let linear_bound = tf * norm_effective / std::f64::consts::PI;
    let pass = report.d_prime <= bound + BOUND_TOL;
    let flagged = pass && report.d_prime > linear_bound + BOUND_TOL;
    let witness = (!pass)
        .then(|| report.rows.iter().max_by(|a, b| a.contribution.total_cmp(&b.contribution)).map(|r| r.index))
        .flatten();
    Ok(ContinuityReport { t: t.clone(), d_prime: report.d_prime, norm_effective, advisory, bound, linear_bound, pass, flagged, witness })
}

/// `Z + u ∘ p`.
pub fn reassemble(z: &CentralCharge, u: &DeformationDirection, kd: &KernelData) -> Result<CentralCharge> {
    if kd.dim() == 0 {
        return Ok(z.clone());
    }
    z.add(&CentralCharge::from_matrix(&u.u.mul(&kd.coefficients)?)?)
}
