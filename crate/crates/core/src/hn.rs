//! Harder-Narasimhan polygons and the filtrations they encode.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{enumerate_ellipsoid, CentralCharge, Class, Normalization};
use crate::matrix::{dot, QMatrix};
use crate::phase::PhasePoint;
use crate::quiver::{Representation, SubobjectClassSet, Subrep};
use crate::rational::{rat, to_f64, QComplex, Rational};

/// Tolerance for comparisons between sums of square roots.
pub const MASS_TOL: f64 = 1e-9;

/// Left boundary `0 = z₀, z₁, …, z_n = Z(E)` of the convex hull of subobject
/// charges, with the subobject class realizing each vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HnPolygon {
    pub vertices: Vec<QComplex>,
    pub classes: Vec<Class>,
}

/// Rejects nonzero classes whose charge is zero or leaves `H`.
pub fn check_heart(classes: &SubobjectClassSet, z: &CentralCharge) -> Result<()> {
    for c in classes.iter().filter(|c| !c.is_zero()) {
        PhasePoint::of_class_charge(c, z.evaluate(c)?)?;
    }
    Ok(())
}

/// `Z(eᵢ) ∈ H` for every simple; since `H` is closed under addition this is
/// the stability-function condition on the whole category.
pub fn check_simples(z: &CentralCharge) -> Result<()> {
    for i in 0..z.rank() {
        let c = Class::basis(z.rank(), i);
        PhasePoint::of_class_charge(&c, z.column(i))?;
    }
    Ok(())
}

pub fn hn_polygon(classes: &SubobjectClassSet, z: &CentralCharge, ve: &Class) -> Result<HnPolygon> {
    if ve.rank() != z.rank() {
        return Err(Error::DimensionMismatch { expected: z.rank(), found: ve.rank() });
    }
    let zero = Class::zero(ve.rank());
    if !classes.contains(&zero) || !classes.contains(ve) {
        return Err(Error::Invalid("class set must contain 0 and the class of the object".into()));
    }
    check_heart(classes, z)?;
    if ve.is_zero() {
        return Ok(HnPolygon { vertices: vec![QComplex::zero()], classes: vec![zero] });
    }
    let mut pts: Vec<(QComplex, Class)> = Vec::with_capacity(classes.len());
    for c in classes.iter() {
        pts.push((z.evaluate(c)?, c.clone()));
    }
    // Im ascending, then Re descending: 0 comes first and Z(E) last.
    pts.sort_by(|(a, ca), (b, cb)| a.im.cmp(&b.im).then_with(|| b.re.cmp(&a.re)).then_with(|| ca.cmp(cb)));
    pts.dedup_by(|(a, _), (b, _)| a == b);
    let mut chain: Vec<(QComplex, Class)> = Vec::new();
    for p in pts {
        while chain.len() >= 2 {
            let top = &chain[chain.len() - 1].0;
            let second = &chain[chain.len() - 2].0;
            if !(top - second).cross(&(&p.0 - top)).is_negative() {
                chain.pop();
            } else {
                break;
            }
        }
        chain.push(p);
    }
    let (vertices, classes) = chain.into_iter().unzip();
    Ok(HnPolygon { vertices, classes })
}

impl HnPolygon {
    pub fn edges(&self) -> Vec<QComplex> {
        self.vertices.windows(2).map(|w| &w[1] - &w[0]).collect()
    }

    pub fn edge_classes(&self) -> Vec<Class> {
        self.classes.windows(2).map(|w| w[1].sub(&w[0])).collect()
    }

    pub fn is_single_edge(&self) -> bool {
        self.vertices.len() == 2
    }

    pub fn total(&self) -> &QComplex {
        self.vertices.last().expect("polygon has a vertex")
    }

    /// `p` lies on or to the right of every edge line, within the height range.
    pub fn weakly_right_of_boundary(&self, p: &QComplex) -> bool {
        if p.im.is_negative() || p.im > self.total().im {
            return false;
        }
        self.vertices.windows(2).all(|w| !(&w[1] - &w[0]).cross(&(p - &w[0])).is_positive())
    }

    pub fn mass(&self) -> Mass {
        Mass::from_edges(self.edges().iter().map(QComplex::norm_sqr).collect())
    }

    /// Mass measured with `|z|² = zᵀ S z` for the normalizing metric `S`.
    pub fn mass_in(&self, norm: &Normalization) -> Mass {
        Mass::from_edges(self.edges().iter().map(|e| norm.charge_norm_sq(e)).collect())
    }

    pub fn truncated(&self) -> TruncatedPolygon {
        TruncatedPolygon { vertices: self.vertices.clone() }
    }
}

/// Sum of square roots of the exact squared edge lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mass {
    #[serde(with = "crate::rational::serde_rational::vec")]
    pub edge_lengths_sq: Vec<Rational>,
    pub value: f64,
}

impl Mass {
    pub fn from_edges(edge_lengths_sq: Vec<Rational>) -> Self {
        let value = edge_lengths_sq.iter().map(|e| to_f64(e).sqrt()).sum();
        Self { edge_lengths_sq, value }
    }

    pub fn zero() -> Self {
        Self { edge_lengths_sq: Vec::new(), value: 0.0 }
    }

    /// `self ≥ √r`, exact when the mass has at most two terms.
    pub fn at_least_sqrt(&self, r: &Rational) -> bool {
        match self.edge_lengths_sq.as_slice() {
            [] => !r.is_positive(),
            [a] => a >= r,
            // (√a + √b)² = a + b + 2√(ab) ≥ r  ⇔  2√(ab) ≥ r - a - b
            [a, b] => {
                let rhs = r - a - b;
                !rhs.is_positive() || rat(4) * a * b >= &rhs * &rhs
            }
            _ => self.value + MASS_TOL >= to_f64(r).sqrt(),
        }
    }
}

/// The closed polygon spanned by the left extremal points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedPolygon {
    pub vertices: Vec<QComplex>,
}

impl TruncatedPolygon {
    pub fn contains(&self, p: &QComplex) -> bool {
        match self.vertices.len() {
            0 => false,
            1 => p.is_zero(),
            2 => {
                let e = &self.vertices[1];
                // on the segment [0, e]
                e.cross(p).is_zero() && !e.dot(p).is_negative() && e.dot(p) <= e.norm_sqr()
            }
            n => (0..n).all(|i| {
                let a = &self.vertices[i];
                let b = &self.vertices[(i + 1) % n];
                !(b - a).cross(&(p - a)).is_positive()
            }),
        }
    }

    /// All `d ∈ Λ` with `Z(d)` in the polygon and
    /// `‖p(d)‖ ≤ m(E) - Re Z(E) + Re Z(d)`, lengths measured in normalized
    /// coordinates. Finite because the kernel is negative definite.
    pub fn integer_classes_within(&self, z: &CentralCharge, norm: &Normalization, limit: u64) -> Result<Vec<Class>> {
        let kd = &norm.kernel;
        let poly_mass = {
            let edges: Vec<Rational> =
                self.vertices.windows(2).map(|w| norm.charge_norm_sq(&(&w[1] - &w[0]))).collect();
            Mass::from_edges(edges)
        };
        let total = self.vertices.last().cloned().unwrap_or_else(QComplex::zero);
        let lhs_const = poly_mass.value - to_f64(&total.re);
        // Bounds for the majorant |Z v|²_S + ‖p v‖².
        let r_sq = self.vertices.iter().map(|v| norm.charge_norm_sq(v)).max().unwrap_or_else(Rational::zero);
        let max_re = self.vertices.iter().map(|v| v.re.clone()).max().unwrap_or_else(Rational::zero);
        let p_bound = (lhs_const + to_f64(&max_re)).max(0.0);
        let bound = &r_sq + crate::rational::from_f64_dyadic(p_bound * p_bound, 20) + rat(1);
        let zm = z.as_matrix();
        let charge_part = zm.transpose().mul(&norm.metric)?.mul(&zm)?;
        let kernel_part = kd.coefficients.transpose().mul(&kd.neg_gram)?.mul(&kd.coefficients)?;
        let majorant: QMatrix = charge_part.add(&kernel_part)?;
        let mut out = Vec::new();
        for pt in enumerate_ellipsoid(&majorant, &bound, limit)? {
            let c = Class(pt);
            let zc = z.evaluate(&c)?;
            if !self.contains(&zc) {
                continue;
            }
            let pn = to_f64(&kd.norm_sq(&c.to_rational())).sqrt();
            if pn <= lhs_const + to_f64(&zc.re) + MASS_TOL {
                out.push(c);
            }
        }
        Ok(out)
    }
}

/// Phase comparison `φ(a) > φ(b)` for charges in `H`.
fn phase_greater(a: &QComplex, b: &QComplex) -> bool {
    b.cross(a).is_positive()
}

/// No subobject class has strictly larger phase than the whole.
pub fn is_semistable_classes(classes: &SubobjectClassSet, z: &CentralCharge, ve: &Class) -> Result<bool> {
    if ve.is_zero() {
        return Err(Error::ZeroObject);
    }
    check_heart(classes, z)?;
    let ze = z.evaluate(ve)?;
    for c in classes.iter().filter(|c| !c.is_zero()) {
        if phase_greater(&z.evaluate(c)?, &ze) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Semistable and no proper nonzero subobject of the same phase.
pub fn is_stable_classes(classes: &SubobjectClassSet, z: &CentralCharge, ve: &Class) -> Result<bool> {
    if !is_semistable_classes(classes, z, ve)? {
        return Ok(false);
    }
    let ze = z.evaluate(ve)?;
    Ok(!classes.iter().any(|c| !c.is_zero() && c != ve && ze.cross(&z.evaluate(c).unwrap()).is_zero()))
}

pub fn is_semistable(r: &Representation, z: &CentralCharge, budget: u64) -> Result<bool> {
    is_semistable_classes(&r.subobject_classes(budget)?, z, &r.dimension_vector())
}

pub fn is_stable(r: &Representation, z: &CentralCharge, budget: u64) -> Result<bool> {
    is_stable_classes(&r.subobject_classes(budget)?, z, &r.dimension_vector())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HnStep {
    pub class: Class,
    pub witness: Subrep,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HnFactor {
    pub class: Class,
    pub phase: PhasePoint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HnFiltration {
    /// `0 = E₀ ⊂ E₁ ⊂ … ⊂ E_n = E`, including both ends.
    pub steps: Vec<HnStep>,
    pub factors: Vec<HnFactor>,
    pub polygon: HnPolygon,
}

impl HnFiltration {
    pub fn factor_classes(&self) -> Vec<Class> {
        self.factors.iter().map(|f| f.class.clone()).collect()
    }

    pub fn phase_bounds(&self) -> (PhasePoint, PhasePoint) {
        let first = self.factors.first().expect("nonzero object").phase.clone();
        let last = self.factors.last().expect("nonzero object").phase.clone();
        (last, first)
    }
}

/// HN filtration read off the polygon, one witness per vertex, with every
/// factor checked semistable by brute force.
pub fn hn_filtration(r: &Representation, z: &CentralCharge, budget: u64) -> Result<HnFiltration> {
    if r.is_zero() {
        return Err(Error::ZeroObject);
    }
    let subs = r.subreps(budget)?;
    let classes: SubobjectClassSet = subs.iter().map(Subrep::class).collect();
    let ve = r.dimension_vector();
    let polygon = hn_polygon(&classes, z, &ve)?;
    let mut steps: Vec<HnStep> = Vec::with_capacity(polygon.vertices.len());
    for (i, c) in polygon.classes.iter().enumerate() {
        let witness = subs.iter().find(|s| &s.class() == c).cloned().expect("vertex class is realized");
        if let Some(prev) = steps.last() {
            if !witness.contains(&prev.witness) {
                return Err(Error::NotAFiltration { step: i, prev: i - 1 });
            }
        }
        steps.push(HnStep { class: c.clone(), witness });
    }
    let mut factors = Vec::with_capacity(steps.len() - 1);
    for w in steps.windows(2) {
        let quot = r.subquotient(&w[1].witness, &w[0].witness)?;
        let class = w[1].class.sub(&w[0].class);
        debug_assert_eq!(quot.dimension_vector(), class);
        if !is_semistable(&quot, z, budget)? {
            return Err(Error::NotSemistable);
        }
        let phase = PhasePoint::of_class_charge(&class, z.evaluate(&class)?)?;
        factors.push(HnFactor { class, phase });
    }
    for w in factors.windows(2) {
        if w[0].phase <= w[1].phase {
            return Err(Error::Invalid("HN factor phases are not strictly decreasing".into()));
        }
    }
    Ok(HnFiltration { steps, factors, polygon })
}

pub fn mass(r: &Representation, z: &CentralCharge, budget: u64) -> Result<Mass> {
    if r.is_zero() {
        return Ok(Mass::zero());
    }
    let classes = r.subobject_classes(budget)?;
    Ok(hn_polygon(&classes, z, &r.dimension_vector())?.mass())
}

/// `‖p(E)‖` from the kernel projection, as a float.
pub fn kernel_norm(norm: &Normalization, v: &Class) -> f64 {
    let c = norm.kernel.kernel_coordinates(&v.to_rational());
    to_f64(&dot(&c, &norm.kernel.neg_gram.mul_vec(&c).expect("k"))).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::{FpMatrix, Quiver, DEFAULT_BUDGET};
    use crate::rational::ratio;

    fn p1() -> Representation {
        Representation::new(Quiver::linear_a(2), 2, vec![1, 1], vec![FpMatrix::identity(2, 1)]).unwrap()
    }

    fn z_unstable() -> CentralCharge {
        CentralCharge::from_values(&[QComplex::from_ints(-1, 1), QComplex::new(rat(-1), ratio(1, 2))])
    }

    fn z_semistable() -> CentralCharge {
        CentralCharge::from_values(&[QComplex::from_ints(-1, 1), QComplex::from_ints(0, 1)])
    }

    fn classes(r: &Representation) -> SubobjectClassSet {
        r.subobject_classes(DEFAULT_BUDGET).unwrap()
    }

    #[test]
    fn simple_sent_to_positive_real_axis() {
        let z = CentralCharge::from_values(&[QComplex::from_ints(1, 0), QComplex::from_ints(-1, 1)]);
        assert_eq!(check_simples(&z), Err(Error::HeartViolation { class: Class(vec![1, 0]) }));
        // P1 never sees the simple S1 among its subobjects
        assert!(check_heart(&p1().subobject_classes(DEFAULT_BUDGET).unwrap(), &z).is_ok());
        assert!(check_simples(&z_unstable()).is_ok());
    }

    #[test]
    fn polygon_examples() {
        let r = p1();
        let poly = hn_polygon(&classes(&r), &z_semistable(), &r.dimension_vector()).unwrap();
        assert_eq!(poly.vertices, vec![QComplex::zero(), QComplex::from_ints(-1, 2)]);
        let poly = hn_polygon(&classes(&r), &z_unstable(), &r.dimension_vector()).unwrap();
        assert_eq!(
            poly.vertices,
            vec![QComplex::zero(), QComplex::new(rat(-1), ratio(1, 2)), QComplex::new(rat(-2), ratio(3, 2))]
        );
        let zero = Representation::zero(Quiver::linear_a(2), 2);
        let poly = hn_polygon(&classes(&zero), &z_unstable(), &zero.dimension_vector()).unwrap();
        assert_eq!(poly.vertices, vec![QComplex::zero()]);
    }

    #[test]
    fn polygon_rejects_heart_violation() {
        let r = p1();
        let z = CentralCharge::from_values(&[QComplex::from_ints(1, 0), QComplex::from_ints(0, 1)]);
        // Z(e₁) = 1 is harmless for P₁, whose subobjects avoid the source alone.
        let z2 = CentralCharge::from_values(&[QComplex::from_ints(-1, 1), QComplex::from_ints(1, 0)]);
        assert!(hn_polygon(&classes(&r), &z, &r.dimension_vector()).is_ok());
        assert!(matches!(
            hn_polygon(&classes(&r), &z2, &r.dimension_vector()),
            Err(Error::HeartViolation { .. })
        ));
    }

    #[test]
    fn filtration_examples() {
        let s1 = Representation::simple(Quiver::linear_a(2), 2, 0);
        let f = hn_filtration(&s1, &z_unstable(), DEFAULT_BUDGET).unwrap();
        assert_eq!(f.factor_classes(), vec![Class(vec![1, 0])]);
        assert!(f.factors[0].phase.same_phase(&PhasePoint::of_charge(QComplex::from_ints(-1, 1)).unwrap()));

        let f = hn_filtration(&p1(), &z_unstable(), DEFAULT_BUDGET).unwrap();
        assert_eq!(f.factor_classes(), vec![Class(vec![0, 1]), Class(vec![1, 0])]);
        assert!(f.factors[0].phase > f.factors[1].phase);
        let f = hn_filtration(&p1(), &z_semistable(), DEFAULT_BUDGET).unwrap();
        assert_eq!(f.factor_classes(), vec![Class(vec![1, 1])]);
    }

    #[test]
    fn mass_examples() {
        let m = mass(&p1(), &z_unstable(), DEFAULT_BUDGET).unwrap();
        let expected = 5f64.sqrt() / 2.0 + 2f64.sqrt();
        assert!((m.value - expected).abs() < 1e-12);
        assert!((m.value - 2.5323).abs() < 1e-4);
        let m = mass(&p1(), &z_semistable(), DEFAULT_BUDGET).unwrap();
        assert!((m.value - 5f64.sqrt()).abs() < 1e-12);
        let zero = Representation::zero(Quiver::linear_a(2), 2);
        assert_eq!(mass(&zero, &z_unstable(), DEFAULT_BUDGET).unwrap().value, 0.0);
        // exact mass ≥ |Z(E)|: |−2 + 3/2 i|² = 25/4
        assert!(mass(&p1(), &z_unstable(), DEFAULT_BUDGET).unwrap().at_least_sqrt(&ratio(25, 4)));
    }

    #[test]
    fn truncated_examples() {
        let r = p1();
        let tri = hn_polygon(&classes(&r), &z_unstable(), &r.dimension_vector()).unwrap().truncated();
        // Edge midpoint and interior
        assert!(tri.contains(&QComplex::new(ratio(-1, 2), ratio(1, 4))));
        assert!(tri.contains(&QComplex::new(rat(-1), ratio(2, 3))));
        assert!(tri.contains(&QComplex::new(rat(-1), ratio(1, 2))));
        assert!(!tri.contains(&QComplex::from_ints(1, 1)));
        // Z(S₁) = −1 + i is an edge vector of the triangle, not a point of it.
        assert!(!tri.contains(&QComplex::from_ints(-1, 1)));

        let seg = hn_polygon(&classes(&r), &z_semistable(), &r.dimension_vector()).unwrap().truncated();
        assert!(seg.contains(&QComplex::new(ratio(-1, 2), rat(1))));
        assert!(!seg.contains(&QComplex::from_ints(-2, 4)));
        assert!(!seg.contains(&QComplex::from_ints(0, 1)));
    }

    #[test]
    fn semistability_examples() {
        let s1 = Representation::simple(Quiver::linear_a(2), 2, 0);
        assert!(is_semistable(&s1, &z_unstable(), DEFAULT_BUDGET).unwrap());
        assert!(!is_semistable(&p1(), &z_unstable(), DEFAULT_BUDGET).unwrap());
        assert!(is_semistable(&p1(), &z_semistable(), DEFAULT_BUDGET).unwrap());
        assert!(is_stable(&p1(), &z_semistable(), DEFAULT_BUDGET).unwrap());
        let wall = CentralCharge::from_values(&[QComplex::from_ints(-1, 1), QComplex::from_ints(-1, 1)]);
        assert!(is_semistable(&p1(), &wall, DEFAULT_BUDGET).unwrap());
        assert!(!is_stable(&p1(), &wall, DEFAULT_BUDGET).unwrap());
    }
}
