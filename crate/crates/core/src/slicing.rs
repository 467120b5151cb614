//! Pre-stability conditions built from a heart and a stability function,
//! HN phase bounds, and the sample distance `d′` between slicings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hn::{check_heart, check_simples, hn_filtration, is_semistable};
use crate::lattice::{CentralCharge, Class, Gl2Element};
use crate::phase::PhasePoint;
use crate::quiver::{Representation, RepresentationDoc};

/// `φ(v) = arg Z(v) / π ∈ (0, 1]`, exactly comparable.
pub fn phase(z: &CentralCharge, v: &Class) -> Result<PhasePoint> {
    PhasePoint::of_class_charge(v, z.evaluate(v)?)
}

/// A heart object `E[shift]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftedObject {
    pub object: Representation,
    pub shift: i64,
}

impl ShiftedObject {
    pub fn new(object: Representation) -> Self {
        Self { object, shift: 0 }
    }

    pub fn shifted(object: Representation, shift: i64) -> Self {
        Self { object, shift }
    }
}

#[derive(Serialize, Deserialize)]
struct ShiftedDoc {
    #[serde(flatten)]
    object: RepresentationDoc,
    #[serde(default, skip_serializing_if = "is_zero")]
    shift: i64,
}

fn is_zero(x: &i64) -> bool {
    *x == 0
}

impl Serialize for ShiftedObject {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ShiftedDoc { object: self.object.to_document(), shift: self.shift }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ShiftedObject {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = ShiftedDoc::deserialize(d)?;
        let object = Representation::from_document(&doc.object).map_err(serde::de::Error::custom)?;
        Ok(Self { object, shift: doc.shift })
    }
}

/// `g̃ · (A, Z)`: a stability function `Z` on the heart of representations,
/// transported by a lifted `GL₂⁺` element. The heart itself is implicit: it
/// is the category the objects live in.
#[derive(Clone, Debug, PartialEq)]
pub struct PreStability {
    pub z: CentralCharge,
    pub lift: Gl2Element,
    pub generators: Vec<Representation>,
    validated: bool,
}

impl PreStability {
    pub fn is_validated(&self) -> bool {
        self.validated
    }

    /// Central charge on the whole category, `g ∘ Z`.
    pub fn central_charge(&self) -> CentralCharge {
        self.z.compose_left(&self.lift.matrix)
    }

    pub fn transformed(&self, g: &Gl2Element) -> PreStability {
        PreStability { lift: g.compose(&self.lift), ..self.clone() }
    }

    /// Phase of a semistable heart object of class `v`.
    pub fn phase_of(&self, v: &Class, shift: i64) -> Result<PhasePoint> {
        Ok(self.lift.act_phase(&phase(&self.z, v)?).shifted(shift))
    }
}

/// Checks that `Z` sends every simple into `H` and that each generator has
/// an HN filtration.
pub fn make_prestability(z: &CentralCharge, generators: &[Representation], budget: u64) -> Result<PreStability> {
    check_simples(z)?;
    for g in generators {
        if g.dims().len() != z.rank() {
            return Err(Error::DimensionMismatch { expected: z.rank(), found: g.dims().len() });
        }
        check_heart(&g.subobject_classes(budget)?, z)?;
        if !g.is_zero() {
            hn_filtration(g, z, budget)?;
        }
    }
    Ok(PreStability { z: z.clone(), lift: Gl2Element::identity(), generators: generators.to_vec(), validated: true })
}

/// `(φ⁻, φ⁺)`: smallest and largest HN factor phase.
pub fn phi_bounds(obj: &ShiftedObject, sigma: &PreStability, budget: u64) -> Result<(PhasePoint, PhasePoint)> {
    let f = hn_filtration(&obj.object, &sigma.z, budget)?;
    let (lo, hi) = f.phase_bounds();
    Ok((sigma.lift.act_phase(&lo).shifted(obj.shift), sigma.lift.act_phase(&hi).shifted(obj.shift)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub index: usize,
    pub class: Class,
    pub shift: i64,
    pub phase: f64,
    pub psi_minus: f64,
    pub psi_plus: f64,
    pub contribution: f64,
}

/// `d′` over a finite sample: a lower bound for the supremum over all
/// `σ₁`-semistable objects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub d_prime: f64,
    pub rows: Vec<DistanceRow>,
    /// Sample indices dropped because they are not `σ₁`-semistable.
    pub skipped: Vec<usize>,
}

pub fn distance_dprime(
    sigma1: &PreStability,
    sigma2: &PreStability,
    sample: &[ShiftedObject],
    budget: u64,
) -> Result<DistanceReport> {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (index, obj) in sample.iter().enumerate() {
        if obj.object.is_zero() || !is_semistable(&obj.object, &sigma1.z, budget)? {
            skipped.push(index);
            continue;
        }
        let class = obj.object.dimension_vector();
        let phi = sigma1.phase_of(&class, obj.shift)?.value();
        let (lo, hi) = phi_bounds(obj, sigma2, budget)?;
        let (psi_minus, psi_plus) = (lo.value(), hi.value());
        let contribution = (psi_plus - phi).max(phi - psi_minus);
        rows.push(DistanceRow { index, class, shift: obj.shift, phase: phi, psi_minus, psi_plus, contribution });
    }
    if rows.is_empty() {
        return Err(Error::EmptySample);
    }
    let d_prime = rows.iter().map(|r| r.contribution).fold(0.0, f64::max);
    Ok(DistanceReport { d_prime, rows, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::{FpMatrix, Quiver, DEFAULT_BUDGET};
    use crate::rational::{rat, ratio, QComplex};

    fn a2() -> (Representation, Representation, Representation) {
        let q = Quiver::linear_a(2);
        let p1 = Representation::new(q.clone(), 2, vec![1, 1], vec![FpMatrix::identity(2, 1)]).unwrap();
        (Representation::simple(q.clone(), 2, 0), Representation::simple(q, 2, 1), p1)
    }

    fn z_with_sink(im: crate::rational::Rational) -> CentralCharge {
        CentralCharge::from_values(&[QComplex::from_ints(-1, 1), QComplex::new(rat(-1), im)])
    }

    #[test]
    fn phase_examples() {
        let z = CentralCharge::from_values(&[QComplex::from_ints(0, 1), QComplex::from_ints(-1, 0)]);
        assert!((phase(&z, &Class(vec![1, 0])).unwrap().value() - 0.5).abs() < 1e-12);
        assert_eq!(phase(&z, &Class(vec![0, 1])).unwrap().value(), 1.0);
        assert!((phase(&z, &Class(vec![1, 1])).unwrap().value() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn prestability_validation() {
        let (s1, s2, p1) = a2();
        let gens = [s1, s2, p1];
        assert!(make_prestability(&z_with_sink(ratio(1, 2)), &gens, DEFAULT_BUDGET).unwrap().is_validated());
        let bad = CentralCharge::from_values(&[QComplex::from_ints(1, 0), QComplex::from_ints(0, 1)]);
        assert!(matches!(
            make_prestability(&bad, &gens, DEFAULT_BUDGET),
            Err(Error::HeartViolation { class }) if class == Class(vec![1, 0])
        ));
        let vanishing = CentralCharge::from_values(&[QComplex::zero(), QComplex::from_ints(0, 1)]);
        assert!(matches!(make_prestability(&vanishing, &gens, DEFAULT_BUDGET), Err(Error::VanishingCharge { .. })));
    }

    #[test]
    fn bounds_examples() {
        let (s1, _, p1) = a2();
        let sigma = make_prestability(&z_with_sink(ratio(1, 2)), &[], DEFAULT_BUDGET).unwrap();
        let (lo, hi) = phi_bounds(&ShiftedObject::new(p1.clone()), &sigma, DEFAULT_BUDGET).unwrap();
        assert!((lo.value() - 0.75).abs() < 1e-12);
        let expected = (0.5f64).atan2(-1.0) / std::f64::consts::PI;
        assert!((hi.value() - expected).abs() < 1e-12);
        assert!((hi.value() - 0.8524).abs() < 1e-4);
        let (lo, hi) = phi_bounds(&ShiftedObject::new(s1.clone()), &sigma, DEFAULT_BUDGET).unwrap();
        assert_eq!(lo, hi);
        let (lo1, hi1) = phi_bounds(&ShiftedObject::shifted(p1, 1), &sigma, DEFAULT_BUDGET).unwrap();
        assert!((lo1.value() - 1.75).abs() < 1e-12 && (hi1.value() - expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distance_examples() {
        let (s1, s2, p1) = a2();
        let sample: Vec<ShiftedObject> = [s1, s2, p1].into_iter().map(ShiftedObject::new).collect();
        let sigma = make_prestability(&z_with_sink(ratio(1, 2)), &[], DEFAULT_BUDGET).unwrap();
        assert_eq!(distance_dprime(&sigma, &sigma, &sample, DEFAULT_BUDGET).unwrap().d_prime, 0.0);

        let shifted = sigma.transformed(&Gl2Element::shift_by_one());
        let d = distance_dprime(&sigma, &shifted, &sample, DEFAULT_BUDGET).unwrap();
        assert!((d.d_prime - 1.0).abs() < 1e-12);

        let later = make_prestability(&z_with_sink(ratio(3, 4)), &[], DEFAULT_BUDGET).unwrap();
        let d = distance_dprime(&sigma, &later, &sample, DEFAULT_BUDGET).unwrap();
        assert_eq!(d.skipped, vec![2]);
        let drift = ((0.75f64).atan2(-1.0) - (0.5f64).atan2(-1.0)).abs() / std::f64::consts::PI;
        assert!((d.d_prime - drift).abs() < 1e-12);

        let only_p1 = vec![sample[2].clone()];
        assert!(matches!(distance_dprime(&sigma, &later, &only_p1, DEFAULT_BUDGET), Err(Error::EmptySample)));
    }

    #[test]
    fn sample_document() {
        let (s1, _, _) = a2();
        let obj = ShiftedObject::shifted(s1, 2);
        let s = serde_json::to_string(&obj).unwrap();
        assert!(s.contains("\"shift\":2"));
        let back: ShiftedObject = serde_json::from_str(&s).unwrap();
        assert_eq!(back, obj);
    }
}
