//! Brute-force reference computations used to cross-check the polygon code.

use num_traits::{Signed, Zero};

use crate::error::Result;
use crate::hn::{hn_filtration, hn_polygon};
use crate::lattice::{CentralCharge, Class, KernelData, QuadraticForm};
use crate::matrix::QMatrix;
use crate::quiver::Representation;
use crate::rational::{rat, to_f64, QComplex, Rational};

/// HN factor classes by repeatedly splitting off the maximal destabilizing
/// subobject: largest phase, and among those the largest charge.
pub fn greedy_hn(r: &Representation, z: &CentralCharge, budget: u64) -> Result<Vec<Class>> {
    let mut factors = Vec::new();
    let mut current = r.clone();
    while !current.is_zero() {
        let mut best: Option<(crate::quiver::Subrep, QComplex)> = None;
        for s in current.subreps(budget)? {
            let c = s.class();
            if c.is_zero() {
                continue;
            }
            let w = z.evaluate(&c)?;
            let better = match &best {
                None => true,
                Some((_, bw)) => {
                    let x = bw.cross(&w);
                    x.is_positive() || (x.is_zero() && w.norm_sqr() > bw.norm_sqr())
                }
            };
            if better {
                best = Some((s, w));
            }
        }
        let (s, _) = best.expect("nonzero object has a nonzero subobject");
        factors.push(s.class());
        current = current.quotient(&s)?;
    }
    Ok(factors)
}

/// Every nonzero `v` with `0 ≤ vᵢ ≤ max_dim`.
pub fn box_classes(rank: usize, max_dim: i64) -> Vec<Class> {
    let mut out = Vec::new();
    let mut v = vec![0i64; rank];
    loop {
        let mut i = rank;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if v[i] < max_dim {
                v[i] += 1;
                v[i + 1..].iter_mut().for_each(|x| *x = 0);
                break;
            }
        }
        out.push(Class(v.clone()));
    }
}

/// `Q(v) = |Z(v)|² - ε|v|²` with `ε` half the least ratio `|Z(v)|²/|v|²`
/// over `classes`, so `Q > 0` on each of them and `Q = -ε|·|²` on `Ker Z`.
pub fn certified_form(z: &CentralCharge, classes: &[Class]) -> Result<QuadraticForm> {
    let mut eps: Option<Rational> = None;
    for c in classes {
        let len: i64 = c.0.iter().map(|x| x * x).sum();
        if len == 0 {
            continue;
        }
        let ratio = z.evaluate(c)?.norm_sqr() / rat(len);
        if eps.as_ref().is_none_or(|e| &ratio < e) {
            eps = Some(ratio);
        }
    }
    let eps = eps.unwrap_or_else(|| rat(1)) / rat(2);
    let zg = QuadraticForm::charge_norm(z).gram().clone();
    let n = z.rank();
    let gram = zg.sub(&QMatrix::identity(n).scale(&eps))?;
    QuadraticForm::new(gram)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundsReport {
    pub containment: bool,
    pub mass_bound: bool,
    pub boundlength: bool,
    pub factor_sum: bool,
    /// First violation found, if any.
    pub detail: Option<String>,
}

impl BoundsReport {
    pub fn all(&self) -> bool {
        self.containment && self.mass_bound && self.boundlength && self.factor_sum
    }
}

/// Polygon containment and the two length inequalities over every
/// subobject of `r`, plus exact summation of factor classes.
pub fn check_polygon_bounds(r: &Representation, z: &CentralCharge, kd: &KernelData, budget: u64, tol: f64) -> Result<BoundsReport> {
    let mut rep = BoundsReport { containment: true, mass_bound: true, boundlength: true, factor_sum: true, detail: None };
    let f = hn_filtration(r, z, budget)?;
    let ve = r.dimension_vector();
    let total = f.factor_classes().iter().fold(Class::zero(ve.rank()), |a, c| a.add(c));
    if total != ve {
        rep.factor_sum = false;
        rep.detail.get_or_insert(format!("factors of {ve} sum to {total}"));
    }
    let m_e = f.polygon.mass().value;
    let slack_e = m_e - to_f64(&z.evaluate(&ve)?.re);
    let p_e = to_f64(&kd.norm_sq(&ve.to_rational())).sqrt();
    if p_e > m_e + tol {
        rep.mass_bound = false;
        rep.detail.get_or_insert(format!("‖p({ve})‖ = {p_e} > m = {m_e}"));
    }
    for s in r.subreps(budget)? {
        let ca = s.class();
        if ca.is_zero() {
            continue;
        }
        let a = r.restrict(&s)?;
        let ha = hn_polygon(&a.subobject_classes(budget)?, z, &ca)?;
        if let Some(v) = ha.vertices.iter().find(|v| !f.polygon.weakly_right_of_boundary(v)) {
            rep.containment = false;
            rep.detail.get_or_insert(format!("vertex {v} of HN({ca}) left of HN({ve})"));
        }
        let slack_a = ha.mass().value - to_f64(&z.evaluate(&ca)?.re);
        if slack_a > slack_e + tol {
            rep.boundlength = false;
            rep.detail.get_or_insert(format!("m - Re Z is {slack_a} on {ca} but {slack_e} on {ve}"));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::{FpMatrix, Quiver, DEFAULT_BUDGET};
    use crate::rational::ratio;

    #[test]
    fn greedy_on_a2() {
        let p1 = Representation::new(Quiver::linear_a(2), 2, vec![1, 1], vec![FpMatrix::identity(2, 1)]).unwrap();
        let z = CentralCharge::from_values(&[QComplex::from_ints(-1, 1), QComplex::new(rat(-1), ratio(1, 2))]);
        assert_eq!(greedy_hn(&p1, &z, DEFAULT_BUDGET).unwrap(), vec![Class(vec![0, 1]), Class(vec![1, 0])]);
        let z = CentralCharge::from_values(&[QComplex::from_ints(-1, 1), QComplex::from_ints(0, 1)]);
        assert_eq!(greedy_hn(&p1, &z, DEFAULT_BUDGET).unwrap(), vec![Class(vec![1, 1])]);
    }

    #[test]
    fn form_is_certified() {
        let z = CentralCharge::from_values(&[QComplex::from_ints(-1, 1), QComplex::from_ints(0, 1), QComplex::from_ints(1, 1)]);
        let classes = box_classes(3, 2);
        assert_eq!(classes.len(), 26);
        let q = certified_form(&z, &classes).unwrap();
        assert!(classes.iter().all(|c| q.value_class(c).is_positive()));
        let kd = KernelData::new(&q, &z).unwrap();
        assert_eq!(kd.dim(), 1);
    }
}
