//! Lattice extensions that make a quadratic form nondegenerate of signature
//! `(2, rk - 2)` while keeping the kernel of the central charge negative
//! definite.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{kernel, negative_definite_witness, orthogonal_complement, signature, CentralCharge, QuadraticForm};
use crate::matrix::{dot, QMatrix};
use crate::rational::{format_rational, primitive_integer_vector, rat, serde_rational, QComplex, Rational};

/// How an adjoined coordinate was chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NewCoordinate {
    /// Dual `n∨` of the null vector `n`: `B̄(n∨, x) = pairing · x`,
    /// `Q̄(n∨) = 0`, `Z̄(n∨) = alpha`.
    Dual {
        #[serde(with = "serde_rational::vec")]
        null_vector: Vec<Rational>,
        #[serde(with = "serde_rational::vec")]
        pairing: Vec<Rational>,
        #[serde(with = "serde_rational")]
        beta: Rational,
        #[serde(with = "serde_rational")]
        alpha: Rational,
    },
    /// `Q̄(v, a) = Q(v) + a²`, `Z̄(v, a) = Z(v) + a z`.
    Positive {
        z: QComplex,
        /// `Q(v)` for the fiber point `v ∈ K⊥` over `z`, when the fiber is nonempty.
        #[serde(with = "serde_rational::option")]
        fiber_value: Option<Rational>,
    },
}

/// `Λ ↪ Λ̄` by coordinate inclusion, with the extended form and charge.
/// `Z̄ ∘ embed = rotation ∘ Z` and `Q̄ ∘ embed = Q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionData {
    pub embed: QMatrix,
    pub rotation: QMatrix,
    pub q_bar: QuadraticForm,
    pub z_bar: CentralCharge,
    pub new_coords: Vec<NewCoordinate>,
}

impl ExtensionData {
    pub fn source_rank(&self) -> usize {
        self.embed.cols()
    }

    pub fn target_rank(&self) -> usize {
        self.embed.rows()
    }

    /// Exact restriction identities against the source data.
    pub fn restricts_to(&self, q: &QuadraticForm, z: &CentralCharge) -> bool {
        let qr = self.q_bar.congruent(&self.embed).map(|f| &f == q).unwrap_or(false);
        let zr = self.z_bar.compose_right(&self.embed).map(|c| c == z.compose_left(&self.rotation)).unwrap_or(false);
        qr && zr
    }

    /// Values of `Z̄` on the adjoined coordinates.
    pub fn new_values(&self) -> Vec<QComplex> {
        (self.source_rank()..self.target_rank()).map(|j| self.z_bar.column(j)).collect()
    }

    /// Extends another charge on the source lattice the same way.
    pub fn extend_charge(&self, z: &CentralCharge) -> CentralCharge {
        z.compose_left(&self.rotation).extended(&self.new_values())
    }
}

pub fn radical(q: &QuadraticForm) -> Vec<Vec<Rational>> {
    q.radical()
}

fn check_kernel(q: &QuadraticForm, z: &CentralCharge) -> Result<Vec<Vec<Rational>>> {
    if q.rank() != z.rank() {
        return Err(Error::DimensionMismatch { expected: q.rank(), found: z.rank() });
    }
    let k = kernel(z);
    if let Some(w) = negative_definite_witness(q, &k)? {
        return Err(Error::KernelNotNegativeDefinite { witness: w.iter().map(format_rational).collect() });
    }
    Ok(k)
}

fn inclusion(m: usize, extra: usize) -> QMatrix {
    let mut e = QMatrix::zeros(m + extra, m);
    for i in 0..m {
        e[(i, i)] = Rational::one();
    }
    e
}

/// Multiplication by `1/w` as a real 2×2 matrix.
fn rotation_to_one(w: &QComplex) -> QMatrix {
    let c = w.inv().expect("nonzero");
    QMatrix::from_rows(vec![vec![c.re.clone(), -c.im.clone()], vec![c.im.clone(), c.re.clone()]]).expect("2×2")
}

/// Adjoins a dual `n∨` for every null direction of `Q`, one at a time.
pub fn extend_degenerate(q: &QuadraticForm, z: &CentralCharge) -> Result<ExtensionData> {
    check_kernel(q, z)?;
    let null = radical(q);
    if null.is_empty() {
        return Err(Error::Invalid("form is already nondegenerate".into()));
    }
    let images: Vec<Vec<Rational>> = null.iter().map(|n| {
        let c = z.evaluate_vec(n);
        vec![c.re, c.im]
    }).collect();
    if QMatrix::from_columns(&images)?.rank() < null.len() {
        return Err(Error::NullSpaceNotInjective);
    }
    let m = q.rank();
    let mut gram = q.gram().clone();
    let mut zc = z.clone();
    let mut rotation = QMatrix::identity(2);
    let mut new_coords = Vec::new();
    loop {
        let cur_q = QuadraticForm::new(gram.clone())?;
        let null = radical(&cur_q);
        let Some(n) = null.into_iter().next() else { break };
        let r = gram.rows();
        let pivot = n.iter().position(|x| !x.is_zero()).expect("nonzero null vector");
        let mut pairing = vec![Rational::zero(); r];
        pairing[pivot] = Rational::one() / &n[pivot];
        let zn = zc.evaluate_vec(&n);
        let rot = rotation_to_one(&zn);
        zc = zc.compose_left(&rot);
        rotation = rot.mul(&rotation)?;

        let kb = kernel(&zc);
        let beta = if kb.is_empty() {
            Rational::zero()
        } else {
            let neg = cur_q.restricted(&kb).scale(&-Rational::one());
            let w: Vec<Rational> = kb.iter().map(|k| dot(&pairing, k)).collect();
            let inv = neg.inverse().ok_or(Error::KernelNotNegativeDefinite { witness: Vec::new() })?;
            dot(&w, &inv.mul_vec(&w)?)
        };
        let alpha = &beta + Rational::one();

        let mut g = QMatrix::zeros(r + 1, r + 1);
        for i in 0..r {
            for j in 0..r {
                g[(i, j)] = gram[(i, j)].clone();
            }
            g[(i, r)] = pairing[i].clone();
            g[(r, i)] = pairing[i].clone();
        }
        gram = g;
        zc = zc.extended(&[QComplex::new(alpha.clone(), Rational::zero())]);
        new_coords.push(NewCoordinate::Dual { null_vector: n, pairing, beta, alpha });
    }
    let q_bar = QuadraticForm::new(gram)?;
    check_kernel(&q_bar, &zc)?;
    Ok(ExtensionData { embed: inclusion(m, new_coords.len()), rotation, q_bar, z_bar: zc, new_coords })
}

/// Smallest positive integer `s` with `s² · value < -1`, for `value < 0`.
fn scale_below_minus_one(value: &Rational) -> i64 {
    debug_assert!(value.is_negative());
    let mut s = 1i64;
    while !(rat(s * s) * value < -Rational::one()) {
        s += 1;
    }
    s
}

/// A vector `d ∈ ℚ²` with `dᵀ T d < 0` for an indefinite or negative 2×2 `T`.
fn negative_direction(t: &QMatrix) -> Option<Vec<Rational>> {
    let (a, b, c) = (&t[(0, 0)], &t[(0, 1)], &t[(1, 1)]);
    // Axis directions first; ties go to the real axis.
    if a.is_negative() || c.is_negative() {
        return Some(if c < a { vec![rat(0), rat(1)] } else { vec![rat(1), rat(0)] });
    }
    let det = a * c - b * b;
    if !det.is_negative() {
        return None;
    }
    if c.is_zero() {
        // a + 2 s b = -1
        let s = -(a + Rational::one()) / (rat(2) * b);
        return Some(vec![rat(1), s]);
    }
    // (c, -b): value c · det < 0
    Some(vec![c.clone(), -b.clone()])
}

/// Adjoins one coordinate `a` with `Q̄(v, a) = Q(v) + a²` and `Z̄(v, a) = Z(v) + a z`.
pub fn extend_signature(q: &QuadraticForm, z: &CentralCharge) -> Result<ExtensionData> {
    let k = check_kernel(q, z)?;
    let sig = signature(q);
    if sig.null > 0 {
        return Err(Error::Invalid("form is degenerate; adjoin duals of the null space first".into()));
    }
    if sig.positive >= 2 {
        return Err(Error::AlreadyNormalSignature);
    }
    let m = q.rank();
    let comp = orthogonal_complement(q, &k)?;
    let (zval, fiber_value) = match comp.len() {
        0 => (QComplex::from_ints(0, 1), None),
        1 => {
            let f = &comp[0];
            let w = z.evaluate_vec(f);
            let qf = q.value(f);
            if qf.is_negative() {
                let s = scale_below_minus_one(&qf);
                (w.scale(&rat(s)), Some(rat(s * s) * qf))
            } else {
                // Q ≥ 0 on K⊥: every fiber over the image line fails, so pick
                // z off the line, where the fiber is empty.
                (QComplex::new(-w.im.clone(), w.re.clone()), None)
            }
        }
        2 => {
            let cols: Vec<Vec<Rational>> = comp.iter().map(|f| {
                let c = z.evaluate_vec(f);
                vec![c.re, c.im]
            }).collect();
            let a = QMatrix::from_columns(&cols)?;
            let a_inv = a.inverse().ok_or(Error::DegenerateOnComplement)?;
            let h = q.restricted(&comp);
            let t = a_inv.transpose().mul(&h)?.mul(&a_inv)?;
            let d = negative_direction(&t).ok_or_else(|| {
                Error::NoFiberValue("form is positive semidefinite on the complement of the kernel".into())
            })?;
            let value = dot(&d, &t.mul_vec(&d)?);
            let s = scale_below_minus_one(&value);
            let zv = QComplex::new(&d[0] * rat(s), &d[1] * rat(s));
            (zv, Some(rat(s * s) * value))
        }
        n => return Err(Error::Invalid(format!("kernel complement has dimension {n} > 2"))),
    };
    let mut gram = QMatrix::zeros(m + 1, m + 1);
    for i in 0..m {
        for j in 0..m {
            gram[(i, j)] = q.gram()[(i, j)].clone();
        }
    }
    gram[(m, m)] = Rational::one();
    let q_bar = QuadraticForm::new(gram)?;
    let z_bar = z.extended(std::slice::from_ref(&zval));
    check_kernel(&q_bar, &z_bar)?;
    Ok(ExtensionData {
        embed: inclusion(m, 1),
        rotation: QMatrix::identity(2),
        q_bar,
        z_bar,
        new_coords: vec![NewCoordinate::Positive { z: zval, fiber_value }],
    })
}

/// Full reduction: duals for the null space, then positive coordinates until
/// the signature is `(2, rk - 2)`.
pub fn reduce_and_lift(q: &QuadraticForm, z: &CentralCharge) -> Result<Vec<ExtensionData>> {
    check_kernel(q, z)?;
    let mut steps = Vec::new();
    let (mut cq, mut cz) = (q.clone(), z.clone());
    if signature(&cq).null > 0 {
        let e = extend_degenerate(&cq, &cz)?;
        cq = e.q_bar.clone();
        cz = e.z_bar.clone();
        steps.push(e);
    }
    loop {
        let sig = signature(&cq);
        if sig.positive > 2 {
            return Err(Error::SignatureMismatch {
                expected: (2, cq.rank().saturating_sub(2), 0),
                found: sig.as_tuple(),
            });
        }
        if sig.positive == 2 {
            break;
        }
        let e = extend_signature(&cq, &cz)?;
        cq = e.q_bar.clone();
        cz = e.z_bar.clone();
        steps.push(e);
    }
    Ok(steps)
}

/// The composite of a pipeline as a single extension of the original lattice.
pub fn compose(q: &QuadraticForm, z: &CentralCharge, steps: &[ExtensionData]) -> ExtensionData {
    let mut out = ExtensionData {
        embed: QMatrix::identity(q.rank()),
        rotation: QMatrix::identity(2),
        q_bar: q.clone(),
        z_bar: z.clone(),
        new_coords: Vec::new(),
    };
    for s in steps {
        out.embed = s.embed.mul(&out.embed).expect("chain of inclusions");
        out.rotation = s.rotation.mul(&out.rotation).expect("2×2");
        out.q_bar = s.q_bar.clone();
        out.z_bar = s.z_bar.clone();
        out.new_coords.extend(s.new_coords.iter().cloned());
    }
    out
}

/// Primitive integer form of a kernel vector, for reporting.
pub fn integral(v: &[Rational]) -> Option<Vec<i64>> {
    primitive_integer_vector(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::is_negative_definite_on;
    use crate::rational::ratio;

    fn xz_form() -> (QuadraticForm, CentralCharge) {
        let q = QuadraticForm::from_i64(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, -1]]);
        let z = CentralCharge::new(vec![rat(1), rat(0), rat(0)], vec![rat(0), rat(1), rat(0)]).unwrap();
        (q, z)
    }

    #[test]
    fn radical_examples() {
        assert!(radical(&QuadraticForm::from_i64(&[&[1, 0], &[0, -1]])).is_empty());
        assert_eq!(radical(&xz_form().0), vec![vec![rat(0), rat(1), rat(0)]]);
        assert_eq!(radical(&QuadraticForm::from_i64(&[&[0, 0], &[0, 0]])).len(), 2);
    }

    #[test]
    fn degenerate_example() {
        let (q, z) = xz_form();
        let e = extend_degenerate(&q, &z).unwrap();
        assert_eq!(e.rotation, QMatrix::from_i64(&[&[0, 1], &[-1, 0]]));
        match &e.new_coords[..] {
            [NewCoordinate::Dual { beta, alpha, .. }] => {
                assert_eq!(beta, &rat(0));
                assert_eq!(alpha, &rat(1));
            }
            other => panic!("unexpected {other:?}"),
        }
        let expected = QuadraticForm::from_i64(&[&[1, 0, 0, 0], &[0, 0, 0, 1], &[0, 0, -1, 0], &[0, 1, 0, 0]]);
        assert_eq!(e.q_bar, expected);
        assert_eq!(signature(&e.q_bar).as_tuple(), (2, 2, 0));
        assert!(e.restricts_to(&q, &z));
        assert!(is_negative_definite_on(&e.q_bar, &kernel(&e.z_bar)).unwrap());
    }

    #[test]
    fn degenerate_with_empty_kernel() {
        // Q = x², Z = x + i y: N = span(e₂), K = 0.
        let q = QuadraticForm::from_i64(&[&[1, 0], &[0, 0]]);
        let z = CentralCharge::new(vec![rat(1), rat(0)], vec![rat(0), rat(1)]).unwrap();
        let e = extend_degenerate(&q, &z).unwrap();
        assert!(matches!(&e.new_coords[0], NewCoordinate::Dual { beta, alpha, .. } if beta.is_zero() && alpha == &rat(1)));
        assert!(e.restricts_to(&q, &z));
    }

    #[test]
    fn degenerate_two_null_directions() {
        // Q = 0 on ℤ², Z injective.
        let q = QuadraticForm::from_i64(&[&[0, 0], &[0, 0]]);
        let z = CentralCharge::from_values(&[QComplex::from_ints(-1, 1), QComplex::from_ints(0, 1)]);
        let e = extend_degenerate(&q, &z).unwrap();
        assert_eq!(e.target_rank(), 4);
        assert_eq!(signature(&e.q_bar).null, 0);
        assert!(e.restricts_to(&q, &z));
        let bad = CentralCharge::from_values(&[QComplex::from_ints(-1, 1), QComplex::from_ints(-2, 2)]);
        assert!(matches!(extend_degenerate(&q, &bad), Err(Error::NullSpaceNotInjective | Error::KernelNotNegativeDefinite { .. })));
    }

    #[test]
    fn signature_examples() {
        let q = QuadraticForm::from_i64(&[&[-1, 0], &[0, -1]]);
        let z = CentralCharge::from_values(&[QComplex::from_ints(1, 0), QComplex::from_ints(0, 1)]);
        let e = extend_signature(&q, &z).unwrap();
        assert!(matches!(&e.new_coords[0], NewCoordinate::Positive { z, fiber_value: Some(v) }
            if z == &QComplex::from_ints(2, 0) && v == &rat(-4)));
        assert_eq!(e.q_bar, QuadraticForm::from_i64(&[&[-1, 0, 0], &[0, -1, 0], &[0, 0, 1]]));
        assert_eq!(signature(&e.q_bar).as_tuple(), (1, 2, 0));

        let xy = QuadraticForm::hyperbolic_xy();
        let z = CentralCharge::from_values(&[QComplex::from_ints(-1, 1), QComplex::new(rat(-1), ratio(1, 2))]);
        let e = extend_signature(&xy, &z).unwrap();
        assert!(matches!(&e.new_coords[0], NewCoordinate::Positive { z, fiber_value: Some(v) }
            if z == &QComplex::from_ints(0, 1) && v == &rat(-4)));
        assert_eq!(xy.value_class(&crate::lattice::Class(vec![2, -2])), rat(-4));
        assert_eq!(e.z_bar.column(2), QComplex::from_ints(0, 1));

        let id = QuadraticForm::from_i64(&[&[1, 0], &[0, 1]]);
        assert!(matches!(extend_signature(&id, &z), Err(Error::AlreadyNormalSignature)));
    }

    #[test]
    fn signature_on_a_line_image() {
        // Z has image ℝ(−1+i) and Q is positive on K⊥.
        let q = QuadraticForm::from_i64(&[&[1, 0], &[0, -1]]);
        let z = CentralCharge::from_values(&[QComplex::from_ints(-1, 1), QComplex::zero()]);
        let e = extend_signature(&q, &z).unwrap();
        assert!(matches!(&e.new_coords[0], NewCoordinate::Positive { fiber_value: None, .. }));
        assert!(e.restricts_to(&q, &z));
        assert_eq!(e.z_bar.real_rank(), 2);
    }

    #[test]
    fn pipeline_examples() {
        let id = QuadraticForm::from_i64(&[&[1, 0], &[0, 1]]);
        let z = CentralCharge::from_values(&[QComplex::from_ints(-1, 1), QComplex::from_ints(0, 1)]);
        assert!(reduce_and_lift(&id, &z).unwrap().is_empty());

        let xy = QuadraticForm::hyperbolic_xy();
        let steps = reduce_and_lift(&xy, &z).unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(signature(&steps[0].q_bar).as_tuple(), (2, 1, 0));

        let (q, z) = xz_form();
        let steps = reduce_and_lift(&q, &z).unwrap();
        let total = compose(&q, &z, &steps);
        assert_eq!(signature(&total.q_bar).as_tuple(), (2, total.target_rank() - 2, 0));
        assert!(total.target_rank() >= 4);
        assert!(total.restricts_to(&q, &z));
    }
}
