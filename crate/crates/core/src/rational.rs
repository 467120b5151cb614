//! Exact rationals, rational complex numbers and their string encoding.
//!
//! Every rational that leaves the crate is written as a `"p/q"` string (or
//! `"p"` for integers) so that reports round-trip without loss.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::BadRational(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Rational::from_integer(n))
        }
    }
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Ratio::to_f64 only fails on overflow of both parts.
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Best rational approximation with denominator `2^bits`, used when a float
/// result must re-enter the exact core (grid refinement, mostly).
pub fn from_f64_dyadic(x: f64, bits: u32) -> Rational {
    let scale = (1u64 << bits) as f64;
    let n = (x * scale).round() as i64;
    Rational::new(BigInt::from(n), BigInt::from(1u64 << bits))
}

/// Exact square root when `r` is the square of a rational.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    use num_integer::Integer;
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Scales a rational vector to a primitive integer vector whose first nonzero
/// entry is positive. Returns `None` for the zero vector or on i64 overflow.
pub fn primitive_integer_vector(v: &[Rational]) -> Option<Vec<i64>> {
    use num_integer::Integer;
    let l = lcm_of_denominators(v);
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return None;
    }
    let sign = ints
        .iter()
        .find(|x| !x.is_zero())
        .map(|x| if x.is_negative() { -BigInt::one() } else { BigInt::one() })
        .unwrap_or_else(BigInt::one);
    ints.iter().map(|x| (x / &g * &sign).to_i64()).collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RationalRepr {
    Int(i64),
    Str(String),
}

impl RationalRepr {
    fn into_rational(self) -> Result<Rational> {
        match self {
            RationalRepr::Int(n) => Ok(rat(n)),
            RationalRepr::Str(s) => parse_rational(&s),
        }
    }
}

/// `#[serde(with = "...")]` adaptors for rationals and containers of them.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        RationalRepr::deserialize(d)?
            .into_rational()
            .map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
            let strs: Vec<String> = v.iter().map(format_rational).collect();
            strs.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
            Vec::<RationalRepr>::deserialize(d)?
                .into_iter()
                .map(|r| r.into_rational().map_err(serde::de::Error::custom))
                .collect()
        }
    }

    pub mod matrix {
        use super::*;

        pub fn serialize<S: Serializer>(m: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
            let strs: Vec<Vec<String>> = m.iter().map(|row| row.iter().map(format_rational).collect()).collect();
            strs.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<Rational>>, D::Error> {
            Vec::<Vec<RationalRepr>>::deserialize(d)?
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|r| r.into_rational().map_err(serde::de::Error::custom))
                        .collect()
                })
                .collect()
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
            r.as_ref().map(format_rational).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
            Option::<RationalRepr>::deserialize(d)?
                .map(|r| r.into_rational().map_err(serde::de::Error::custom))
                .transpose()
        }
    }

    pub mod option_vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<Vec<Rational>>, s: S) -> std::result::Result<S::Ok, S::Error> {
            v.as_ref().map(|v| v.iter().map(format_rational).collect::<Vec<_>>()).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<Rational>>, D::Error> {
            Option::<Vec<RationalRepr>>::deserialize(d)?
                .map(|v| v.into_iter().map(|r| r.into_rational().map_err(serde::de::Error::custom)).collect())
                .transpose()
        }
    }
}

/// A complex number with exact rational parts.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QComplex {
    #[serde(with = "serde_rational")]
    pub re: Rational,
    #[serde(with = "serde_rational")]
    pub im: Rational,
}

impl QComplex {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self::new(rat(re), rat(im))
    }

    pub fn zero() -> Self {
        Self::new(Rational::zero(), Rational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// `Re(self) Im(other) - Im(self) Re(other)`; positive iff `other` is
    /// counter-clockwise from `self`.
    pub fn cross(&self, other: &QComplex) -> Rational {
        &self.re * &other.im - &self.im * &other.re
    }

    pub fn dot(&self, other: &QComplex) -> Rational {
        &self.re * &other.re + &self.im * &other.im
    }

    pub fn norm_sqr(&self) -> Rational {
        self.dot(self)
    }

    pub fn abs_f64(&self) -> f64 {
        to_f64(&self.norm_sqr()).sqrt()
    }

    pub fn scale(&self, k: &Rational) -> QComplex {
        QComplex::new(&self.re * k, &self.im * k)
    }

    pub fn mul(&self, other: &QComplex) -> QComplex {
        QComplex::new(
            &self.re * &other.re - &self.im * &other.im,
            &self.re * &other.im + &self.im * &other.re,
        )
    }

    pub fn inv(&self) -> Option<QComplex> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return None;
        }
        Some(QComplex::new(&self.re / &n, -&self.im / &n))
    }

    /// Membership in the semi-closed upper half plane
    /// `{Im z > 0} ∪ {Im z = 0, Re z < 0}`.
    pub fn in_upper_half_plane(&self) -> bool {
        self.im.is_positive() || (self.im.is_zero() && self.re.is_negative())
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (to_f64(&self.re), to_f64(&self.im))
    }

    /// `arg(z) / π` in `(-1, 1]`.
    pub fn arg_over_pi(&self) -> f64 {
        let (x, y) = self.to_f64();
        y.atan2(x) / std::f64::consts::PI
    }
}

impl std::ops::Add for &QComplex {
    type Output = QComplex;
    fn add(self, rhs: &QComplex) -> QComplex {
        QComplex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl std::ops::Sub for &QComplex {
    type Output = QComplex;
    fn sub(self, rhs: &QComplex) -> QComplex {
        QComplex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl std::ops::Neg for &QComplex {
    type Output = QComplex;
    fn neg(self) -> QComplex {
        QComplex::new(-&self.re, -&self.im)
    }
}

impl fmt::Debug for QComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for QComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}i", format_rational(&self.re), format_rational(&self.im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("-4").unwrap(), rat(-4));
        assert_eq!(parse_rational(" 7 / -14 ").unwrap(), ratio(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&ratio(-3, 4)), "-3/4");
        assert_eq!(format_rational(&rat(5)), "5");
    }

    #[test]
    fn upper_half_plane() {
        assert!(QComplex::from_ints(0, 1).in_upper_half_plane());
        assert!(QComplex::from_ints(-1, 0).in_upper_half_plane());
        assert!(!QComplex::from_ints(1, 0).in_upper_half_plane());
        assert!(!QComplex::zero().in_upper_half_plane());
        assert!(!QComplex::from_ints(3, -1).in_upper_half_plane());
    }

    #[test]
    fn primitive_vectors() {
        assert_eq!(primitive_integer_vector(&[ratio(-1, 2), ratio(1, 2)]), Some(vec![1, -1]));
        assert_eq!(primitive_integer_vector(&[rat(0), ratio(2, 3), ratio(4, 3)]), Some(vec![0, 1, 2]));
        assert_eq!(primitive_integer_vector(&[rat(0)]), None);
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(rational_sqrt(&ratio(9, 4)), Some(ratio(3, 2)));
        assert_eq!(rational_sqrt(&ratio(1, 2)), None);
        assert_eq!(rational_sqrt(&rat(-1)), None);
    }

    #[test]
    fn serde_roundtrip() {
        let z = QComplex::new(ratio(-3, 2), rat(7));
        let s = serde_json::to_string(&z).unwrap();
        assert_eq!(s, r#"{"re":"-3/2","im":"7"}"#);
        let back: QComplex = serde_json::from_str(&s).unwrap();
        assert_eq!(back, z);
        let ints: QComplex = serde_json::from_str(r#"{"re":-1,"im":"1/2"}"#).unwrap();
        assert_eq!(ints, QComplex::new(rat(-1), ratio(1, 2)));
    }
}
