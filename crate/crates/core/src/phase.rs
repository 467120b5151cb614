use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Class;
use crate::rational::QComplex;

/// Phase of an object `E[shift]` whose heart part has charge `charge ∈ H`.
///
/// The numeric value is `shift + arg(charge)/π`, with `arg ∈ (0, π]`.
/// Comparisons never go through `arg`: equal shifts compare by the sign of
/// the cross product of the representative charges.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhasePoint {
    pub charge: QComplex,
    pub shift: i64,
}

impl PhasePoint {
    pub fn of_charge(charge: QComplex) -> Option<Self> {
        charge.in_upper_half_plane().then_some(Self { charge, shift: 0 })
    }

    /// Phase of `charge = Z(class)`, rejecting zero and out-of-heart values.
    pub fn of_class_charge(class: &Class, charge: QComplex) -> Result<Self> {
        if charge.is_zero() {
            return Err(Error::VanishingCharge { class: class.clone() });
        }
        Self::of_charge(charge).ok_or_else(|| Error::HeartViolation { class: class.clone() })
    }

    pub fn shifted(&self, k: i64) -> Self {
        Self { charge: self.charge.clone(), shift: self.shift + k }
    }

    /// In `(shift, shift + 1]`.
    pub fn value(&self) -> f64 {
        let base = if self.charge.im.is_zero() { 1.0 } else { self.charge.arg_over_pi() };
        self.shift as f64 + base
    }

    pub fn same_phase(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Ord for PhasePoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.shift.cmp(&other.shift).then_with(|| {
            let c = other.charge.cross(&self.charge);
            if c.is_positive() {
                Ordering::Greater
            } else if c.is_negative() {
                Ordering::Less
            } else {
                Ordering::Equal
            }
        })
    }
}

impl PartialOrd for PhasePoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for PhasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "φ≈{:.6} ({} ; shift {})", self.value(), self.charge, self.shift)
    }
}

/// Exact comparison of the phases of two charges in `H`.
pub fn compare_phases(a: &QComplex, b: &QComplex) -> Ordering {
    let c = b.cross(a);
    if c.is_positive() {
        Ordering::Greater
    } else if c.is_negative() {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}
