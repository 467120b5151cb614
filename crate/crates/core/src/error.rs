use thiserror::Error;

use crate::lattice::Class;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("malformed rational literal {0:?}")]
    BadRational(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("quadratic form has signature {found:?}, expected {expected:?}")]
    SignatureMismatch {
        expected: (usize, usize, usize),
        found: (usize, usize, usize),
    },

    #[error("kernel of the central charge is not negative definite (witness {witness:?})")]
    KernelNotNegativeDefinite { witness: Vec<String> },

    #[error("basis vectors are linearly dependent")]
    DependentBasis,

    #[error("matrix has non-positive determinant")]
    NonPositiveDeterminant,

    #[error("phase lift {lift} is not a lift of the matrix action (expected {expected} mod 2)")]
    BadPhaseLift { lift: f64, expected: f64 },

    #[error("enumeration needs {required} candidates, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("central charge maps class {class} outside the upper half plane")]
    HeartViolation { class: Class },

    #[error("central charge vanishes on nonzero class {class}")]
    VanishingCharge { class: Class },

    #[error("subrepresentation is not closed under arrow {arrow}")]
    NotClosed { arrow: usize },

    #[error("filtration step {step} does not contain step {prev}")]
    NotAFiltration { step: usize, prev: usize },

    #[error("object is not semistable")]
    NotSemistable,

    #[error("object is zero")]
    ZeroObject,

    #[error("charge is degenerate on the orthogonal complement of the kernel")]
    DegenerateOnComplement,

    #[error("deformation parameter {0} outside [0, 1]")]
    ParameterOutOfRange(String),

    #[error("restriction to the null space is not injective")]
    NullSpaceNotInjective,

    #[error("form already has two positive directions")]
    AlreadyNormalSignature,

    #[error("no admissible fiber value exists: {0}")]
    NoFiberValue(String),

    #[error("root {witness} lies in the kernel of the central charge")]
    KernelRoot { witness: Class },

    #[error("empty sample after filtering")]
    EmptySample,

    #[error("path leaves the admissible set at t = {t}: {reason}")]
    PathNotAdmissible { t: String, reason: String },

    #[error("leg [{from}, {to}] could not be subdivided below the operator-norm margin")]
    OperatorNormTooLarge { from: String, to: String },
}
