//! Exact computations with stability conditions on the
//! categories of representations of finite acyclic quivers: Harder-Narasimhan
//! polygons, slicings, wall crossing under deformation of the central charge,
//! and support-property certificates for quadratic forms.

pub mod cy2;
pub mod deformation;
pub mod error;
pub mod hn;
pub mod io;
pub mod lattice;
pub mod matrix;
pub mod oracle;
pub mod phase;
pub mod quadform_ext;
pub mod quiver;
pub mod rational;
pub mod slicing;

pub use cy2::{MukaiLattice, RootSet};
pub use deformation::{DeformationDirection, DeformationPath, JHDecomposition, LiftReport, Wall};
pub use error::{Error, Result};
pub use hn::{HnFiltration, HnPolygon};
pub use lattice::{CentralCharge, Class, Gl2Element, KernelData, Normalization, QuadraticForm, Signature};
pub use matrix::QMatrix;
pub use phase::PhasePoint;
pub use quadform_ext::ExtensionData;
pub use quiver::{Quiver, Representation, SubobjectClassSet};
pub use rational::{QComplex, Rational};
pub use slicing::{PreStability, ShiftedObject};
