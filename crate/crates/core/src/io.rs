//! JSON input documents.

use serde::{Deserialize, Serialize};

use crate::cy2::MukaiLattice;
use crate::deformation::{DeformationDirection, DeformationPath};
use crate::error::{Error, Result};
use crate::lattice::{CentralCharge, Gl2Element, QuadraticForm};
use crate::matrix::QMatrix;
use crate::quiver::Representation;
use crate::slicing::{make_prestability, PreStability, ShiftedObject};

/// `{"rank": m, "Z": [[re…],[im…]], "Q": [[…]]}`; either field may be absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeDoc {
    pub rank: usize,
    #[serde(rename = "Z", default, skip_serializing_if = "Option::is_none")]
    pub z: Option<CentralCharge>,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<QuadraticForm>,
}

impl LatticeDoc {
    pub fn validate(&self) -> Result<()> {
        if let Some(z) = &self.z {
            if z.rank() != self.rank {
                return Err(Error::DimensionMismatch { expected: self.rank, found: z.rank() });
            }
        }
        if let Some(q) = &self.q {
            if q.rank() != self.rank {
                return Err(Error::DimensionMismatch { expected: self.rank, found: q.rank() });
            }
        }
        Ok(())
    }
}

/// A charge given bare or inside a lattice document.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ChargeInput {
    Bare(CentralCharge),
    Doc(LatticeDoc),
}

impl ChargeInput {
    pub fn into_charge(self) -> Result<CentralCharge> {
        match self {
            ChargeInput::Bare(z) => Ok(z),
            ChargeInput::Doc(d) => {
                d.validate()?;
                d.z.ok_or_else(|| Error::Invalid("document has no \"Z\"".into()))
            }
        }
    }
}

/// A quadratic form given bare or inside a lattice document.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum FormInput {
    Bare(QuadraticForm),
    Doc(LatticeDoc),
}

impl FormInput {
    pub fn into_form(self) -> Result<QuadraticForm> {
        match self {
            FormInput::Bare(q) => Ok(q),
            FormInput::Doc(d) => {
                d.validate()?;
                d.q.ok_or_else(|| Error::Invalid("document has no \"Q\"".into()))
            }
        }
    }
}

/// `{"Z": …, "generators": [objects…], "lift": {…}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaDoc {
    #[serde(rename = "Z")]
    pub z: CentralCharge,
    #[serde(default, alias = "objects")]
    pub generators: Vec<Representation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift: Option<Gl2Element>,
}

impl SigmaDoc {
    pub fn build(&self, budget: u64) -> Result<PreStability> {
        let sigma = make_prestability(&self.z, &self.generators, budget)?;
        Ok(match &self.lift {
            Some(g) => sigma.transformed(g),
            None => sigma,
        })
    }
}

/// `{"Z0": …, "W": …}` or `{"Z0": …, "u": …}`; the latter needs `Q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathDoc {
    #[serde(rename = "Z0")]
    pub z0: CentralCharge,
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub w: Option<QMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<QMatrix>,
}

impl PathDoc {
    pub fn resolve(&self, q: Option<&QuadraticForm>) -> Result<DeformationPath> {
        match (&self.w, &self.u) {
            (Some(w), None) => DeformationPath::affine(self.z0.clone(), w.clone()),
            (None, Some(u)) => {
                let q = q.ok_or_else(|| Error::Invalid("a path given by \"u\" needs a quadratic form".into()))?;
                DeformationPath::normal(self.z0.clone(), q, DeformationDirection::new(u.clone())?)
            }
            (None, None) => Ok(DeformationPath::constant(self.z0.clone())),
            (Some(_), Some(_)) => Err(Error::Invalid("give either \"W\" or \"u\", not both".into())),
        }
    }
}

/// A list of objects, bare or as `{"objects": […]}`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SampleDoc {
    List(Vec<ShiftedObject>),
    Wrapped { objects: Vec<ShiftedObject> },
}

impl SampleDoc {
    pub fn into_objects(self) -> Vec<ShiftedObject> {
        match self {
            SampleDoc::List(v) | SampleDoc::Wrapped { objects: v } => v,
        }
    }
}

/// `{"gram": [[…]]}` (alias `"pairing"`), optionally with a charge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MukaiDoc {
    #[serde(alias = "pairing")]
    pub gram: QMatrix,
    #[serde(rename = "Z", default, skip_serializing_if = "Option::is_none")]
    pub z: Option<CentralCharge>,
}

impl MukaiDoc {
    pub fn lattice(&self) -> Result<MukaiLattice> {
        MukaiLattice::new(self.gram.clone())
    }
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Invalid(format!("malformed JSON: {e}")))
}
