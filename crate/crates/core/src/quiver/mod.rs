//! Representations of finite acyclic quivers over small prime fields, with
//! exhaustive enumeration of subrepresentations.

pub mod corpus;
pub mod field;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{CentralCharge, Class};
use crate::rational::Rational;
pub use field::{FpMatrix, Subspace};

/// Default cap on the number of subspace tuples a single enumeration may scan.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Quiver {
    vertex_count: usize,
    arrows: Vec<(usize, usize)>,
    #[serde(skip)]
    order: Vec<usize>,
}

impl Quiver {
    pub fn new(vertex_count: usize, arrows: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(s, t)) = arrows.iter().find(|&&(s, t)| s >= vertex_count || t >= vertex_count) {
            return Err(Error::Invalid(format!("arrow ({s},{t}) out of range for {vertex_count} vertices")));
        }
        let mut indeg = vec![0usize; vertex_count];
        for &(_, t) in &arrows {
            indeg[t] += 1;
        }
        let mut order = Vec::with_capacity(vertex_count);
        let mut ready: BTreeSet<usize> = (0..vertex_count).filter(|&v| indeg[v] == 0).collect();
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &(s, t) in &arrows {
                if s == v {
                    indeg[t] -= 1;
                    if indeg[t] == 0 {
                        ready.insert(t);
                    }
                }
            }
        }
        if order.len() != vertex_count {
            return Err(Error::Invalid("quiver has an oriented cycle".into()));
        }
        Ok(Self { vertex_count, arrows, order })
    }

    /// `0 → 1 → … → n-1`.
    pub fn linear_a(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i)).collect()).expect("acyclic")
    }

    /// Two vertices joined by `k` parallel arrows `0 ⇉ 1`.
    pub fn kronecker(k: usize) -> Self {
        Self::new(2, vec![(0, 1); k]).expect("acyclic")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn arrows(&self) -> &[(usize, usize)] {
        &self.arrows
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }
}

/// Anything whose subobject classes can be listed exhaustively.
pub trait SubobjectProvider {
    fn class(&self) -> Class;
    fn subobject_classes(&self, budget: u64) -> Result<SubobjectClassSet>;
}

/// Dimension vectors realized by subobjects of a fixed object.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubobjectClassSet {
    pub classes: BTreeSet<Class>,
}

impl SubobjectClassSet {
    pub fn contains(&self, c: &Class) -> bool {
        self.classes.contains(c)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Class> {
        self.classes.iter()
    }

    /// Members with `Re Z(d) < bound`; `None` means no bound.
    pub fn bounded(&self, z: &CentralCharge, bound: Option<&Rational>) -> Result<SubobjectClassSet> {
        let mut classes = BTreeSet::new();
        for c in &self.classes {
            if match bound {
                None => true,
                Some(b) => &z.evaluate(c)?.re < b,
            } {
                classes.insert(c.clone());
            }
        }
        Ok(SubobjectClassSet { classes })
    }
}

impl FromIterator<Class> for SubobjectClassSet {
    fn from_iter<I: IntoIterator<Item = Class>>(iter: I) -> Self {
        Self { classes: iter.into_iter().collect() }
    }
}

/// A subrepresentation, given by one subspace per vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subrep {
    pub spaces: Vec<Subspace>,
}

impl Subrep {
    pub fn class(&self) -> Class {
        Class(self.spaces.iter().map(|s| s.dim() as i64).collect())
    }

    pub fn contains(&self, other: &Subrep) -> bool {
        self.spaces.iter().zip(&other.spaces).all(|(a, b)| a.contains_subspace(b))
    }

    pub fn sum(&self, other: &Subrep) -> Subrep {
        Subrep { spaces: self.spaces.iter().zip(&other.spaces).map(|(a, b)| a.sum(b)).collect() }
    }

    pub fn intersection(&self, other: &Subrep) -> Subrep {
        Subrep { spaces: self.spaces.iter().zip(&other.spaces).map(|(a, b)| a.intersection(b)).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Representation {
    quiver: Quiver,
    q: u8,
    dims: Vec<usize>,
    maps: Vec<FpMatrix>,
}

impl Representation {
    pub fn new(quiver: Quiver, q: u8, dims: Vec<usize>, maps: Vec<FpMatrix>) -> Result<Self> {
        if !field::is_small_prime(q) {
            return Err(Error::Invalid(format!("field size {q} is not a prime")));
        }
        if dims.len() != quiver.vertex_count() {
            return Err(Error::DimensionMismatch { expected: quiver.vertex_count(), found: dims.len() });
        }
        if maps.len() != quiver.arrows().len() {
            return Err(Error::DimensionMismatch { expected: quiver.arrows().len(), found: maps.len() });
        }
        for (m, &(s, t)) in maps.iter().zip(quiver.arrows()) {
            if m.rows() != dims[t] || m.cols() != dims[s] || m.field() != q {
                return Err(Error::Invalid(format!(
                    "map for arrow ({s},{t}) must be {}×{} over F{q}",
                    dims[t], dims[s]
                )));
            }
        }
        Ok(Self { quiver, q, dims, maps })
    }

    pub fn zero(quiver: Quiver, q: u8) -> Self {
        let dims = vec![0; quiver.vertex_count()];
        let maps = quiver.arrows().iter().map(|_| FpMatrix::zeros(q, 0, 0)).collect();
        Self { quiver, q, dims, maps }
    }

    /// The simple representation at vertex `v`.
    pub fn simple(quiver: Quiver, q: u8, v: usize) -> Self {
        let mut dims = vec![0; quiver.vertex_count()];
        dims[v] = 1;
        let maps = quiver.arrows().iter().map(|&(s, t)| FpMatrix::zeros(q, dims[t], dims[s])).collect();
        Self { quiver, q, dims, maps }
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn field(&self) -> u8 {
        self.q
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn maps(&self) -> &[FpMatrix] {
        &self.maps
    }

    pub fn dimension_vector(&self) -> Class {
        Class(self.dims.iter().map(|&d| d as i64).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }

    /// `Π_v #{subspaces of 𝔽_q^{d_v}}`, the declared enumeration cost.
    pub fn enumeration_cost(&self) -> u128 {
        self.dims.iter().map(|&d| field::subspace_count(d, self.q)).fold(1u128, u128::saturating_mul)
    }

    fn check_budget(&self, budget: u64) -> Result<()> {
        let required = self.enumeration_cost();
        if required > u128::from(budget) {
            return Err(Error::BudgetExceeded { required, budget });
        }
        Ok(())
    }

    fn required_at(&self, v: usize, chosen: &[Option<Subspace>]) -> Subspace {
        let mut vectors = Vec::new();
        for (a, &(s, t)) in self.quiver.arrows().iter().enumerate() {
            if t == v {
                let us = chosen[s].as_ref().expect("sources precede targets");
                for b in us.basis_vectors() {
                    vectors.push(self.maps[a].mul_vec(&b));
                }
            }
        }
        Subspace::span(self.q, self.dims[v], &vectors)
    }

    /// All subrepresentations, in canonical order (lexicographic in the per
    /// vertex subspace order of [`field::all_subspaces`]).
    pub fn subreps(&self, budget: u64) -> Result<Vec<Subrep>> {
        self.check_budget(budget)?;
        let n = self.quiver.vertex_count();
        let candidates: Vec<Vec<Subspace>> = self.dims.iter().map(|&d| field::all_subspaces(self.q, d)).collect();
        let mut out: Vec<(Vec<usize>, Subrep)> = Vec::new();
        let mut chosen: Vec<Option<Subspace>> = vec![None; n];
        let mut idx = vec![0usize; n];
        self.backtrack(0, &candidates, &mut chosen, &mut idx, &mut out);
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out.into_iter().map(|(_, s)| s).collect())
    }

    fn backtrack(
        &self,
        depth: usize,
        candidates: &[Vec<Subspace>],
        chosen: &mut Vec<Option<Subspace>>,
        idx: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, Subrep)>,
    ) {
        let order = self.quiver.topological_order();
        if depth == order.len() {
            let spaces = chosen.iter().map(|s| s.clone().expect("all chosen")).collect();
            out.push((idx.clone(), Subrep { spaces }));
            return;
        }
        let v = order[depth];
        let required = self.required_at(v, chosen);
        for (i, cand) in candidates[v].iter().enumerate() {
            if cand.contains_subspace(&required) {
                chosen[v] = Some(cand.clone());
                idx[v] = i;
                self.backtrack(depth + 1, candidates, chosen, idx, out);
            }
        }
        chosen[v] = None;
    }

    pub fn subobject_classes(&self, budget: u64) -> Result<SubobjectClassSet> {
        Ok(self.subreps(budget)?.iter().map(Subrep::class).collect())
    }

    /// Subobject classes `d` with `Re Z(d) < bound` (no bound for `None`).
    pub fn bounded_classes(&self, z: &CentralCharge, bound: Option<&Rational>, budget: u64) -> Result<SubobjectClassSet> {
        self.subobject_classes(budget)?.bounded(z, bound)
    }

    /// The first subrepresentation of class `d` in canonical order.
    pub fn subrep_witness(&self, d: &Class, budget: u64) -> Result<Option<Subrep>> {
        if d.rank() != self.dims.len() || !d.within(&self.dimension_vector()) {
            return Ok(None);
        }
        Ok(self.subreps(budget)?.into_iter().find(|s| &s.class() == d))
    }

    pub fn whole(&self) -> Subrep {
        Subrep { spaces: self.dims.iter().map(|&d| Subspace::full(self.q, d)).collect() }
    }

    pub fn zero_subrep(&self) -> Subrep {
        Subrep { spaces: self.dims.iter().map(|&d| Subspace::zero(self.q, d)).collect() }
    }

    /// Checks that `s` is a tuple of subspaces closed under every arrow.
    pub fn verify_subrep(&self, s: &Subrep) -> Result<()> {
        if s.spaces.len() != self.dims.len() {
            return Err(Error::DimensionMismatch { expected: self.dims.len(), found: s.spaces.len() });
        }
        for (sp, &d) in s.spaces.iter().zip(&self.dims) {
            if sp.ambient_dim() != d || sp.field() != self.q {
                return Err(Error::DimensionMismatch { expected: d, found: sp.ambient_dim() });
            }
        }
        for (a, &(src, tgt)) in self.quiver.arrows().iter().enumerate() {
            for b in s.spaces[src].basis_vectors() {
                if !s.spaces[tgt].contains(&self.maps[a].mul_vec(&b)) {
                    return Err(Error::NotClosed { arrow: a });
                }
            }
        }
        Ok(())
    }

    /// `R / S`, with basis at each vertex given by the non-pivot coordinates of `S`.
    pub fn quotient(&self, s: &Subrep) -> Result<Representation> {
        self.verify_subrep(s)?;
        let comps: Vec<Vec<usize>> = s.spaces.iter().map(Subspace::complement_coordinates).collect();
        let dims = comps.iter().map(Vec::len).collect();
        let mut maps = Vec::with_capacity(self.maps.len());
        for (a, &(src, tgt)) in self.quiver.arrows().iter().enumerate() {
            let mut m = FpMatrix::zeros(self.q, comps[tgt].len(), comps[src].len());
            for (col, &j) in comps[src].iter().enumerate() {
                let mut e = vec![0u8; self.dims[src]];
                e[j] = 1;
                let w = s.spaces[tgt].reduce(&self.maps[a].mul_vec(&e));
                for (row, &i) in comps[tgt].iter().enumerate() {
                    m.set(row, col, w[i]);
                }
            }
            maps.push(m);
        }
        Representation::new(self.quiver.clone(), self.q, dims, maps)
    }

    /// `S` as a representation in its echelon bases.
    pub fn restrict(&self, s: &Subrep) -> Result<Representation> {
        self.verify_subrep(s)?;
        let dims: Vec<usize> = s.spaces.iter().map(Subspace::dim).collect();
        let mut maps = Vec::with_capacity(self.maps.len());
        for (a, &(src, tgt)) in self.quiver.arrows().iter().enumerate() {
            let mut m = FpMatrix::zeros(self.q, dims[tgt], dims[src]);
            for (col, b) in s.spaces[src].basis_vectors().iter().enumerate() {
                let c = s.spaces[tgt].coordinates(&self.maps[a].mul_vec(b));
                for (row, x) in c.into_iter().enumerate() {
                    m.set(row, col, x);
                }
            }
            maps.push(m);
        }
        Representation::new(self.quiver.clone(), self.q, dims, maps)
    }

    /// `inner ⊂ outer ⊂ R`, re-expressed as a subrepresentation of `restrict(outer)`.
    pub fn relative_subrep(&self, outer: &Subrep, inner: &Subrep) -> Result<Subrep> {
        if !outer.contains(inner) {
            return Err(Error::NotAFiltration { step: 1, prev: 0 });
        }
        let spaces = outer
            .spaces
            .iter()
            .zip(&inner.spaces)
            .map(|(o, i)| {
                let coords: Vec<Vec<u8>> = i.basis_vectors().iter().map(|v| o.coordinates(v)).collect();
                Subspace::span(self.q, o.dim(), &coords)
            })
            .collect();
        Ok(Subrep { spaces })
    }

    /// Subquotient `outer / inner` for `inner ⊂ outer ⊂ R`.
    pub fn subquotient(&self, outer: &Subrep, inner: &Subrep) -> Result<Representation> {
        let big = self.restrict(outer)?;
        let rel = self.relative_subrep(outer, inner)?;
        big.quotient(&rel)
    }

    pub fn direct_sum(&self, other: &Representation) -> Result<Representation> {
        if self.quiver != other.quiver || self.q != other.q {
            return Err(Error::Invalid("direct sum of representations of different quivers or fields".into()));
        }
        let dims: Vec<usize> = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        let maps = self
            .maps
            .iter()
            .zip(&other.maps)
            .map(|(a, b)| {
                let mut m = FpMatrix::zeros(self.q, a.rows() + b.rows(), a.cols() + b.cols());
                for i in 0..a.rows() {
                    for j in 0..a.cols() {
                        m.set(i, j, a.get(i, j));
                    }
                }
                for i in 0..b.rows() {
                    for j in 0..b.cols() {
                        m.set(a.rows() + i, a.cols() + j, b.get(i, j));
                    }
                }
                m
            })
            .collect();
        Representation::new(self.quiver.clone(), self.q, dims, maps)
    }

    pub fn to_document(&self) -> RepresentationDoc {
        RepresentationDoc {
            field: self.q,
            vertices: self.quiver.vertex_count(),
            arrows: self.quiver.arrows().iter().map(|&(s, t)| [s, t]).collect(),
            dims: self.dims.clone(),
            maps: self.maps.iter().enumerate().map(|(i, m)| (i.to_string(), m.to_rows())).collect(),
        }
    }

    pub fn from_document(doc: &RepresentationDoc) -> Result<Self> {
        let quiver = Quiver::new(doc.vertices, doc.arrows.iter().map(|a| (a[0], a[1])).collect())?;
        for key in doc.maps.keys() {
            let ok = key.parse::<usize>().map(|i| i < quiver.arrows().len()).unwrap_or(false);
            if !ok {
                return Err(Error::Invalid(format!("map key {key:?} is not an arrow index")));
            }
        }
        if doc.dims.len() != doc.vertices {
            return Err(Error::DimensionMismatch { expected: doc.vertices, found: doc.dims.len() });
        }
        let mut maps = Vec::new();
        for (i, &(s, t)) in quiver.arrows().iter().enumerate() {
            let (rows, cols) = (doc.dims[t], doc.dims[s]);
            let m = match doc.maps.get(&i.to_string()) {
                None => FpMatrix::zeros(doc.field, rows, cols),
                // A 0×n matrix serializes as `[]`.
                Some(entries) if rows == 0 && entries.is_empty() => FpMatrix::zeros(doc.field, 0, cols),
                Some(entries) => FpMatrix::from_rows(doc.field, rows, cols, entries)?,
            };
            maps.push(m);
        }
        Representation::new(quiver, doc.field, doc.dims.clone(), maps)
    }
}

impl SubobjectProvider for Representation {
    fn class(&self) -> Class {
        self.dimension_vector()
    }

    fn subobject_classes(&self, budget: u64) -> Result<SubobjectClassSet> {
        Representation::subobject_classes(self, budget)
    }
}

/// On-disk form of a representation; missing arrow maps are zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepresentationDoc {
    pub field: u8,
    pub vertices: usize,
    pub arrows: Vec<[usize; 2]>,
    pub dims: Vec<usize>,
    #[serde(default)]
    pub maps: BTreeMap<String, Vec<Vec<i64>>>,
}

impl Serialize for Representation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_document().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Representation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = RepresentationDoc::deserialize(d)?;
        Representation::from_document(&doc).map_err(serde::de::Error::custom)
    }
}
