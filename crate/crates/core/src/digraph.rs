//! Finite loop-free digraphs stored as one out-mask and one in-mask per vertex.
//!
//! Vertices are `0..n` with `n <= 64`. Every set of vertices is a [`VertexSet`]
//! bitmask, so neighbourhood unions, source tests and residual graphs are a
//! handful of word operations. Operations that take a caller-supplied vertex
//! are checked; the `*_in` helpers that work on a residual (an "alive" mask
//! over the original graph) are unchecked and are what the recursive
//! constructions use, so that every step is reported in original vertex ids.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type Vertex = usize;

/// Largest supported vertex count.
pub const MAX_VERTICES: usize = 64;

/// A set of vertices of a digraph on at most [`MAX_VERTICES`] vertices.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet(u64);

impl VertexSet {
    pub const EMPTY: VertexSet = VertexSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        VertexSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_VERTICES);
        if n == MAX_VERTICES {
            VertexSet(u64::MAX)
        } else {
            VertexSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(v: Vertex) -> Self {
        debug_assert!(v < MAX_VERTICES);
        VertexSet(1u64 << v)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, v: Vertex) -> bool {
        v < MAX_VERTICES && self.0 >> v & 1 == 1
    }

    pub fn insert(&mut self, v: Vertex) {
        self.0 |= 1u64 << v;
    }

    pub fn remove(&mut self, v: Vertex) {
        self.0 &= !(1u64 << v);
    }

    pub fn with(self, v: Vertex) -> Self {
        VertexSet(self.0 | 1u64 << v)
    }

    pub fn without(self, v: Vertex) -> Self {
        VertexSet(self.0 & !(1u64 << v))
    }

    pub fn union(self, other: Self) -> Self {
        VertexSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        VertexSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        VertexSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    /// Smallest member.
    pub fn first(self) -> Option<Vertex> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as Vertex)
    }

    /// Members in ascending order.
    pub fn iter(self) -> VertexIter {
        VertexIter(self.0)
    }

    pub fn to_vec(self) -> Vec<Vertex> {
        self.iter().collect()
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<Vertex> for VertexSet {
    fn from_iter<I: IntoIterator<Item = Vertex>>(iter: I) -> Self {
        let mut s = VertexSet::EMPTY;
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl IntoIterator for VertexSet {
    type Item = Vertex;
    type IntoIter = VertexIter;

    fn into_iter(self) -> VertexIter {
        self.iter()
    }
}

pub struct VertexIter(u64);

impl Iterator for VertexIter {
    type Item = Vertex;

    fn next(&mut self) -> Option<Vertex> {
        if self.0 == 0 {
            return None;
        }
        let v = self.0.trailing_zeros() as Vertex;
        self.0 &= self.0 - 1;
        Some(v)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let k = self.0.count_ones() as usize;
        (k, Some(k))
    }
}

impl ExactSizeIterator for VertexIter {}

impl Serialize for VertexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for VertexSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let members = Vec::<Vertex>::deserialize(deserializer)?;
        if let Some(&v) = members.iter().find(|&&v| v >= MAX_VERTICES) {
            return Err(serde::de::Error::custom(format!(
                "vertex {v} exceeds the {MAX_VERTICES}-vertex limit"
            )));
        }
        Ok(members.into_iter().collect())
    }
}

/// A finite directed graph without self-loops or parallel arcs.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Digraph {
    n: usize,
    out: Vec<u64>,
    inn: Vec<u64>,
}

impl Digraph {
    /// The arcless digraph on `n` vertices.
    pub fn empty(n: usize) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(Error::TooManyVertices { n, limit: MAX_VERTICES });
        }
        Ok(Digraph { n, out: vec![0; n], inn: vec![0; n] })
    }

    /// Builds a digraph from an arc list. Self-loops, out-of-range endpoints and
    /// repeated arcs are rejected rather than dropped.
    pub fn from_arcs(n: usize, arcs: &[(Vertex, Vertex)]) -> Result<Self> {
        let mut d = Digraph::empty(n)?;
        for &(u, v) in arcs {
            d.check(u)?;
            d.check(v)?;
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if d.out[u] >> v & 1 == 1 {
                return Err(Error::DuplicateArc(u, v));
            }
            d.out[u] |= 1 << v;
            d.inn[v] |= 1 << u;
        }
        Ok(d)
    }

    /// Builds a digraph from per-vertex out-masks. The caller guarantees that
    /// masks stay inside `0..n` and have no diagonal bits.
    pub(crate) fn from_out_masks(n: usize, out: Vec<u64>) -> Self {
        debug_assert_eq!(out.len(), n);
        let mut inn = vec![0u64; n];
        for (u, &mask) in out.iter().enumerate() {
            debug_assert_eq!(mask >> u & 1, 0);
            for v in VertexSet(mask) {
                inn[v] |= 1 << u;
            }
        }
        Digraph { n, out, inn }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    pub fn arc_count(&self) -> usize {
        self.out.iter().map(|m| m.count_ones() as usize).sum()
    }

    pub fn has_arcs(&self) -> bool {
        self.out.iter().any(|&m| m != 0)
    }

    /// `u -> v`. Out-of-range vertices simply have no arcs.
    pub fn has_arc(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n && v < self.n && self.out[u] >> v & 1 == 1
    }

    /// All arcs in lexicographic order.
    pub fn arcs(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        (0..self.n).flat_map(move |u| VertexSet(self.out[u]).iter().map(move |v| (u, v)))
    }

    pub fn check(&self, v: Vertex) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(Error::InvalidVertex { vertex: v, n: self.n })
        }
    }

    pub fn check_set(&self, s: VertexSet) -> Result<()> {
        match s.difference(self.vertices()).first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidVertex { vertex: v, n: self.n }),
        }
    }

    /// N+(u), unchecked.
    #[inline]
    pub fn out_set(&self, u: Vertex) -> VertexSet {
        VertexSet(self.out[u])
    }

    /// In-neighbours of `v`, unchecked.
    #[inline]
    pub fn in_set(&self, v: Vertex) -> VertexSet {
        VertexSet(self.inn[v])
    }

    pub fn out_neighborhood(&self, u: Vertex) -> Result<VertexSet> {
        self.check(u)?;
        Ok(self.out_set(u))
    }

    /// N+[u] = N+(u) ∪ {u}.
    pub fn closed_out_neighborhood(&self, u: Vertex) -> Result<VertexSet> {
        self.check(u)?;
        Ok(self.out_set(u).with(u))
    }

    pub fn out_degree(&self, u: Vertex) -> Result<usize> {
        self.check(u)?;
        Ok(self.out_set(u).len())
    }

    /// Vertices without an ingoing arc; isolated vertices are sources.
    pub fn sources(&self) -> VertexSet {
        self.sources_in(self.vertices())
    }

    pub fn is_source_free(&self) -> bool {
        self.inn.iter().all(|&m| m != 0)
    }

    /// `D - S` relabelled onto `0..k`, together with the map back to ids of `self`.
    pub fn remove_set(&self, s: VertexSet) -> Result<Subgraph> {
        self.check_set(s)?;
        Ok(self.induced(self.vertices().difference(s)))
    }

    /// The subgraph induced by `keep`, relabelled densely in ascending order.
    pub fn induced(&self, keep: VertexSet) -> Subgraph {
        let keep = keep.intersection(self.vertices());
        let original: Vec<Vertex> = keep.to_vec();
        let mut local = [usize::MAX; MAX_VERTICES];
        for (i, &v) in original.iter().enumerate() {
            local[v] = i;
        }
        let out = original
            .iter()
            .map(|&v| {
                self.out_set(v)
                    .intersection(keep)
                    .iter()
                    .fold(0u64, |m, w| m | 1 << local[w])
            })
            .collect();
        Subgraph { graph: Digraph::from_out_masks(original.len(), out), original }
    }

    /// Sources of `D - N+[u]` that are not sources of `D`, in ids of `self`.
    pub fn new_sources(&self, u: Vertex) -> Result<VertexSet> {
        self.check(u)?;
        Ok(self.new_sources_in(self.vertices(), u))
    }

    /// No arc between any two members of `s`, in either direction.
    pub fn is_independent(&self, s: VertexSet) -> Result<bool> {
        self.check_set(s)?;
        Ok(self.independent(s))
    }

    pub(crate) fn independent(&self, s: VertexSet) -> bool {
        s.iter().all(|v| self.out_set(v).is_disjoint(s))
    }

    /// Out-neighbours of `u` inside the residual `alive`.
    #[inline]
    pub fn out_in(&self, alive: VertexSet, u: Vertex) -> VertexSet {
        self.out_set(u).intersection(alive)
    }

    /// Sources of the residual digraph induced by `alive`.
    pub fn sources_in(&self, alive: VertexSet) -> VertexSet {
        alive.iter().filter(|&v| self.inn[v] & alive.0 == 0).collect()
    }

    /// Whether the residual induced by `alive` has at least one arc.
    pub fn has_arcs_in(&self, alive: VertexSet) -> bool {
        alive.iter().any(|u| self.out[u] & alive.0 != 0)
    }

    /// Vertices that become sources when N+[u] is removed from the residual
    /// `alive`. A vertex that survives the removal is a new source when all of
    /// its in-neighbours in `alive` lay inside N+[u] and it had at least one.
    pub fn new_sources_in(&self, alive: VertexSet, u: Vertex) -> VertexSet {
        let removed = self.out_in(alive, u).with(u);
        let rest = alive.difference(removed);
        rest.iter()
            .filter(|&v| {
                let ins = self.inn[v] & alive.0;
                ins != 0 && ins & rest.0 == 0
            })
            .collect()
    }

    /// Short stable digest of `n` and the arc list, used to tie serialised
    /// artefacts to the graph they were computed for.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.n as u64).to_le_bytes());
        for m in &self.out {
            h.update(m.to_le_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }
}

impl fmt::Debug for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digraph(n={}, arcs=[", self.n)?;
        for (i, (u, v)) in self.arcs().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{u}->{v}")?;
        }
        write!(f, "])")
    }
}

/// Serialised form: `{"n": 3, "arcs": [[0, 1], [1, 2], [2, 0]]}`.
#[derive(Serialize, Deserialize)]
struct GraphRecord {
    n: usize,
    arcs: Vec<(Vertex, Vertex)>,
}

impl Serialize for Digraph {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        GraphRecord { n: self.n, arcs: self.arcs().collect() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Digraph {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rec = GraphRecord::deserialize(deserializer)?;
        Digraph::from_arcs(rec.n, &rec.arcs).map_err(serde::de::Error::custom)
    }
}

/// An induced subgraph with dense labels and the way back to the parent ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgraph {
    pub graph: Digraph,
    /// `original[i]` is the parent id of local vertex `i`; strictly increasing.
    pub original: Vec<Vertex>,
}

impl Subgraph {
    pub fn to_original(&self, local: Vertex) -> Option<Vertex> {
        self.original.get(local).copied()
    }

    pub fn to_local(&self, original: Vertex) -> Option<Vertex> {
        self.original.binary_search(&original).ok()
    }

    pub fn set_to_original(&self, s: VertexSet) -> VertexSet {
        s.iter().map(|v| self.original[v]).collect()
    }
}
