//! Kernels, quasi-kernels and external private out-neighbours.
//!
//! [`construct_quasi_kernel`] is the classic inductive construction: choose a
//! vertex `v`, solve `D - N+[v]`, then either some member of the smaller
//! solution already points at `v` (an alpha step, `v` stays out) or `v` joins
//! the solution (a beta step). The trace keeps one entry per recursion level
//! in the order the vertices were chosen.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::digraph::{Digraph, Vertex, VertexSet};
use crate::error::{Error, Result};
use crate::subsets;

/// Default bound on the number of vertices an exact subset search will take.
pub const ORACLE_LIMIT: usize = 20;

/// How a construction picks the next vertex of a residual digraph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    /// Smallest vertex id.
    #[default]
    Lex,
    /// Largest residual out-degree, ties to the smallest id.
    MaxDeg,
}

impl Selector {
    /// Picks from `candidates`; out-degrees are taken inside `alive`.
    pub fn pick(self, d: &Digraph, alive: VertexSet, candidates: VertexSet) -> Option<Vertex> {
        match self {
            Selector::Lex => candidates.first(),
            Selector::MaxDeg => candidates
                .iter()
                .max_by_key(|&u| (d.out_in(alive, u).len(), std::cmp::Reverse(u))),
        }
    }
}

impl FromStr for Selector {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lex" => Ok(Selector::Lex),
            "maxdeg" => Ok(Selector::MaxDeg),
            other => Err(format!("unknown selector `{other}` (expected lex or maxdeg)")),
        }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Selector::Lex => "lex",
            Selector::MaxDeg => "maxdeg",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepKind {
    Alpha,
    Beta,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub root: Vertex,
    /// Closed out-neighbourhood of `root` in the residual it was chosen from.
    pub removed: VertexSet,
    pub kind: StepKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConstructionTrace {
    pub entries: Vec<TraceEntry>,
}

impl ConstructionTrace {
    pub fn beta_roots(&self) -> VertexSet {
        self.entries
            .iter()
            .filter(|e| e.kind == StepKind::Beta)
            .map(|e| e.root)
            .collect()
    }
}

pub fn is_kernel(d: &Digraph, k: VertexSet) -> Result<bool> {
    d.check_set(k)?;
    if !d.independent(k) {
        return Ok(false);
    }
    let dominated = k.iter().fold(k, |acc, u| acc.union(d.out_set(u)));
    Ok(dominated == d.vertices())
}

pub fn is_quasi_kernel(d: &Digraph, q: VertexSet) -> Result<bool> {
    d.check_set(q)?;
    Ok(quasi_kernel_unchecked(d, q))
}

/// Every vertex within two steps of `q`.
pub(crate) fn two_step_reach(d: &Digraph, q: VertexSet) -> VertexSet {
    let one = q.iter().fold(VertexSet::EMPTY, |acc, u| acc.union(d.out_set(u)));
    let two = one.iter().fold(VertexSet::EMPTY, |acc, v| acc.union(d.out_set(v)));
    q.union(one).union(two)
}

pub(crate) fn quasi_kernel_unchecked(d: &Digraph, q: VertexSet) -> bool {
    d.independent(q) && two_step_reach(d, q) == d.vertices()
}

/// Builds a quasi-kernel by the inductive construction, choosing each next
/// vertex with `selector`. The returned set is exactly the beta roots of the
/// trace.
pub fn construct_quasi_kernel(d: &Digraph, selector: Selector) -> (VertexSet, ConstructionTrace) {
    // Descend: record the chosen roots and what each removal strips.
    let mut alive = d.vertices();
    let mut chosen = Vec::new();
    while let Some(v) = selector.pick(d, alive, alive) {
        let removed = d.out_in(alive, v).with(v);
        chosen.push((v, removed));
        alive = alive.difference(removed);
    }

    // Ascend: the deepest level is solved first.
    let mut q = VertexSet::EMPTY;
    let mut kinds = vec![StepKind::Beta; chosen.len()];
    for (i, &(v, _)) in chosen.iter().enumerate().rev() {
        if d.in_set(v).is_disjoint(q) {
            q.insert(v);
        } else {
            kinds[i] = StepKind::Alpha;
        }
    }

    let entries = chosen
        .into_iter()
        .zip(kinds)
        .map(|((root, removed), kind)| TraceEntry { root, removed, kind })
        .collect();
    (q, ConstructionTrace { entries })
}

/// A quasi-kernel of minimum size: the first hit when subsets are tried by
/// size and then by ascending bitmask.
pub fn minimum_quasi_kernel(d: &Digraph) -> Result<VertexSet> {
    minimum_quasi_kernel_with_limit(d, ORACLE_LIMIT)
}

pub fn minimum_quasi_kernel_with_limit(d: &Digraph, limit: usize) -> Result<VertexSet> {
    if d.n() > limit {
        return Err(Error::OracleLimitExceeded { size: d.n(), limit });
    }
    Ok(subsets::by_size(d.vertices())
        .find(|&q| quasi_kernel_unchecked(d, q))
        .expect("every digraph has a quasi-kernel"))
}

/// Whether `v` is an external private out-neighbour of `u` with respect to `s`:
/// `u -> v`, `v` outside `s`, and `u` is the only in-neighbour of `v` in `s`.
pub fn is_epon(d: &Digraph, s: VertexSet, u: Vertex, v: Vertex) -> Result<bool> {
    d.check(u)?;
    d.check(v)?;
    d.check_set(s)?;
    if !s.contains(u) {
        return Err(Error::NotInSet { vertex: u });
    }
    Ok(d.has_arc(u, v) && !s.contains(v) && d.in_set(v).intersection(s) == VertexSet::singleton(u))
}

/// All external private out-neighbours of `u` with respect to `s`.
pub fn epons_of(d: &Digraph, s: VertexSet, u: Vertex) -> Result<VertexSet> {
    d.check(u)?;
    d.check_set(s)?;
    if !s.contains(u) {
        return Err(Error::NotInSet { vertex: u });
    }
    Ok(epons_unchecked(d, s, u))
}

pub(crate) fn epons_unchecked(d: &Digraph, s: VertexSet, u: Vertex) -> VertexSet {
    d.out_set(u)
        .difference(s)
        .iter()
        .filter(|&v| d.in_set(v).intersection(s) == VertexSet::singleton(u))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Digraph {
        let arcs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Digraph::from_arcs(n, &arcs).unwrap()
    }

    fn set(vs: &[Vertex]) -> VertexSet {
        vs.iter().copied().collect()
    }

    #[test]
    fn triangle_has_no_kernel() {
        let c3 = cycle(3);
        for bits in 0..8 {
            assert!(!is_kernel(&c3, VertexSet::from_bits(bits)).unwrap());
        }
    }

    #[test]
    fn kernel_examples() {
        let two = Digraph::from_arcs(2, &[(0, 1), (1, 0)]).unwrap();
        assert!(is_kernel(&two, set(&[0])).unwrap());
        assert!(!is_kernel(&two, set(&[0, 1])).unwrap());
        assert!(is_kernel(&Digraph::empty(0).unwrap(), VertexSet::EMPTY).unwrap());
    }

    #[test]
    fn quasi_kernel_examples() {
        assert!(is_quasi_kernel(&cycle(3), set(&[0])).unwrap());
        assert!(is_quasi_kernel(&Digraph::empty(0).unwrap(), VertexSet::EMPTY).unwrap());
        assert!(!is_quasi_kernel(&cycle(4), set(&[0])).unwrap());
        assert!(!is_quasi_kernel(&cycle(3), set(&[0, 1])).unwrap());
        assert!(is_quasi_kernel(&cycle(3), set(&[5])).is_err());
    }

    #[test]
    fn construct_on_triangle() {
        let (q, trace) = construct_quasi_kernel(&cycle(3), Selector::Lex);
        assert_eq!(q, set(&[2]));
        assert_eq!(
            trace.entries,
            vec![
                TraceEntry { root: 0, removed: set(&[0, 1]), kind: StepKind::Alpha },
                TraceEntry { root: 2, removed: set(&[2]), kind: StepKind::Beta },
            ]
        );
    }

    #[test]
    fn construct_on_small_edge_cases() {
        let (q, trace) = construct_quasi_kernel(&Digraph::empty(0).unwrap(), Selector::Lex);
        assert!(q.is_empty() && trace.entries.is_empty());

        let (q, trace) = construct_quasi_kernel(&Digraph::empty(2).unwrap(), Selector::Lex);
        assert_eq!(q, set(&[0, 1]));
        assert!(trace.entries.iter().all(|e| e.kind == StepKind::Beta));
    }

    #[test]
    fn maxdeg_selector_prefers_hubs() {
        // 0 -> 1 and the hub 2 -> {0, 1, 3}.
        let d = Digraph::from_arcs(4, &[(0, 1), (2, 0), (2, 1), (2, 3)]).unwrap();
        let (q, trace) = construct_quasi_kernel(&d, Selector::MaxDeg);
        assert_eq!(trace.entries[0].root, 2);
        assert_eq!(q, set(&[2]));
        let (q_lex, _) = construct_quasi_kernel(&d, Selector::Lex);
        assert!(is_quasi_kernel(&d, q_lex).unwrap());
    }

    #[test]
    fn minimum_examples() {
        assert_eq!(minimum_quasi_kernel(&cycle(3)).unwrap(), set(&[0]));
        assert_eq!(minimum_quasi_kernel(&cycle(4)).unwrap(), set(&[0, 2]));
        assert_eq!(minimum_quasi_kernel(&Digraph::empty(0).unwrap()).unwrap(), VertexSet::EMPTY);
        assert_eq!(
            minimum_quasi_kernel(&Digraph::empty(21).unwrap()),
            Err(Error::OracleLimitExceeded { size: 21, limit: 20 })
        );
    }

    #[test]
    fn epon_examples() {
        // a=0, b=1, c=2
        let ab = Digraph::from_arcs(3, &[(0, 1)]).unwrap();
        assert!(is_epon(&ab, set(&[0]), 0, 1).unwrap());
        assert!(!is_epon(&ab, set(&[0, 1]), 0, 1).unwrap());
        let acb = Digraph::from_arcs(3, &[(0, 1), (2, 1)]).unwrap();
        assert!(!is_epon(&acb, set(&[0, 2]), 0, 1).unwrap());
        assert_eq!(is_epon(&ab, set(&[2]), 0, 1), Err(Error::NotInSet { vertex: 0 }));

        let fork = Digraph::from_arcs(3, &[(0, 1), (0, 2)]).unwrap();
        assert_eq!(epons_of(&fork, set(&[0]), 0).unwrap(), set(&[1, 2]));
        assert_eq!(epons_of(&cycle(3), set(&[0]), 0).unwrap(), set(&[1]));
        assert_eq!(epons_of(&Digraph::empty(2).unwrap(), set(&[1]), 1).unwrap(), VertexSet::EMPTY);
    }

    #[test]
    fn selector_parses() {
        assert_eq!("lex".parse::<Selector>(), Ok(Selector::Lex));
        assert_eq!("maxdeg".parse::<Selector>(), Ok(Selector::MaxDeg));
        assert!("random".parse::<Selector>().is_err());
        assert_eq!(serde_json::to_string(&Selector::MaxDeg).unwrap(), "\"maxdeg\"");
    }
}
