//! Breakdown sequences and the quasi-kernels built on top of them.
//!
//! A breakdown sequence peels a digraph apart one closed out-neighbourhood at a
//! time. A step either strips a single vertex from an arcless residual
//! ([`Rule::Strip`]) or removes `N+[u]` for a root `u` with positive residual
//! out-degree whose removal creates at most `d+(u)` new sources in the
//! residual ([`Rule::Peel`]). All vertex ids are ids of the original digraph;
//! residuals are tracked as "alive" masks over it.

use serde::{Deserialize, Serialize};

use crate::digraph::{Digraph, Subgraph, Vertex, VertexSet};
use crate::error::{Error, Result};
use crate::quasikernel::{self, Selector, StepKind, ORACLE_LIMIT};
use crate::subsets;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// Arcless residual; the root is removed on its own.
    #[serde(rename = "rule2")]
    Strip,
    /// `N+[root]` is removed; the root has positive out-degree and bounded new sources.
    #[serde(rename = "rule3")]
    Peel,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BreakdownStep {
    pub root: Vertex,
    pub nbhd: VertexSet,
    pub rule: Rule,
}

impl BreakdownStep {
    pub fn strip(root: Vertex) -> Self {
        BreakdownStep { root, nbhd: VertexSet::EMPTY, rule: Rule::Strip }
    }

    pub fn peel(root: Vertex, nbhd: VertexSet) -> Self {
        BreakdownStep { root, nbhd, rule: Rule::Peel }
    }

    /// `{root} ∪ nbhd`.
    pub fn closed(&self) -> VertexSet {
        self.nbhd.with(self.root)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreakdownSequence {
    pub steps: Vec<BreakdownStep>,
    pub graph_fingerprint: String,
}

impl BreakdownSequence {
    pub fn new(d: &Digraph, steps: Vec<BreakdownStep>) -> Self {
        BreakdownSequence { steps, graph_fingerprint: d.fingerprint() }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// F(B): the roots of all steps.
    pub fn roots(&self) -> VertexSet {
        self.steps.iter().map(|s| s.root).collect()
    }

    /// Index of the step rooted at `v`.
    pub fn position(&self, v: Vertex) -> Option<usize> {
        self.steps.iter().position(|s| s.root == v)
    }
}

/// Why a replay rejected a sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayError {
    /// Offending step, or `None` when the steps ran out before the graph did.
    pub step: Option<usize>,
    pub reason: String,
}

impl std::fmt::Display for ReplayError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.step {
            Some(i) => write!(f, "step {i}: {}", self.reason),
            None => f.write_str(&self.reason),
        }
    }
}

/// Replays `steps` against `d` and returns the residual before each step
/// followed by the final residual (so `steps.len() + 1` masks on success).
pub fn replay(d: &Digraph, steps: &[BreakdownStep]) -> std::result::Result<Vec<VertexSet>, ReplayError> {
    let mut alive = d.vertices();
    let mut residuals = Vec::with_capacity(steps.len() + 1);
    for (i, step) in steps.iter().enumerate() {
        let fail = |reason: String| ReplayError { step: Some(i), reason };
        residuals.push(alive);
        let u = step.root;
        if !alive.contains(u) {
            return Err(fail(format!("root {u} is not in the residual")));
        }
        match step.rule {
            Rule::Strip => {
                if d.has_arcs_in(alive) {
                    return Err(fail("strip step on a residual that still has arcs".into()));
                }
                if !step.nbhd.is_empty() {
                    return Err(fail("strip step with a non-empty neighbourhood".into()));
                }
            }
            Rule::Peel => {
                let out = d.out_in(alive, u);
                if out.is_empty() {
                    return Err(fail(format!("root {u} has out-degree 0 in the residual")));
                }
                if step.nbhd != out {
                    return Err(fail(format!(
                        "recorded neighbourhood {} differs from residual N+({u}) = {out}",
                        step.nbhd
                    )));
                }
                let fresh = d.new_sources_in(alive, u).len();
                if fresh > out.len() {
                    return Err(fail(format!(
                        "removing N+[{u}] creates {fresh} new sources, more than d+ = {}",
                        out.len()
                    )));
                }
            }
        }
        alive = alive.difference(step.closed());
    }
    residuals.push(alive);
    if !alive.is_empty() {
        return Err(ReplayError {
            step: None,
            reason: format!("vertices {alive} are never removed"),
        });
    }
    Ok(residuals)
}

pub fn validate_breakdown_sequence(d: &Digraph, b: &BreakdownSequence) -> std::result::Result<(), ReplayError> {
    replay(d, &b.steps).map(|_| ())
}

pub fn is_breakdown_sequence(d: &Digraph, b: &BreakdownSequence) -> bool {
    validate_breakdown_sequence(d, b).is_ok()
}

/// Vertices of the residual `alive` that qualify as a peel root.
pub fn peel_candidates(d: &Digraph, alive: VertexSet) -> VertexSet {
    alive
        .iter()
        .filter(|&u| {
            let deg = d.out_in(alive, u).len();
            deg > 0 && d.new_sources_in(alive, u).len() <= deg
        })
        .collect()
}

/// Builds a breakdown sequence. While the residual has arcs, the `selector`
/// picks among qualifying peel roots; once it is arcless the smallest vertex
/// is stripped. A residual with arcs but no qualifying root is returned as
/// [`Error::AxiomViolation`] carrying that residual.
pub fn build_breakdown_sequence(d: &Digraph, selector: Selector) -> Result<BreakdownSequence> {
    let mut alive = d.vertices();
    let mut steps = Vec::new();
    while let Some(first) = alive.first() {
        if !d.has_arcs_in(alive) {
            steps.push(BreakdownStep::strip(first));
            alive.remove(first);
            continue;
        }
        let candidates = peel_candidates(d, alive);
        let Some(u) = selector.pick(d, alive, candidates) else {
            return Err(Error::AxiomViolation(Box::new(d.induced(alive))));
        };
        let step = BreakdownStep::peel(u, d.out_in(alive, u));
        alive = alive.difference(step.closed());
        steps.push(step);
    }
    Ok(BreakdownSequence::new(d, steps))
}

/// Which graph the arc test of the "under" relation is read in.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum UnderReading {
    /// Any arc of the original digraph.
    #[default]
    Original,
    /// Only arcs still present in the residual the other step was taken from,
    /// i.e. the other step must come earlier in the sequence.
    Residual,
}

/// `(w, ∅)` is under `other` when some `v` in `other.nbhd` has `v -> w` in `d`.
pub fn is_under(d: &Digraph, w_step: &BreakdownStep, other: &BreakdownStep) -> Result<bool> {
    if !w_step.nbhd.is_empty() {
        return Err(Error::NonEmptyStep { root: w_step.root });
    }
    d.check(w_step.root)?;
    d.check_set(other.nbhd)?;
    Ok(!d.in_set(w_step.root).is_disjoint(other.nbhd))
}

/// Indices of the steps that step `j` (which must have an empty
/// neighbourhood) is under.
pub fn under_steps<'a>(
    d: &Digraph,
    b: &'a BreakdownSequence,
    j: usize,
    reading: UnderReading,
) -> impl Iterator<Item = usize> + 'a {
    let preds = d.in_set(b.steps[j].root);
    let end = match reading {
        UnderReading::Original => b.steps.len(),
        UnderReading::Residual => j,
    };
    (0..end).filter(move |&i| !preds.is_disjoint(b.steps[i].nbhd))
}

/// Beta when the root is in `q`, alpha when some member of `q` points at it.
pub fn classify_step(d: &Digraph, step: &BreakdownStep, q: VertexSet) -> Result<StepKind> {
    d.check(step.root)?;
    d.check_set(q)?;
    classify_unchecked(d, step.root, q).ok_or(Error::Unclassifiable { root: step.root })
}

pub(crate) fn classify_unchecked(d: &Digraph, root: Vertex, q: VertexSet) -> Option<StepKind> {
    if q.contains(root) {
        Some(StepKind::Beta)
    } else if !d.in_set(root).is_disjoint(q) {
        Some(StepKind::Alpha)
    } else {
        None
    }
}

/// `q` is a quasi-kernel inside F(B) and every step `(w, N)` has `w ∈ q`, an
/// in-neighbour of `w` in `q`, or `N = ∅` and an in-neighbour of `w` inside
/// some recorded neighbourhood.
pub fn is_constructive(d: &Digraph, b: &BreakdownSequence, q: VertexSet) -> bool {
    if d.check_set(q).is_err() || b.steps.iter().any(|s| d.check_set(s.closed()).is_err()) {
        return false;
    }
    if !q.is_subset(b.roots()) || !quasikernel::quasi_kernel_unchecked(d, q) {
        return false;
    }
    let all_nbhds = b.steps.iter().fold(VertexSet::EMPTY, |acc, s| acc.union(s.nbhd));
    constructive_steps(d, b, q, all_nbhds)
}

fn constructive_steps(d: &Digraph, b: &BreakdownSequence, q: VertexSet, all_nbhds: VertexSet) -> bool {
    b.steps.iter().all(|s| {
        let ins = d.in_set(s.root);
        q.contains(s.root) || !ins.is_disjoint(q) || (s.nbhd.is_empty() && !ins.is_disjoint(all_nbhds))
    })
}

/// The constructive quasi-kernel obtained by walking the sequence from the
/// last step to the first: a strip root always joins, a peel root joins
/// unless a member collected so far already points at it.
pub fn build_constructive_quasi_kernel(d: &Digraph, b: &BreakdownSequence) -> Result<VertexSet> {
    validate_breakdown_sequence(d, b).map_err(|e| Error::InvalidSequence(e.to_string()))?;
    let mut q = VertexSet::EMPTY;
    for step in b.steps.iter().rev() {
        match step.rule {
            Rule::Strip => q.insert(step.root),
            Rule::Peel => {
                if d.in_set(step.root).is_disjoint(q) {
                    q.insert(step.root);
                }
            }
        }
    }
    Ok(q)
}

/// A constructive quasi-kernel of minimum size, found by trying subsets of
/// F(B) by size and then by ascending bitmask.
pub fn minimum_constructive_quasi_kernel(d: &Digraph, b: &BreakdownSequence) -> Result<VertexSet> {
    minimum_constructive_quasi_kernel_with_limit(d, b, ORACLE_LIMIT)
}

pub fn minimum_constructive_quasi_kernel_with_limit(
    d: &Digraph,
    b: &BreakdownSequence,
    limit: usize,
) -> Result<VertexSet> {
    validate_breakdown_sequence(d, b).map_err(|e| Error::InvalidSequence(e.to_string()))?;
    let roots = b.roots();
    if roots.len() > limit {
        return Err(Error::OracleLimitExceeded { size: roots.len(), limit });
    }
    let all_nbhds = b.steps.iter().fold(VertexSet::EMPTY, |acc, s| acc.union(s.nbhd));
    let found = subsets::by_size(roots)
        .find(|&q| quasikernel::quasi_kernel_unchecked(d, q) && constructive_steps(d, b, q, all_nbhds));
    // A valid sequence always admits the set built by the backward walk.
    Ok(found.expect("a valid breakdown sequence admits a constructive quasi-kernel"))
}

/// The first step index after which `u` is a source of the residual although
/// it was not one before. `None` when `u` is already a source of `d` or never
/// becomes one while it is alive.
pub fn trace_source_emergence(d: &Digraph, b: &BreakdownSequence, u: Vertex) -> Result<Option<usize>> {
    d.check(u)?;
    if !b.roots().contains(u) {
        return Err(Error::NotARoot { vertex: u });
    }
    let residuals = replay(d, &b.steps).map_err(|e| Error::InvalidSequence(e.to_string()))?;
    if d.in_set(u).is_empty() {
        return Ok(None);
    }
    for (i, pair) in residuals.windows(2).enumerate() {
        let after = pair[1];
        if !after.contains(u) {
            return Ok(None);
        }
        if d.in_set(u).is_disjoint(after) {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Members `w` of `q` whose step is `(w, ∅)`, that are under at least one beta
/// step, and that have no external private out-neighbour (relative to `q`)
/// inside `F(B) - q`. For a minimum constructive `q` the result should be empty.
pub fn check_epon_lemma(d: &Digraph, b: &BreakdownSequence, q: VertexSet) -> Vec<Vertex> {
    check_epon_lemma_with(d, b, q, UnderReading::Original)
}

pub fn check_epon_lemma_with(
    d: &Digraph,
    b: &BreakdownSequence,
    q: VertexSet,
    reading: UnderReading,
) -> Vec<Vertex> {
    let free_roots = b.roots().difference(q);
    (0..b.steps.len())
        .filter(|&j| {
            let w = b.steps[j].root;
            b.steps[j].nbhd.is_empty()
                && q.contains(w)
                && under_steps(d, b, j, reading).any(|i| q.contains(b.steps[i].root))
        })
        .map(|j| b.steps[j].root)
        .filter(|&w| quasikernel::epons_unchecked(d, q, w).is_disjoint(free_roots))
        .collect()
}

/// The residual carried by an [`Error::AxiomViolation`], if that is what `e` is.
pub fn violation_residual(e: &Error) -> Option<&Subgraph> {
    match e {
        Error::AxiomViolation(sub) => Some(sub),
        _ => None,
    }
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

    fn triangle_bds() -> (Digraph, BreakdownSequence) {
        let d = cycle(3);
        let b = BreakdownSequence::new(&d, vec![BreakdownStep::peel(0, set(&[1])), BreakdownStep::strip(2)]);
        (d, b)
    }

    #[test]
    fn replay_examples() {
        let (d, b) = triangle_bds();
        assert!(is_breakdown_sequence(&d, &b));

        let e = Digraph::empty(0).unwrap();
        assert!(is_breakdown_sequence(&e, &BreakdownSequence::new(&e, vec![])));

        let short = BreakdownSequence::new(&d, vec![BreakdownStep::peel(0, set(&[1]))]);
        let err = validate_breakdown_sequence(&d, &short).unwrap_err();
        assert_eq!(err.step, None);
    }

    #[test]
    fn replay_rejects_bad_steps() {
        let d = cycle(3);
        let strip_early = BreakdownSequence::new(&d, vec![BreakdownStep::strip(0)]);
        assert_eq!(validate_breakdown_sequence(&d, &strip_early).unwrap_err().step, Some(0));

        let wrong_nbhd = BreakdownSequence::new(
            &d,
            vec![BreakdownStep::peel(0, set(&[1, 2])), BreakdownStep::strip(2)],
        );
        assert!(!is_breakdown_sequence(&d, &wrong_nbhd));

        let dead_root = BreakdownSequence::new(
            &d,
            vec![BreakdownStep::peel(0, set(&[1])), BreakdownStep::strip(1)],
        );
        assert!(!is_breakdown_sequence(&d, &dead_root));

        // Path 0->1->2->3 plus 1->4: removing N+[0] = {0,1} orphans 2 and 4
        // with out-degree 1.
        let p = Digraph::from_arcs(5, &[(0, 1), (1, 2), (2, 3), (1, 4)]).unwrap();
        let b = BreakdownSequence::new(
            &p,
            vec![
                BreakdownStep::peel(0, set(&[1])),
                BreakdownStep::peel(2, set(&[3])),
                BreakdownStep::strip(4),
            ],
        );
        let err = validate_breakdown_sequence(&p, &b).unwrap_err();
        assert_eq!(err.step, Some(0));
        assert!(err.reason.contains("new sources"));
    }

    #[test]
    fn build_examples() {
        let (d, b) = triangle_bds();
        assert_eq!(build_breakdown_sequence(&d, Selector::Lex).unwrap(), b);

        let two = Digraph::empty(2).unwrap();
        let b2 = build_breakdown_sequence(&two, Selector::Lex).unwrap();
        assert_eq!(b2.steps, vec![BreakdownStep::strip(0), BreakdownStep::strip(1)]);
        assert_eq!(b2.roots(), set(&[0, 1]));

        let e = Digraph::empty(0).unwrap();
        assert!(build_breakdown_sequence(&e, Selector::Lex).unwrap().is_empty());
        assert_eq!(b.roots(), set(&[0, 2]));
    }

    #[test]
    fn maxdeg_build_is_valid() {
        let d = Digraph::from_arcs(5, &[(0, 1), (1, 2), (2, 0), (3, 0), (3, 1), (3, 4), (4, 3)]).unwrap();
        let b = build_breakdown_sequence(&d, Selector::MaxDeg).unwrap();
        assert_eq!(b.steps[0].root, 3);
        assert!(is_breakdown_sequence(&d, &b));
    }

    #[test]
    fn under_examples() {
        let (d, b) = triangle_bds();
        assert!(is_under(&d, &b.steps[1], &b.steps[0]).unwrap());
        assert!(!is_under(&d, &b.steps[1], &BreakdownStep::strip(0)).unwrap());
        assert_eq!(
            is_under(&d, &b.steps[0], &b.steps[1]),
            Err(Error::NonEmptyStep { root: 0 })
        );
        let bare = Digraph::empty(2).unwrap();
        assert!(!is_under(&bare, &BreakdownStep::strip(0), &BreakdownStep::strip(1)).unwrap());
    }

    #[test]
    fn classify_examples() {
        let (d, b) = triangle_bds();
        assert_eq!(classify_step(&d, &b.steps[1], set(&[2])), Ok(StepKind::Beta));
        assert_eq!(classify_step(&d, &b.steps[0], set(&[2])), Ok(StepKind::Alpha));
        assert_eq!(
            classify_step(&d, &b.steps[1], set(&[0])),
            Err(Error::Unclassifiable { root: 2 })
        );
        let one = Digraph::empty(1).unwrap();
        assert_eq!(classify_step(&one, &BreakdownStep::strip(0), set(&[0])), Ok(StepKind::Beta));
    }

    #[test]
    fn constructive_examples() {
        let (d, b) = triangle_bds();
        assert!(is_constructive(&d, &b, set(&[2])));
        // (2, ∅) is only covered through 1 -> 2 with 1 in the first neighbourhood.
        assert!(is_constructive(&d, &b, set(&[0])));
        // 1 is not a root.
        assert!(!is_constructive(&d, &b, set(&[1])));
        let e = Digraph::empty(0).unwrap();
        assert!(is_constructive(&e, &BreakdownSequence::new(&e, vec![]), VertexSet::EMPTY));
    }

    #[test]
    fn constructive_builder_examples() {
        let (d, b) = triangle_bds();
        assert_eq!(build_constructive_quasi_kernel(&d, &b).unwrap(), set(&[2]));
        let two = Digraph::empty(2).unwrap();
        let b2 = build_breakdown_sequence(&two, Selector::Lex).unwrap();
        assert_eq!(build_constructive_quasi_kernel(&two, &b2).unwrap(), set(&[0, 1]));
        let e = Digraph::empty(0).unwrap();
        assert_eq!(
            build_constructive_quasi_kernel(&e, &BreakdownSequence::new(&e, vec![])).unwrap(),
            VertexSet::EMPTY
        );
        let short = BreakdownSequence::new(&d, vec![BreakdownStep::peel(0, set(&[1]))]);
        assert!(matches!(build_constructive_quasi_kernel(&d, &short), Err(Error::InvalidSequence(_))));
    }

    #[test]
    fn minimum_constructive_examples() {
        let (d, b) = triangle_bds();
        assert_eq!(minimum_constructive_quasi_kernel(&d, &b).unwrap(), set(&[0]));
        let two = Digraph::empty(2).unwrap();
        let b2 = build_breakdown_sequence(&two, Selector::Lex).unwrap();
        assert_eq!(minimum_constructive_quasi_kernel(&two, &b2).unwrap(), set(&[0, 1]));
        let e = Digraph::empty(0).unwrap();
        assert_eq!(
            minimum_constructive_quasi_kernel(&e, &BreakdownSequence::new(&e, vec![])).unwrap(),
            VertexSet::EMPTY
        );
        let big = Digraph::empty(3).unwrap();
        let b3 = build_breakdown_sequence(&big, Selector::Lex).unwrap();
        assert_eq!(
            minimum_constructive_quasi_kernel_with_limit(&big, &b3, 2),
            Err(Error::OracleLimitExceeded { size: 3, limit: 2 })
        );
    }

    #[test]
    fn source_emergence_examples() {
        let (d, b) = triangle_bds();
        assert_eq!(trace_source_emergence(&d, &b, 2), Ok(Some(0)));
        assert_eq!(trace_source_emergence(&d, &b, 1), Err(Error::NotARoot { vertex: 1 }));

        let path = Digraph::from_arcs(3, &[(0, 1), (1, 2)]).unwrap();
        let bp = build_breakdown_sequence(&path, Selector::Lex).unwrap();
        assert_eq!(trace_source_emergence(&path, &bp, 0), Ok(None));

        let c4 = cycle(4);
        let b4 = BreakdownSequence::new(
            &c4,
            vec![BreakdownStep::peel(0, set(&[1])), BreakdownStep::peel(2, set(&[3]))],
        );
        assert!(is_breakdown_sequence(&c4, &b4));
        assert_eq!(trace_source_emergence(&c4, &b4, 2), Ok(Some(0)));
        // 0 is removed before it ever loses its in-arc from 3.
        assert_eq!(trace_source_emergence(&c4, &b4, 0), Ok(None));
    }

    #[test]
    fn epon_lemma_examples() {
        let (d, b) = triangle_bds();
        // (2, ∅) is under (0, {1}), an alpha step for Q = {2}.
        assert!(check_epon_lemma(&d, &b, set(&[2])).is_empty());
        // No member of Q has an empty step.
        assert!(check_epon_lemma(&d, &b, set(&[0])).is_empty());
    }

    #[test]
    fn epon_lemma_flags_missing_private_neighbour() {
        // 0 -> 1 -> 2, with 2 stripped and in Q alongside 0 (not minimal).
        let d = Digraph::from_arcs(3, &[(0, 1), (1, 2)]).unwrap();
        let b = BreakdownSequence::new(&d, vec![BreakdownStep::peel(0, set(&[1])), BreakdownStep::strip(2)]);
        assert!(is_breakdown_sequence(&d, &b));
        assert_eq!(check_epon_lemma(&d, &b, set(&[0, 2])), vec![2]);
        assert_eq!(minimum_constructive_quasi_kernel(&d, &b).unwrap(), set(&[0]));
    }

    #[test]
    fn residual_reading_needs_an_earlier_step() {
        let (d, b) = triangle_bds();
        assert_eq!(under_steps(&d, &b, 1, UnderReading::Original).collect::<Vec<_>>(), vec![0]);
        assert_eq!(under_steps(&d, &b, 1, UnderReading::Residual).collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn steps_serialise_as_plain_records() {
        let step = BreakdownStep::peel(0, set(&[1, 3]));
        assert_eq!(
            serde_json::to_string(&step).unwrap(),
            r#"{"root":0,"nbhd":[1,3],"rule":"rule3"}"#
        );
        let back: BreakdownStep = serde_json::from_str(r#"{"root":2,"nbhd":[],"rule":"rule2"}"#).unwrap();
        assert_eq!(back, BreakdownStep::strip(2));
    }
}
