//! Per-instance checks: the source-emergence bound on a single vertex, the
//! half bound on minimum quasi-kernels, the R/S/T counting argument, and the
//! named checks a campaign runs over many digraphs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::breakdown::{
    self, build_breakdown_sequence, build_constructive_quasi_kernel, check_epon_lemma_with,
    classify_unchecked, is_constructive, minimum_constructive_quasi_kernel, trace_source_emergence,
    under_steps, BreakdownSequence, UnderReading,
};
use crate::digraph::{Digraph, Vertex, VertexSet};
use crate::error::{Error, Result};
use crate::quasikernel::{
    construct_quasi_kernel, is_kernel, minimum_quasi_kernel, quasi_kernel_unchecked, Selector, StepKind,
    ORACLE_LIMIT,
};
use crate::subsets;

/// A vertex with positive out-degree whose closed out-neighbourhood can be
/// removed while creating at most that many new sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomWitness {
    pub u: Vertex,
    pub out_deg: usize,
    #[serde(rename = "new_sources")]
    pub new_source_count: usize,
}

/// Smallest qualifying vertex, or `None` when no vertex qualifies.
pub fn find_axiom_witness(d: &Digraph) -> Result<Option<AxiomWitness>> {
    if !d.has_arcs() {
        return Err(Error::ArclessGraph);
    }
    let all = d.vertices();
    Ok(breakdown::peel_candidates(d, all).first().map(|u| AxiomWitness {
        u,
        out_deg: d.out_set(u).len(),
        new_source_count: d.new_sources_in(all, u).len(),
    }))
}

/// One row per vertex: out-degree, new sources, and whether it qualifies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexAudit {
    pub u: Vertex,
    pub out_deg: usize,
    pub new_sources: VertexSet,
    pub qualifies: bool,
}

pub fn axiom_audit(d: &Digraph) -> Vec<VertexAudit> {
    let all = d.vertices();
    all.iter()
        .map(|u| {
            let out_deg = d.out_set(u).len();
            let new_sources = d.new_sources_in(all, u);
            VertexAudit { u, out_deg, new_sources, qualifies: out_deg > 0 && new_sources.len() <= out_deg }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundCheck {
    pub holds: bool,
    pub min_size: usize,
    pub witness: VertexSet,
}

/// Minimum quasi-kernel size against the half bound, `2 * |Q| <= n`.
pub fn check_sqkc_bound(d: &Digraph) -> Result<BoundCheck> {
    if !d.is_source_free() {
        return Err(Error::NotSourceFree);
    }
    let witness = minimum_quasi_kernel(d)?;
    Ok(BoundCheck { holds: 2 * witness.len() <= d.n(), min_size: witness.len(), witness })
}

/// Step indices of the members of `Q`, split three ways.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RstDecomposition {
    /// Steps with a non-empty neighbourhood.
    pub r: Vec<usize>,
    /// Empty steps under at least one beta step.
    pub s: Vec<usize>,
    /// Empty steps under an alpha step and under no beta step.
    pub t: Vec<usize>,
    /// Empty steps under no classifiable step at all.
    pub uncovered: Vec<usize>,
}

impl RstDecomposition {
    pub fn covered(&self) -> usize {
        self.r.len() + self.s.len() + self.t.len()
    }
}

pub fn decompose_rst(d: &Digraph, b: &BreakdownSequence, q: VertexSet) -> Result<RstDecomposition> {
    if !is_constructive(d, b, q) {
        return Err(Error::NotConstructive);
    }
    let mut out = RstDecomposition::default();
    for (j, step) in b.steps.iter().enumerate() {
        if !q.contains(step.root) {
            continue;
        }
        if !step.nbhd.is_empty() {
            out.r.push(j);
            continue;
        }
        let kinds: Vec<_> = under_steps(d, b, j, UnderReading::Original)
            .filter_map(|i| classify_unchecked(d, b.steps[i].root, q))
            .collect();
        if kinds.contains(&StepKind::Beta) {
            out.s.push(j);
        } else if kinds.contains(&StepKind::Alpha) {
            out.t.push(j);
        } else {
            out.uncovered.push(j);
        }
    }
    Ok(out)
}

/// For each alpha step that some member of T is charged to: the number of
/// members charged to it and its out-degree. Every T member goes to the
/// earliest alpha step it is under.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlphaCharge {
    pub step: usize,
    pub charged: usize,
    pub out_deg: usize,
}

pub fn alpha_ledger(d: &Digraph, b: &BreakdownSequence, q: VertexSet, rst: &RstDecomposition) -> Vec<AlphaCharge> {
    let mut ledger: Vec<AlphaCharge> = Vec::new();
    for &j in &rst.t {
        let target = under_steps(d, b, j, UnderReading::Original)
            .find(|&i| classify_unchecked(d, b.steps[i].root, q) == Some(StepKind::Alpha));
        let Some(i) = target else { continue };
        match ledger.iter_mut().find(|c| c.step == i) {
            Some(c) => c.charged += 1,
            None => ledger.push(AlphaCharge { step: i, charged: 1, out_deg: b.steps[i].nbhd.len() }),
        }
    }
    ledger.sort_by_key(|c| c.step);
    ledger
}

/// `|Q| <= |V(D) - Q|` for a constructive `q` on a source-free digraph.
pub fn verify_counting(d: &Digraph, b: &BreakdownSequence, q: VertexSet) -> Result<bool> {
    if !d.is_source_free() {
        return Err(Error::NotSourceFree);
    }
    decompose_rst(d, b, q)?;
    Ok(q.len() <= d.n() - q.len())
}

/// A named per-instance property a campaign can sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    /// Some vertex satisfies the source-emergence bound (graphs with arcs).
    Axiom,
    /// Minimum quasi-kernel is at most half the vertices (source-free graphs).
    Bound,
    /// The inductive construction yields a quasi-kernel with a consistent trace.
    Lemma1,
    /// A breakdown sequence exists and its backward walk is constructive.
    Lemma3,
    /// Every empty step of the sequence emerged as a source (source-free graphs).
    Lemma4,
    /// Empty beta-covered members of a minimum constructive set have a private
    /// out-neighbour among the free roots (source-free graphs).
    Lemma5,
    /// The R/S/T split accounts for the minimum constructive set and the half
    /// bound holds for it (source-free graphs).
    Counting,
    /// The digraph has a kernel. Exploratory; not part of `all`.
    Kernel,
}

impl Check {
    pub const DEFAULT_SET: [Check; 7] = [
        Check::Axiom,
        Check::Bound,
        Check::Lemma1,
        Check::Lemma3,
        Check::Lemma4,
        Check::Lemma5,
        Check::Counting,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Axiom => "axiom",
            Check::Bound => "bound",
            Check::Lemma1 => "lemma1",
            Check::Lemma3 => "lemma3",
            Check::Lemma4 => "lemma4",
            Check::Lemma5 => "lemma5",
            Check::Counting => "counting",
            Check::Kernel => "kernel",
        }
    }

    /// Parses a comma separated list; `all` expands to [`Check::DEFAULT_SET`].
    /// The result is sorted and free of repeats.
    pub fn parse_list(s: &str) -> std::result::Result<Vec<Check>, String> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                out.extend(Check::DEFAULT_SET);
            } else {
                out.push(part.parse()?);
            }
        }
        if out.is_empty() {
            return Err("empty check list".into());
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    pub fn applies(self, d: &Digraph) -> bool {
        match self {
            Check::Axiom => d.has_arcs(),
            Check::Bound => d.is_source_free() && d.n() <= ORACLE_LIMIT,
            Check::Lemma1 | Check::Lemma3 => true,
            Check::Lemma4 | Check::Counting => d.is_source_free(),
            Check::Lemma5 => d.is_source_free(),
            Check::Kernel => d.n() <= ORACLE_LIMIT,
        }
    }

    /// Runs the check. `None` when the check does not apply to `d`.
    pub fn run(self, d: &Digraph, selector: Selector) -> Option<CheckOutcome> {
        if !self.applies(d) {
            return None;
        }
        Some(match self {
            Check::Axiom => run_axiom(d),
            Check::Bound => run_bound(d),
            Check::Lemma1 => run_lemma1(d, selector),
            Check::Lemma3 => run_lemma3(d, selector),
            Check::Lemma4 => run_lemma4(d, selector),
            Check::Lemma5 => run_lemma5(d, selector),
            Check::Counting => run_counting(d, selector),
            Check::Kernel => run_kernel(d),
        })
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Check::DEFAULT_SET
            .into_iter()
            .chain([Check::Kernel])
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown check `{s}`"))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of one check on one digraph.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckOutcome {
    /// Evidence for a violation; `None` when the check passed.
    pub violation: Option<Value>,
    /// Named observations that are not failures.
    pub notes: Vec<&'static str>,
}

impl CheckOutcome {
    fn pass() -> Self {
        CheckOutcome::default()
    }

    fn fail(evidence: Value) -> Self {
        CheckOutcome { violation: Some(evidence), notes: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

fn run_axiom(d: &Digraph) -> CheckOutcome {
    match find_axiom_witness(d) {
        Ok(Some(_)) => CheckOutcome::pass(),
        Ok(None) => CheckOutcome::fail(json!({ "audit": axiom_audit(d) })),
        Err(e) => CheckOutcome::fail(json!({ "error": e.to_string() })),
    }
}

fn run_bound(d: &Digraph) -> CheckOutcome {
    match check_sqkc_bound(d) {
        Ok(c) if c.holds => CheckOutcome::pass(),
        Ok(c) => CheckOutcome::fail(json!({ "min_size": c.min_size, "witness": c.witness })),
        Err(e) => CheckOutcome::fail(json!({ "error": e.to_string() })),
    }
}

fn run_lemma1(d: &Digraph, selector: Selector) -> CheckOutcome {
    let (q, trace) = construct_quasi_kernel(d, selector);
    let mut problems = Vec::new();
    if !quasi_kernel_unchecked(d, q) {
        problems.push("not a quasi-kernel");
    }
    if q != trace.beta_roots() {
        problems.push("Q differs from the beta roots");
    }
    let mut seen = VertexSet::EMPTY;
    for e in &trace.entries {
        if !seen.is_disjoint(e.removed) {
            problems.push("removed sets overlap");
        }
        seen = seen.union(e.removed);
        if e.kind == StepKind::Alpha && d.in_set(e.root).is_disjoint(q) {
            problems.push("alpha root not dominated by Q");
        }
    }
    if seen != d.vertices() {
        problems.push("removed sets do not cover V(D)");
    }
    if problems.is_empty() {
        CheckOutcome::pass()
    } else {
        CheckOutcome::fail(json!({ "problems": problems, "q": q, "trace": trace }))
    }
}

fn build_or_evidence(d: &Digraph, selector: Selector) -> std::result::Result<BreakdownSequence, Value> {
    build_breakdown_sequence(d, selector).map_err(|e| match e {
        Error::AxiomViolation(sub) => json!({
            "error": "no qualifying root in a residual",
            "residual": sub.graph,
            "residual_ids": sub.original,
        }),
        other => json!({ "error": other.to_string() }),
    })
}

fn run_lemma3(d: &Digraph, selector: Selector) -> CheckOutcome {
    let b = match build_or_evidence(d, selector) {
        Ok(b) => b,
        Err(evidence) => return CheckOutcome::fail(evidence),
    };
    if let Err(e) = breakdown::validate_breakdown_sequence(d, &b) {
        return CheckOutcome::fail(json!({ "error": e.to_string(), "steps": b.steps }));
    }
    match build_constructive_quasi_kernel(d, &b) {
        Ok(q) if is_constructive(d, &b, q) => CheckOutcome::pass(),
        Ok(q) => CheckOutcome::fail(json!({ "error": "not constructive", "q": q, "steps": b.steps })),
        Err(e) => CheckOutcome::fail(json!({ "error": e.to_string(), "steps": b.steps })),
    }
}

fn run_lemma4(d: &Digraph, selector: Selector) -> CheckOutcome {
    // Without a sequence there is nothing to replay; lemma3 and axiom report that.
    let Ok(b) = build_breakdown_sequence(d, selector) else {
        return CheckOutcome { violation: None, notes: vec!["no_breakdown_sequence"] };
    };
    let missing: Vec<Vertex> = b
        .steps
        .iter()
        .filter(|s| s.nbhd.is_empty())
        .filter(|s| !matches!(trace_source_emergence(d, &b, s.root), Ok(Some(_))))
        .map(|s| s.root)
        .collect();
    if missing.is_empty() {
        CheckOutcome::pass()
    } else {
        CheckOutcome::fail(json!({ "never_emerged": missing, "steps": b.steps }))
    }
}

/// A breakdown sequence and a minimum constructive quasi-kernel for it.
fn minimum_pair(d: &Digraph, selector: Selector) -> std::result::Result<(BreakdownSequence, VertexSet), CheckOutcome> {
    let Ok(b) = build_breakdown_sequence(d, selector) else {
        return Err(CheckOutcome { violation: None, notes: vec!["no_breakdown_sequence"] });
    };
    match minimum_constructive_quasi_kernel(d, &b) {
        Ok(q) => Ok((b, q)),
        Err(Error::OracleLimitExceeded { .. }) => {
            Err(CheckOutcome { violation: None, notes: vec!["oracle_limit"] })
        }
        Err(e) => Err(CheckOutcome::fail(json!({ "error": e.to_string(), "steps": b.steps }))),
    }
}

fn run_lemma5(d: &Digraph, selector: Selector) -> CheckOutcome {
    let (b, q) = match minimum_pair(d, selector) {
        Ok(pair) => pair,
        Err(outcome) => return outcome,
    };
    let original = check_epon_lemma_with(d, &b, q, UnderReading::Original);
    let residual = check_epon_lemma_with(d, &b, q, UnderReading::Residual);
    let mut outcome = if original.is_empty() {
        CheckOutcome::pass()
    } else {
        CheckOutcome::fail(json!({ "violations": original, "q": q, "steps": b.steps }))
    };
    if original != residual {
        outcome.notes.push("lemma5_residual_reading_differs");
    }
    outcome
}

fn run_counting(d: &Digraph, selector: Selector) -> CheckOutcome {
    let (b, q) = match minimum_pair(d, selector) {
        Ok(pair) => pair,
        Err(outcome) => return outcome,
    };
    let rst = match decompose_rst(d, &b, q) {
        Ok(rst) => rst,
        Err(e) => return CheckOutcome::fail(json!({ "error": e.to_string(), "q": q, "steps": b.steps })),
    };
    let half = 2 * q.len() <= d.n();
    if rst.uncovered.is_empty() && rst.covered() == q.len() && half {
        CheckOutcome::pass()
    } else {
        let mut outcome = CheckOutcome::fail(json!({
            "q": q,
            "steps": b.steps,
            "rst": rst,
            "half_bound": half,
        }));
        if !rst.uncovered.is_empty() {
            outcome.notes.push("uncovered_step");
        }
        outcome
    }
}

fn run_kernel(d: &Digraph) -> CheckOutcome {
    let has_kernel = subsets::by_size(d.vertices()).any(|k| is_kernel(d, k).unwrap_or(false));
    if has_kernel {
        CheckOutcome::pass()
    } else {
        CheckOutcome::fail(json!({ "kernel_free": true }))
    }
}

/// A recorded violation with everything needed to re-run it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    /// Stable instance id, `"n:mask"`.
    pub id: String,
    pub kind: Check,
    pub selector: Selector,
    pub graph: Digraph,
    pub evidence: Value,
}

impl Counterexample {
    /// Re-runs the recorded check; `true` when the violation reproduces.
    pub fn reproduces(&self) -> bool {
        matches!(self.kind.run(&self.graph, self.selector), Some(o) if !o.passed())
    }
}
