//! Single-instance commands. Each returns the text for standard output and an
//! exit code: 0 on success, 2 when the command recorded a violation. Errors
//! become exit code 1 in `main`.

use serde::Serialize;
use serde_json::{json, Value};

use qkforge_core::breakdown::{
    build_breakdown_sequence, build_constructive_quasi_kernel, classify_step, replay, trace_source_emergence,
    under_steps, UnderReading,
};
use qkforge_core::conjecture::{axiom_audit, check_sqkc_bound, find_axiom_witness};
use qkforge_core::quasikernel::{construct_quasi_kernel, is_kernel, is_quasi_kernel, minimum_quasi_kernel};
use qkforge_core::{BreakdownSequence, BreakdownStep, Digraph, Selector, Vertex, VertexSet};

use crate::io::to_dot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub code: i32,
}

impl Output {
    fn json(value: Value, violation: bool) -> Self {
        let stdout = serde_json::to_string_pretty(&value).expect("json value serialises") + "\n";
        Output { stdout, code: if violation { 2 } else { 0 } }
    }

    fn text(stdout: String) -> Self {
        Output { stdout, code: 0 }
    }
}

pub fn unsupported_format(command: &str, format: Format) -> anyhow::Error {
    anyhow::anyhow!("`{command}` does not support --format {format:?}")
}

/// The echoed input: the graph and, where it matters, the selector.
fn input(d: &Digraph, selector: Option<Selector>) -> Value {
    let mut v = json!({ "graph": d, "fingerprint": d.fingerprint() });
    if let Some(s) = selector {
        v["selector"] = json!(s);
    }
    v
}

fn merge(input: Value, payload: Value) -> Value {
    let mut out = payload;
    out["input"] = input;
    out
}

pub fn qk_construct(d: &Digraph, selector: Selector, format: Format) -> anyhow::Result<Output> {
    let (q, trace) = construct_quasi_kernel(d, selector);
    match format {
        Format::Json => Ok(Output::json(
            merge(input(d, Some(selector)), json!({ "quasi_kernel": q, "size": q.len(), "trace": trace })),
            false,
        )),
        Format::Dot => {
            let labels: Vec<(Vertex, String)> = trace
                .entries
                .iter()
                .enumerate()
                .map(|(i, e)| (e.root, format!("#{i} {:?}", e.kind).to_lowercase()))
                .collect();
            Ok(Output::text(to_dot(d, q, &labels)))
        }
        Format::Csv => Err(unsupported_format("qk construct", format)),
    }
}

pub fn qk_verify(d: &Digraph, set: VertexSet) -> anyhow::Result<Output> {
    let qk = is_quasi_kernel(d, set)?;
    let kernel = is_kernel(d, set)?;
    Ok(Output::json(
        merge(input(d, None), json!({ "set": set, "is_quasi_kernel": qk, "is_kernel": kernel })),
        !qk,
    ))
}

pub fn qk_min(d: &Digraph) -> anyhow::Result<Output> {
    let q = minimum_quasi_kernel(d)?;
    Ok(Output::json(merge(input(d, None), json!({ "min_size": q.len(), "witness": q })), false))
}

pub fn bds_build(d: &Digraph, selector: Selector, format: Format) -> anyhow::Result<Output> {
    let b = build_breakdown_sequence(d, selector)?;
    let q = build_constructive_quasi_kernel(d, &b)?;
    match format {
        Format::Json => Ok(Output::json(
            merge(
                input(d, Some(selector)),
                json!({ "steps": b.steps, "roots": b.roots(), "constructive_quasi_kernel": q }),
            ),
            false,
        )),
        Format::Dot => Ok(Output::text(to_dot(d, q, &step_labels(&b)))),
        Format::Csv => Err(unsupported_format("bds build", format)),
    }
}

fn step_labels(b: &BreakdownSequence) -> Vec<(Vertex, String)> {
    b.steps.iter().enumerate().map(|(i, s)| (s.root, format!("step {i}"))).collect()
}

/// Accepts either a bare array of steps or an object with a `steps` field.
pub fn parse_steps(text: &str) -> anyhow::Result<Vec<BreakdownStep>> {
    let value: Value = serde_json::from_str(text)?;
    let steps = match value {
        Value::Object(mut map) => map.remove("steps").ok_or_else(|| anyhow::anyhow!("no `steps` field"))?,
        other => other,
    };
    Ok(serde_json::from_value(steps)?)
}

pub fn bds_verify(d: &Digraph, steps: Vec<BreakdownStep>) -> anyhow::Result<Output> {
    let result = replay(d, &steps);
    let payload = match &result {
        Ok(_) => json!({ "valid": true, "steps": steps }),
        Err(e) => json!({ "valid": false, "steps": steps, "error": { "step": e.step, "reason": e.reason } }),
    };
    Ok(Output::json(merge(input(d, None), payload), result.is_err()))
}

#[derive(Serialize)]
struct TraceRow {
    index: usize,
    #[serde(flatten)]
    step: BreakdownStep,
    residual: VertexSet,
    new_sources: VertexSet,
    kind: Option<qkforge_core::StepKind>,
    /// Empty steps only: the steps this one is under.
    #[serde(skip_serializing_if = "Option::is_none")]
    under: Option<Vec<usize>>,
    /// Empty steps only: after which step the root became a source.
    #[serde(skip_serializing_if = "Option::is_none")]
    emerged_after: Option<Option<usize>>,
}

/// The built sequence step by step, with the residual each step was taken
/// from and the classification against the constructive quasi-kernel.
pub fn bds_trace(d: &Digraph, selector: Selector, format: Format) -> anyhow::Result<Output> {
    let b = build_breakdown_sequence(d, selector)?;
    let q = build_constructive_quasi_kernel(d, &b)?;
    if format == Format::Dot {
        return Ok(Output::text(to_dot(d, q, &step_labels(&b))));
    }
    if format == Format::Csv {
        return Err(unsupported_format("bds trace", format));
    }
    let residuals = replay(d, &b.steps).map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut rows = Vec::with_capacity(b.len());
    for (i, step) in b.steps.iter().enumerate() {
        let alive = residuals[i];
        let empty = step.nbhd.is_empty();
        rows.push(TraceRow {
            index: i,
            step: step.clone(),
            residual: alive,
            new_sources: if empty { VertexSet::EMPTY } else { d.new_sources_in(alive, step.root) },
            kind: classify_step(d, step, q).ok(),
            under: empty.then(|| under_steps(d, &b, i, UnderReading::Original).collect()),
            emerged_after: empty.then(|| trace_source_emergence(d, &b, step.root)).transpose()?,
        });
    }
    Ok(Output::json(
        merge(input(d, Some(selector)), json!({ "trace": rows, "constructive_quasi_kernel": q })),
        false,
    ))
}

pub fn axiom_check(d: &Digraph) -> anyhow::Result<Output> {
    let witness = find_axiom_witness(d)?;
    Ok(Output::json(
        merge(input(d, None), json!({ "witness": witness, "audit": axiom_audit(d) })),
        witness.is_none(),
    ))
}

pub fn sqkc_check(d: &Digraph) -> anyhow::Result<Output> {
    let check = check_sqkc_bound(d)?;
    let holds = check.holds;
    let mut payload = serde_json::to_value(check)?;
    payload["n"] = json!(d.n());
    Ok(Output::json(merge(input(d, None), payload), !holds))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Digraph {
        let arcs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Digraph::from_arcs(n, &arcs).unwrap()
    }

    fn parse(o: &Output) -> Value {
        serde_json::from_str(&o.stdout).unwrap()
    }

    #[test]
    fn min_on_four_cycle() {
        let v = parse(&qk_min(&cycle(4)).unwrap());
        assert_eq!(v["min_size"], 2);
        assert_eq!(v["witness"], json!([0, 2]));
    }

    #[test]
    fn axiom_on_triangle() {
        let o = axiom_check(&cycle(3)).unwrap();
        assert_eq!(o.code, 0);
        assert_eq!(parse(&o)["witness"], json!({ "u": 0, "out_deg": 1, "new_sources": 1 }));
        assert!(axiom_check(&Digraph::empty(2).unwrap()).is_err());
    }

    #[test]
    fn empty_graph_sequence() {
        let v = parse(&bds_build(&Digraph::empty(0).unwrap(), Selector::Lex, Format::Json).unwrap());
        assert_eq!(v["steps"], json!([]));
    }

    #[test]
    fn verify_flags_non_quasi_kernels() {
        assert_eq!(qk_verify(&cycle(3), VertexSet::singleton(0)).unwrap().code, 0);
        assert_eq!(qk_verify(&cycle(3), VertexSet::EMPTY).unwrap().code, 2);
    }

    #[test]
    fn bds_verify_round_trip() {
        let d = cycle(4);
        let built = parse(&bds_build(&d, Selector::Lex, Format::Json).unwrap());
        let steps = parse_steps(&built.to_string()).unwrap();
        assert_eq!(bds_verify(&d, steps.clone()).unwrap().code, 0);
        assert_eq!(bds_verify(&d, steps[..1].to_vec()).unwrap().code, 2);
    }

    #[test]
    fn trace_marks_empty_steps() {
        let v = parse(&bds_trace(&cycle(3), Selector::Lex, Format::Json).unwrap());
        let rows = v["trace"].as_array().unwrap();
        assert!(rows.iter().any(|r| r["under"].is_array()));
        assert!(rows.iter().all(|r| r["kind"].is_string()));
    }

    #[test]
    fn csv_is_campaign_only() {
        assert!(qk_construct(&cycle(3), Selector::Lex, Format::Csv).is_err());
        let dot = qk_construct(&cycle(3), Selector::Lex, Format::Dot).unwrap();
        assert!(dot.stdout.starts_with("digraph"));
    }

    #[test]
    fn sqkc_needs_source_free() {
        assert!(sqkc_check(&Digraph::from_arcs(2, &[(0, 1)]).unwrap()).is_err());
        let v = parse(&sqkc_check(&cycle(5)).unwrap());
        assert_eq!(v["holds"], true);
        assert_eq!(v["min_size"], 2);
    }
}
