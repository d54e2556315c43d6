//! Browser bindings. Every function takes and returns strings so the page
//! only ever deals with edge lists and JSON.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use qkforge::io::{parse_edge_list, to_edge_list};
use qkforge_core::breakdown::{
    build_breakdown_sequence, build_constructive_quasi_kernel, check_epon_lemma, minimum_constructive_quasi_kernel,
    violation_residual,
};
use qkforge_core::conjecture::{alpha_ledger, axiom_audit, decompose_rst, find_axiom_witness};
use qkforge_core::genspace::{self, MASK_CAP};
use qkforge_core::quasikernel::{construct_quasi_kernel, minimum_quasi_kernel};
use qkforge_core::{Digraph, Selector};

/// Exhaustive searches are skipped above this size to keep the page responsive.
pub const SEARCH_LIMIT: usize = 16;

fn graph_json(d: &Digraph) -> Value {
    json!({ "n": d.n(), "arcs": d.arcs().map(|(u, v)| [u, v]).collect::<Vec<_>>(), "sources": d.sources() })
}

/// Quasi-kernel construction, minimum quasi-kernel, breakdown sequence and
/// its constructive quasi-kernels for one graph.
pub fn analyze_json(edge_list: &str, selector: &str) -> Result<String, String> {
    let d = parse_edge_list(edge_list).map_err(|e| e.to_string())?;
    let selector: Selector = selector.parse()?;
    let (q, trace) = construct_quasi_kernel(&d, selector);
    let small = d.n() <= SEARCH_LIMIT;
    let minimum = if small { minimum_quasi_kernel(&d).ok() } else { None };

    let breakdown = match build_breakdown_sequence(&d, selector) {
        Ok(b) => {
            let constructive = build_constructive_quasi_kernel(&d, &b).map_err(|e| e.to_string())?;
            let mut out = json!({ "steps": b.steps, "constructive": constructive });
            if small {
                let min_c = minimum_constructive_quasi_kernel(&d, &b).map_err(|e| e.to_string())?;
                let rst = decompose_rst(&d, &b, min_c).map_err(|e| e.to_string())?;
                out["minimum_constructive"] = json!(min_c);
                out["alpha_ledger"] = json!(alpha_ledger(&d, &b, min_c, &rst));
                out["rst"] = json!(rst);
                out["epon_violations"] = json!(check_epon_lemma(&d, &b, min_c));
            }
            out
        }
        Err(e) => json!({
            "error": e.to_string(),
            "stuck_residual": violation_residual(&e).map(|s| json!({ "graph": graph_json(&s.graph), "original": s.original })),
        }),
    };

    Ok(json!({
        "graph": graph_json(&d),
        "selector": selector,
        "construction": { "quasi_kernel": q, "trace": trace },
        "minimum": minimum,
        "breakdown": breakdown,
    })
    .to_string())
}

/// A seeded random digraph as an edge list.
pub fn random_graph_text(n: usize, p: f64, seed: u64) -> Result<String, String> {
    if n > MASK_CAP {
        return Err(format!("at most {MASK_CAP} vertices"));
    }
    genspace::random_digraph(n, p, seed).map(|d| to_edge_list(&d)).map_err(|e| e.to_string())
}

/// Per-vertex out-degree and new-source count, plus the first qualifying vertex.
pub fn axiom_scan_json(edge_list: &str) -> Result<String, String> {
    let d = parse_edge_list(edge_list).map_err(|e| e.to_string())?;
    let witness = find_axiom_witness(&d).ok().flatten();
    Ok(json!({ "has_arcs": d.has_arcs(), "witness": witness, "audit": axiom_audit(&d) }).to_string())
}

#[wasm_bindgen]
pub fn analyze(edge_list: &str, selector: &str) -> Result<String, JsValue> {
    analyze_json(edge_list, selector).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn random_graph(n: usize, p: f64, seed: u32) -> Result<String, JsValue> {
    random_graph_text(n, p, seed.into()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn axiom_scan(edge_list: &str) -> Result<String, JsValue> {
    axiom_scan_json(edge_list).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn analyze_triangle() {
        let v = parse(&analyze_json("3\n0 1\n1 2\n2 0\n", "lex").unwrap());
        assert_eq!(v["construction"]["quasi_kernel"], json!([2]));
        assert_eq!(v["minimum"].as_array().unwrap().len(), 1);
        assert_eq!(v["breakdown"]["epon_violations"], json!([]));
        assert!(v["breakdown"]["steps"].is_array());
    }

    #[test]
    fn analyze_reports_bad_input() {
        assert!(analyze_json("2\n0 0\n", "lex").unwrap_err().contains("line 2"));
        assert!(analyze_json("2\n", "greedy").is_err());
    }

    #[test]
    fn random_graph_round_trips() {
        let text = random_graph_text(6, 0.5, 3).unwrap();
        let v = parse(&analyze_json(&text, "maxdeg").unwrap());
        assert_eq!(v["graph"]["n"], 6);
        assert!(random_graph_text(12, 0.5, 0).is_err());
        assert!(random_graph_text(4, 2.0, 0).is_err());
    }

    #[test]
    fn axiom_scan_rows() {
        let v = parse(&axiom_scan_json("3\n0 1\n1 2\n2 0\n").unwrap());
        assert_eq!(v["audit"].as_array().unwrap().len(), 3);
        assert_eq!(v["witness"]["u"], 0);
        let empty = parse(&axiom_scan_json("2\n").unwrap());
        assert_eq!(empty["has_arcs"], false);
        assert!(empty["witness"].is_null());
    }
}
