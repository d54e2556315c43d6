use proptest::prelude::*;

use qkforge_core::breakdown::{build_breakdown_sequence, replay, trace_source_emergence};
use qkforge_core::genspace::{canonical_form, random_digraph, relabel};
use qkforge_core::quasikernel::{construct_quasi_kernel, is_kernel, is_quasi_kernel};
use qkforge_core::{ArcMask, Digraph, Error, Selector, VertexSet};

fn digraph(max_n: usize) -> impl Strategy<Value = Digraph> {
    (0..=max_n).prop_flat_map(|n| {
        proptest::collection::btree_set((0..n.max(1), 0..n.max(1)), 0..=n * n)
            .prop_map(move |pairs| {
                let arcs: Vec<_> = pairs.into_iter().filter(|(u, v)| u != v).collect();
                Digraph::from_arcs(n, &arcs).unwrap()
            })
    })
}

fn graph_and_set(max_n: usize) -> impl Strategy<Value = (Digraph, VertexSet)> {
    digraph(max_n).prop_flat_map(|d| {
        let full = d.vertices().bits();
        (Just(d), any::<u64>().prop_map(move |m| VertexSet::from_bits(m & full)))
    })
}

fn selector() -> impl Strategy<Value = Selector> {
    prop_oneof![Just(Selector::Lex), Just(Selector::MaxDeg)]
}

proptest! {
    #[test]
    fn removing_nothing_is_identity(d in digraph(12)) {
        prop_assert_eq!(d.remove_set(VertexSet::EMPTY).unwrap().graph, d);
    }

    #[test]
    fn surviving_sources_stay_sources((d, s) in graph_and_set(12)) {
        let sub = d.remove_set(s).unwrap();
        let mapped = sub.set_to_original(sub.graph.sources());
        prop_assert!(d.sources().difference(s).is_subset(mapped));
        for (i, &v) in sub.original.iter().enumerate() {
            prop_assert_eq!(sub.to_local(v), Some(i));
            prop_assert_eq!(sub.to_original(i), Some(v));
        }
    }

    #[test]
    fn new_sources_are_fresh_and_outside_the_removed_set(d in digraph(12)) {
        for u in 0..d.n() {
            let fresh = d.new_sources(u).unwrap();
            prop_assert!(fresh.is_disjoint(d.sources()));
            prop_assert!(fresh.is_disjoint(d.closed_out_neighborhood(u).unwrap()));
        }
    }

    #[test]
    fn independence_is_hereditary((d, s) in graph_and_set(10)) {
        if d.is_independent(s).unwrap() {
            for v in s {
                prop_assert!(d.is_independent(s.without(v)).unwrap());
            }
        }
    }

    #[test]
    fn kernels_are_quasi_kernels((d, k) in graph_and_set(10)) {
        if is_kernel(&d, k).unwrap() {
            prop_assert!(is_quasi_kernel(&d, k).unwrap());
        }
    }

    #[test]
    fn construction_yields_quasi_kernel(d in digraph(16), sel in selector()) {
        let (q, trace) = construct_quasi_kernel(&d, sel);
        prop_assert!(is_quasi_kernel(&d, q).unwrap());
        prop_assert_eq!(q, trace.beta_roots());
    }

    #[test]
    fn built_sequences_replay_with_shrinking_residuals(d in digraph(10), sel in selector()) {
        match build_breakdown_sequence(&d, sel) {
            Ok(b) => {
                let residuals = replay(&d, &b.steps).unwrap();
                for (i, step) in b.steps.iter().enumerate() {
                    prop_assert_eq!(residuals[i + 1], residuals[i].difference(step.closed()));
                    // A prefix validates step by step; only the leftover vertices are flagged.
                    match replay(&d, &b.steps[..i]) {
                        Ok(_) => prop_assert!(residuals[i].is_empty()),
                        Err(e) => prop_assert_eq!(e.step, None),
                    }
                }
            }
            Err(Error::AxiomViolation(sub)) => {
                prop_assert!(sub.graph.has_arcs(), "escrowed residual must have arcs");
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn arc_mask_round_trips(d in digraph(11)) {
        let mask = ArcMask::of(&d).unwrap();
        prop_assert_eq!(mask.to_digraph(), d.clone());
        prop_assert_eq!(ArcMask::of(&mask.to_digraph()).unwrap(), mask);
    }

    #[test]
    fn canonical_form_ignores_labels(d in digraph(6), seed in any::<u64>()) {
        let n = d.n();
        let mut perm: Vec<usize> = (0..n).collect();
        // Fisher-Yates driven by the seed.
        let mut x = seed;
        for i in (1..n).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (x >> 33) as usize % (i + 1));
        }
        let shuffled = relabel(&d, &perm).unwrap();
        prop_assert_eq!(canonical_form(&d).unwrap(), canonical_form(&shuffled).unwrap());
    }
}

/// Random source-free digraphs on 5..=7 vertices.
fn sampled_source_free(count: usize) -> Vec<Digraph> {
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < count {
        let n = 5 + (seed % 3) as usize;
        let d = random_digraph(n, 0.4, seed).unwrap();
        if d.is_source_free() {
            out.push(d);
        }
        seed += 1;
    }
    out
}

#[test]
fn empty_steps_emerge_on_sampled_source_free_graphs() {
    for d in sampled_source_free(300) {
        let b = build_breakdown_sequence(&d, Selector::Lex).unwrap();
        for s in b.steps.iter().filter(|s| s.nbhd.is_empty()) {
            assert!(trace_source_emergence(&d, &b, s.root).unwrap().is_some(), "{d:?}");
        }
    }
}

#[test]
fn random_arc_counts_concentrate() {
    let (n, p) = (8usize, 0.3);
    let trials = 400u64;
    let total: usize = (0..trials).map(|s| random_digraph(n, p, s).unwrap().arc_count()).sum();
    let mean = total as f64 / trials as f64;
    let expected = p * (n * (n - 1)) as f64;
    assert!((mean - expected).abs() < 1.0, "mean {mean} vs {expected}");
}

#[test]
fn different_seeds_give_different_graphs() {
    let graphs: std::collections::HashSet<_> =
        (0..50).map(|s| ArcMask::of(&random_digraph(7, 0.5, s).unwrap()).unwrap()).collect();
    assert!(graphs.len() > 45);
}
