mod common;

use proptest::prelude::*;
use thermocomp::network::{Edge, Network};
use thermocomp::reduction::{
    confluence_check, contract_chains, is_reduced, isomorphic, ReductionError,
};

#[test]
fn bridged_triangles_reduce_to_a_single_bridge() {
    for k in 0..=2 {
        let net = common::bridged_triangles(k);
        let (out, trace) = contract_chains(&net).unwrap();
        assert_eq!(out.nodes.len(), 6, "k = {k}");
        assert_eq!(trace.removed_nodes.len(), k);
        assert!(is_reduced(&out));
        assert!(out.validate().is_empty());
        let report = confluence_check(&net).unwrap();
        assert!(report.confluent, "k = {k}: {report:?}");
    }
}

#[test]
fn chain_merge_preserves_boundary_steady_potentials() {
    for seed in 0..6 {
        let (net, reservoirs) = common::reservoir_chain(seed, 1 + seed as usize % 4);
        let (reduced, trace) = contract_chains(&net).unwrap();
        assert_eq!(trace.removed_nodes.len(), 1 + seed as usize % 4);
        let a = common::relax_with_reservoirs(&net, &reservoirs, 0.02, 1e-12);
        let b = common::relax_with_reservoirs(&reduced, &reservoirs, 0.02, 1e-12);
        for hub in ["u", "v"] {
            let (pa, pb) = (a.potential(hub).unwrap(), b.potential(hub).unwrap());
            assert!(
                (pa - pb).abs() <= 1e-6,
                "seed {seed} hub {hub}: {pa} vs {pb}"
            );
        }
    }
}

#[test]
fn cycles_longer_than_three_are_not_confluent() {
    // Which nodes survive decides how the edge lengths are grouped.
    let ids = ["a", "b", "c", "d", "e"];
    let edges = (0..5)
        .map(|i| Edge::new(ids[i], ids[(i + 1) % 5], 1.0))
        .collect();
    let net = Network::new(1.0, common::uniform(&ids), edges);
    let report = confluence_check(&net).unwrap();
    assert!(!report.confluent);
    assert!(report.terminal_states > 1);
}

#[test]
fn confluence_is_limited_to_small_networks() {
    let (net, _) = common::reservoir_chain(0, 4);
    assert!(matches!(
        confluence_check(&net),
        Err(ReductionError::TooLarge { .. })
    ));
}

proptest! {
    #[test]
    fn contraction_is_idempotent(seed in 0u64..10_000, n in 2usize..12) {
        let net = common::random_tree(seed, n);
        let (once, _) = contract_chains(&net).unwrap();
        let (twice, trace) = contract_chains(&once).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert!(trace.removed_nodes.is_empty());
        prop_assert!(is_reduced(&once));
        prop_assert!(once.validate().is_empty());
    }

    #[test]
    fn trees_are_confluent(seed in 0u64..10_000, n in 2usize..=8) {
        let report = confluence_check(&common::random_tree(seed, n)).unwrap();
        prop_assert!(report.confluent);
    }

    #[test]
    fn removed_nodes_had_two_conducting_edges(seed in 0u64..10_000, n in 2usize..12) {
        let net = common::random_tree(seed, n);
        let (out, trace) = contract_chains(&net).unwrap();
        prop_assert_eq!(out.nodes.len() + trace.removed_nodes.len(), net.nodes.len());
        for merge in &trace.merged_edges {
            prop_assert!(merge.removed.iter().all(|e| e.is_conducting()));
            let expected = 1.0 / (1.0 / merge.removed[0].conductance + 1.0 / merge.removed[1].conductance);
            prop_assert!((merge.created.conductance - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn isomorphism_is_reflexive_under_relabelling(seed in 0u64..10_000, n in 2usize..7) {
        let net = common::random_tree(seed, n);
        let mut renamed = net.clone();
        let rename = |id: &str| format!("x{}", id.trim_start_matches('t').parse::<usize>().unwrap() * 7 % 11);
        for node in &mut renamed.nodes {
            node.id = rename(&node.id);
        }
        for e in &mut renamed.edges {
            e.from = rename(&e.from);
            e.to = rename(&e.to);
        }
        renamed.nodes.reverse();
        prop_assert!(isomorphic(&net, &renamed, 1e-12));
    }
}
