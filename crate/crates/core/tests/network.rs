use proptest::prelude::*;
use thermocomp::network::{ln_factorial, Edge, Network, Node, NodeClass};

fn arb_network() -> impl Strategy<Value = Network> {
    (2usize..8, 0.5f64..2.0).prop_flat_map(|(n, t)| {
        let nodes = prop::collection::vec((0.1f64..50.0, -2.0f64..2.0), n);
        let edges = prop::collection::vec(
            (
                0..n,
                0..n,
                prop_oneof![Just(0.0), 0.1f64..3.0],
                1u64..5,
                prop_oneof![Just(0.0), -1.0f64..1.0],
            ),
            0..12,
        );
        (nodes, edges).prop_map(move |(nodes, edges)| {
            let nodes: Vec<Node> = nodes
                .into_iter()
                .enumerate()
                .map(|(i, (occ, g))| Node::new(format!("v{i}"), occ, g))
                .collect();
            let mut seen = std::collections::HashSet::new();
            let edges = edges
                .into_iter()
                .filter(|&(a, b, ..)| a != b && seen.insert((a.min(b), a.max(b))))
                .map(|(a, b, s, g, q)| {
                    Edge::new(format!("v{a}"), format!("v{b}"), s)
                        .with_degeneracy(g)
                        .with_dissipation(q)
                })
                .collect();
            Network::new(t, nodes, edges)
        })
    })
}

#[test]
fn ln_factorial_agrees_with_products() {
    let mut acc = 0.0f64;
    for g in 1..=30u64 {
        acc += (g as f64).ln();
        assert!(
            (ln_factorial(g) - acc).abs() < 1e-10 * acc.max(1.0),
            "g = {g}"
        );
    }
    assert_eq!(ln_factorial(0), 0.0);
}

#[test]
fn potential_example_values() {
    let net = Network::new(
        1.0,
        vec![
            Node::new("a", 1.0, 0.0),
            Node::new("b", 1.0, 2.5),
            Node::new("c", 2.0, 0.5),
        ],
        vec![],
    );
    assert_eq!(net.potential("a").unwrap(), 0.0);
    assert_eq!(net.potential("b").unwrap(), 2.5);
    assert!((net.potential("c").unwrap() - 1.193_147_180_559_945_3).abs() < 1e-12);
    assert!(net.potential("zz").is_err());
}

proptest! {
    #[test]
    fn generated_networks_are_valid(net in arb_network()) {
        prop_assert!(net.validate().is_empty());
        prop_assert_eq!(net.validate(), net.validate());
    }

    #[test]
    fn json_round_trip(net in arb_network()) {
        let back = Network::from_json(&net.to_json()).unwrap();
        prop_assert_eq!(back, net);
    }

    #[test]
    fn potential_increases_with_occupancy(occ in 0.01f64..100.0, extra in 1e-6f64..10.0, g in -3.0f64..3.0, t in 0.2f64..3.0) {
        let low = Network::new(t, vec![Node::new("x", occ, g)], vec![]);
        let high = Network::new(t, vec![Node::new("x", occ + extra, g)], vec![]);
        prop_assert!(high.potential("x").unwrap() > low.potential("x").unwrap());
    }

    #[test]
    fn free_energy_is_antisymmetric(net in arb_network()) {
        for e in &net.edges {
            let forward = net.free_energy_between(&e.from, &e.to).unwrap().unwrap();
            let backward = net.free_energy_between(&e.to, &e.from).unwrap().unwrap();
            prop_assert!((forward + backward).abs() < 1e-12 * (1.0 + forward.abs()));
            prop_assert_eq!(forward, net.free_energy(e).unwrap());
        }
    }

    #[test]
    fn dof_and_class_are_consistent(net in arb_network()) {
        for node in &net.nodes {
            let dof = net.node_dof(&node.id).unwrap();
            prop_assert!(dof >= 1);
            let conducting = net.edges.iter().filter(|e| e.other(&node.id).is_some() && e.is_conducting()).count();
            prop_assert_eq!(dof, 1 + conducting);
            let class = net.classify_node(&node.id).unwrap();
            if class == NodeClass::Branching {
                prop_assert!(dof >= 3);
            }
        }
    }

    #[test]
    fn components_partition_the_nodes(net in arb_network()) {
        let comps = net.components().unwrap();
        let mut all: Vec<usize> = comps.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..net.nodes.len()).collect::<Vec<_>>());
    }
}
