mod common;

use proptest::prelude::*;
use thermocomp::dynamics::{
    edge_flows, entropy, generator, generator_delta, generator_rate, node_rates, perturb, simulate,
    step, SimConfig, Termination,
};
use thermocomp::network::Network;

/// Σ_j N_j (1 − ln N_j − G_j / T): the part of ln P that is a function of
/// state alone once the heat carried off by dissipation is booked separately.
fn system_entropy(net: &Network) -> f64 {
    let t = net.temperature;
    net.nodes
        .iter()
        .map(|n| n.occupancy * (1.0 - n.occupancy.ln() - n.gibbs_energy / t))
        .sum()
}

fn exported_heat(net: &Network, dt: f64) -> f64 {
    let t = net.temperature;
    edge_flows(net)
        .unwrap()
        .iter()
        .zip(&net.edges)
        .map(|(j, e)| dt * j * (e.ln_degeneracy_factorial() - e.dissipation / t))
        .sum()
}

fn small_network() -> impl Strategy<Value = Network> {
    (0u64..100_000).prop_map(|seed| common::random_network(seed % 97 + 1000 * (seed / 97)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_conserves_component_totals(net in small_network()) {
        let (next, _) = step(&net, 1e-3).unwrap();
        for comp in net.components().unwrap() {
            let before: f64 = comp.iter().map(|&j| net.nodes[j].occupancy).sum();
            let after: f64 = comp.iter().map(|&j| next.nodes[j].occupancy).sum();
            prop_assert!((before - after).abs() <= 1e-12 * before);
        }
    }

    #[test]
    fn generator_is_non_negative_and_matches_flows(net in small_network()) {
        let l = generator(&net).unwrap();
        prop_assert!(l >= 0.0);
        let from_flows: f64 = edge_flows(&net)
            .unwrap()
            .iter()
            .zip(&net.edges)
            .map(|(j, e)| if e.conductance > 0.0 { j * j / e.conductance } else { 0.0 })
            .sum();
        prop_assert!((l - from_flows).abs() <= 1e-9 * (1.0 + l));
    }

    #[test]
    fn generator_pairs_node_rates_with_free_energies(net in small_network()) {
        // L = −½ Σ_j Σ_k (share of edge jk in dN_j/dt) ΔV_jk / T
        let t = net.temperature;
        let flows = edge_flows(&net).unwrap();
        let mut paired = 0.0;
        for (e, j) in net.edges.iter().zip(&flows) {
            let v = net.free_energy(e).unwrap();
            paired += (-j) * v / t;
            paired += j * (-v) / t;
        }
        let l = generator(&net).unwrap();
        prop_assert!((-0.5 * paired - l).abs() <= 1e-9 * (1.0 + l));
        let rates = node_rates(&net).unwrap();
        let total: f64 = rates.iter().sum();
        prop_assert!(total.abs() <= 1e-9 * (1.0 + rates.iter().map(|r| r.abs()).sum::<f64>()));
    }

    #[test]
    fn step_entropy_is_the_thermodynamic_balance(net in small_network(), dt in 1e-5f64..1e-2) {
        let Ok((next, snap)) = step(&net, dt) else { return Ok(()); };
        let gained = snap.entropy - entropy(&net).unwrap();
        let direct = system_entropy(&next) - system_entropy(&net) + exported_heat(&net, dt);
        let scale = net.nodes.iter().map(|n| n.occupancy * (1.0 + n.occupancy.ln().abs())).sum::<f64>();
        prop_assert!((gained - direct).abs() <= 1e-11 * scale, "{gained} vs {direct}");
    }

    #[test]
    fn generator_rate_is_non_positive(net in small_network()) {
        prop_assert!(generator_rate(&net).unwrap() <= 0.0);
    }

    #[test]
    fn perturbation_keeps_totals_and_positivity(net in small_network(), delta in -0.5f64..0.5) {
        let p = perturb(&net, delta).unwrap();
        prop_assert!(p.nodes.iter().all(|n| n.occupancy > 0.0));
        for comp in net.components().unwrap() {
            let a: f64 = comp.iter().map(|&j| net.nodes[j].occupancy).sum();
            let b: f64 = comp.iter().map(|&j| p.nodes[j].occupancy).sum();
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }
    }
}

#[test]
fn random_runs_reach_steady_state_monotonically() {
    for seed in 0..20 {
        let net = common::random_network(seed);
        let traj = simulate(&net, &common::ensemble_config(seed)).unwrap();
        assert_eq!(traj.terminated, Termination::Steady, "seed {seed}");
        assert!(traj.entropies().windows(2).all(|w| w[1] - w[0] >= -1e-9));
        assert!(generator_delta(&traj).unwrap().iter().all(|&d| d <= 1e-9));
        assert!(traj.generators().iter().all(|&l| l >= 0.0));
        let last = traj.last().unwrap();
        assert_eq!(last.occupancies, traj.occupancies(traj.len() - 1));
    }
}

#[test]
fn snapshot_entropy_tracks_the_balance_along_a_run() {
    let net = common::random_network(7);
    let traj = simulate(&net, &common::ensemble_config(7)).unwrap();
    let mut expected = entropy(&net).unwrap();
    let mut here = net.clone();
    for i in 1..traj.len().min(200) {
        let dt = traj.times()[i] - traj.times()[i - 1];
        let next = net.with_occupancies(traj.occupancies(i));
        expected += system_entropy(&next) - system_entropy(&here) + exported_heat(&here, dt);
        here = next;
        assert!((traj.entropies()[i] - expected).abs() < 1e-9, "step {i}");
    }
}

#[test]
fn simulation_is_reproducible() {
    let net = common::random_network(3);
    let cfg = SimConfig {
        seed: 42,
        ..SimConfig::default()
    };
    let a = simulate(&net, &cfg).unwrap();
    let b = simulate(&net, &cfg).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}
