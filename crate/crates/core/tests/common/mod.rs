#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thermocomp::dynamics::SimConfig;
use thermocomp::network::{ln_factorial, Edge, Network, Node};
use thermocomp::problems::{CnfFormula, TspInstance, WeightedGraph};

pub const ENSEMBLE_SIZE: u64 = 100;

/// Stopping tolerance used when the ensemble runs are meant to produce
/// accurate steady states for later checks at 1e-6.
pub const ENSEMBLE_EPSILON: f64 = 1e-9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected network with 2..=20 nodes and at most 40 edges.
///
/// Dissipations are drawn so that every cycle is free of net affinity: each
/// node gets an offset `ψ` and an edge carries `ΔQ = T ln g! − (ψ_from − ψ_to)`.
/// About 40 % of the offsets are zero, so some edges are reversible.
pub fn random_network(seed: u64) -> Network {
    let mut rng = rng(seed);
    let n: usize = rng.gen_range(2..=20);
    let temperature = rng.gen_range(0.75..=1.5);

    let nodes: Vec<Node> = (0..n)
        .map(|i| {
            Node::new(
                format!("n{i:02}"),
                rng.gen_range(0.5..=3.0),
                rng.gen_range(-0.5..=0.5),
            )
        })
        .collect();
    let psi: Vec<f64> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.4) {
                0.0
            } else {
                rng.gen_range(-0.5..=0.5)
            }
        })
        .collect();

    let max_edges = 40.min(n * (n - 1) / 2);
    let target = rng.gen_range(n - 1..=max_edges);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut pairs: Vec<(usize, usize)> = (1..n)
        .map(|i| (order[rng.gen_range(0..i)], order[i]))
        .collect();
    let mut rest: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|&(a, b)| {
            !pairs
                .iter()
                .any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a))
        })
        .collect();
    rest.shuffle(&mut rng);
    pairs.extend(rest.into_iter().take(target - (n - 1)));

    let edges = pairs
        .into_iter()
        .map(|(a, b)| {
            let (a, b) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
            let g: u64 = match rng.gen_range(0..10) {
                0 => 3,
                1 | 2 => 2,
                _ => 1,
            };
            let dq = temperature * ln_factorial(g) - (psi[a] - psi[b]);
            Edge::new(
                nodes[a].id.clone(),
                nodes[b].id.clone(),
                rng.gen_range(0.5..=2.0),
            )
            .with_degeneracy(g)
            .with_dissipation(dq)
        })
        .collect();
    Network::new(temperature, nodes, edges)
}

pub fn ensemble() -> impl Iterator<Item = (u64, Network)> {
    (0..ENSEMBLE_SIZE).map(|s| (s, random_network(s)))
}

pub fn ensemble_config(seed: u64) -> SimConfig {
    SimConfig {
        epsilon: ENSEMBLE_EPSILON,
        seed,
        ..SimConfig::default()
    }
}

/// Random network whose dissipations are zero or positive, without the
/// cycle condition. Used where only the measure arithmetic matters.
pub fn positive_dissipation_network(seed: u64) -> Network {
    let mut base = random_network(seed ^ 0x5eed_0000);
    let mut rng = rng(seed);
    for e in &mut base.edges {
        e.degeneracy = 1;
        e.dissipation = if rng.gen_bool(0.4) {
            0.0
        } else {
            rng.gen_range(0.05..=1.0)
        };
    }
    base
}

pub const RESERVOIR_OCCUPANCY: f64 = 1e12;

/// Chain `u - m1 - ... - mk - v` between two hubs. Each hub is tied to two
/// reservoir nodes whose potentials are pinned at the hub's target. Returns
/// the network and the reservoir ids.
pub fn reservoir_chain(seed: u64, interior: usize) -> (Network, Vec<String>) {
    let mut rng = rng(seed);
    let t = 1.0;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut reservoirs = Vec::new();
    for (hub, target) in [
        ("u", rng.gen_range(0.3..=1.0)),
        ("v", rng.gen_range(-1.0..=-0.3)),
    ] {
        nodes.push(Node::new(
            hub,
            rng.gen_range(0.5..=2.0),
            rng.gen_range(-0.3..=0.3),
        ));
        for r in 0..2 {
            let id = format!("{hub}_res{r}");
            let g = target - t * RESERVOIR_OCCUPANCY.ln();
            nodes.push(Node::new(id.clone(), RESERVOIR_OCCUPANCY, g));
            edges.push(Edge::new(id.clone(), hub, rng.gen_range(0.5..=2.0)));
            reservoirs.push(id);
        }
    }
    let mut prev = "u".to_string();
    for i in 0..interior {
        let id = format!("m{i}");
        nodes.push(Node::new(
            id.clone(),
            rng.gen_range(0.5..=2.0),
            rng.gen_range(-0.3..=0.3),
        ));
        edges.push(chain_edge(&mut rng, &prev, &id));
        prev = id;
    }
    edges.push(chain_edge(&mut rng, &prev, "v"));
    (Network::new(t, nodes, edges), reservoirs)
}

fn chain_edge(rng: &mut ChaCha8Rng, a: &str, b: &str) -> Edge {
    let (from, to) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
    let dq = if rng.gen_bool(0.3) {
        0.0
    } else {
        rng.gen_range(-0.3..=0.3)
    };
    Edge::new(from, to, rng.gen_range(0.5..=2.0)).with_dissipation(dq)
}

/// Fixed-step relaxation until every node outside `pinned` has a net flow of
/// at most `tol`.
pub fn relax_with_reservoirs(network: &Network, pinned: &[String], dt: f64, tol: f64) -> Network {
    let free: Vec<usize> = network
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| !pinned.contains(&n.id))
        .map(|(i, _)| i)
        .collect();
    let mut net = network.clone();
    for _ in 0..5_000_000 {
        let rates = thermocomp::dynamics::node_rates(&net).unwrap();
        if free.iter().all(|&i| rates[i].abs() <= tol) {
            return net;
        }
        net = thermocomp::dynamics::step(&net, dt).unwrap().0;
    }
    panic!("relaxation did not settle");
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture_network(name: &str) -> Network {
    Network::from_json(&std::fs::read_to_string(fixture_path(name)).unwrap()).unwrap()
}

/// Random weighted graph on `n` vertices with integer weights and about
/// `density` of all ordered pairs present. Parallel edges may occur.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, directed: bool, density: f64) -> WeightedGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && (directed || u < v) && rng.gen_bool(density) {
                edges.push((u, v, rng.gen_range(0..10) as f64));
            }
        }
    }
    if rng.gen_bool(0.3) && n > 1 {
        edges.push((0, 1, rng.gen_range(0..10) as f64));
    }
    WeightedGraph::with_indices(n, &edges, directed).unwrap()
}

/// Symmetric integer distance matrix.
pub fn random_tsp(rng: &mut ChaCha8Rng, n: usize) -> TspInstance {
    let upper: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j > i {
                        rng.gen_range(1..20) as f64
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let d = (0..n)
        .map(|i| (0..n).map(|j| upper[i.min(j)][i.max(j)]).collect())
        .collect();
    TspInstance::new(d).unwrap()
}

/// Random formula with clauses of width one or two.
pub fn random_2sat(rng: &mut ChaCha8Rng, vars: usize, clauses: usize) -> CnfFormula {
    let lit = |rng: &mut ChaCha8Rng| {
        let v = rng.gen_range(1..=vars as i64);
        if rng.gen_bool(0.5) {
            v
        } else {
            -v
        }
    };
    let cs = (0..clauses)
        .map(|_| {
            if rng.gen_bool(0.1) {
                vec![lit(rng)]
            } else {
                vec![lit(rng), lit(rng)]
            }
        })
        .collect();
    CnfFormula::new(vars, cs).unwrap()
}

pub fn uniform(ids: &[&str]) -> Vec<Node> {
    ids.iter().map(|id| Node::new(*id, 1.0, 0.0)).collect()
}

/// Two triangles joined by a chain of `k` interior nodes.
pub fn bridged_triangles(k: usize) -> Network {
    let mut nodes = uniform(&["a1", "a2", "a3", "b1", "b2", "b3"]);
    let mut edges = vec![
        Edge::new("a1", "a2", 1.0).with_dissipation(0.1),
        Edge::new("a2", "a3", 1.5),
        Edge::new("a3", "a1", 0.7).with_dissipation(0.2),
        Edge::new("b1", "b2", 1.0),
        Edge::new("b2", "b3", 2.0).with_dissipation(0.3),
        Edge::new("b3", "b1", 1.0),
    ];
    let mut prev = "a1".to_string();
    for i in 0..k {
        let id = format!("c{i}");
        nodes.push(Node::new(id.clone(), 1.0 + i as f64, 0.1));
        edges.push(
            Edge::new(prev.clone(), id.clone(), 1.0 + 0.25 * i as f64).with_dissipation(0.05),
        );
        prev = id;
    }
    edges.push(Edge::new(prev, "b1", 0.8));
    Network::new(1.0, nodes, edges)
}

/// Random tree on `n` nodes with mixed conductances, dissipations and degeneracies.
pub fn random_tree(seed: u64, n: usize) -> Network {
    let mut rng = rng(seed);
    let nodes = (0..n)
        .map(|i| {
            Node::new(
                format!("t{i}"),
                rng.gen_range(0.5..3.0),
                rng.gen_range(-0.5..0.5),
            )
        })
        .collect();
    let edges = (1..n)
        .map(|i| {
            let p = rng.gen_range(0..i);
            let dq = if rng.gen_bool(0.5) {
                0.0
            } else {
                rng.gen_range(-0.5..0.5)
            };
            let sigma = if rng.gen_bool(0.1) {
                0.0
            } else {
                rng.gen_range(0.5..2.0)
            };
            Edge::new(format!("t{p}"), format!("t{i}"), sigma)
                .with_dissipation(dq)
                .with_degeneracy(rng.gen_range(1..=2))
        })
        .collect();
    Network::new(1.0, nodes, edges)
}
