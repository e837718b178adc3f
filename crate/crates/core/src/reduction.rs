//! Contraction of degree-2 chain nodes into single composite edges.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Edge, Network, NetworkError};

/// Largest network accepted by [`confluence_check`].
pub const CONFLUENCE_MAX_NODES: usize = 8;
const CONFLUENCE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("merging at `{node}` overflows the degeneracy {left} * {right}")]
    DegeneracyOverflow { node: String, left: u64, right: u64 },
    #[error("confluence check is limited to {max} nodes, network has {nodes}")]
    TooLarge { nodes: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeMerge {
    pub node: String,
    pub removed: [Edge; 2],
    pub created: Edge,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub removed_nodes: Vec<String>,
    pub merged_edges: Vec<EdgeMerge>,
    pub rounds: usize,
}

/// Indices of the two edges of `id` if the node can be contracted.
fn removable(network: &Network, id: &str) -> Option<(usize, usize)> {
    let mut incident = network
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.from == id || e.to == id);
    let (a, ea) = incident.next()?;
    let (b, eb) = incident.next()?;
    if incident.next().is_some() || !ea.is_conducting() || !eb.is_conducting() {
        return None;
    }
    let j = ea.other(id)?;
    let k = eb.other(id)?;
    if j == k || network.edge_between(j, k).is_some() {
        return None;
    }
    Some((a, b))
}

/// Dissipation of `edge` when traversed from `start`.
fn oriented_dissipation(edge: &Edge, start: &str) -> f64 {
    if edge.from == start {
        edge.dissipation
    } else {
        -edge.dissipation
    }
}

/// Replace node `id` and its two edges by one series edge.
fn contract(
    network: &mut Network,
    id: &str,
    edges: (usize, usize),
) -> Result<EdgeMerge, ReductionError> {
    let (a, b) = edges;
    let ea = network.edges[a].clone();
    let eb = network.edges[b].clone();
    let mut j = ea.other(id).expect("edge touches node").to_string();
    let mut k = eb.other(id).expect("edge touches node").to_string();
    let (mut first, mut second) = (&ea, &eb);
    if k < j {
        std::mem::swap(&mut j, &mut k);
        std::mem::swap(&mut first, &mut second);
    }
    let conductance = 1.0 / (1.0 / first.conductance + 1.0 / second.conductance);
    let dissipation = oriented_dissipation(first, &j) + oriented_dissipation(second, id);
    let degeneracy = first
        .degeneracy
        .checked_mul(second.degeneracy)
        .ok_or_else(|| ReductionError::DegeneracyOverflow {
            node: id.to_string(),
            left: first.degeneracy,
            right: second.degeneracy,
        })?;
    let created = Edge::new(j, k, conductance)
        .with_dissipation(dissipation)
        .with_degeneracy(degeneracy);

    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    network.edges.remove(hi);
    network.edges.remove(lo);
    network.edges.push(created.clone());
    network.nodes.retain(|n| n.id != id);
    Ok(EdgeMerge {
        node: id.to_string(),
        removed: [ea, eb],
        created,
    })
}

/// Contract removable nodes until none is left.
///
/// A node is removable when it has exactly two incident edges, both
/// conducting, and its two neighbours are not already joined. Each round
/// visits nodes in id order and leaves out neighbours of nodes removed
/// earlier in the same round; `rounds` counts rounds that removed anything.
pub fn contract_chains(network: &Network) -> Result<(Network, ReductionTrace), ReductionError> {
    network.ensure_valid()?;
    let mut net = network.clone();
    let mut trace = ReductionTrace::default();
    loop {
        let mut ids: Vec<String> = net.nodes.iter().map(|n| n.id.clone()).collect();
        ids.sort();
        let mut touched: HashSet<String> = HashSet::new();
        let mut removed_any = false;
        for id in ids {
            if touched.contains(&id) {
                continue;
            }
            let Some(pair) = removable(&net, &id) else {
                continue;
            };
            let merge = contract(&mut net, &id, pair)?;
            touched.insert(merge.created.from.clone());
            touched.insert(merge.created.to.clone());
            trace.removed_nodes.push(id);
            trace.merged_edges.push(merge);
            removed_any = true;
        }
        if !removed_any {
            break;
        }
        trace.rounds += 1;
    }
    Ok((net, trace))
}

pub fn is_reduced(network: &Network) -> bool {
    network
        .nodes
        .iter()
        .all(|n| removable(network, &n.id).is_none())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfluenceReport {
    /// Distinct sets of removed nodes at which no further removal applies.
    pub terminal_states: usize,
    /// Terminal networks pairwise isomorphic with matching parameters.
    pub confluent: bool,
}

/// Explore every removal order and compare the resulting fixpoints.
pub fn confluence_check(network: &Network) -> Result<ConfluenceReport, ReductionError> {
    network.ensure_valid()?;
    if network.nodes.len() > CONFLUENCE_MAX_NODES {
        return Err(ReductionError::TooLarge {
            nodes: network.nodes.len(),
            max: CONFLUENCE_MAX_NODES,
        });
    }
    let mut seen: HashSet<BTreeSet<String>> = HashSet::new();
    let mut terminals: Vec<Network> = Vec::new();
    explore(network.clone(), BTreeSet::new(), &mut seen, &mut terminals)?;
    let confluent = terminals
        .windows(2)
        .all(|w| isomorphic(&w[0], &w[1], CONFLUENCE_TOLERANCE));
    Ok(ConfluenceReport {
        terminal_states: terminals.len(),
        confluent,
    })
}

fn explore(
    net: Network,
    removed: BTreeSet<String>,
    seen: &mut HashSet<BTreeSet<String>>,
    terminals: &mut Vec<Network>,
) -> Result<(), ReductionError> {
    if !seen.insert(removed.clone()) {
        return Ok(());
    }
    let mut any = false;
    for node in &net.nodes {
        if let Some(pair) = removable(&net, &node.id) {
            any = true;
            let mut next = net.clone();
            contract(&mut next, &node.id, pair)?;
            let mut r = removed.clone();
            r.insert(node.id.clone());
            explore(next, r, seen, terminals)?;
        }
    }
    if !any {
        terminals.push(net);
    }
    Ok(())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Graph isomorphism that also matches temperature, node occupancies and
/// Gibbs energies, and edge parameters (an edge may appear reversed with
/// opposite dissipation when its degeneracy is 1). Brute force, for small
/// networks.
pub fn isomorphic(a: &Network, b: &Network, tol: f64) -> bool {
    if a.nodes.len() != b.nodes.len()
        || a.edges.len() != b.edges.len()
        || !close(a.temperature, b.temperature, tol)
    {
        return false;
    }
    let (Ok(ea), Ok(eb)) = (a.endpoint_indices(), b.endpoint_indices()) else {
        return false;
    };
    let mut map = vec![usize::MAX; a.nodes.len()];
    let mut used = vec![false; b.nodes.len()];
    assign(a, b, &ea, &eb, tol, 0, &mut map, &mut used)
}

#[allow(clippy::too_many_arguments)]
fn assign(
    a: &Network,
    b: &Network,
    ea: &[(usize, usize)],
    eb: &[(usize, usize)],
    tol: f64,
    i: usize,
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    if i == a.nodes.len() {
        return edges_match(a, b, ea, eb, tol, map);
    }
    let na = &a.nodes[i];
    for (j, nb) in b.nodes.iter().enumerate() {
        if used[j]
            || !close(na.occupancy, nb.occupancy, tol)
            || !close(na.gibbs_energy, nb.gibbs_energy, tol)
        {
            continue;
        }
        map[i] = j;
        used[j] = true;
        if assign(a, b, ea, eb, tol, i + 1, map, used) {
            return true;
        }
        used[j] = false;
    }
    map[i] = usize::MAX;
    false
}

fn edges_match(
    a: &Network,
    b: &Network,
    ea: &[(usize, usize)],
    eb: &[(usize, usize)],
    tol: f64,
    map: &[usize],
) -> bool {
    let mut taken = vec![false; b.edges.len()];
    'edges: for (x, &(f, t)) in a.edges.iter().zip(ea) {
        let (mf, mt) = (map[f], map[t]);
        for (m, (y, &(g, u))) in b.edges.iter().zip(eb).enumerate() {
            if taken[m] || x.degeneracy != y.degeneracy || !close(x.conductance, y.conductance, tol)
            {
                continue;
            }
            let same = (g, u) == (mf, mt) && close(x.dissipation, y.dissipation, tol);
            let flipped = x.degeneracy == 1
                && (g, u) == (mt, mf)
                && close(x.dissipation, -y.dissipation, tol);
            if same || flipped {
                taken[m] = true;
                continue 'edges;
            }
        }
        return false;
    }
    true
}
