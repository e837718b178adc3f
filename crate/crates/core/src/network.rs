//! Energy-transduction network model.
//!
//! A [`Network`] is a simple graph whose nodes hold densities-in-energy
//! (an occupancy `N` and a Gibbs energy `G`) and whose edges carry a
//! conductance `σ`, a degeneracy `g` and a dissipation quantum `ΔQ`.
//! Energies are in units of `k_B T` with `k_B = 1`.
//!
//! Every edge has a stored orientation `from -> to`. Quantities that are
//! defined per ordered pair (free energy, dissipation) are antisymmetric:
//! looking at the edge from its `to` end flips their sign.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Occupancies below this make Stirling's approximation for `ln P` doubtful.
pub const STIRLING_THRESHOLD: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("invalid network: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("malformed network document: {0}")]
    Parse(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: String,
    pub occupancy: f64,
    pub gibbs_energy: f64,
}

impl Node {
    pub fn new(id: impl Into<String>, occupancy: f64, gibbs_energy: f64) -> Self {
        Self {
            id: id.into(),
            occupancy,
            gibbs_energy,
        }
    }

    /// Density-in-energy `φ = N exp(G / T)`.
    pub fn density(&self, temperature: f64) -> f64 {
        self.occupancy * (self.gibbs_energy / temperature).exp()
    }
}

fn default_degeneracy() -> u64 {
    1
}

fn default_temperature() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub conductance: f64,
    #[serde(default = "default_degeneracy")]
    pub degeneracy: u64,
    /// Dissipation quantum `ΔQ` for the `from -> to` orientation. Positive
    /// values are emitted to the surroundings when flow runs `to -> from`.
    #[serde(default)]
    pub dissipation: f64,
}

impl Edge {
    pub fn new(from: impl Into<String>, to: impl Into<String>, conductance: f64) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            conductance,
            degeneracy: 1,
            dissipation: 0.0,
        }
    }

    pub fn with_dissipation(mut self, dissipation: f64) -> Self {
        self.dissipation = dissipation;
        self
    }

    pub fn with_degeneracy(mut self, degeneracy: u64) -> Self {
        self.degeneracy = degeneracy;
        self
    }

    /// Label used for this edge in exported artifacts.
    pub fn id(&self) -> String {
        format!("{}->{}", self.from, self.to)
    }

    pub fn is_conducting(&self) -> bool {
        self.conductance > 0.0
    }

    pub fn is_dissipative(&self) -> bool {
        self.dissipation != 0.0
    }

    /// Resistance `T / σ`; infinite for a non-conducting edge.
    pub fn resistance(&self, temperature: f64) -> f64 {
        temperature / self.conductance
    }

    pub fn ln_degeneracy_factorial(&self) -> f64 {
        ln_factorial(self.degeneracy)
    }

    /// Whether the edge joins `a` and `b` in either orientation.
    pub fn joins(&self, a: &str, b: &str) -> bool {
        (self.from == a && self.to == b) || (self.from == b && self.to == a)
    }

    /// The endpoint opposite `id`, if `id` is an endpoint.
    pub fn other(&self, id: &str) -> Option<&str> {
        if self.from == id {
            Some(&self.to)
        } else if self.to == id {
            Some(&self.from)
        } else {
            None
        }
    }
}

/// `ln(g!)` through the log-gamma function.
pub fn ln_factorial(g: u64) -> f64 {
    if g <= 1 {
        return 0.0;
    }
    libm::lgamma(g as f64 + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeClass {
    Idle,
    Deterministic,
    Branching,
}

impl fmt::Display for NodeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeClass::Idle => "idle",
            NodeClass::Deterministic => "deterministic",
            NodeClass::Branching => "branching",
        })
    }
}

/// A broken invariant found by [`Network::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Violation {
    NonPositiveTemperature { temperature: f64 },
    DuplicateNodeId { node: String },
    NonPositiveOccupancy { node: String, occupancy: f64 },
    NonFiniteGibbsEnergy { node: String },
    UnknownEndpoint { edge: String, node: String },
    SelfLoop { edge: String },
    NegativeConductance { edge: String, conductance: f64 },
    ZeroDegeneracy { edge: String },
    NonFiniteDissipation { edge: String },
    DuplicateEdge { edge: String, first: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveTemperature { temperature } => {
                write!(f, "temperature {temperature} must be positive and finite")
            }
            Violation::DuplicateNodeId { node } => write!(f, "node `{node}`: id is not unique"),
            Violation::NonPositiveOccupancy { node, occupancy } => {
                write!(
                    f,
                    "node `{node}`: occupancy {occupancy} must be positive and finite"
                )
            }
            Violation::NonFiniteGibbsEnergy { node } => {
                write!(f, "node `{node}`: gibbs energy must be finite")
            }
            Violation::UnknownEndpoint { edge, node } => {
                write!(f, "edge `{edge}`: endpoint `{node}` is not a node")
            }
            Violation::SelfLoop { edge } => write!(f, "edge `{edge}`: self-loops are not allowed"),
            Violation::NegativeConductance { edge, conductance } => {
                write!(
                    f,
                    "edge `{edge}`: conductance {conductance} must be non-negative and finite"
                )
            }
            Violation::ZeroDegeneracy { edge } => {
                write!(f, "edge `{edge}`: degeneracy must be at least 1")
            }
            Violation::NonFiniteDissipation { edge } => {
                write!(f, "edge `{edge}`: dissipation must be finite")
            }
            Violation::DuplicateEdge { edge, first } => write!(
                f,
                "edge `{edge}`: node pair already joined by `{first}` (one edge per pair)"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl Network {
    pub fn new(temperature: f64, nodes: Vec<Node>, edges: Vec<Edge>) -> Self {
        Self {
            temperature,
            nodes,
            edges,
        }
    }

    pub fn empty(temperature: f64) -> Self {
        Self::new(temperature, Vec::new(), Vec::new())
    }

    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        serde_json::from_str(text).map_err(|e| NetworkError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    /// Every broken invariant, in node then edge order. Empty iff valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            out.push(Violation::NonPositiveTemperature {
                temperature: self.temperature,
            });
        }
        let mut seen = HashSet::new();
        for node in &self.nodes {
            if !seen.insert(node.id.as_str()) {
                out.push(Violation::DuplicateNodeId {
                    node: node.id.clone(),
                });
            }
            if !(node.occupancy > 0.0 && node.occupancy.is_finite()) {
                out.push(Violation::NonPositiveOccupancy {
                    node: node.id.clone(),
                    occupancy: node.occupancy,
                });
            }
            if !node.gibbs_energy.is_finite() {
                out.push(Violation::NonFiniteGibbsEnergy {
                    node: node.id.clone(),
                });
            }
        }
        let mut pairs: HashMap<(&str, &str), String> = HashMap::new();
        for edge in &self.edges {
            let id = edge.id();
            for end in [&edge.from, &edge.to] {
                if !seen.contains(end.as_str()) {
                    out.push(Violation::UnknownEndpoint {
                        edge: id.clone(),
                        node: end.clone(),
                    });
                }
            }
            if edge.from == edge.to {
                out.push(Violation::SelfLoop { edge: id.clone() });
            }
            if !(edge.conductance >= 0.0 && edge.conductance.is_finite()) {
                out.push(Violation::NegativeConductance {
                    edge: id.clone(),
                    conductance: edge.conductance,
                });
            }
            if edge.degeneracy == 0 {
                out.push(Violation::ZeroDegeneracy { edge: id.clone() });
            }
            if !edge.dissipation.is_finite() {
                out.push(Violation::NonFiniteDissipation { edge: id.clone() });
            }
            let key = if edge.from <= edge.to {
                (edge.from.as_str(), edge.to.as_str())
            } else {
                (edge.to.as_str(), edge.from.as_str())
            };
            match pairs.get(&key) {
                Some(first) => out.push(Violation::DuplicateEdge {
                    edge: id,
                    first: first.clone(),
                }),
                None => {
                    pairs.insert(key, id);
                }
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<(), NetworkError> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(NetworkError::Invalid(violations))
        }
    }

    /// Nodes whose occupancy is too small for the Stirling form of `ln P`.
    pub fn stirling_warnings(&self) -> Vec<String> {
        self.nodes
            .iter()
            .filter(|n| n.occupancy < STIRLING_THRESHOLD)
            .map(|n| {
                format!(
                    "node `{}`: occupancy {} < {} (Stirling approximation is loose)",
                    n.id, n.occupancy, STIRLING_THRESHOLD
                )
            })
            .collect()
    }

    pub fn node_index(&self, id: &str) -> Result<usize, NetworkError> {
        self.nodes
            .iter()
            .position(|n| n.id == id)
            .ok_or_else(|| NetworkError::UnknownNode(id.to_string()))
    }

    pub fn node(&self, id: &str) -> Result<&Node, NetworkError> {
        self.node_index(id).map(|i| &self.nodes[i])
    }

    /// `(from, to)` node indices for every edge, in edge order.
    pub fn endpoint_indices(&self) -> Result<Vec<(usize, usize)>, NetworkError> {
        let index: HashMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        self.edges
            .iter()
            .map(|e| {
                let f = *index
                    .get(e.from.as_str())
                    .ok_or_else(|| NetworkError::UnknownNode(e.from.clone()))?;
                let t = *index
                    .get(e.to.as_str())
                    .ok_or_else(|| NetworkError::UnknownNode(e.to.clone()))?;
                Ok((f, t))
            })
            .collect()
    }

    pub fn edge_between(&self, a: &str, b: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.joins(a, b))
    }

    /// Potential `μ_j = G_j + T ln N_j`.
    pub fn potential(&self, id: &str) -> Result<f64, NetworkError> {
        let node = self.node(id)?;
        Ok(node_potential(node, self.temperature))
    }

    /// Free energy `ΔV` of `edge` in its stored orientation:
    /// `μ_from − μ_to + T ln(g!) − ΔQ`.
    pub fn free_energy(&self, edge: &Edge) -> Result<f64, NetworkError> {
        let mu_from = self.potential(&edge.from)?;
        let mu_to = self.potential(&edge.to)?;
        Ok(edge_free_energy(mu_from, mu_to, edge, self.temperature))
    }

    /// Free energy seen from `j` towards `k`; `None` when no edge joins them.
    pub fn free_energy_between(&self, j: &str, k: &str) -> Result<Option<f64>, NetworkError> {
        self.node_index(j)?;
        self.node_index(k)?;
        match self.edge_between(j, k) {
            None => Ok(None),
            Some(edge) => {
                let v = self.free_energy(edge)?;
                Ok(Some(if edge.from == j { v } else { -v }))
            }
        }
    }

    /// Number of mutually interacting densities at a node: itself plus one
    /// per conducting incident edge.
    pub fn node_dof(&self, id: &str) -> Result<usize, NetworkError> {
        self.node_index(id)?;
        Ok(1 + self
            .edges
            .iter()
            .filter(|e| e.is_conducting() && e.other(id).is_some())
            .count())
    }

    pub fn classify_node(&self, id: &str) -> Result<NodeClass, NetworkError> {
        self.node_index(id)?;
        Ok(classify_count(self.dissipative_degree(id)))
    }

    fn dissipative_degree(&self, id: &str) -> usize {
        self.edges
            .iter()
            .filter(|e| e.is_conducting() && e.is_dissipative() && e.other(id).is_some())
            .count()
    }

    /// Class of every node, keyed by id.
    pub fn node_classes(&self) -> BTreeMap<String, NodeClass> {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for e in self
            .edges
            .iter()
            .filter(|e| e.is_conducting() && e.is_dissipative())
        {
            *counts.entry(e.from.as_str()).or_default() += 1;
            *counts.entry(e.to.as_str()).or_default() += 1;
        }
        self.nodes
            .iter()
            .map(|n| {
                let c = counts.get(n.id.as_str()).copied().unwrap_or(0);
                (n.id.clone(), classify_count(c))
            })
            .collect()
    }

    pub fn occupancies(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.occupancy).collect()
    }

    /// Copy with node occupancies replaced, in node order.
    pub fn with_occupancies(&self, occupancies: &[f64]) -> Network {
        assert_eq!(
            occupancies.len(),
            self.nodes.len(),
            "one occupancy per node"
        );
        let mut out = self.clone();
        for (node, &n) in out.nodes.iter_mut().zip(occupancies) {
            node.occupancy = n;
        }
        out
    }

    /// Connected components over conducting edges, as sorted node indices.
    /// Components are ordered by their smallest index.
    pub fn components(&self) -> Result<Vec<Vec<usize>>, NetworkError> {
        let ends = self.endpoint_indices()?;
        let n = self.nodes.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (e, &(a, b)) in self.edges.iter().zip(&ends) {
            if e.is_conducting() {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        let mut comps: Vec<Vec<usize>> = groups.into_values().collect();
        comps.sort_by_key(|c| c[0]);
        Ok(comps)
    }
}

fn classify_count(dissipative: usize) -> NodeClass {
    match dissipative {
        0 => NodeClass::Idle,
        1 => NodeClass::Deterministic,
        _ => NodeClass::Branching,
    }
}

pub(crate) fn node_potential(node: &Node, temperature: f64) -> f64 {
    node.gibbs_energy + temperature * node.occupancy.ln()
}

pub(crate) fn edge_free_energy(mu_from: f64, mu_to: f64, edge: &Edge, temperature: f64) -> f64 {
    mu_from - mu_to + temperature * edge.ln_degeneracy_factorial() - edge.dissipation
}

pub fn validate(network: &Network) -> Vec<Violation> {
    network.validate()
}
