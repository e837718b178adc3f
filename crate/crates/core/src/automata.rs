//! Finite automata, the network-to-NFA mapping and subset construction.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Network, NetworkError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutomatonError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("network has no dissipative conducting edge with a driving force, nothing to compute")]
    NoComputation,
    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(String),
    #[error("alphabets differ: {0:?} vs {1:?}")]
    AlphabetMismatch(Vec<String>, Vec<String>),
    #[error("malformed automaton: {0}")]
    Malformed(String),
    #[error("automaton JSON: {0}")]
    Parse(String),
}

/// Common interface of [`Nfa`] and [`Dfa`], phrased over sets of states so
/// that both can be run in lockstep.
pub trait Automaton {
    fn states(&self) -> &[String];
    fn alphabet(&self) -> &[String];
    /// Sorted state indices active before any input.
    fn start(&self) -> Vec<usize>;
    /// Sorted state indices reachable from `current` on symbol index `symbol`.
    fn advance(&self, current: &[usize], symbol: usize) -> Vec<usize>;
    fn is_accepting(&self, state: usize) -> bool;

    fn accepts_set(&self, current: &[usize]) -> bool {
        current.iter().any(|&q| self.is_accepting(q))
    }

    fn symbol_index(&self, symbol: &str) -> Result<usize, AutomatonError> {
        self.alphabet()
            .iter()
            .position(|s| s == symbol)
            .ok_or_else(|| AutomatonError::UnknownSymbol(symbol.to_string()))
    }

    fn accepts<S: AsRef<str>>(&self, input: &[S]) -> Result<bool, AutomatonError>
    where
        Self: Sized,
    {
        run(self, input)
    }
}

pub fn run<A: Automaton, S: AsRef<str>>(
    automaton: &A,
    input: &[S],
) -> Result<bool, AutomatonError> {
    let symbols = input
        .iter()
        .map(|s| automaton.symbol_index(s.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut current = automaton.start();
    for s in symbols {
        current = automaton.advance(&current, s);
    }
    Ok(automaton.accepts_set(&current))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionRecord {
    pub from: String,
    pub symbol: String,
    pub to: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonDoc {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub transitions: Vec<TransitionRecord>,
    pub initial: String,
    pub accepting: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa {
    states: Vec<String>,
    alphabet: Vec<String>,
    /// `delta[q][a]`: sorted targets.
    delta: Vec<Vec<Vec<usize>>>,
    initial: usize,
    accepting: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    states: Vec<String>,
    alphabet: Vec<String>,
    delta: Vec<Vec<usize>>,
    initial: usize,
    accepting: Vec<bool>,
}

fn index_of(names: &[String], name: &str, what: &str) -> Result<usize, AutomatonError> {
    names
        .iter()
        .position(|s| s == name)
        .ok_or_else(|| AutomatonError::Malformed(format!("unknown {what} `{name}`")))
}

fn check_unique(names: &[String], what: &str) -> Result<(), AutomatonError> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(AutomatonError::Malformed(format!("duplicate {what} `{n}`")));
        }
    }
    Ok(())
}

impl Nfa {
    /// Build from `(from, symbol, to)` triples; repeated pairs are merged.
    pub fn new<S: AsRef<str>>(
        states: Vec<String>,
        alphabet: Vec<String>,
        transitions: &[(S, S, S)],
        initial: &str,
        accepting: &[S],
    ) -> Result<Self, AutomatonError> {
        check_unique(&states, "state")?;
        check_unique(&alphabet, "symbol")?;
        let mut delta = vec![vec![Vec::new(); alphabet.len()]; states.len()];
        for (f, a, t) in transitions {
            let f = index_of(&states, f.as_ref(), "state")?;
            let a = index_of(&alphabet, a.as_ref(), "symbol")?;
            let t = index_of(&states, t.as_ref(), "state")?;
            delta[f][a].push(t);
        }
        for row in &mut delta {
            for targets in row {
                targets.sort_unstable();
                targets.dedup();
            }
        }
        let initial = index_of(&states, initial, "initial state")?;
        let mut acc = vec![false; states.len()];
        for s in accepting {
            acc[index_of(&states, s.as_ref(), "accepting state")?] = true;
        }
        Ok(Self {
            states,
            alphabet,
            delta,
            initial,
            accepting: acc,
        })
    }

    pub fn initial(&self) -> &str {
        &self.states[self.initial]
    }

    pub fn accepting(&self) -> Vec<&str> {
        self.states
            .iter()
            .zip(&self.accepting)
            .filter(|(_, &a)| a)
            .map(|(s, _)| s.as_str())
            .collect()
    }

    pub fn targets(&self, state: &str, symbol: &str) -> Result<Vec<&str>, AutomatonError> {
        let q = index_of(&self.states, state, "state")?;
        let a = self.symbol_index(symbol)?;
        Ok(self.delta[q][a]
            .iter()
            .map(|&t| self.states[t].as_str())
            .collect())
    }

    /// Number of (state, symbol) pairs with a non-empty target set.
    pub fn transition_count(&self) -> usize {
        self.delta
            .iter()
            .flatten()
            .filter(|t| !t.is_empty())
            .count()
    }

    /// At most one target for every (state, symbol).
    pub fn is_deterministic(&self) -> bool {
        self.delta.iter().flatten().all(|t| t.len() <= 1)
    }

    pub fn to_doc(&self) -> AutomatonDoc {
        let mut transitions = Vec::new();
        for (q, row) in self.delta.iter().enumerate() {
            for (a, targets) in row.iter().enumerate() {
                if !targets.is_empty() {
                    transitions.push(TransitionRecord {
                        from: self.states[q].clone(),
                        symbol: self.alphabet[a].clone(),
                        to: targets.iter().map(|&t| self.states[t].clone()).collect(),
                    });
                }
            }
        }
        AutomatonDoc {
            states: self.states.clone(),
            alphabet: self.alphabet.clone(),
            transitions,
            initial: self.initial().to_string(),
            accepting: self.accepting().into_iter().map(String::from).collect(),
        }
    }

    pub fn from_doc(doc: &AutomatonDoc) -> Result<Self, AutomatonError> {
        let triples: Vec<(&str, &str, &str)> = doc
            .transitions
            .iter()
            .flat_map(|t| {
                t.to.iter()
                    .map(move |to| (t.from.as_str(), t.symbol.as_str(), to.as_str()))
            })
            .collect();
        let accepting: Vec<&str> = doc.accepting.iter().map(String::as_str).collect();
        Self::new(
            doc.states.clone(),
            doc.alphabet.clone(),
            &triples,
            &doc.initial,
            &accepting,
        )
    }

    pub fn from_json(text: &str) -> Result<Self, AutomatonError> {
        let doc: AutomatonDoc =
            serde_json::from_str(text).map_err(|e| AutomatonError::Parse(e.to_string()))?;
        Self::from_doc(&doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("automaton serializes")
    }
}

impl Automaton for Nfa {
    fn states(&self) -> &[String] {
        &self.states
    }

    fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    fn start(&self) -> Vec<usize> {
        vec![self.initial]
    }

    fn advance(&self, current: &[usize], symbol: usize) -> Vec<usize> {
        let mut next: Vec<usize> = current
            .iter()
            .flat_map(|&q| self.delta[q][symbol].iter().copied())
            .collect();
        next.sort_unstable();
        next.dedup();
        next
    }

    fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }
}

impl Dfa {
    pub fn initial(&self) -> &str {
        &self.states[self.initial]
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn next(&self, state: &str, symbol: &str) -> Result<&str, AutomatonError> {
        let q = index_of(&self.states, state, "state")?;
        let a = self.symbol_index(symbol)?;
        Ok(&self.states[self.delta[q][a]])
    }

    pub fn to_doc(&self) -> AutomatonDoc {
        let mut transitions = Vec::new();
        for (q, row) in self.delta.iter().enumerate() {
            for (a, &t) in row.iter().enumerate() {
                transitions.push(TransitionRecord {
                    from: self.states[q].clone(),
                    symbol: self.alphabet[a].clone(),
                    to: vec![self.states[t].clone()],
                });
            }
        }
        AutomatonDoc {
            states: self.states.clone(),
            alphabet: self.alphabet.clone(),
            transitions,
            initial: self.initial().to_string(),
            accepting: self
                .states
                .iter()
                .zip(&self.accepting)
                .filter(|(_, &a)| a)
                .map(|(s, _)| s.clone())
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("automaton serializes")
    }
}

impl Automaton for Dfa {
    fn states(&self) -> &[String] {
        &self.states
    }

    fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    fn start(&self) -> Vec<usize> {
        vec![self.initial]
    }

    fn advance(&self, current: &[usize], symbol: usize) -> Vec<usize> {
        let mut next: Vec<usize> = current.iter().map(|&q| self.delta[q][symbol]).collect();
        next.sort_unstable();
        next.dedup();
        next
    }

    fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }
}

/// Map a network onto an NFA.
///
/// States are the node ids. Every conducting dissipative edge with a nonzero
/// free energy at the current occupancies becomes a transition in its
/// downhill direction, labelled with the id of the node it leaves. The
/// initial state is the node of highest potential (smallest id on ties) and
/// the accepting states are the nodes whose potential does not exceed that of
/// any neighbour.
pub fn nfa_from_network(network: &Network) -> Result<Nfa, AutomatonError> {
    network.ensure_valid()?;
    let mu: Vec<f64> = network
        .nodes
        .iter()
        .map(|n| network.potential(&n.id))
        .collect::<Result<_, _>>()?;
    let ends = network.endpoint_indices()?;

    let mut arcs: Vec<(usize, usize)> = Vec::new();
    for (edge, &(f, t)) in network.edges.iter().zip(&ends) {
        if !(edge.is_conducting() && edge.is_dissipative()) {
            continue;
        }
        let force = network.free_energy(edge)?;
        if force > 0.0 {
            arcs.push((f, t));
        } else if force < 0.0 {
            arcs.push((t, f));
        }
    }
    if arcs.is_empty() {
        return Err(AutomatonError::NoComputation);
    }

    let ids: Vec<String> = network.nodes.iter().map(|n| n.id.clone()).collect();
    let alphabet: Vec<String> = arcs
        .iter()
        .map(|&(s, _)| ids[s].clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let triples: Vec<(&str, &str, &str)> = arcs
        .iter()
        .map(|&(s, t)| (ids[s].as_str(), ids[s].as_str(), ids[t].as_str()))
        .collect();

    let initial = (0..ids.len())
        .max_by(|&a, &b| mu[a].total_cmp(&mu[b]).then_with(|| ids[b].cmp(&ids[a])))
        .expect("network with an edge has nodes");

    let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    for &(f, t) in &ends {
        neighbours[f].push(t);
        neighbours[t].push(f);
    }
    let accepting: Vec<&str> = (0..ids.len())
        .filter(|&j| neighbours[j].iter().all(|&k| mu[j] <= mu[k]))
        .map(|j| ids[j].as_str())
        .collect();

    Nfa::new(ids.clone(), alphabet, &triples, &ids[initial], &accepting)
}

fn subset_name(nfa: &Nfa, subset: &[usize]) -> String {
    let inner: Vec<&str> = subset.iter().map(|&q| nfa.states[q].as_str()).collect();
    format!("{{{}}}", inner.join(","))
}

/// Reachable-subset construction. The empty subset, when reachable, is the
/// dead state, so the result is total.
pub fn subset_construction(nfa: &Nfa) -> Dfa {
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    let start = nfa.start();
    index.insert(start.clone(), 0);
    subsets.push(start);
    queue.push_back(0);

    let mut delta: Vec<Vec<usize>> = Vec::new();
    while let Some(i) = queue.pop_front() {
        let mut row = Vec::with_capacity(nfa.alphabet.len());
        for a in 0..nfa.alphabet.len() {
            let next = nfa.advance(&subsets[i], a);
            let id = *index.entry(next.clone()).or_insert_with(|| {
                subsets.push(next);
                queue.push_back(subsets.len() - 1);
                subsets.len() - 1
            });
            row.push(id);
        }
        if delta.len() <= i {
            delta.resize(i + 1, Vec::new());
        }
        delta[i] = row;
    }

    Dfa {
        states: subsets.iter().map(|s| subset_name(nfa, s)).collect(),
        alphabet: nfa.alphabet.clone(),
        accepting: subsets.iter().map(|s| nfa.accepts_set(s)).collect(),
        delta,
        initial: 0,
    }
}

/// Whether `a` and `b` accept the same strings of length at most `max_len`.
///
/// Both automata are run in lockstep over all inputs, one length at a time;
/// inputs that lead to the same pair of state sets are followed once.
pub fn equivalent_up_to<A: Automaton, B: Automaton>(
    a: &A,
    b: &B,
    max_len: usize,
) -> Result<bool, AutomatonError> {
    if a.alphabet() != b.alphabet() {
        let (mut x, mut y) = (a.alphabet().to_vec(), b.alphabet().to_vec());
        x.sort();
        y.sort();
        if x != y {
            return Err(AutomatonError::AlphabetMismatch(x, y));
        }
    }
    let symbols: Vec<(usize, usize)> = a
        .alphabet()
        .iter()
        .enumerate()
        .map(|(i, s)| (i, b.symbol_index(s).expect("alphabets agree")))
        .collect();

    let mut layer: BTreeSet<(Vec<usize>, Vec<usize>)> = BTreeSet::new();
    layer.insert((a.start(), b.start()));
    let mut seen: BTreeMap<(Vec<usize>, Vec<usize>), usize> = BTreeMap::new();
    for depth in 0..=max_len {
        let mut next = BTreeSet::new();
        for pair in layer {
            if a.accepts_set(&pair.0) != b.accepts_set(&pair.1) {
                return Ok(false);
            }
            if depth == max_len || seen.contains_key(&pair) {
                continue;
            }
            for &(sa, sb) in &symbols {
                next.insert((a.advance(&pair.0, sa), b.advance(&pair.1, sb)));
            }
            seen.insert(pair, depth);
        }
        layer = next;
    }
    Ok(true)
}

/// NFA over `{a, b}` accepting strings whose k-th symbol from the end is `a`.
/// It has `k + 1` states; its subset construction has `2^k`.
pub fn kth_from_end(k: usize) -> Nfa {
    assert!(k >= 1, "k must be at least 1");
    let states: Vec<String> = (0..=k).map(|i| format!("q{i}")).collect();
    let mut triples = vec![
        ("q0".to_string(), "a".to_string(), "q0".to_string()),
        ("q0".to_string(), "b".to_string(), "q0".to_string()),
        ("q0".to_string(), "a".to_string(), "q1".to_string()),
    ];
    for i in 1..k {
        for s in ["a", "b"] {
            triples.push((format!("q{i}"), s.to_string(), format!("q{}", i + 1)));
        }
    }
    let accepting = [format!("q{k}")];
    Nfa::new(
        states,
        vec!["a".into(), "b".into()],
        &triples,
        "q0",
        &accepting,
    )
    .expect("well-formed by construction")
}
