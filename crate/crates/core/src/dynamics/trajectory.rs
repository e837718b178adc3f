use serde::{Deserialize, Serialize};

use super::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Steady,
    MaxSteps,
}

/// State of the network at one accepted time.
///
/// `occupancies` follow the network's node order and `flows` its edge order.
/// A flow is the rate at which occupancy moves from the edge's `from` node
/// to its `to` node; it is negative when the transfer runs the other way.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub occupancies: Vec<f64>,
    pub entropy: f64,
    pub generator: f64,
    pub flows: Vec<f64>,
}

/// Accepted snapshots of a simulation, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub config: SimConfig,
    pub node_ids: Vec<String>,
    pub edge_ids: Vec<String>,
    pub terminated: Termination,
    /// Attempts discarded by the adaptive step control.
    pub rejected_steps: usize,
    times: Vec<f64>,
    entropies: Vec<f64>,
    generators: Vec<f64>,
    occupancies: Vec<f64>,
    flows: Vec<f64>,
}

impl Trajectory {
    pub(crate) fn new(config: SimConfig, node_ids: Vec<String>, edge_ids: Vec<String>) -> Self {
        Self {
            config,
            node_ids,
            edge_ids,
            terminated: Termination::MaxSteps,
            rejected_steps: 0,
            times: Vec::new(),
            entropies: Vec::new(),
            generators: Vec::new(),
            occupancies: Vec::new(),
            flows: Vec::new(),
        }
    }

    pub(crate) fn push(
        &mut self,
        time: f64,
        entropy: f64,
        generator: f64,
        occupancies: &[f64],
        flows: &[f64],
    ) {
        debug_assert_eq!(occupancies.len(), self.node_ids.len());
        debug_assert_eq!(flows.len(), self.edge_ids.len());
        self.times.push(time);
        self.entropies.push(entropy);
        self.generators.push(generator);
        self.occupancies.extend_from_slice(occupancies);
        self.flows.extend_from_slice(flows);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Accepted steps taken (snapshots after the initial one).
    pub fn steps(&self) -> usize {
        self.len().saturating_sub(1)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn entropies(&self) -> &[f64] {
        &self.entropies
    }

    pub fn generators(&self) -> &[f64] {
        &self.generators
    }

    pub fn occupancies(&self, i: usize) -> &[f64] {
        let n = self.node_ids.len();
        &self.occupancies[i * n..(i + 1) * n]
    }

    pub fn flows(&self, i: usize) -> &[f64] {
        let m = self.edge_ids.len();
        &self.flows[i * m..(i + 1) * m]
    }

    pub fn snapshot(&self, i: usize) -> Snapshot {
        Snapshot {
            time: self.times[i],
            occupancies: self.occupancies(i).to_vec(),
            entropy: self.entropies[i],
            generator: self.generators[i],
            flows: self.flows(i).to_vec(),
        }
    }

    pub fn snapshots(&self) -> impl Iterator<Item = Snapshot> + '_ {
        (0..self.len()).map(|i| self.snapshot(i))
    }

    pub fn last(&self) -> Option<Snapshot> {
        self.len().checked_sub(1).map(|i| self.snapshot(i))
    }

    /// `time,S,L,<node ids...>`, one row per accepted snapshot, values with
    /// 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,S,L");
        for id in &self.node_ids {
            out.push(',');
            out.push_str(id);
        }
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&sig17(self.times[i]));
            out.push(',');
            out.push_str(&sig17(self.entropies[i]));
            out.push(',');
            out.push_str(&sig17(self.generators[i]));
            for &n in self.occupancies(i) {
                out.push(',');
                out.push_str(&sig17(n));
            }
            out.push('\n');
        }
        out
    }
}

fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}
