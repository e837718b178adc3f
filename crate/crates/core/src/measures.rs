//! State-space measures and the class label derived from them.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Network, NetworkError, NodeClass};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    #[serde(rename = "reversible-idle")]
    ReversibleIdle,
    P,
    NP,
    #[serde(rename = "NP-complete")]
    NpComplete,
}

impl ClassLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::ReversibleIdle => "reversible-idle",
            ClassLabel::P => "P",
            ClassLabel::NP => "NP",
            ClassLabel::NpComplete => "NP-complete",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureReport {
    pub conserved_term: f64,
    pub two_dof_term: f64,
    pub multi_dof_term: f64,
    #[serde(rename = "mu_P")]
    pub mu_p: f64,
    #[serde(rename = "mu_NP")]
    pub mu_np: f64,
    pub mu_diff: f64,
    pub class_label: ClassLabel,
}

/// Split `ln P` into a conserved part and two dissipative buckets.
///
/// The conserved term is `Σ_j N_j − Σ (N_j − N_k) Δμ_jk / T` over conducting
/// edges, with `Δμ_jk = μ_j − μ_k + T ln g!`. A conducting dissipative edge
/// adds `N_j ΔQ_jk / T`, weighted by the occupancy of its `from` node, to the
/// multi-DOF bucket when either endpoint is branching and to the two-DOF
/// bucket otherwise.
pub fn measure(network: &Network) -> Result<MeasureReport, MeasureError> {
    network.ensure_valid()?;
    let t = network.temperature;
    let classes = network.node_classes();
    let ends = network.endpoint_indices()?;
    let mu: Vec<f64> = network
        .nodes
        .iter()
        .map(|n| n.gibbs_energy + t * n.occupancy.ln())
        .collect();

    let mut conserved: f64 = network.nodes.iter().map(|n| n.occupancy).sum();
    let mut two = 0.0;
    let mut multi = 0.0;
    for (edge, &(f, k)) in network.edges.iter().zip(&ends) {
        if !edge.is_conducting() {
            continue;
        }
        let (nf, nk) = (network.nodes[f].occupancy, network.nodes[k].occupancy);
        let dmu = mu[f] - mu[k] + t * edge.ln_degeneracy_factorial();
        conserved -= (nf - nk) * dmu / t;
        if edge.dissipation != 0.0 {
            let share = nf * edge.dissipation / t;
            let branching = [&edge.from, &edge.to]
                .iter()
                .any(|id| classes.get(id.as_str()) == Some(&NodeClass::Branching));
            if branching {
                multi += share;
            } else {
                two += share;
            }
        }
    }

    let mu_p = conserved + two;
    let mut report = MeasureReport {
        conserved_term: conserved,
        two_dof_term: two,
        multi_dof_term: multi,
        mu_p,
        mu_np: mu_p + multi,
        mu_diff: multi,
        class_label: ClassLabel::ReversibleIdle,
    };
    report.class_label = classify(&report);
    Ok(report)
}

pub fn classify(report: &MeasureReport) -> ClassLabel {
    match (report.two_dof_term != 0.0, report.multi_dof_term != 0.0) {
        (false, false) => ClassLabel::ReversibleIdle,
        (true, false) => ClassLabel::P,
        (false, true) => ClassLabel::NpComplete,
        (true, true) => ClassLabel::NP,
    }
}

pub fn separation(report: &MeasureReport) -> f64 {
    report.mu_diff
}

/// Relative entropy of two occupancy vectors after normalizing each to 1.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64, MeasureError> {
    let domain = |m: String| Err(MeasureError::Domain(m));
    if p.len() != q.len() {
        return domain(format!("length mismatch: {} vs {}", p.len(), q.len()));
    }
    for (name, v) in [("p", p), ("q", q)] {
        if let Some(x) = v.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return domain(format!("{name} has invalid entry {x}"));
        }
    }
    let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
    if sp <= 0.0 || sq <= 0.0 {
        return domain("distribution has zero total".into());
    }
    let mut d = 0.0;
    for (i, (&a, &b)) in p.iter().zip(q).enumerate() {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return domain(format!("q vanishes at index {i} where p is positive"));
        }
        let (a, b) = (a / sp, b / sq);
        d += a * (a / b).ln();
    }
    Ok(d.max(0.0))
}
