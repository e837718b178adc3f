//! Flow-law integration with entropy and process-generator bookkeeping.
//!
//! Occupancy moves along every conducting edge at rate `σ ΔV / T`, from the
//! `from` node to the `to` node when the free energy `ΔV` is positive. The
//! process generator `L = Σ_edges σ (ΔV/T)²` is the entropy production rate
//! and decays towards zero at the steady state.
//!
//! Along a simulated trajectory entropy is tracked as a balance: it starts at
//! `ln P` of the initial state (see [`entropy`]) and every accepted step adds
//! the exact change of the system's free-energy entropy
//! `Σ_j N_j (1 − ln N_j − G_j/T)` plus the entropy carried out with the
//! dissipated quanta. To first order in `dt` the increment is `L dt`.

mod stability;
mod trajectory;

pub use stability::{perturb, stability_probe, StabilityReport};
pub use trajectory::{Snapshot, Termination, Trajectory};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Network, NetworkError};

/// Largest entropy decrease tolerated on an accepted step.
pub const ENTROPY_TOLERANCE: f64 = 1e-9;
/// Largest generator increase tolerated on an accepted step.
pub const GENERATOR_TOLERANCE: f64 = 1e-9;

const GROW_AFTER: usize = 10;
const GROW_FACTOR: f64 = 1.1;
/// Ulps of slack in the rounding bound on the generator.
const NOISE_ULPS: f64 = 32.0;
/// Below `dt_initial * MIN_DT_FRACTION` the step control gives up.
const MIN_DT_FRACTION: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("time step must be positive and finite, got {0}")]
    BadTimeStep(f64),
    #[error("step rejected: occupancy of `{node}` would become {value}")]
    StepRejected { node: String, value: f64 },
    #[error("numerical failure at step {step}: {reason}")]
    NumericalFailure { step: usize, reason: String },
    #[error("trajectory has {0} snapshot(s), at least 2 are needed")]
    TooShort(usize),
    #[error("network is not steady: max net flow {max_flow:e} exceeds {epsilon:e}")]
    NotSteady { max_flow: f64, epsilon: f64 },
    #[error("perturbation {perturbation} makes occupancy of `{node}` non-positive")]
    InvalidPerturbation { node: String, perturbation: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt_initial: f64,
    pub dt_max: f64,
    pub epsilon: f64,
    pub window: usize,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt_initial: 1e-3,
            dt_max: 0.5,
            epsilon: 1e-6,
            window: 100,
            max_steps: 1_000_000,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let err = |m: &str| Err(DynamicsError::Config(m.to_string()));
        if !(self.dt_initial > 0.0 && self.dt_initial.is_finite()) {
            return err("dt_initial must be positive");
        }
        if !(self.dt_max.is_finite() && self.dt_initial <= self.dt_max) {
            return err("dt_initial must not exceed dt_max");
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return err("epsilon must be positive");
        }
        if self.window < 2 {
            return err("window must be at least 2");
        }
        if self.max_steps < 1 {
            return err("max_steps must be at least 1");
        }
        Ok(())
    }
}

/// Network compiled to index form for repeated evaluation.
#[derive(Debug, Clone)]
pub(crate) struct System {
    temperature: f64,
    gibbs: Vec<f64>,
    ends: Vec<(usize, usize)>,
    conductance: Vec<f64>,
    /// `T ln(g!) − ΔQ`, the part of the free energy that is not a potential
    /// difference.
    offset: Vec<f64>,
}

impl System {
    pub(crate) fn new(network: &Network) -> Result<Self, DynamicsError> {
        network.ensure_valid()?;
        let t = network.temperature;
        Ok(Self {
            temperature: t,
            gibbs: network.nodes.iter().map(|n| n.gibbs_energy).collect(),
            ends: network.endpoint_indices()?,
            conductance: network.edges.iter().map(|e| e.conductance).collect(),
            offset: network
                .edges
                .iter()
                .map(|e| t * e.ln_degeneracy_factorial() - e.dissipation)
                .collect(),
        })
    }

    fn potentials(&self, occ: &[f64]) -> Vec<f64> {
        occ.iter()
            .zip(&self.gibbs)
            .map(|(&n, &g)| g + self.temperature * n.ln())
            .collect()
    }

    fn free_energies(&self, occ: &[f64]) -> Vec<f64> {
        let mu = self.potentials(occ);
        self.ends
            .iter()
            .zip(&self.offset)
            .map(|(&(f, t), &c)| mu[f] - mu[t] + c)
            .collect()
    }

    fn flows(&self, forces: &[f64]) -> Vec<f64> {
        forces
            .iter()
            .zip(&self.conductance)
            .map(|(&v, &s)| s * v / self.temperature)
            .collect()
    }

    fn node_rates(&self, flows: &[f64], nodes: usize) -> Vec<f64> {
        let mut rates = vec![0.0; nodes];
        for (&(f, t), &j) in self.ends.iter().zip(flows) {
            rates[f] -= j;
            rates[t] += j;
        }
        rates
    }

    fn generator(&self, forces: &[f64]) -> f64 {
        forces
            .iter()
            .zip(&self.conductance)
            .map(|(&v, &s)| {
                let x = v / self.temperature;
                s * x * x
            })
            .sum()
    }

    /// `ln P = Σ_j N_j (1 − Σ_k ΔV_jk / T)` over conducting edges.
    fn ln_p(&self, occ: &[f64], forces: &[f64]) -> f64 {
        let mut s: f64 = occ.iter().sum();
        for ((&(f, t), &v), &sigma) in self.ends.iter().zip(forces).zip(&self.conductance) {
            if sigma > 0.0 {
                s -= (occ[f] - occ[t]) * v / self.temperature;
            }
        }
        s
    }

    /// Rounding-error bound on the generator: each force carries an
    /// absolute error of a few ulps of the terms it is summed from.
    fn generator_noise(&self, occ: &[f64], forces: &[f64]) -> f64 {
        let t = self.temperature;
        let scale: f64 = self
            .ends
            .iter()
            .zip(forces)
            .zip(&self.conductance)
            .zip(&self.offset)
            .map(|(((&(f, k), &v), &s), &c)| {
                let mu = |j: usize| self.gibbs[j].abs() + t * occ[j].ln().abs() + t;
                s * (v / t).abs() * (mu(f) + mu(k) + c.abs()) / t
            })
            .sum();
        NOISE_ULPS * f64::EPSILON * scale
    }

    fn evaluate(&self, occ: &[f64]) -> State {
        let forces = self.free_energies(occ);
        let flows = self.flows(&forces);
        let rates = self.node_rates(&flows, occ.len());
        let generator = self.generator(&forces);
        let noise = self.generator_noise(occ, &forces);
        State {
            occupancies: occ.to_vec(),
            forces,
            flows,
            rates,
            generator,
            noise,
        }
    }
}

#[derive(Debug, Clone)]
struct State {
    occupancies: Vec<f64>,
    forces: Vec<f64>,
    flows: Vec<f64>,
    rates: Vec<f64>,
    generator: f64,
    noise: f64,
}

impl State {
    fn max_rate(&self) -> f64 {
        self.rates.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

enum Attempt {
    Accepted { next: State, entropy_gain: f64 },
    NonPositive { node: usize, value: f64 },
    NonFinite,
}

/// One explicit Euler step of size `dt` from `state`.
fn attempt(system: &System, state: &State, dt: f64) -> Attempt {
    let n = state.occupancies.len();
    let mut next = Vec::with_capacity(n);
    // Change of the system entropy beyond its linear part, written so that it
    // stays accurate for very large occupancies: for δ = ΔN_j this is
    // δ − (N+δ) ln(1 + δ/N) ≈ −δ²/(2N).
    let mut curvature = 0.0;
    for j in 0..n {
        let old = state.occupancies[j];
        let delta = dt * state.rates[j];
        let new = old + delta;
        if !new.is_finite() {
            return Attempt::NonFinite;
        }
        if new <= 0.0 {
            return Attempt::NonPositive {
                node: j,
                value: new,
            };
        }
        curvature += delta - new * (delta / old).ln_1p();
        next.push(new);
    }
    let next = system.evaluate(&next);
    let gain = dt * state.generator + curvature;
    if !gain.is_finite() || !next.generator.is_finite() {
        return Attempt::NonFinite;
    }
    Attempt::Accepted {
        next,
        entropy_gain: gain,
    }
}

/// `ln P` of the network state (Σ over nodes of `N_j (1 − Σ_k ΔV_jk / T)`).
pub fn entropy(network: &Network) -> Result<f64, DynamicsError> {
    let system = System::new(network)?;
    let occ = network.occupancies();
    Ok(system.ln_p(&occ, &system.free_energies(&occ)))
}

/// Process generator `L = Σ_edges σ (ΔV / T)²`.
pub fn generator(network: &Network) -> Result<f64, DynamicsError> {
    let system = System::new(network)?;
    Ok(system.generator(&system.free_energies(&network.occupancies())))
}

/// Per-edge transfer rates `σ ΔV / T`, positive from `from` to `to`.
pub fn edge_flows(network: &Network) -> Result<Vec<f64>, DynamicsError> {
    let system = System::new(network)?;
    Ok(system.flows(&system.free_energies(&network.occupancies())))
}

/// Net inflow rate at every node, in node order.
pub fn node_rates(network: &Network) -> Result<Vec<f64>, DynamicsError> {
    let system = System::new(network)?;
    Ok(system.evaluate(&network.occupancies()).rates)
}

/// Instantaneous rate of change of the generator, `−2 Σ_j (dN_j/dt)² / N_j`.
pub fn generator_rate(network: &Network) -> Result<f64, DynamicsError> {
    let rates = node_rates(network)?;
    Ok(-2.0
        * rates
            .iter()
            .zip(&network.nodes)
            .map(|(r, n)| r * r / n.occupancy)
            .sum::<f64>())
}

/// Advance the network by one explicit Euler step.
///
/// The returned snapshot describes the new state at time `dt`; its entropy
/// is `ln P` of the input plus the entropy gained during the step.
pub fn step(network: &Network, dt: f64) -> Result<(Network, Snapshot), DynamicsError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DynamicsError::BadTimeStep(dt));
    }
    let system = System::new(network)?;
    let state = system.evaluate(&network.occupancies());
    let s0 = system.ln_p(&state.occupancies, &state.forces);
    match attempt(&system, &state, dt) {
        Attempt::Accepted { next, entropy_gain } => {
            let snapshot = Snapshot {
                time: dt,
                occupancies: next.occupancies.clone(),
                entropy: s0 + entropy_gain,
                generator: next.generator,
                flows: next.flows,
            };
            Ok((network.with_occupancies(&next.occupancies), snapshot))
        }
        Attempt::NonPositive { node, value } => Err(DynamicsError::StepRejected {
            node: network.nodes[node].id.clone(),
            value,
        }),
        Attempt::NonFinite => Err(DynamicsError::NumericalFailure {
            step: 1,
            reason: "non-finite state".into(),
        }),
    }
}

/// Integrate the flow law with adaptive explicit Euler until an ε-steady
/// state or `max_steps` accepted steps.
///
/// A step is retried with half the time step when it would make an occupancy
/// non-positive, lower the entropy by more than [`ENTROPY_TOLERANCE`], or
/// raise the generator by more than its rounding error (never more than
/// [`GENERATOR_TOLERANCE`]). After ten
/// consecutive acceptances the step grows by 10 %, up to `dt_max`.
///
/// The run is steady once, over the last `window` snapshots, every entropy
/// value lies within `epsilon` of their mean and no node's net flow exceeds
/// `epsilon`.
pub fn simulate(network: &Network, config: &SimConfig) -> Result<Trajectory, DynamicsError> {
    config.validate()?;
    let system = System::new(network)?;
    let mut traj = Trajectory::new(
        *config,
        network.nodes.iter().map(|n| n.id.clone()).collect(),
        network.edges.iter().map(|e| e.id()).collect(),
    );

    let mut state = system.evaluate(&network.occupancies());
    let mut entropy = system.ln_p(&state.occupancies, &state.forces);
    let mut time = 0.0;
    traj.push(
        time,
        entropy,
        state.generator,
        &state.occupancies,
        &state.flows,
    );

    // consecutive snapshots (ending at the latest) with all net flows ≤ ε
    let mut quiet = usize::from(state.max_rate() <= config.epsilon);
    let mut dt = config.dt_initial;
    let min_dt = config.dt_initial * MIN_DT_FRACTION;
    let mut streak = 0;
    let mut accepted = 0;

    while accepted < config.max_steps {
        match attempt(&system, &state, dt) {
            Attempt::NonFinite => {
                return Err(DynamicsError::NumericalFailure {
                    step: accepted + 1,
                    reason: format!("non-finite value with dt = {dt:e}"),
                })
            }
            Attempt::NonPositive { .. } => {}
            Attempt::Accepted { next, entropy_gain } => {
                // Any growth beyond rounding means dt is past the stability
                // limit of the stiffest mode.
                let growth = next.generator - state.generator;
                let contracting = growth <= GENERATOR_TOLERANCE.min(state.noise + next.noise);
                if entropy_gain >= -ENTROPY_TOLERANCE && contracting {
                    time += dt;
                    entropy += entropy_gain;
                    state = next;
                    accepted += 1;
                    traj.push(
                        time,
                        entropy,
                        state.generator,
                        &state.occupancies,
                        &state.flows,
                    );
                    quiet = if state.max_rate() <= config.epsilon {
                        quiet + 1
                    } else {
                        0
                    };
                    if quiet >= config.window && entropy_settled(traj.entropies(), config) {
                        traj.terminated = Termination::Steady;
                        return Ok(traj);
                    }
                    streak += 1;
                    if streak == GROW_AFTER {
                        streak = 0;
                        dt = (dt * GROW_FACTOR).min(config.dt_max);
                    }
                    continue;
                }
            }
        }
        traj.rejected_steps += 1;
        streak = 0;
        dt *= 0.5;
        if dt < min_dt {
            return Err(DynamicsError::NumericalFailure {
                step: accepted + 1,
                reason: format!("time step underflow (dt = {dt:e})"),
            });
        }
    }
    traj.terminated = Termination::MaxSteps;
    Ok(traj)
}

fn entropy_settled(entropies: &[f64], config: &SimConfig) -> bool {
    let w = &entropies[entropies.len() - config.window..];
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    w.iter().all(|s| (s - mean).abs() <= config.epsilon)
}

/// Successive generator differences `L_{t+1} − L_t`.
pub fn generator_delta(trajectory: &Trajectory) -> Result<Vec<f64>, DynamicsError> {
    let l = trajectory.generators();
    if l.len() < 2 {
        return Err(DynamicsError::TooShort(l.len()));
    }
    Ok(l.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Whether every node's net inflow `|Σ_k σ_jk ΔV_jk / T|` is at most
/// `epsilon`. An invalid network never passes.
pub fn conserved_current_check(network: &Network, epsilon: f64) -> bool {
    match node_rates(network) {
        Ok(rates) => rates.iter().all(|r| r.abs() <= epsilon),
        Err(_) => false,
    }
}

/// Largest absolute net inflow over all nodes.
pub fn max_net_flow(network: &Network) -> Result<f64, DynamicsError> {
    Ok(node_rates(network)?
        .iter()
        .fold(0.0, |m: f64, r| m.max(r.abs())))
}
