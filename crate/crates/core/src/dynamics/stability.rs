use serde::{Deserialize, Serialize};

use super::{generator, max_net_flow, simulate, DynamicsError, SimConfig, Termination};
use crate::network::Network;

/// Re-simulation after a perturbation stops at `epsilon * RETURN_REFINEMENT`,
/// so that the return test at `epsilon` is not limited by the stopping rule.
const RETURN_REFINEMENT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityReport {
    /// The perturbed system relaxed back to within `epsilon` of every
    /// original steady occupancy.
    pub returned: bool,
    /// Entropy of the steady state minus entropy of the perturbed state.
    pub entropy_drop: f64,
    /// Process generator right after the perturbation.
    pub initial_generator: f64,
}

/// Displace the occupancies of every conducting component with alternating
/// signs, `N_j (1 ± δ)` in node order within the component, then rescale the
/// component so its total occupancy is unchanged.
pub fn perturb(network: &Network, relative: f64) -> Result<Network, DynamicsError> {
    network.ensure_valid()?;
    let mut occ = network.occupancies();
    for comp in network.components()? {
        let before: f64 = comp.iter().map(|&j| occ[j]).sum();
        for (k, &j) in comp.iter().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let factor = 1.0 + sign * relative;
            if !(factor > 0.0 && factor.is_finite()) {
                return Err(DynamicsError::InvalidPerturbation {
                    node: network.nodes[j].id.clone(),
                    perturbation: relative,
                });
            }
            occ[j] *= factor;
        }
        let after: f64 = comp.iter().map(|&j| occ[j]).sum();
        let scale = before / after;
        for &j in &comp {
            occ[j] *= scale;
        }
    }
    Ok(network.with_occupancies(&occ))
}

/// Perturb a steady network and check that it relaxes back.
///
/// The entropy drop is the relative entropy of the perturbed occupancies with
/// respect to the steady ones, `Σ_j [p_j ln(p_j / q_j) − p_j + q_j]`, which is
/// the loss of system-plus-surroundings entropy when component totals are
/// held fixed. It is zero only for an unperturbed state.
pub fn stability_probe(
    network_at_steady: &Network,
    relative_perturbation: f64,
    config: &SimConfig,
) -> Result<StabilityReport, DynamicsError> {
    config.validate()?;
    let max_flow = max_net_flow(network_at_steady)?;
    if max_flow > config.epsilon {
        return Err(DynamicsError::NotSteady {
            max_flow,
            epsilon: config.epsilon,
        });
    }
    let perturbed = perturb(network_at_steady, relative_perturbation)?;
    let steady = network_at_steady.occupancies();
    let moved = perturbed.occupancies();

    let entropy_drop = moved
        .iter()
        .zip(&steady)
        .map(|(&p, &q)| p * (p / q).ln() - p + q)
        .sum::<f64>();
    let initial_generator = generator(&perturbed)?;

    let refined = SimConfig {
        epsilon: config.epsilon * RETURN_REFINEMENT,
        ..*config
    };
    let traj = simulate(&perturbed, &refined)?;
    let last = traj.last().expect("trajectory holds the initial snapshot");
    let returned = traj.terminated == Termination::Steady
        && last
            .occupancies
            .iter()
            .zip(&steady)
            .all(|(a, b)| (a - b).abs() <= config.epsilon);

    Ok(StabilityReport {
        returned,
        entropy_drop,
        initial_generator,
    })
}
