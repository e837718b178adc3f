use serde::{Deserialize, Serialize};

use super::graph::{distances, WeightedGraph};
use super::{cost_eq, ProblemError};

/// Upper bound on the number of edge subsets searched for budgets k ≥ 2.
pub const MAX_INTERDICTION_SUBSETS: u64 = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct InterdictionInstance {
    pub graph: WeightedGraph,
    pub source: usize,
    pub target: usize,
    pub budget: usize,
    /// Sorted, distinct edge indices that may be removed.
    pub removable: Vec<usize>,
}

/// Removed edges (sorted indices) and the shortest path left behind.
/// A `cost` of `None` means the target is cut off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterdictionResult {
    pub removed: Vec<usize>,
    pub cost: Option<f64>,
}

impl InterdictionResult {
    /// Cost with an unreachable target counted as `+∞`.
    pub fn value(&self) -> f64 {
        self.cost.unwrap_or(f64::INFINITY)
    }
}

impl InterdictionInstance {
    /// `removable = None` makes every edge removable.
    pub fn new(
        graph: WeightedGraph,
        source: &str,
        target: &str,
        budget: usize,
        removable: Option<Vec<usize>>,
    ) -> Result<Self, ProblemError> {
        let source = graph.vertex_index(source)?;
        let target = graph.vertex_index(target)?;
        if source == target {
            return Err(ProblemError::Domain("source and target coincide".into()));
        }
        let mut removable = removable.unwrap_or_else(|| (0..graph.edges().len()).collect());
        removable.sort_unstable();
        removable.dedup();
        if let Some(&e) = removable.iter().find(|&&e| e >= graph.edges().len()) {
            return Err(ProblemError::Domain(format!(
                "removable edge {e} does not exist"
            )));
        }
        if budget == 0 || budget > removable.len() {
            return Err(ProblemError::Domain(format!(
                "budget {budget} must lie in 1..={}",
                removable.len()
            )));
        }
        Ok(Self {
            graph,
            source,
            target,
            budget,
            removable,
        })
    }

    /// Shortest `source`–`target` cost with `removed` edges deleted.
    pub fn cost_without(&self, removed: &[usize]) -> f64 {
        let mut banned = vec![false; self.graph.edges().len()];
        for &e in removed {
            banned[e] = true;
        }
        distances(&self.graph.adjacency(&banned, false), self.source)[self.target]
    }

    fn result(&self, removed: Vec<usize>, value: f64) -> InterdictionResult {
        InterdictionResult {
            removed,
            cost: value.is_finite().then_some(value),
        }
    }
}

fn better(candidate: f64, incumbent: f64) -> bool {
    candidate > incumbent && !cost_eq(candidate, incumbent)
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut c: u64 = 1;
    for i in 0..k {
        c = c.saturating_mul((n - i) as u64) / (i as u64 + 1);
    }
    c
}

/// Remove `budget` edges so that the remaining shortest path is as long as
/// possible. A single edge is found by trying each in turn; larger budgets
/// search every subset of that size. Ties go to the lexicographically
/// smallest edge set.
pub fn interdict(instance: &InterdictionInstance) -> Result<InterdictionResult, ProblemError> {
    let (r, k) = (instance.removable.len(), instance.budget);
    if k == 1 {
        let mut best: Option<(usize, f64)> = None;
        for &e in &instance.removable {
            let c = instance.cost_without(&[e]);
            if best.is_none_or(|(_, b)| better(c, b)) {
                best = Some((e, c));
            }
        }
        let (e, c) = best.expect("budget is within the removable set");
        return Ok(instance.result(vec![e], c));
    }
    let count = binomial(r, k);
    if count > MAX_INTERDICTION_SUBSETS {
        return Err(ProblemError::TooLarge {
            what: "interdiction subset space",
            size: count as usize,
            limit: MAX_INTERDICTION_SUBSETS as usize,
        });
    }
    Ok(exhaustive(instance))
}

fn exhaustive(instance: &InterdictionInstance) -> InterdictionResult {
    let (r, k) = (instance.removable.len(), instance.budget);
    let mut pick: Vec<usize> = (0..k).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        let set: Vec<usize> = pick.iter().map(|&i| instance.removable[i]).collect();
        let c = instance.cost_without(&set);
        if best.as_ref().is_none_or(|(_, b)| better(c, *b)) {
            best = Some((set, c));
        }
        // next combination in lexicographic order
        let Some(i) = (0..k).rev().find(|&i| pick[i] < r - k + i) else {
            break;
        };
        pick[i] += 1;
        for j in i + 1..k {
            pick[j] = pick[j - 1] + 1;
        }
    }
    let (set, c) = best.expect("at least one subset");
    instance.result(set, c)
}

/// Brute force over every subset of size `budget`, without the size cap.
pub fn interdict_oracle(instance: &InterdictionInstance) -> InterdictionResult {
    exhaustive(instance)
}

/// Place interdicts one at a time, each the best single removal given the
/// ones already placed.
pub fn interdict_greedy(instance: &InterdictionInstance) -> InterdictionResult {
    let mut removed: Vec<usize> = Vec::new();
    let mut value = instance.cost_without(&[]);
    for _ in 0..instance.budget {
        let mut best: Option<(usize, f64)> = None;
        for &e in instance.removable.iter().filter(|e| !removed.contains(e)) {
            let mut trial = removed.clone();
            trial.push(e);
            let c = instance.cost_without(&trial);
            if best.is_none_or(|(_, b)| better(c, b)) {
                best = Some((e, c));
            }
        }
        let (e, c) = best.expect("budget is within the removable set");
        removed.push(e);
        value = c;
    }
    removed.sort_unstable();
    instance.result(removed, value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_edges() {
        let g = WeightedGraph::with_indices(2, &[(0, 1, 1.0), (0, 1, 5.0)], false).unwrap();
        let inst = InterdictionInstance::new(g, "0", "1", 1, None).unwrap();
        let r = interdict(&inst).unwrap();
        assert_eq!(r.removed, [0]);
        assert_eq!(r.cost, Some(5.0));
    }

    #[test]
    fn cutting_off_the_target_is_infinite() {
        let g = WeightedGraph::with_indices(2, &[(0, 1, 1.0), (0, 1, 5.0)], false).unwrap();
        let inst = InterdictionInstance::new(g, "0", "1", 2, None).unwrap();
        let r = interdict(&inst).unwrap();
        assert_eq!(r.removed, [0, 1]);
        assert_eq!(r.cost, None);
        assert_eq!(r.value(), f64::INFINITY);
    }

    #[test]
    fn invalid_instances() {
        let g = WeightedGraph::with_indices(2, &[(0, 1, 1.0)], false).unwrap();
        assert!(InterdictionInstance::new(g.clone(), "0", "0", 1, None).is_err());
        assert!(InterdictionInstance::new(g.clone(), "0", "1", 2, None).is_err());
        assert!(InterdictionInstance::new(g.clone(), "0", "1", 0, None).is_err());
        assert!(InterdictionInstance::new(g, "0", "1", 1, Some(vec![3])).is_err());
    }

    #[test]
    fn subset_cap() {
        let edges: Vec<(usize, usize, f64)> = (0..100).map(|_| (0, 1, 1.0)).collect();
        let g = WeightedGraph::with_indices(2, &edges, false).unwrap();
        let inst = InterdictionInstance::new(g, "0", "1", 4, None).unwrap();
        assert!(matches!(
            interdict(&inst),
            Err(ProblemError::TooLarge { .. })
        ));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(9, 2), 36);
        assert_eq!(binomial(100, 4), 3_921_225);
        assert_eq!(binomial(5, 5), 1);
    }
}
