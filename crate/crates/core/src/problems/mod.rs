//! Problem families with exact solvers, exhaustive oracles and greedy
//! heuristics.

mod graph;
mod interdiction;
mod sat;
mod tsp;

pub use graph::{
    shortest_path, sssp_oracle, GraphDoc, GraphEdge, GraphEdgeDoc, PathResult, WeightedGraph,
    SSSP_ORACLE_MAX_VERTICES,
};
pub use interdiction::{
    interdict, interdict_greedy, interdict_oracle, InterdictionInstance, InterdictionResult,
    MAX_INTERDICTION_SUBSETS,
};
pub use sat::{
    parse_dimacs, sat_classify, solve_2sat, solve_sat_bruteforce, to_dimacs, CnfFormula, CnfInput,
    SatClass, SatOutcome, BRUTE_FORCE_MAX_VARS,
};
pub use tsp::{
    tsp_exact, tsp_greedy_mepp, tsp_oracle, TspInstance, TspTour, TSP_EXACT_MAX_CITIES,
    TSP_ORACLE_MAX_CITIES,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{what} has size {size}, limit is {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
}

/// Relative tolerance under which two path or tour costs count as equal.
pub(crate) const COST_TOLERANCE: f64 = 1e-12;

pub(crate) fn cost_eq(a: f64, b: f64) -> bool {
    a == b
        || (a.is_finite()
            && b.is_finite()
            && (a - b).abs() <= COST_TOLERANCE * (1.0 + a.abs().max(b.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_costs_only_equal_themselves() {
        assert!(cost_eq(f64::INFINITY, f64::INFINITY));
        assert!(!cost_eq(f64::INFINITY, 10.0));
        assert!(cost_eq(1.0, 1.0 + 1e-15));
    }
}
