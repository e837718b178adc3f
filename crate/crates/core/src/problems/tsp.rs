use serde::{Deserialize, Serialize};

use super::{cost_eq, ProblemError};

pub const TSP_EXACT_MAX_CITIES: usize = 18;
pub const TSP_ORACLE_MAX_CITIES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TspDoc", into = "TspDoc")]
pub struct TspInstance {
    distances: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TspDoc {
    distances: Vec<Vec<f64>>,
}

impl TryFrom<TspDoc> for TspInstance {
    type Error = ProblemError;
    fn try_from(doc: TspDoc) -> Result<Self, Self::Error> {
        TspInstance::new(doc.distances)
    }
}

impl From<TspInstance> for TspDoc {
    fn from(t: TspInstance) -> Self {
        TspDoc {
            distances: t.distances,
        }
    }
}

/// A closed tour starting at city 0; the return leg to 0 is implied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TspTour {
    pub tour: Vec<usize>,
    pub cost: f64,
}

impl TspInstance {
    pub fn new(distances: Vec<Vec<f64>>) -> Result<Self, ProblemError> {
        let n = distances.len();
        let bad = |m: String| Err(ProblemError::Domain(m));
        if n < 3 {
            return bad(format!("need at least 3 cities, got {n}"));
        }
        for (i, row) in distances.iter().enumerate() {
            if row.len() != n {
                return bad(format!("row {i} has {} entries, expected {n}", row.len()));
            }
            if row[i] != 0.0 {
                return bad(format!("diagonal entry {i} is {}", row[i]));
            }
            for (j, &d) in row.iter().enumerate() {
                if !(d >= 0.0 && d.is_finite()) {
                    return bad(format!("distance ({i},{j}) is {d}"));
                }
                if d != distances[j][i] {
                    return bad(format!("distance ({i},{j}) differs from ({j},{i})"));
                }
            }
        }
        Ok(Self { distances })
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances[i][j]
    }

    /// Cost of the closed tour, summed in visiting order.
    pub fn tour_cost(&self, tour: &[usize]) -> f64 {
        let mut cost = 0.0;
        for w in tour.windows(2) {
            cost += self.distances[w[0]][w[1]];
        }
        if let (Some(&last), Some(&first)) = (tour.last(), tour.first()) {
            cost += self.distances[last][first];
        }
        cost
    }
}

/// Held-Karp dynamic programme. Among optimal tours the lexicographically
/// smallest city sequence is returned.
pub fn tsp_exact(instance: &TspInstance) -> Result<TspTour, ProblemError> {
    let n = instance.len();
    if n > TSP_EXACT_MAX_CITIES {
        return Err(ProblemError::TooLarge {
            what: "TSP instance",
            size: n,
            limit: TSP_EXACT_MAX_CITIES,
        });
    }
    let d = &instance.distances;
    let full = (1usize << n) - 1;
    // rest[mask * n + j]: cheapest way to visit every city outside `mask`
    // from `j` and return to 0; `mask` holds 0 and j.
    let mut rest = vec![f64::INFINITY; (full + 1) * n];
    for j in 1..n {
        rest[full * n + j] = d[j][0];
    }
    for mask in (1..full).rev() {
        if mask & 1 == 0 {
            continue;
        }
        for j in 0..n {
            if mask & (1 << j) == 0 || (j == 0 && mask != 1) {
                continue;
            }
            let mut best = f64::INFINITY;
            for k in 1..n {
                if mask & (1 << k) == 0 {
                    best = best.min(d[j][k] + rest[(mask | 1 << k) * n + k]);
                }
            }
            rest[mask * n + j] = best;
        }
    }

    let mut tour = vec![0];
    let (mut mask, mut j) = (1usize, 0usize);
    while mask != full {
        let target = rest[mask * n + j];
        let k = (1..n)
            .find(|&k| {
                mask & (1 << k) == 0 && cost_eq(d[j][k] + rest[(mask | 1 << k) * n + k], target)
            })
            .expect("an optimal continuation exists");
        tour.push(k);
        mask |= 1 << k;
        j = k;
    }
    Ok(TspTour {
        cost: instance.tour_cost(&tour),
        tour,
    })
}

/// Every tour starting at city 0, in lexicographic order.
pub fn tsp_oracle(instance: &TspInstance) -> Result<TspTour, ProblemError> {
    let n = instance.len();
    if n > TSP_ORACLE_MAX_CITIES {
        return Err(ProblemError::TooLarge {
            what: "TSP instance",
            size: n,
            limit: TSP_ORACLE_MAX_CITIES,
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<TspTour> = None;
    loop {
        let cost = instance.tour_cost(&perm);
        if best
            .as_ref()
            .is_none_or(|b| cost < b.cost && !cost_eq(cost, b.cost))
        {
            best = Some(TspTour {
                tour: perm.clone(),
                cost,
            });
        }
        if !next_permutation(&mut perm[1..]) {
            break;
        }
    }
    Ok(best.expect("at least one tour"))
}

fn next_permutation(xs: &mut [usize]) -> bool {
    let Some(i) = (1..xs.len()).rev().find(|&i| xs[i - 1] < xs[i]) else {
        return false;
    };
    let j = (i..xs.len())
        .rev()
        .find(|&j| xs[j] > xs[i - 1])
        .expect("pivot has a successor");
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

/// Nearest-neighbour tour from city 0, ties to the smallest index.
pub fn tsp_greedy_mepp(instance: &TspInstance) -> TspTour {
    let n = instance.len();
    let mut visited = vec![false; n];
    let mut tour = vec![0];
    visited[0] = true;
    let mut here = 0;
    for _ in 1..n {
        let next = (0..n)
            .filter(|&k| !visited[k])
            .min_by(|&a, &b| instance.distances[here][a].total_cmp(&instance.distances[here][b]))
            .expect("an unvisited city remains");
        visited[next] = true;
        tour.push(next);
        here = next;
    }
    TspTour {
        cost: instance.tour_cost(&tour),
        tour,
    }
}
