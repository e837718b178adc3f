use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{cost_eq, ProblemError};

pub const SSSP_ORACLE_MAX_VERTICES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// Graph over named vertices. Vertex order is the order of `vertices`, and
/// it is the order used by every tie-break. Parallel edges are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    vertices: Vec<String>,
    edges: Vec<GraphEdge>,
    directed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphEdgeDoc {
    pub from: String,
    pub to: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<GraphEdgeDoc>,
    #[serde(default)]
    pub directed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub cost: f64,
    pub path: Vec<String>,
}

impl WeightedGraph {
    pub fn new(
        vertices: Vec<String>,
        edges: Vec<GraphEdge>,
        directed: bool,
    ) -> Result<Self, ProblemError> {
        let mut sorted = vertices.clone();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(ProblemError::Domain(format!("duplicate vertex `{}`", w[0])));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.from >= vertices.len() || e.to >= vertices.len() {
                return Err(ProblemError::Domain(format!(
                    "edge {i} references a missing vertex"
                )));
            }
            if !(e.weight >= 0.0 && e.weight.is_finite()) {
                return Err(ProblemError::Domain(format!(
                    "edge {i} has weight {}, weights must be non-negative",
                    e.weight
                )));
            }
        }
        Ok(Self {
            vertices,
            edges,
            directed,
        })
    }

    /// Vertices named `"0"`, `"1"`, … with edges given by index.
    pub fn with_indices(
        n: usize,
        edges: &[(usize, usize, f64)],
        directed: bool,
    ) -> Result<Self, ProblemError> {
        Self::new(
            (0..n).map(|i| i.to_string()).collect(),
            edges
                .iter()
                .map(|&(from, to, weight)| GraphEdge { from, to, weight })
                .collect(),
            directed,
        )
    }

    pub fn from_doc(doc: &GraphDoc) -> Result<Self, ProblemError> {
        let find = |name: &str| {
            doc.vertices
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| ProblemError::UnknownVertex(name.to_string()))
        };
        let edges = doc
            .edges
            .iter()
            .map(|e| {
                Ok(GraphEdge {
                    from: find(&e.from)?,
                    to: find(&e.to)?,
                    weight: e.weight,
                })
            })
            .collect::<Result<Vec<_>, ProblemError>>()?;
        Self::new(doc.vertices.clone(), edges, doc.directed)
    }

    pub fn to_doc(&self) -> GraphDoc {
        GraphDoc {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| GraphEdgeDoc {
                    from: self.vertices[e.from].clone(),
                    to: self.vertices[e.to].clone(),
                    weight: e.weight,
                })
                .collect(),
            directed: self.directed,
        }
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn vertex_index(&self, name: &str) -> Result<usize, ProblemError> {
        self.vertices
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| ProblemError::UnknownVertex(name.to_string()))
    }

    /// Outgoing `(neighbour, weight)` lists, sorted by neighbour, skipping
    /// banned edges. With `reverse`, arcs of a directed graph are flipped.
    pub(crate) fn adjacency(&self, banned: &[bool], reverse: bool) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            if banned.get(i).copied().unwrap_or(false) {
                continue;
            }
            let (a, b) = if reverse {
                (e.to, e.from)
            } else {
                (e.from, e.to)
            };
            adj[a].push((b, e.weight));
            if !self.directed && a != b {
                adj[b].push((a, e.weight));
            }
        }
        for list in &mut adj {
            list.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        }
        adj
    }

    fn names(&self, path: &[usize]) -> Vec<String> {
        path.iter().map(|&v| self.vertices[v].clone()).collect()
    }

    fn path_cost(adj: &[Vec<(usize, f64)>], path: &[usize]) -> f64 {
        path.windows(2)
            .map(|w| {
                adj[w[0]]
                    .iter()
                    .filter(|(v, _)| *v == w[1])
                    .map(|&(_, c)| c)
                    .fold(f64::INFINITY, f64::min)
            })
            .sum()
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra distances from `source` over `adj`.
pub(crate) fn distances(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry(0.0, source));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Entry(nd, v));
            }
        }
    }
    dist
}

/// Cheapest path from `s` to `t`; `None` when `t` is unreachable.
///
/// Among paths of equal cost the one with the lexicographically smallest
/// sequence of vertex indices is returned. Distances to `t` come from
/// Dijkstra on the reversed graph; the path is then grown from `s` one
/// vertex at a time, taking the smallest neighbour that stays on a cheapest
/// route to `t` without revisiting a vertex.
pub fn shortest_path(
    graph: &WeightedGraph,
    s: &str,
    t: &str,
) -> Result<Option<PathResult>, ProblemError> {
    let (s, t) = (graph.vertex_index(s)?, graph.vertex_index(t)?);
    let adj = graph.adjacency(&[], false);
    let to_t = distances(&graph.adjacency(&[], true), t);
    if to_t[s].is_infinite() {
        return Ok(None);
    }

    let n = adj.len();
    let mut visited = vec![false; n];
    let mut path = vec![s];
    visited[s] = true;
    let mut u = s;
    while u != t {
        let next = adj[u]
            .iter()
            .filter(|&&(v, w)| !visited[v] && cost_eq(w + to_t[v], to_t[u]))
            .map(|&(v, _)| v)
            .find(|&v| tight_reaches(&adj, &to_t, &visited, v, t))
            .expect("a cheapest continuation exists");
        visited[next] = true;
        path.push(next);
        u = next;
    }
    Ok(Some(PathResult {
        cost: WeightedGraph::path_cost(&adj, &path),
        path: graph.names(&path),
    }))
}

/// Whether `t` is reachable from `v` along cheapest-route edges while
/// avoiding `visited`.
fn tight_reaches(
    adj: &[Vec<(usize, f64)>],
    to_t: &[f64],
    visited: &[bool],
    v: usize,
    t: usize,
) -> bool {
    let mut seen = visited.to_vec();
    let mut stack = vec![v];
    seen[v] = true;
    while let Some(u) = stack.pop() {
        if u == t {
            return true;
        }
        for &(x, w) in &adj[u] {
            if !seen[x] && cost_eq(w + to_t[x], to_t[u]) {
                seen[x] = true;
                stack.push(x);
            }
        }
    }
    false
}

/// Exhaustive search over all simple paths, for graphs of at most
/// [`SSSP_ORACLE_MAX_VERTICES`] vertices. Same tie-break as
/// [`shortest_path`].
pub fn sssp_oracle(
    graph: &WeightedGraph,
    s: &str,
    t: &str,
) -> Result<Option<PathResult>, ProblemError> {
    let n = graph.vertices.len();
    if n > SSSP_ORACLE_MAX_VERTICES {
        return Err(ProblemError::TooLarge {
            what: "graph",
            size: n,
            limit: SSSP_ORACLE_MAX_VERTICES,
        });
    }
    let (s, t) = (graph.vertex_index(s)?, graph.vertex_index(t)?);
    let adj = graph.adjacency(&[], false);

    // simple paths in lexicographic order of their vertex sequences
    let mut found: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut path = vec![s];
    let mut on_path = vec![false; n];
    on_path[s] = true;
    enumerate(&adj, t, &mut path, &mut on_path, &mut found);

    let Some(best) = found.iter().map(|(c, _)| *c).reduce(f64::min) else {
        return Ok(None);
    };
    let (cost, path) = found
        .into_iter()
        .find(|(c, _)| cost_eq(*c, best))
        .expect("minimum is attained");
    Ok(Some(PathResult {
        cost,
        path: graph.names(&path),
    }))
}

fn enumerate(
    adj: &[Vec<(usize, f64)>],
    t: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    found: &mut Vec<(f64, Vec<usize>)>,
) {
    let u = *path.last().expect("path starts at the source");
    if u == t {
        found.push((WeightedGraph::path_cost(adj, path), path.clone()));
        return;
    }
    let mut last = usize::MAX;
    for &(v, _) in &adj[u] {
        if v == last || on_path[v] {
            continue;
        }
        last = v;
        on_path[v] = true;
        path.push(v);
        enumerate(adj, t, path, on_path, found);
        path.pop();
        on_path[v] = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_equals_target() {
        let g = WeightedGraph::with_indices(2, &[(0, 1, 1.0)], false).unwrap();
        let r = shortest_path(&g, "0", "0").unwrap().unwrap();
        assert_eq!((r.cost, r.path), (0.0, vec!["0".to_string()]));
        assert_eq!(sssp_oracle(&g, "0", "0").unwrap().unwrap().cost, 0.0);
    }

    #[test]
    fn detour_beats_direct_edge() {
        let g = WeightedGraph::new(
            vec!["s".into(), "m".into(), "t".into()],
            vec![
                GraphEdge {
                    from: 0,
                    to: 1,
                    weight: 1.0,
                },
                GraphEdge {
                    from: 1,
                    to: 2,
                    weight: 1.0,
                },
                GraphEdge {
                    from: 0,
                    to: 2,
                    weight: 3.0,
                },
            ],
            false,
        )
        .unwrap();
        let r = shortest_path(&g, "s", "t").unwrap().unwrap();
        assert_eq!(r.cost, 2.0);
        assert_eq!(r.path, ["s", "m", "t"]);
    }

    #[test]
    fn disconnected_pair_is_unreachable() {
        let g = WeightedGraph::with_indices(3, &[(0, 1, 1.0)], false).unwrap();
        assert_eq!(shortest_path(&g, "0", "2").unwrap(), None);
        assert_eq!(sssp_oracle(&g, "0", "2").unwrap(), None);
    }

    #[test]
    fn directed_edges_are_one_way() {
        let g = WeightedGraph::with_indices(2, &[(1, 0, 1.0)], true).unwrap();
        assert_eq!(shortest_path(&g, "0", "1").unwrap(), None);
        assert_eq!(shortest_path(&g, "1", "0").unwrap().unwrap().cost, 1.0);
    }

    #[test]
    fn ties_prefer_smaller_vertex_sequence() {
        // 0-2-3 and 0-1-3 both cost 2
        let g = WeightedGraph::with_indices(
            4,
            &[(0, 2, 1.0), (2, 3, 1.0), (0, 1, 1.0), (1, 3, 1.0)],
            false,
        )
        .unwrap();
        assert_eq!(
            shortest_path(&g, "0", "3").unwrap().unwrap().path,
            ["0", "1", "3"]
        );
        assert_eq!(
            sssp_oracle(&g, "0", "3").unwrap().unwrap().path,
            ["0", "1", "3"]
        );
    }

    #[test]
    fn zero_weight_cycle_does_not_trap_the_walk() {
        // 0-1-2 is a zero-weight triangle; only 2 reaches 3
        let g = WeightedGraph::with_indices(
            4,
            &[(0, 1, 0.0), (1, 2, 0.0), (2, 0, 0.0), (2, 3, 1.0)],
            false,
        )
        .unwrap();
        let r = shortest_path(&g, "0", "3").unwrap().unwrap();
        assert_eq!(r.path, ["0", "1", "2", "3"]);
        assert_eq!(r, sssp_oracle(&g, "0", "3").unwrap().unwrap());
    }

    #[test]
    fn negative_weight_is_rejected() {
        assert!(matches!(
            WeightedGraph::with_indices(2, &[(0, 1, -1.0)], false),
            Err(ProblemError::Domain(_))
        ));
    }

    #[test]
    fn oracle_size_limit() {
        let g = WeightedGraph::with_indices(13, &[], false).unwrap();
        assert!(matches!(
            sssp_oracle(&g, "0", "1"),
            Err(ProblemError::TooLarge { .. })
        ));
    }
}
