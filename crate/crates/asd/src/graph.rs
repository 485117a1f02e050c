//! Undirected graphs for side-observation environments: generators used by
//! the simulation suite, greedy covering heuristics, and a plain-text
//! edge-list format.
//!
//! The covering quantities matter because the smallest maximal independent
//! set and the clique cover number bracket how much structural information a
//! graph can leak per label. `estimate_smallest_mis` upper-bounds the former,
//! `greedy_clique_cover` upper-bounds the latter, and any independent set is
//! at most any clique cover, so the estimate never exceeds the cover size.

use rand::seq::SliceRandom;
use rand::{Rng, RngExt};

use crate::error::{Error, Result};

/// Hard cap on node ids accepted from untrusted edge-list text; adjacency is
/// dense in the node count, so an absurd id must not allocate unbounded
/// memory.
pub const MAX_NODES: usize = 1 << 24;

/// Simple undirected graph: no self-loops, no parallel edges, sorted
/// adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Graph on `n` nodes with no edges.
    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
        }
    }

    /// Build from an edge list; duplicates collapse, self-loops are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::IndexOutOfRange {
                    index: u.max(v),
                    len: n,
                });
            }
            if u == v {
                return Err(Error::InvalidCombination(format!("self-loop at node {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { adj })
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Parse edge-list text: one `u v` pair per line, 0-based ids, whitespace
    /// separated. Blank lines and lines starting with `#` are skipped. The
    /// node count is the largest id seen plus one.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_id = None::<usize>;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse = |tok: &str| -> Result<usize> {
                let id: usize = tok.parse().map_err(|_| Error::Parse {
                    file: "edge list".into(),
                    line: lineno + 1,
                    message: format!("{tok:?} is not a node id"),
                })?;
                if id >= MAX_NODES {
                    return Err(Error::Parse {
                        file: "edge list".into(),
                        line: lineno + 1,
                        message: format!("node id {id} exceeds the {MAX_NODES} limit"),
                    });
                }
                Ok(id)
            };
            let mut tokens = line.split_whitespace();
            let (u, v) = match (tokens.next(), tokens.next(), tokens.next()) {
                (Some(a), Some(b), None) => (parse(a)?, parse(b)?),
                _ => {
                    return Err(Error::Parse {
                        file: "edge list".into(),
                        line: lineno + 1,
                        message: "expected exactly two node ids".into(),
                    })
                }
            };
            if u == v {
                return Err(Error::Parse {
                    file: "edge list".into(),
                    line: lineno + 1,
                    message: format!("self-loop at node {u}"),
                });
            }
            max_id = Some(max_id.map_or(u.max(v), |m| m.max(u.max(v))));
            edges.push((u, v));
        }
        match max_id {
            Some(m) => Self::from_edges(m + 1, &edges),
            None => Ok(Self::empty(0)),
        }
    }

    /// Render as edge-list text, one `u v` line per edge with `u < v`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for u in 0..self.node_count() {
            for &v in &self.adj[u] {
                if u < v {
                    out.push_str(&format!("{u} {v}\n"));
                }
            }
        }
        out
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::OutOfRange {
            what: "edge probability",
            range: "[0, 1]",
            value: p,
        });
    }
    Ok(())
}

/// Erdos-Renyi graph: every unordered pair is an edge independently with
/// probability `p`.
pub fn gen_random<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    check_probability(p)?;
    let mut adj = vec![Vec::new(); n];
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < p {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    Ok(Graph { adj })
}

/// Complete graph on `n` nodes.
pub fn gen_complete(n: usize) -> Graph {
    let adj = (0..n)
        .map(|u| (0..n).filter(|&v| v != u).collect())
        .collect();
    Graph { adj }
}

/// Star-structured graph: the first `floor(hub_fraction * n)` nodes are hubs
/// adjacent to every other node (hubs included); the remaining nodes are
/// joined pairwise with probability `p`.
pub fn gen_star<R: Rng>(n: usize, p: f64, hub_fraction: f64, rng: &mut R) -> Result<Graph> {
    check_probability(p)?;
    if !(0.0..=1.0).contains(&hub_fraction) || !hub_fraction.is_finite() {
        return Err(Error::OutOfRange {
            what: "hub fraction",
            range: "[0, 1]",
            value: hub_fraction,
        });
    }
    let hubs = (hub_fraction * n as f64).floor() as usize;
    let mut adj = vec![Vec::new(); n];
    for u in 0..n {
        for v in (u + 1)..n {
            let touches_hub = u < hubs || v < hubs;
            if touches_hub || rng.random::<f64>() < p {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    Ok(Graph { adj })
}

/// Greedy maximal independent set along `order`: take each node whose
/// neighbors have all been skipped so far. `order` must be a permutation of
/// the nodes. The result is sorted.
pub fn greedy_mis(graph: &Graph, order: &[usize]) -> Result<Vec<usize>> {
    let n = graph.node_count();
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: order.len(),
        });
    }
    for &u in order {
        if u >= n || seen[u] {
            return Err(Error::InvalidCombination(format!(
                "order is not a permutation of 0..{n}"
            )));
        }
        seen[u] = true;
    }
    let mut blocked = vec![false; n];
    let mut taken = Vec::new();
    for &u in order {
        if blocked[u] {
            continue;
        }
        taken.push(u);
        for &v in graph.neighbors(u) {
            blocked[v] = true;
        }
    }
    taken.sort_unstable();
    Ok(taken)
}

/// Upper-bound estimate of the smallest maximal independent set size: the
/// minimum greedy size over the degree-descending order plus `trials` random
/// orders.
pub fn estimate_smallest_mis<R: Rng>(graph: &Graph, trials: usize, rng: &mut R) -> usize {
    let n = graph.node_count();
    if n == 0 {
        return 0;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&u| (std::cmp::Reverse(graph.degree(u)), u));
    let mut best = greedy_mis(graph, &order).expect("identity-derived order").len();
    for _ in 0..trials {
        order.shuffle(rng);
        best = best.min(greedy_mis(graph, &order).expect("shuffled order").len());
    }
    best
}

/// Partition the nodes into cliques by greedily coloring the complement
/// graph, largest complement degree first. Returns the cliques ordered by
/// color, each sorted.
pub fn greedy_clique_cover(graph: &Graph) -> Vec<Vec<usize>> {
    let n = graph.node_count();
    let mut order: Vec<usize> = (0..n).collect();
    // Complement degree is n - 1 - degree; sorting ascending by degree gives
    // descending complement degree.
    order.sort_by_key(|&u| (graph.degree(u), u));
    let mut color = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &u in &order {
        let mut used = vec![false; classes.len()];
        for v in 0..n {
            // v is a complement-neighbor of u iff they are distinct non-adjacent nodes.
            if v != u && color[v] != usize::MAX && !graph.has_edge(u, v) {
                used[color[v]] = true;
            }
        }
        let c = used.iter().position(|&b| !b).unwrap_or(classes.len());
        if c == classes.len() {
            classes.push(Vec::new());
        }
        color[u] = c;
        classes[c].push(u);
    }
    for class in &mut classes {
        class.sort_unstable();
    }
    classes
}
