use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected agent graph with implicit self-loops and cluster labels.
///
/// Agents are 0-based internally; the text file format and all user facing
/// reports are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    /// Sorted neighbor lists, each containing the agent itself.
    neighbors: Vec<Vec<usize>>,
    adjacency: Vec<bool>,
    cluster: Vec<u32>,
}

impl Graph {
    /// Builds a graph from 0-based undirected edges. Duplicate edges are merged.
    pub fn new(agents: usize, edges: &[(usize, usize)], cluster: Vec<u32>) -> Result<Self> {
        if agents == 0 {
            return Err(Error::InvalidGraph("graph has no agents".into()));
        }
        if cluster.len() != agents {
            return Err(Error::InvalidGraph(format!(
                "{} cluster labels for {agents} agents",
                cluster.len()
            )));
        }
        if let Some(k) = cluster.iter().position(|&c| c == 0) {
            return Err(Error::InvalidGraph(format!(
                "agent {} has cluster label 0; labels are positive",
                k + 1
            )));
        }
        let mut adjacency = vec![false; agents * agents];
        for k in 0..agents {
            adjacency[k * agents + k] = true;
        }
        for &(k, l) in edges {
            if k >= agents || l >= agents {
                return Err(Error::InvalidGraph(format!(
                    "edge {}-{} references an agent outside 1..{agents}",
                    k + 1,
                    l + 1
                )));
            }
            if k == l {
                return Err(Error::InvalidGraph(format!(
                    "explicit self-loop on agent {}",
                    k + 1
                )));
            }
            adjacency[k * agents + l] = true;
            adjacency[l * agents + k] = true;
        }
        let neighbors = (0..agents)
            .map(|k| (0..agents).filter(|&l| adjacency[k * agents + l]).collect())
            .collect();
        Ok(Graph {
            neighbors,
            adjacency,
            cluster,
        })
    }

    pub fn len(&self) -> usize {
        self.cluster.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cluster.is_empty()
    }

    /// The neighborhood of `k`, including `k`.
    pub fn neighbors(&self, k: usize) -> &[usize] {
        &self.neighbors[k]
    }

    pub fn degree(&self, k: usize) -> usize {
        self.neighbors[k].len()
    }

    pub fn is_adjacent(&self, k: usize, l: usize) -> bool {
        self.adjacency[k * self.len() + l]
    }

    pub fn cluster(&self, k: usize) -> u32 {
        self.cluster[k]
    }

    pub fn clusters(&self) -> &[u32] {
        &self.cluster
    }

    pub fn cluster_labels(&self) -> BTreeSet<u32> {
        self.cluster.iter().copied().collect()
    }

    /// Neighbors of `k` sharing its cluster, including `k`.
    pub fn effective_neighbors(&self, k: usize) -> Vec<usize> {
        self.neighbors[k]
            .iter()
            .copied()
            .filter(|&l| self.cluster[l] == self.cluster[k])
            .collect()
    }

    /// Undirected edges `(k, l)` with `k < l`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(k, ns)| ns.iter().filter(move |&&l| l > k).map(move |&l| (k, l)))
    }

    pub fn components(&self) -> usize {
        let mut seen = vec![false; self.len()];
        let mut count = 0;
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(k) = stack.pop() {
                for &l in &self.neighbors[k] {
                    if !seen[l] {
                        seen[l] = true;
                        stack.push(l);
                    }
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.components() == 1
    }

    /// Renders the plain-text graph format (`S`, `C`, `E` lines, 1-based).
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        writeln!(out, "S {}", self.len()).unwrap();
        for (k, c) in self.cluster.iter().enumerate() {
            writeln!(out, "C {} {}", k + 1, c).unwrap();
        }
        for (k, l) in self.edges() {
            writeln!(out, "E {} {}", k + 1, l + 1).unwrap();
        }
        out
    }

    /// Parses the plain-text graph format. `#` starts a comment.
    pub fn parse_file(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::GraphFile { line, message };
        let mut agents: Option<usize> = None;
        let mut cluster: Vec<Option<u32>> = Vec::new();
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let parse = |s: &str| -> Result<usize> {
                s.parse::<usize>()
                    .map_err(|_| err(line_no, format!("expected a positive integer, got `{s}`")))
            };
            let index = |s: &str, n: usize| -> Result<usize> {
                let v = parse(s)?;
                if v == 0 || v > n {
                    return Err(err(line_no, format!("agent index {v} outside 1..{n}")));
                }
                Ok(v - 1)
            };
            match (fields[0], agents) {
                ("S", None) if fields.len() == 2 => {
                    let n = parse(fields[1])?;
                    if n == 0 {
                        return Err(err(line_no, "agent count must be positive".into()));
                    }
                    agents = Some(n);
                    cluster = vec![None; n];
                }
                ("S", _) => return Err(err(line_no, "unexpected `S` line".into())),
                (_, None) => return Err(err(line_no, "first line must be `S <count>`".into())),
                ("C", Some(n)) if fields.len() == 3 => {
                    let k = index(fields[1], n)?;
                    let label = parse(fields[2])?;
                    if label == 0 {
                        return Err(err(line_no, "cluster labels are positive".into()));
                    }
                    if cluster[k].replace(label as u32).is_some() {
                        return Err(err(line_no, format!("agent {} labelled twice", k + 1)));
                    }
                }
                ("E", Some(n)) if fields.len() == 3 => {
                    let k = index(fields[1], n)?;
                    let l = index(fields[2], n)?;
                    if k == l {
                        return Err(err(line_no, "self-loops are implied and must be omitted".into()));
                    }
                    edges.push((k, l));
                }
                _ => return Err(err(line_no, format!("malformed line `{content}`"))),
            }
        }
        let n = agents.ok_or_else(|| err(0, "missing `S <count>` line".into()))?;
        let labels = cluster
            .into_iter()
            .enumerate()
            .map(|(k, c)| c.ok_or_else(|| err(0, format!("agent {} has no `C` line", k + 1))))
            .collect::<Result<Vec<_>>>()?;
        Graph::new(n, &edges, labels)
    }
}

/// Cluster assignment for randomly placed agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum GeometricClusters {
    /// Everyone in cluster 1.
    Single,
    /// Agents with `x < threshold` in cluster 1, the rest in cluster 2.
    SplitX { threshold: f64 },
}

fn default_true() -> bool {
    true
}

/// Declarative graph description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    /// 1-based edges and one label per agent.
    EdgeList {
        agents: usize,
        edges: Vec<(usize, usize)>,
        clusters: Vec<u32>,
    },
    /// Agent 1 is the hub, agents `2..=ring_size + 1` form the ring.
    RingWithHub {
        ring_size: usize,
        hub_cluster: u32,
        ring_cluster: u32,
        /// Cyclic label pattern for ring agents; overrides `ring_cluster`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ring_pattern: Option<Vec<u32>>,
        /// Connect each ring agent to its two ring neighbors.
        #[serde(default = "default_true")]
        ring_edges: bool,
    },
    /// Uniform points in the unit square joined when closer than `radius`.
    RandomGeometric {
        agents: usize,
        radius: f64,
        seed: u64,
        clusters: GeometricClusters,
    },
    /// Every pair of agents adjacent, single cluster.
    Complete { agents: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphWarning {
    Disconnected { components: usize },
}

impl std::fmt::Display for GraphWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GraphWarning::Disconnected { components } => {
                write!(f, "graph is disconnected ({components} components)")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuiltGraph {
    pub graph: Graph,
    pub warnings: Vec<GraphWarning>,
}

pub fn build_graph(spec: &GraphSpec) -> Result<BuiltGraph> {
    let graph = match spec {
        GraphSpec::EdgeList {
            agents,
            edges,
            clusters,
        } => {
            let zero_based = edges
                .iter()
                .map(|&(k, l)| {
                    if k == 0 || l == 0 {
                        Err(Error::InvalidGraph(format!(
                            "edge {k}-{l}: agent indices are 1-based"
                        )))
                    } else {
                        Ok((k - 1, l - 1))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Graph::new(*agents, &zero_based, clusters.clone())?
        }
        GraphSpec::RingWithHub {
            ring_size,
            hub_cluster,
            ring_cluster,
            ring_pattern,
            ring_edges,
        } => {
            let n = *ring_size;
            if n == 0 {
                return Err(Error::InvalidGraph("ring_size must be positive".into()));
            }
            let mut clusters = vec![*hub_cluster];
            match ring_pattern {
                Some(pattern) if pattern.is_empty() => {
                    return Err(Error::InvalidGraph("ring_pattern is empty".into()))
                }
                Some(pattern) => clusters.extend((0..n).map(|i| pattern[i % pattern.len()])),
                None => clusters.extend(std::iter::repeat_n(*ring_cluster, n)),
            }
            let mut edges: Vec<(usize, usize)> = (1..=n).map(|i| (0, i)).collect();
            if *ring_edges && n >= 2 {
                for i in 0..n {
                    let a = 1 + i;
                    let b = 1 + (i + 1) % n;
                    if a != b {
                        edges.push((a, b));
                    }
                }
            }
            Graph::new(n + 1, &edges, clusters)?
        }
        GraphSpec::RandomGeometric {
            agents,
            radius,
            seed,
            clusters,
        } => {
            if radius.is_nan() || *radius < 0.0 {
                return Err(Error::InvalidGraph("radius must be nonnegative".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let points: Vec<(f64, f64)> = (0..*agents)
                .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
                .collect();
            let mut edges = Vec::new();
            for k in 0..points.len() {
                for l in k + 1..points.len() {
                    let dx = points[k].0 - points[l].0;
                    let dy = points[k].1 - points[l].1;
                    if (dx * dx + dy * dy).sqrt() <= *radius {
                        edges.push((k, l));
                    }
                }
            }
            let labels = points
                .iter()
                .map(|&(x, _)| match clusters {
                    GeometricClusters::Single => 1,
                    GeometricClusters::SplitX { threshold } => {
                        if x < *threshold {
                            1
                        } else {
                            2
                        }
                    }
                })
                .collect();
            Graph::new(*agents, &edges, labels)?
        }
        GraphSpec::Complete { agents } => {
            let edges: Vec<_> = (0..*agents)
                .flat_map(|k| (k + 1..*agents).map(move |l| (k, l)))
                .collect();
            Graph::new(*agents, &edges, vec![1; *agents])?
        }
    };
    let components = graph.components();
    let warnings = if components > 1 {
        vec![GraphWarning::Disconnected { components }]
    } else {
        Vec::new()
    };
    Ok(BuiltGraph { graph, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_with_hub_degrees() {
        let built = build_graph(&GraphSpec::RingWithHub {
            ring_size: 29,
            hub_cluster: 1,
            ring_cluster: 2,
            ring_pattern: None,
            ring_edges: true,
        })
        .unwrap();
        let g = built.graph;
        assert!(built.warnings.is_empty());
        assert_eq!(g.len(), 30);
        assert_eq!(g.degree(0), 30);
        for k in 1..30 {
            assert_eq!(g.degree(k), 4, "ring agent {k}");
            assert_eq!(g.cluster(k), 2);
        }
        assert_eq!(g.effective_neighbors(0), vec![0]);
    }

    #[test]
    fn ring_without_ring_edges() {
        let g = build_graph(&GraphSpec::RingWithHub {
            ring_size: 5,
            hub_cluster: 1,
            ring_cluster: 2,
            ring_pattern: Some(vec![1, 2]),
            ring_edges: false,
        })
        .unwrap()
        .graph;
        assert_eq!(g.degree(1), 2);
        assert_eq!(g.clusters(), &[1, 1, 2, 1, 2, 1]);
    }

    #[test]
    fn edge_list_pair() {
        let g = build_graph(&GraphSpec::EdgeList {
            agents: 2,
            edges: vec![(1, 2)],
            clusters: vec![1, 1],
        })
        .unwrap()
        .graph;
        assert_eq!(g.neighbors(0), &[0, 1]);
        assert_eq!(g.neighbors(1), &[0, 1]);
    }

    #[test]
    fn malformed_edge_lists_rejected() {
        let bad = |edges: Vec<(usize, usize)>| {
            build_graph(&GraphSpec::EdgeList {
                agents: 3,
                edges,
                clusters: vec![1, 1, 1],
            })
            .is_err()
        };
        assert!(bad(vec![(1, 4)]));
        assert!(bad(vec![(0, 2)]));
        assert!(bad(vec![(2, 2)]));
    }

    #[test]
    fn disconnected_flagged() {
        let built = build_graph(&GraphSpec::EdgeList {
            agents: 3,
            edges: vec![(1, 2)],
            clusters: vec![1, 1, 2],
        })
        .unwrap();
        assert_eq!(
            built.warnings,
            vec![GraphWarning::Disconnected { components: 2 }]
        );
    }

    #[test]
    fn random_geometric_deterministic() {
        let spec = GraphSpec::RandomGeometric {
            agents: 35,
            radius: 0.3,
            seed: 9,
            clusters: GeometricClusters::SplitX { threshold: 0.5 },
        };
        let a = build_graph(&spec).unwrap().graph;
        let b = build_graph(&spec).unwrap().graph;
        assert_eq!(a, b);
        assert_eq!(a.len(), 35);
    }

    #[test]
    fn file_round_trip() {
        let g = build_graph(&GraphSpec::RingWithHub {
            ring_size: 6,
            hub_cluster: 1,
            ring_cluster: 2,
            ring_pattern: None,
            ring_edges: true,
        })
        .unwrap()
        .graph;
        let text = g.to_file_string();
        assert_eq!(Graph::parse_file(&text).unwrap(), g);
    }

    #[test]
    fn file_errors_carry_line_numbers() {
        let e = Graph::parse_file("S 2\nC 1 1\nC 2 1\nE 1 3\n").unwrap_err();
        assert!(matches!(e, Error::GraphFile { line: 4, .. }), "{e}");
        let e = Graph::parse_file("# header\nC 1 1\n").unwrap_err();
        assert!(matches!(e, Error::GraphFile { line: 2, .. }), "{e}");
        assert!(Graph::parse_file("S 2\nC 1 1\n").is_err());
        assert!(Graph::parse_file("S 2\nC 1 1\nC 2 1\nE 1 1\n").is_err());
    }
}
