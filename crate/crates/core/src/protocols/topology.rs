//! Labeled party graphs describing distributed entanglement resources.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A party graph: vertices are parties, each edge is one EPR pair. The
/// superdense construction requires the graph to be a tree rooted at the
/// sender, so that every receiver has exactly one path from the sender.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub parties: Vec<String>,
    pub sender: String,
    pub edges: Vec<(String, String)>,
    /// Global squeezing default for all edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Per-edge squeezing overrides, aligned with `edges`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_r: Option<Vec<f64>>,
}

/// Validation outcome; carries failures instead of erroring.
#[derive(Debug, Clone, Serialize)]
pub struct TopologyReport {
    pub n_parties: usize,
    pub n_edges: usize,
    pub connected: bool,
    pub is_tree: bool,
    pub valid: bool,
    /// Path length from the sender per party (party order); `None` when
    /// unreachable.
    pub distances: Vec<Option<usize>>,
    pub issues: Vec<String>,
}

/// The tree rooted at the sender, precomputed for circuit generation and
/// noise predictions.
#[derive(Debug, Clone)]
pub struct RootedTree {
    /// Party indices in breadth-first order from the sender.
    pub bfs_order: Vec<usize>,
    /// Parent edge index per party (None for the sender).
    pub parent_edge: Vec<Option<usize>>,
    /// Child edge indices per party, in edge-list order.
    pub child_edges: Vec<Vec<usize>>,
    /// For each edge, (parent party, child party) after rooting.
    pub oriented: Vec<(usize, usize)>,
    /// Path length from the sender per party.
    pub distances: Vec<usize>,
    /// Edge indices along the path from the sender, per party.
    pub path_edges: Vec<Vec<usize>>,
}

impl Topology {
    pub fn new(
        parties: impl IntoIterator<Item = impl Into<String>>,
        sender: impl Into<String>,
        edges: impl IntoIterator<Item = (impl Into<String>, impl Into<String>)>,
    ) -> Self {
        Topology {
            parties: parties.into_iter().map(Into::into).collect(),
            sender: sender.into(),
            edges: edges.into_iter().map(|(a, b)| (a.into(), b.into())).collect(),
            r: None,
            edge_r: None,
        }
    }

    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json)
            .map_err(|e| Error::Topology(format!("cannot parse topology JSON: {e}")))
    }

    pub fn n_parties(&self) -> usize {
        self.parties.len()
    }

    pub fn party_index(&self, label: &str) -> Option<usize> {
        self.parties.iter().position(|p| p == label)
    }

    /// Effective squeezing of edge `k`: per-edge override, then the
    /// topology-level default, then `fallback`.
    pub fn edge_squeezing(&self, k: usize, fallback: f64) -> f64 {
        if let Some(per_edge) = &self.edge_r {
            if let Some(r) = per_edge.get(k) {
                return *r;
            }
        }
        self.r.unwrap_or(fallback)
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        // party → (neighbor, edge index), in edge-list order
        let mut adj = vec![Vec::new(); self.parties.len()];
        for (k, (a, b)) in self.edges.iter().enumerate() {
            if let (Some(i), Some(j)) = (self.party_index(a), self.party_index(b)) {
                adj[i].push((j, k));
                adj[j].push((i, k));
            }
        }
        adj
    }

    /// Check connectivity, the tree property, and per-party path lengths.
    pub fn validate(&self) -> TopologyReport {
        let n = self.parties.len();
        let mut issues = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for p in &self.parties {
            if !seen.insert(p.clone()) {
                issues.push(format!("duplicate party label {p:?}"));
            }
        }
        if self.party_index(&self.sender).is_none() {
            issues.push(format!("sender {:?} is not among the parties", self.sender));
        }
        let mut seen_edges = std::collections::HashSet::new();
        for (a, b) in &self.edges {
            if a == b {
                issues.push(format!("self-loop on {a:?}"));
            }
            for end in [a, b] {
                if self.party_index(end).is_none() {
                    issues.push(format!("edge endpoint {end:?} is not a party"));
                }
            }
            let key = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
            if !seen_edges.insert(key) {
                issues.push(format!("duplicate edge ({a:?}, {b:?})"));
            }
        }
        if let Some(per_edge) = &self.edge_r {
            if per_edge.len() != self.edges.len() {
                issues.push(format!(
                    "edge_r has {} entries for {} edges",
                    per_edge.len(),
                    self.edges.len()
                ));
            }
        }

        let mut distances = vec![None; n];
        let mut connected = false;
        if issues.is_empty() && n > 0 {
            let adj = self.adjacency();
            let root = self.party_index(&self.sender).unwrap();
            let mut queue = VecDeque::from([root]);
            distances[root] = Some(0);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &adj[u] {
                    if distances[v].is_none() {
                        distances[v] = Some(distances[u].unwrap() + 1);
                        queue.push_back(v);
                    }
                }
            }
            let unreachable: Vec<&String> = self
                .parties
                .iter()
                .zip(&distances)
                .filter(|(_, d)| d.is_none())
                .map(|(p, _)| p)
                .collect();
            connected = unreachable.is_empty();
            if !connected {
                issues.push(format!(
                    "disconnected: parties {unreachable:?} are unreachable from the sender"
                ));
            }
        }
        let is_tree = connected && self.edges.len() + 1 == n;
        if connected && !is_tree {
            issues.push(format!(
                "not a tree: {} parties need exactly {} EPR pairs, got {}",
                n,
                n.saturating_sub(1),
                self.edges.len()
            ));
        }
        TopologyReport {
            n_parties: n,
            n_edges: self.edges.len(),
            connected,
            is_tree,
            valid: issues.is_empty() && is_tree,
            distances,
            issues,
        }
    }

    /// Root the tree at the sender; errors with the offending component
    /// when the graph is not a usable tree.
    pub fn rooted(&self) -> Result<RootedTree> {
        let report = self.validate();
        if !report.valid {
            return Err(Error::Topology(report.issues.join("; ")));
        }
        let n = self.parties.len();
        let adj = self.adjacency();
        let root = self.party_index(&self.sender).unwrap();
        let mut parent_edge = vec![None; n];
        let mut child_edges = vec![Vec::new(); n];
        let mut oriented = vec![(0usize, 0usize); self.edges.len()];
        let mut distances = vec![0usize; n];
        let mut visited = vec![false; n];
        let mut bfs_order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([root]);
        visited[root] = true;
        while let Some(u) = queue.pop_front() {
            bfs_order.push(u);
            for &(v, k) in &adj[u] {
                if !visited[v] {
                    visited[v] = true;
                    parent_edge[v] = Some(k);
                    child_edges[u].push(k);
                    oriented[k] = (u, v);
                    distances[v] = distances[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut path_edges = vec![Vec::new(); n];
        for order in &bfs_order {
            let v = *order;
            if let Some(k) = parent_edge[v] {
                let (parent, _) = oriented[k];
                let mut path = path_edges[parent].clone();
                path.push(k);
                path_edges[v] = path;
            }
        }
        Ok(RootedTree { bfs_order, parent_edge, child_edges, oriented, distances, path_edges })
    }
}

/// Report connectivity, the tree property, and per-party path lengths.
pub fn validate_topology(topology: &Topology) -> TopologyReport {
    topology.validate()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn chain3() -> Topology {
        Topology::new(["A", "B", "C"], "A", [("A", "B"), ("B", "C")])
    }

    pub(crate) fn star3() -> Topology {
        Topology::new(["A", "B", "C"], "A", [("A", "B"), ("A", "C")])
    }

    #[test]
    fn chain_of_three_is_valid_with_increasing_path_lengths() {
        let report = validate_topology(&chain3());
        assert!(report.valid);
        assert_eq!(report.distances, vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn star_of_three_is_valid_with_unit_path_lengths() {
        let report = validate_topology(&star3());
        assert!(report.valid);
        assert_eq!(report.distances, vec![Some(0), Some(1), Some(1)]);
    }

    #[test]
    fn missing_edge_means_disconnected() {
        let t = Topology::new(["A", "B", "C"], "A", [("A", "B")]);
        let report = validate_topology(&t);
        assert!(!report.valid);
        assert!(!report.connected);
        assert!(report.issues.iter().any(|i| i.contains("\"C\"")), "{:?}", report.issues);
        assert!(matches!(t.rooted(), Err(Error::Topology(_))));
    }

    #[test]
    fn cycles_are_rejected() {
        let t = Topology::new(["A", "B", "C"], "A", [("A", "B"), ("B", "C"), ("C", "A")]);
        let report = validate_topology(&t);
        assert!(report.connected && !report.is_tree && !report.valid);
    }

    #[test]
    fn self_loops_duplicates_and_unknown_parties_are_flagged() {
        let t = Topology::new(["A", "B"], "A", [("A", "A")]);
        assert!(!validate_topology(&t).valid);
        let t = Topology::new(["A", "B"], "A", [("A", "B"), ("B", "A")]);
        assert!(!validate_topology(&t).valid);
        let t = Topology::new(["A", "B"], "A", [("A", "Z")]);
        assert!(!validate_topology(&t).valid);
        let t = Topology::new(["A", "B"], "Q", [("A", "B")]);
        assert!(!validate_topology(&t).valid);
    }

    #[test]
    fn rooted_tree_orients_edges_away_from_the_sender() {
        // edges listed child-first still orient correctly
        let t = Topology::new(["A", "B", "C"], "A", [("C", "B"), ("B", "A")]);
        let rooted = t.rooted().unwrap();
        assert_eq!(rooted.oriented[1], (0, 1)); // A → B
        assert_eq!(rooted.oriented[0], (1, 2)); // B → C
        assert_eq!(rooted.distances, vec![0, 1, 2]);
        assert_eq!(rooted.path_edges[2], vec![1, 0]);
    }

    #[test]
    fn json_round_trip() {
        let json = r#"{"parties": ["A", "B", "C"], "sender": "A",
                       "edges": [["A", "B"], ["A", "C"]], "r": 1.0}"#;
        let t = Topology::from_json(json).unwrap();
        assert_eq!(t, Topology { r: Some(1.0), ..star3() });
        assert_eq!(t.edge_squeezing(0, 0.5), 1.0);
        let back = serde_json::to_string(&t).unwrap();
        assert_eq!(Topology::from_json(&back).unwrap(), t);
    }

    #[test]
    fn edge_squeezing_precedence() {
        let mut t = star3();
        assert_eq!(t.edge_squeezing(0, 0.25), 0.25);
        t.r = Some(0.5);
        assert_eq!(t.edge_squeezing(0, 0.25), 0.5);
        t.edge_r = Some(vec![0.9, 0.5]);
        assert_eq!(t.edge_squeezing(0, 0.25), 0.9);
        assert_eq!(t.edge_squeezing(1, 0.25), 0.5);
    }
}
