use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One CFG edge, which is also one coverage feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub id: usize,
    #[serde(default)]
    pub prereqs: Vec<usize>,
    /// Probability that one mutation of an eligible input discovers the edge.
    pub p: f64,
    #[serde(default = "default_time_range")]
    pub time_range: [f64; 2],
    #[serde(default = "default_size_range")]
    pub size_range: [u64; 2],
}

fn default_time_range() -> [f64; 2] {
    [1.0, 10.0]
}

fn default_size_range() -> [u64; 2] {
    [10, 1000]
}

impl Edge {
    pub fn new(id: usize, prereqs: Vec<usize>, p: f64) -> Self {
        Self {
            id,
            prereqs,
            p,
            time_range: default_time_range(),
            size_range: default_size_range(),
        }
    }

    pub fn is_root(&self) -> bool {
        self.prereqs.is_empty()
    }
}

/// Synthetic fuzzing target: a DAG of edges where an edge becomes
/// discoverable once all its prerequisites are covered by the mutated input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Edge>", into = "Vec<Edge>")]
pub struct CfgTarget {
    /// Indexed by edge id.
    edges: Vec<Edge>,
}

impl CfgTarget {
    /// Validate and index `edges`. Ids must be exactly `0..n`, prerequisites
    /// must name existing edges, the prerequisite graph must be acyclic and
    /// have at least one root, and probabilities and ranges must be sane.
    pub fn new(mut edges: Vec<Edge>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidTarget(msg));
        if edges.is_empty() {
            return bad("target has no edges".into());
        }
        edges.sort_by_key(|e| e.id);
        for (i, e) in edges.iter().enumerate() {
            if e.id != i {
                return bad(format!("edge ids must be 0..{} without gaps or duplicates", edges.len()));
            }
            if !(0.0..=1.0).contains(&e.p) {
                return bad(format!("edge {}: probability {} outside [0, 1]", e.id, e.p));
            }
            let [tlo, thi] = e.time_range;
            if !(tlo.is_finite() && thi.is_finite() && 0.0 <= tlo && tlo <= thi) {
                return bad(format!("edge {}: bad time range", e.id));
            }
            if e.size_range[0] > e.size_range[1] {
                return bad(format!("edge {}: bad size range", e.id));
            }
            if let Some(&p) = e.prereqs.iter().find(|&&p| p >= edges.len()) {
                return bad(format!("edge {}: unknown prerequisite {p}", e.id));
            }
        }
        if !edges.iter().any(Edge::is_root) {
            return bad("target has no root edge".into());
        }
        let target = Self { edges };
        target.check_acyclic()?;
        Ok(target)
    }

    // Kahn's algorithm. In an acyclic prerequisite graph every edge is
    // reachable from the roots, so this is the only reachability check.
    fn check_acyclic(&self) -> Result<()> {
        let n = self.edges.len();
        let mut pending: Vec<usize> = self.edges.iter().map(|e| e.prereqs.len()).collect();
        let mut dependents = vec![Vec::new(); n];
        for e in &self.edges {
            for &p in &e.prereqs {
                dependents[p].push(e.id);
            }
        }
        let mut ready: Vec<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = ready.pop() {
            seen += 1;
            for &d in &dependents[i] {
                pending[d] -= 1;
                if pending[d] == 0 {
                    ready.push(d);
                }
            }
        }
        if seen != n {
            return Err(Error::InvalidTarget(format!(
                "prerequisite cycle or unreachable edges ({} of {n} reachable)",
                seen
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Linear chain 0 -> 1 -> ... -> n-1 with edge 0 as the only root.
    pub fn chain(n: usize, p: f64) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|i| Edge::new(i, if i == 0 { vec![] } else { vec![i - 1] }, p))
                .collect(),
        )
    }

    pub fn k_size(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    pub fn roots(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.is_root())
    }
}

impl TryFrom<Vec<Edge>> for CfgTarget {
    type Error = Error;

    fn try_from(edges: Vec<Edge>) -> Result<Self> {
        Self::new(edges)
    }
}

impl From<CfgTarget> for Vec<Edge> {
    fn from(t: CfgTarget) -> Self {
        t.edges
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_target_file_schema() {
        let json = r#"[
            {"id": 1, "prereqs": [0], "p": 0.5, "time_range": [2, 3], "size_range": [5, 6]},
            {"id": 0, "prereqs": [], "p": 1.0}
        ]"#;
        let t = CfgTarget::from_json(json).unwrap();
        assert_eq!(t.k_size(), 2);
        assert_eq!(t.edge(1).time_range, [2.0, 3.0]);
        assert_eq!(t.edge(0).size_range, [10, 1000]);
        assert_eq!(t.roots().count(), 1);
    }

    #[test]
    fn rejects_cycles() {
        let edges = vec![
            Edge::new(0, vec![], 1.0),
            Edge::new(1, vec![2], 1.0),
            Edge::new(2, vec![1], 1.0),
        ];
        let err = CfgTarget::new(edges).unwrap_err();
        assert!(err.to_string().contains("cycle"), "{err}");
    }

    #[test]
    fn rejects_malformed_edges() {
        assert!(CfgTarget::new(vec![]).is_err());
        assert!(CfgTarget::new(vec![Edge::new(1, vec![], 1.0)]).is_err());
        assert!(CfgTarget::new(vec![Edge::new(0, vec![3], 1.0)]).is_err());
        assert!(CfgTarget::new(vec![Edge::new(0, vec![], 1.5)]).is_err());
        assert!(CfgTarget::new(vec![Edge::new(0, vec![0], 1.0)]).is_err());
        let mut e = Edge::new(0, vec![], 1.0);
        e.size_range = [5, 1];
        assert!(CfgTarget::new(vec![e]).is_err());
        assert!(CfgTarget::from_json(r#"[{"id":0,"p":1,"bogus":1}]"#).is_err());
    }

    #[test]
    fn chain_shape() {
        let t = CfgTarget::chain(20, 0.05).unwrap();
        assert_eq!(t.roots().map(|e| e.id).collect::<Vec<_>>(), vec![0]);
        assert_eq!(t.edge(19).prereqs, vec![18]);
    }
}
