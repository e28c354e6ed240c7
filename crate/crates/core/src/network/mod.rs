//! Topology, interference, independent sets, flows and link capacities.

mod capacity;
mod conflict;
mod flows;
mod independent;

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use capacity::{capacity_nonorthogonal, capacity_orthogonal, LinkGains, SinrLayout};
pub use conflict::{conflict_sets, ConflictGraph, InterferenceModel};
pub use flows::{assign_random_flows, Flow, FlowSet};
pub use independent::{
    enumerate_independent_sets, enumerate_maximal_independent_sets, IndependentSetFamily, DEFAULT_FAMILY_CAP,
};

use crate::error::{Error, Result};

/// Directed link `from -> to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Link {
    pub from: usize,
    pub to: usize,
}

/// Physical constants and control bounds shared by every link and node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Hz
    pub bandwidth: f64,
    /// W
    pub noise: f64,
    /// Lower end of the transmit-power range of an active link (W).
    pub p_min: f64,
    pub p_max: f64,
    /// Per-node budget on `E ∫ sum_j P_ij dt` (W s).
    pub node_budget: f64,
    pub r_max: f64,
    pub lambda_max: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            bandwidth: 1e6,
            noise: 0.1,
            p_min: 1.0,
            p_max: 3.0,
            node_budget: 3.0,
            r_max: 10.0,
            lambda_max: 10.0,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("bandwidth", self.bandwidth),
            ("noise", self.noise),
            ("p_max", self.p_max),
            ("node_budget", self.node_budget),
            ("r_max", self.r_max),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidProblem(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.lambda_max.is_finite() && self.lambda_max >= 0.0) {
            return Err(Error::InvalidProblem("lambda_max must be >= 0".into()));
        }
        if !(self.p_min >= 0.0 && self.p_min <= self.p_max) {
            return Err(Error::InvalidProblem("need 0 <= p_min <= p_max".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    num_nodes: usize,
    links: Vec<Link>,
    index: HashMap<Link, usize>,
    neighbors: Vec<Vec<usize>>,
    out_links: Vec<Vec<usize>>,
    in_links: Vec<Vec<usize>>,
    /// Lattice coordinates `(row, col)` for grid topologies.
    coords: Option<Vec<(usize, usize)>>,
    pub params: PhysicalParams,
}

impl Network {
    pub fn from_links(num_nodes: usize, links: Vec<Link>) -> Result<Self> {
        let mut index = HashMap::with_capacity(links.len());
        let mut neighbors = vec![Vec::new(); num_nodes];
        let mut out_links = vec![Vec::new(); num_nodes];
        let mut in_links = vec![Vec::new(); num_nodes];
        for (k, l) in links.iter().enumerate() {
            if l.from >= num_nodes || l.to >= num_nodes {
                return Err(Error::InvalidProblem(format!("link {}->{} uses an unknown node", l.from, l.to)));
            }
            if l.from == l.to {
                return Err(Error::InvalidProblem(format!("self-link at node {}", l.from)));
            }
            if index.insert(*l, k).is_some() {
                return Err(Error::InvalidProblem(format!("duplicate link {}->{}", l.from, l.to)));
            }
            out_links[l.from].push(k);
            in_links[l.to].push(k);
            neighbors[l.from].push(l.to);
            neighbors[l.to].push(l.from);
        }
        for n in &mut neighbors {
            n.sort_unstable();
            n.dedup();
        }
        Ok(Self {
            num_nodes,
            links,
            index,
            neighbors,
            out_links,
            in_links,
            coords: None,
            params: PhysicalParams::default(),
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, k: usize) -> Link {
        self.links[k]
    }

    pub fn link_index(&self, from: usize, to: usize) -> Option<usize> {
        self.index.get(&Link { from, to }).copied()
    }

    /// Nodes sharing a link with `i` in either direction.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    pub fn out_links(&self, i: usize) -> &[usize] {
        &self.out_links[i]
    }

    pub fn in_links(&self, i: usize) -> &[usize] {
        &self.in_links[i]
    }

    pub fn coords(&self) -> Option<&[(usize, usize)]> {
        self.coords.as_deref()
    }

    /// Reads a directed edge list: one `from to` pair per line, `#` comments.
    /// The node count is one more than the largest id seen.
    pub fn load_edge_list(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_edge_list(&text)
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut links = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let ids: Vec<usize> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            if ids.len() != 2 {
                return Err(Error::Parse(format!("line {}: expected two node ids", lineno + 1)));
            }
            links.push(Link {
                from: ids[0],
                to: ids[1],
            });
        }
        let n = links.iter().map(|l| l.from.max(l.to) + 1).max().unwrap_or(0);
        Self::from_links(n, links)
    }
}

/// `rows x cols` lattice with a pair of opposite links on every edge.
/// Node `(r, c)` has id `r * cols + c`.
pub fn build_grid(rows: usize, cols: usize) -> Result<Network> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidProblem("grid needs at least one row and column".into()));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut links = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                links.push(Link { from: id(r, c), to: id(r, c + 1) });
                links.push(Link { from: id(r, c + 1), to: id(r, c) });
            }
            if r + 1 < rows {
                links.push(Link { from: id(r, c), to: id(r + 1, c) });
                links.push(Link { from: id(r + 1, c), to: id(r, c) });
            }
        }
    }
    let mut net = Network::from_links(rows * cols, links)?;
    net.coords = Some((0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).collect());
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        let g = build_grid(1, 2).unwrap();
        assert_eq!((g.num_nodes(), g.num_links()), (2, 2));
        let g = build_grid(2, 2).unwrap();
        assert_eq!((g.num_nodes(), g.num_links()), (4, 8));
        let g = build_grid(4, 4).unwrap();
        assert_eq!((g.num_nodes(), g.num_links()), (16, 48));
        assert_eq!(g.neighbors(5), &[1, 4, 6, 9]);
        assert!(g.link_index(5, 6).is_some() && g.link_index(6, 5).is_some());
        assert!(g.link_index(5, 10).is_none());
    }

    #[test]
    fn edge_list_round_trip() {
        let net = Network::parse_edge_list("# ring\n0 1\n1 2\n2,0\n").unwrap();
        assert_eq!(net.num_nodes(), 3);
        assert_eq!(net.out_links(2), &[2]);
        assert!(Network::parse_edge_list("0 0\n").is_err());
        assert!(Network::parse_edge_list("0 1 2\n").is_err());
        assert!(Network::parse_edge_list("0 1\n0 1\n").is_err());
    }
}
