use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use super::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterferenceModel {
    /// Links sharing an endpoint conflict.
    NodeExclusive,
    /// Links also conflict when an endpoint of one is adjacent to an
    /// endpoint of the other.
    #[default]
    TwoHop,
}

/// Symmetric conflict relation over link ids.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictGraph {
    adj: Vec<FixedBitSet>,
}

impl ConflictGraph {
    pub fn from_pairs(num_links: usize, pairs: &[(usize, usize)]) -> Self {
        let mut adj = vec![FixedBitSet::with_capacity(num_links); num_links];
        for &(a, b) in pairs {
            if a != b {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        Self { adj }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    #[inline]
    pub fn conflicts(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(b)
    }

    pub fn row(&self, a: usize) -> &FixedBitSet {
        &self.adj[a]
    }

    /// Conflicting links of `a` in increasing order.
    pub fn of(&self, a: usize) -> Vec<usize> {
        self.adj[a].ones().collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.len()).all(|a| self.adj[a].ones().all(|b| self.adj[b].contains(a)))
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(k, &a)| set[k + 1..].iter().all(|&b| !self.conflicts(a, b)))
    }
}

pub fn conflict_sets(net: &Network, model: InterferenceModel) -> ConflictGraph {
    let links = net.links();
    let m = links.len();
    let touches = |x: usize, y: usize| match model {
        InterferenceModel::NodeExclusive => x == y,
        InterferenceModel::TwoHop => x == y || net.adjacent(x, y),
    };
    let mut pairs = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            let (la, lb) = (links[a], links[b]);
            let hit = [la.from, la.to]
                .iter()
                .any(|&x| [lb.from, lb.to].iter().any(|&y| touches(x, y)));
            if hit {
                pairs.push((a, b));
            }
        }
    }
    ConflictGraph::from_pairs(m, &pairs)
}
